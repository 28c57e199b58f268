use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::BitstreamError;

/// Bytes in a TLV record header: `u(8)` type + `u(32)` length.
pub const TLV_HEADER_LEN: usize = 5;

/// One type-length-value record of an encapsulated G-PCC stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TlvUnit {
    pub unit_type: u8,
    pub payload_length: u32,
    pub payload: Vec<u8>,
    /// Byte offset of the record header within the stream.
    pub stream_offset: usize,
}

impl TlvUnit {
    /// Builds a unit whose length field matches the payload. The offset is
    /// meaningful only for units returned by [`read_tlv_units`].
    pub fn new(unit_type: u8, payload: Vec<u8>) -> Self {
        let payload_length =
            u32::try_from(payload.len()).expect("TLV payload longer than u32::MAX bytes");
        Self {
            unit_type,
            payload_length,
            payload,
            stream_offset: 0,
        }
    }

    pub fn framed_len(&self) -> usize {
        TLV_HEADER_LEN + self.payload.len()
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        out.push(self.unit_type);
        out.extend_from_slice(&self.payload_length.to_be_bytes());
        out.extend_from_slice(&self.payload);
    }
}

/// Splits a stream into its TLV records, in stream order.
pub fn read_tlv_units(stream: &[u8]) -> Result<Vec<TlvUnit>, BitstreamError> {
    if stream.is_empty() {
        return Err(BitstreamError::EmptyStream);
    }
    let mut units = Vec::new();
    let mut pos = 0usize;
    while pos < stream.len() {
        let rest = &stream[pos..];
        if rest.len() < TLV_HEADER_LEN {
            return Err(BitstreamError::TruncatedUnit { offset: pos });
        }
        let unit_type = rest[0];
        let payload_length = u32::from_be_bytes([rest[1], rest[2], rest[3], rest[4]]);
        let end = TLV_HEADER_LEN
            .checked_add(payload_length as usize)
            .filter(|&end| end <= rest.len())
            .ok_or(BitstreamError::TruncatedUnit { offset: pos })?;
        units.push(TlvUnit {
            unit_type,
            payload_length,
            payload: rest[TLV_HEADER_LEN..end].to_vec(),
            stream_offset: pos,
        });
        pos += end;
    }
    Ok(units)
}

/// Serializes units back into a TLV stream.
pub fn write_tlv_units(units: &[TlvUnit]) -> Vec<u8> {
    let mut out = Vec::with_capacity(units.iter().map(TlvUnit::framed_len).sum());
    for unit in units {
        unit.write_to(&mut out);
    }
    out
}

/// Role of a TLV unit type in the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    Sps,
    Gps,
    Aps,
    GeometryData,
    AttributeData,
    Other,
}

/// Mapping from `unit_type` to [`UnitKind`]. Unmapped types are `Other`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TypeMap(pub BTreeMap<u8, UnitKind>);

impl TypeMap {
    /// Payload types as numbered by the TMC13 reference software.
    pub fn tmc13() -> Self {
        Self(BTreeMap::from([
            (0, UnitKind::Sps),
            (1, UnitKind::Gps),
            (2, UnitKind::GeometryData),
            (3, UnitKind::Aps),
            (4, UnitKind::AttributeData),
        ]))
    }

    pub fn kind(&self, unit_type: u8) -> UnitKind {
        self.0.get(&unit_type).copied().unwrap_or(UnitKind::Other)
    }

    /// First unit type mapped to `kind`, if any.
    pub fn type_of(&self, kind: UnitKind) -> Option<u8> {
        self.0.iter().find_map(|(&t, &k)| (k == kind).then_some(t))
    }
}

impl Default for TypeMap {
    fn default() -> Self {
        Self::tmc13()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSummary {
    /// `unit_type -> (count, total payload bytes)`.
    pub units_by_type: BTreeMap<u8, (u64, u64)>,
    pub attribute_payload_bits: u64,
    pub geometry_payload_bits: u64,
    /// Units whose type is not in the type map.
    pub other_units: u64,
}

pub fn summarize_stream(units: &[TlvUnit], type_map: &TypeMap) -> StreamSummary {
    let mut summary = StreamSummary::default();
    for unit in units {
        let bytes = u64::from(unit.payload_length);
        let entry = summary.units_by_type.entry(unit.unit_type).or_default();
        entry.0 += 1;
        entry.1 += bytes;
        match type_map.kind(unit.unit_type) {
            UnitKind::AttributeData => summary.attribute_payload_bits += 8 * bytes,
            UnitKind::GeometryData => summary.geometry_payload_bits += 8 * bytes,
            UnitKind::Other => summary.other_units += 1,
            _ => {}
        }
    }
    summary
}
