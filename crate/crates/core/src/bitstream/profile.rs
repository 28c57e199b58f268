use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::bits::{BitReader, BitWriter};
use super::tlv::{write_tlv_units, TlvUnit, TypeMap, UnitKind};
use super::BitstreamError;

const TMC13_V23: &str = include_str!("../../data/tmc13-v23.json");

/// How a syntax element is coded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coding {
    /// Fixed-width unsigned, `u(n)`.
    U(u32),
    /// Unsigned exp-Golomb, `ue(v)`.
    Ue,
    /// Signed exp-Golomb, `se(v)`.
    Se,
    /// One-bit flag.
    Flag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Comparison::Eq => lhs == rhs,
            Comparison::Ne => lhs != rhs,
            Comparison::Lt => lhs < rhs,
            Comparison::Le => lhs <= rhs,
            Comparison::Gt => lhs > rhs,
            Comparison::Ge => lhs >= rhs,
        }
    }
}

/// `field <op> value`, evaluated on already-decoded values of the same unit.
/// A condition on a field that was itself absent is false.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresenceCondition {
    pub field: String,
    pub op: Comparison,
    pub value: i64,
}

impl PresenceCondition {
    fn holds(&self, decoded: &BTreeMap<String, i64>) -> bool {
        decoded
            .get(&self.field)
            .is_some_and(|&v| self.op.holds(v, self.value))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldRole {
    Tqp,
    Tnsl,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub name: String,
    pub coding: Coding,
    /// TLV unit type carrying this field.
    pub target: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<PresenceCondition>,
    /// Added to the coded value, e.g. `2` for a `_minus2` element.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub offset: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<FieldRole>,
    /// Offset-corrected value [`StreamBuilder`] writes when none is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<i64>,
}

fn is_zero(v: &i64) -> bool {
    *v == 0
}

/// Data-driven description of where the model's fields live in a stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntaxDescriptorProfile {
    pub profile_name: String,
    #[serde(default)]
    pub unit_types: TypeMap,
    /// Fields in bitstream order within each target unit.
    pub fields: Vec<FieldDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl SyntaxDescriptorProfile {
    /// Parses and validates a JSON profile document.
    pub fn from_json(text: &str) -> Result<Self, BitstreamError> {
        let profile: Self = serde_json::from_str(text)
            .map_err(|e| BitstreamError::InvalidProfile(e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    /// Profiles compiled into the crate, by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "tmc13-v23" => Some(Self::from_json(TMC13_V23).expect("shipped profile is valid")),
            _ => None,
        }
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["tmc13-v23"]
    }

    pub fn validate(&self) -> Result<(), BitstreamError> {
        let invalid = |msg: String| Err(BitstreamError::InvalidProfile(msg));
        let mut seen: HashSet<(u8, &str)> = HashSet::new();
        let mut roles: BTreeMap<FieldRole, usize> = BTreeMap::new();
        for field in &self.fields {
            if let Coding::U(width) = field.coding {
                if !(1..=32).contains(&width) {
                    return invalid(format!("field `{}` has width {width}", field.name));
                }
            }
            if let Some(cond) = &field.condition {
                if !seen.contains(&(field.target, cond.field.as_str())) {
                    return invalid(format!(
                        "condition of `{}` references `{}`, which is not an earlier field of unit type {}",
                        field.name, cond.field, field.target
                    ));
                }
            }
            if !seen.insert((field.target, field.name.as_str())) {
                return invalid(format!("duplicate field `{}`", field.name));
            }
            if let Some(role) = field.role {
                *roles.entry(role).or_default() += 1;
            }
        }
        for role in [FieldRole::Tqp, FieldRole::Tnsl] {
            let n = roles.get(&role).copied().unwrap_or(0);
            if n != 1 {
                return invalid(format!("{n} descriptors carry role {role:?}, expected 1"));
            }
        }
        Ok(())
    }

    pub fn role_field(&self, role: FieldRole) -> &FieldDescriptor {
        self.fields
            .iter()
            .find(|f| f.role == Some(role))
            .expect("validated profile has one descriptor per role")
    }

    fn targets(&self) -> BTreeSet<u8> {
        self.fields.iter().map(|f| f.target).collect()
    }
}

/// Walks the descriptors targeting `unit.unit_type` over its payload.
///
/// Values are stored after offset correction; absent fields (false
/// condition) are not in the map.
pub fn extract_syntax_fields(
    unit: &TlvUnit,
    profile: &SyntaxDescriptorProfile,
) -> Result<BTreeMap<String, i64>, BitstreamError> {
    let mut descriptors = profile
        .fields
        .iter()
        .filter(|f| f.target == unit.unit_type)
        .peekable();
    if descriptors.peek().is_none() {
        return Err(BitstreamError::ProfileMismatch {
            profile: profile.profile_name.clone(),
            unit_type: unit.unit_type,
        });
    }
    let mut reader = BitReader::new(&unit.payload);
    let mut decoded = BTreeMap::new();
    for field in descriptors {
        if let Some(cond) = &field.condition {
            if !cond.holds(&decoded) {
                continue;
            }
        }
        let raw = match field.coding {
            Coding::U(width) => reader.read_bits(width).map(|v| v as i64),
            Coding::Ue => reader.read_ue().map(|v| v as i64),
            Coding::Se => reader.read_se(),
            Coding::Flag => reader.read_bit().map(i64::from),
        }
        .map_err(|e| match e {
            BitstreamError::BitstreamExhausted { bit, .. } => BitstreamError::BitstreamExhausted {
                field: field.name.clone(),
                bit,
            },
            other => other,
        })?;
        decoded.insert(field.name.clone(), raw + field.offset);
    }
    Ok(decoded)
}

/// Synthesizes TLV streams laid out according to a profile. Used for test
/// fixtures and benchmarks; unspecified fields take the descriptor's
/// `default`, else a coded zero.
#[derive(Debug, Clone)]
pub struct StreamBuilder<'p> {
    profile: &'p SyntaxDescriptorProfile,
    values: BTreeMap<String, i64>,
    geometry_payloads: Vec<Vec<u8>>,
    attribute_payloads: Vec<Vec<u8>>,
    extra_units: Vec<TlvUnit>,
}

impl<'p> StreamBuilder<'p> {
    pub fn new(profile: &'p SyntaxDescriptorProfile) -> Self {
        Self {
            profile,
            values: BTreeMap::new(),
            geometry_payloads: Vec::new(),
            attribute_payloads: Vec::new(),
            extra_units: Vec::new(),
        }
    }

    /// Sets a field by name, as the offset-corrected value.
    ///
    /// [`build`](Self::build) panics if a value cannot be coded, e.g. one
    /// below the field's offset under `ue(v)`.
    pub fn field(mut self, name: &str, value: i64) -> Self {
        self.values.insert(name.to_owned(), value);
        self
    }

    pub fn tqp(self, tqp: i64) -> Self {
        let name = self.profile.role_field(FieldRole::Tqp).name.clone();
        self.field(&name, tqp)
    }

    pub fn tnsl(self, tnsl: i64) -> Self {
        let name = self.profile.role_field(FieldRole::Tnsl).name.clone();
        self.field(&name, tnsl)
    }

    pub fn geometry_data(mut self, payload: Vec<u8>) -> Self {
        self.geometry_payloads.push(payload);
        self
    }

    pub fn attribute_data(mut self, payload: Vec<u8>) -> Self {
        self.attribute_payloads.push(payload);
        self
    }

    /// Appends an arbitrary unit after the data units.
    pub fn unit(mut self, unit: TlvUnit) -> Self {
        self.extra_units.push(unit);
        self
    }

    pub fn build_units(&self) -> Vec<TlvUnit> {
        let mut units = Vec::new();
        for target in self.profile.targets() {
            let mut writer = BitWriter::new();
            let mut written = BTreeMap::new();
            for field in self.profile.fields.iter().filter(|f| f.target == target) {
                if let Some(cond) = &field.condition {
                    if !cond.holds(&written) {
                        continue;
                    }
                }
                let value = self
                    .values
                    .get(&field.name)
                    .copied()
                    .or(field.default)
                    .unwrap_or(field.offset);
                let raw = value - field.offset;
                match field.coding {
                    Coding::U(width) => writer.write_bits(raw as u64, width),
                    Coding::Ue => writer.write_ue(raw as u64),
                    Coding::Se => writer.write_se(raw),
                    Coding::Flag => writer.write_bit(raw != 0),
                }
                written.insert(field.name.clone(), value);
            }
            units.push(TlvUnit::new(target, writer.into_bytes()));
        }
        let types = &self.profile.unit_types;
        let geometry = types.type_of(UnitKind::GeometryData).unwrap_or(2);
        let attribute = types.type_of(UnitKind::AttributeData).unwrap_or(4);
        units.extend(
            self.geometry_payloads
                .iter()
                .map(|p| TlvUnit::new(geometry, p.clone())),
        );
        units.extend(
            self.attribute_payloads
                .iter()
                .map(|p| TlvUnit::new(attribute, p.clone())),
        );
        units.extend(self.extra_units.iter().cloned());
        units
    }

    pub fn build(&self) -> Vec<u8> {
        write_tlv_units(&self.build_units())
    }
}
