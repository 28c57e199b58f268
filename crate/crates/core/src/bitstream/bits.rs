use super::BitstreamError;

/// MSB-first bit reader over a byte slice.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    /// Current position in bits.
    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.data.len() * 8 - self.pos
    }

    fn exhausted(&self) -> BitstreamError {
        BitstreamError::BitstreamExhausted {
            field: String::new(),
            bit: self.pos,
        }
    }

    pub fn read_bit(&mut self) -> Result<bool, BitstreamError> {
        let byte = *self
            .data
            .get(self.pos / 8)
            .ok_or_else(|| self.exhausted())?;
        let bit = (byte >> (7 - (self.pos % 8))) & 1;
        self.pos += 1;
        Ok(bit == 1)
    }

    /// Reads `n <= 64` bits as an unsigned integer.
    pub fn read_bits(&mut self, n: u32) -> Result<u64, BitstreamError> {
        assert!(n <= 64, "cannot read {n} bits into u64");
        if (n as usize) > self.remaining() {
            return Err(self.exhausted());
        }
        let mut value = 0u64;
        for _ in 0..n {
            value = (value << 1) | u64::from(self.read_bit()?);
        }
        Ok(value)
    }

    /// Unsigned exp-Golomb, `ue(v)`.
    pub fn read_ue(&mut self) -> Result<u64, BitstreamError> {
        let start = self.pos;
        let mut leading_zeros = 0u32;
        while !self.read_bit()? {
            leading_zeros += 1;
            if leading_zeros >= 32 {
                return Err(BitstreamError::MalformedExpGolomb { bit: start });
            }
        }
        let suffix = self.read_bits(leading_zeros)?;
        Ok((1u64 << leading_zeros) - 1 + suffix)
    }

    /// Signed exp-Golomb, `se(v)`: codes 1, 2, 3, 4 map to 1, -1, 2, -2.
    pub fn read_se(&mut self) -> Result<i64, BitstreamError> {
        let k = self.read_ue()? as i64;
        Ok(if k % 2 == 1 { (k + 1) / 2 } else { -(k / 2) })
    }
}

/// MSB-first bit writer; the final byte is zero-padded.
#[derive(Debug, Clone, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bits: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit_len(&self) -> usize {
        self.bits
    }

    pub fn write_bit(&mut self, bit: bool) {
        if self.bits.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.last_mut().expect("byte pushed above");
            *last |= 1 << (7 - (self.bits % 8));
        }
        self.bits += 1;
    }

    pub fn write_bits(&mut self, value: u64, n: u32) {
        assert!(n <= 64);
        for i in (0..n).rev() {
            self.write_bit((value >> i) & 1 == 1);
        }
    }

    /// Writes `ue(v)`; `value` must be at most `2^32 - 2`.
    pub fn write_ue(&mut self, value: u64) {
        assert!(
            value <= (1u64 << 32) - 2,
            "ue(v) value {value} out of range"
        );
        let code = value + 1;
        let len = 64 - code.leading_zeros();
        self.write_bits(0, len - 1);
        self.write_bits(code, len);
    }

    pub fn write_se(&mut self, value: i64) {
        let k = if value > 0 {
            2 * value as u64 - 1
        } else {
            2 * value.unsigned_abs()
        };
        self.write_ue(k);
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}
