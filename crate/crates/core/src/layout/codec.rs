use super::BarcodeSpec;
use crate::bits::{self, Bits};
use crate::coding::ReedSolomon;
use crate::error::{invalid_input, Result};

/// Block RS codec bound to a spec.
#[derive(Debug, Clone)]
pub struct SourceCodec {
    rs: ReedSolomon,
    blocks: usize,
}

impl SourceCodec {
    pub fn new(spec: &BarcodeSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            rs: ReedSolomon::new(spec.rs_codeword_bits / 8, spec.rs_message_bits / 8)?,
            blocks: spec.block_count,
        })
    }

    /// Symbol errors correctable per block.
    pub fn t(&self) -> usize {
        self.rs.t()
    }

    pub fn encode(&self, source: &[u8]) -> Result<Bits> {
        let k = self.rs.k() * 8;
        if source.len() != k * self.blocks {
            return Err(invalid_input(format!("source has {} bits, expected {}", source.len(), k * self.blocks)));
        }
        let mut out = Vec::with_capacity(self.rs.n() * 8 * self.blocks);
        for block in source.chunks(k) {
            out.extend(bits::unpack(&self.rs.encode(&bits::pack(block))?));
        }
        Ok(out)
    }

    /// Decode every block; failed blocks yield their uncorrected systematic part.
    pub fn decode(&self, coded: &[u8]) -> Result<(Bits, Vec<bool>)> {
        let n = self.rs.n() * 8;
        if coded.len() != n * self.blocks {
            return Err(invalid_input(format!("coded stream has {} bits, expected {}", coded.len(), n * self.blocks)));
        }
        let mut msg = Vec::with_capacity(self.rs.k() * 8 * self.blocks);
        let mut flags = Vec::with_capacity(self.blocks);
        for block in coded.chunks(n) {
            let mut word = bits::pack(block);
            let failed = self.rs.decode(&mut word).is_none();
            flags.push(failed);
            msg.extend(bits::unpack(&word[..self.rs.k()]));
        }
        Ok((msg, flags))
    }
}

pub fn rs_encode(source: &[u8], spec: &BarcodeSpec) -> Result<Bits> {
    SourceCodec::new(spec)?.encode(source)
}

pub fn rs_decode(coded: &[u8], spec: &BarcodeSpec) -> Result<(Bits, Vec<bool>)> {
    SourceCodec::new(spec)?.decode(coded)
}
