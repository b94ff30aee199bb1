use serde::{Deserialize, Serialize};

use super::BarcodeSpec;
use crate::bits::Bits;
use crate::error::{invalid_input, Result};

/// Sequence of constellation indices. Index `i` (0-based) denotes gray `x_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolStream {
    pub symbols: Vec<u8>,
}

impl SymbolStream {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Bit view under the barcode's bit map.
    pub fn to_bits(&self, spec: &BarcodeSpec) -> Bits {
        let bps = spec.bits_per_symbol();
        let mut out = Vec::with_capacity(self.symbols.len() * bps);
        for &s in &self.symbols {
            let p = spec.bit_map.pattern(s as usize);
            out.extend((0..bps).rev().map(|i| ((p >> i) & 1) as u8));
        }
        out
    }

    /// Nominal gray of each symbol.
    pub fn grays(&self, spec: &BarcodeSpec) -> Vec<f64> {
        self.symbols.iter().map(|&s| spec.constellation[s as usize]).collect()
    }
}

pub fn modulate(bits: &[u8], spec: &BarcodeSpec) -> Result<SymbolStream> {
    let bps = spec.bits_per_symbol();
    if !bits.len().is_multiple_of(bps) {
        return Err(invalid_input(format!("{} bits not divisible by {bps}", bits.len())));
    }
    let symbols = bits
        .chunks(bps)
        .map(|c| {
            let p = c.iter().fold(0u16, |acc, &b| (acc << 1) | (b & 1) as u16);
            spec.bit_map.symbol(p) as u8
        })
        .collect();
    Ok(SymbolStream { symbols })
}

/// Decision cell of one gray value: `theta_{i-1} <= v < theta_i`, with 255 in the top cell.
pub fn demodulate_value(v: f64, spec: &BarcodeSpec) -> Result<usize> {
    if !(0.0..=255.0).contains(&v) {
        return Err(invalid_input(format!("gray value {v} outside [0, 255]")));
    }
    let m = spec.modulation_order;
    let inner = &spec.thresholds[1..m];
    Ok(inner.partition_point(|&th| th <= v))
}

pub fn demodulate(grays: &[f64], spec: &BarcodeSpec) -> Result<SymbolStream> {
    let symbols = grays.iter().map(|&v| demodulate_value(v, spec).map(|s| s as u8)).collect::<Result<_>>()?;
    Ok(SymbolStream { symbols })
}
