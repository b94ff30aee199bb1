use serde::{Deserialize, Serialize};

use crate::error::{invalid_config, Result};

/// Table from constellation index to the bit pattern it carries.
///
/// Entry `i` holds the `log2(M)`-bit pattern (MSB first) of constellation
/// point `x_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitMap {
    table: Vec<u16>,
}

impl BitMap {
    /// Reflected binary Gray code: neighbours differ in one bit.
    pub fn gray(m: usize) -> Self {
        Self { table: (0..m as u16).map(|i| i ^ (i >> 1)).collect() }
    }

    pub fn natural(m: usize) -> Self {
        Self { table: (0..m as u16).collect() }
    }

    /// Custom table; must be a permutation of `0..M`.
    pub fn from_table(table: Vec<u16>) -> Result<Self> {
        let map = Self { table };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.table.len();
        let mut seen = vec![false; m];
        for &p in &self.table {
            let p = p as usize;
            if p >= m || seen[p] {
                return Err(invalid_config("bit map is not a permutation"));
            }
            seen[p] = true;
        }
        Ok(())
    }

    pub fn pattern(&self, symbol: usize) -> u16 {
        self.table[symbol]
    }

    pub fn symbol(&self, pattern: u16) -> usize {
        self.table.iter().position(|&p| p == pattern).expect("pattern within bit map range")
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

/// Static geometry and code parameters of a barcode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarcodeSpec {
    /// Modulation order M.
    pub modulation_order: usize,
    /// RS block count N.
    pub block_count: usize,
    /// Codeword bits per block, n.
    pub rs_codeword_bits: usize,
    /// Message bits per block, k.
    pub rs_message_bits: usize,
    /// Header plus training bits, L_h.
    pub header_training_bits: usize,
    pub constellation: Vec<f64>,
    /// theta_0 .. theta_M.
    pub thresholds: Vec<f64>,
    pub bit_map: BitMap,
    pub training1_count: usize,
    pub training1_gray: f64,
    pub training2_grays: Vec<f64>,
}

impl Default for BarcodeSpec {
    /// Four-level barcode: N = 2 blocks of RS(255, 55), 47 x 47 modules.
    fn default() -> Self {
        Self {
            modulation_order: 4,
            block_count: 2,
            rs_codeword_bits: 2040,
            rs_message_bits: 440,
            header_training_bits: 338,
            constellation: vec![40.0, 100.0, 160.0, 220.0],
            thresholds: vec![0.0, 70.0, 130.0, 190.0, 255.0],
            bit_map: BitMap::gray(4),
            training1_count: 100,
            training1_gray: 130.0,
            training2_grays: vec![30.0, 50.0, 70.0, 100.0, 160.0, 180.0, 200.0, 220.0],
        }
    }
}

impl BarcodeSpec {
    /// Binary variant carrying the same source code with two gray levels,
    /// one bit per module, on a 65 x 65 grid.
    pub fn binary() -> Self {
        Self {
            modulation_order: 2,
            header_training_bits: 145,
            constellation: vec![40.0, 220.0],
            thresholds: vec![0.0, 130.0, 255.0],
            bit_map: BitMap::gray(2),
            ..Self::default()
        }
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.modulation_order.trailing_zeros() as usize
    }

    /// L_c = N k.
    pub fn source_bits(&self) -> usize {
        self.block_count * self.rs_message_bits
    }

    /// L_s = N n.
    pub fn coded_bits(&self) -> usize {
        self.block_count * self.rs_codeword_bits
    }

    /// L_t = L_s + L_h.
    pub fn total_bits(&self) -> usize {
        self.coded_bits() + self.header_training_bits
    }

    pub fn data_modules(&self) -> usize {
        self.coded_bits() / self.bits_per_symbol()
    }

    pub fn non_data_modules(&self) -> usize {
        self.header_training_bits / self.bits_per_symbol()
    }

    pub fn header_modules(&self) -> usize {
        self.non_data_modules() - self.training1_count - self.training2_grays.len()
    }

    pub fn side(&self) -> usize {
        let modules = self.total_bits() / self.bits_per_symbol();
        (modules as f64).sqrt().round() as usize
    }

    /// Bit ranges `[b n + k, (b + 1) n)` holding RS parity.
    pub fn parity_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let (n, k) = (self.rs_codeword_bits, self.rs_message_bits);
        (0..self.block_count).map(|b| b * n + k..(b + 1) * n).collect()
    }

    pub fn parity_bits(&self) -> usize {
        self.block_count * (self.rs_codeword_bits - self.rs_message_bits)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.modulation_order;
        if m < 2 || !m.is_power_of_two() {
            return Err(invalid_config(format!("modulation order {m} is not a power of two")));
        }
        if self.constellation.len() != m || self.thresholds.len() != m + 1 {
            return Err(invalid_config("constellation/threshold count does not match M"));
        }
        if self.bit_map.len() != m {
            return Err(invalid_config("bit map size does not match M"));
        }
        self.bit_map.validate()?;
        let th = &self.thresholds;
        if th[0] != 0.0 || th[m] != 255.0 || th.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid_config("thresholds must rise strictly from 0 to 255"));
        }
        for (i, &x) in self.constellation.iter().enumerate() {
            if !(th[i] < x && x < th[i + 1]) {
                return Err(invalid_config(format!("constellation point {x} outside its cell")));
            }
        }
        let (n, k) = (self.rs_codeword_bits, self.rs_message_bits);
        if n % 8 != 0 || k % 8 != 0 || k == 0 || k >= n || n / 8 > 255 {
            return Err(invalid_config(format!("RS bit lengths n={n}, k={k} are not byte aligned")));
        }
        if self.block_count == 0 {
            return Err(invalid_config("block count must be positive"));
        }
        let bps = self.bits_per_symbol();
        if !self.coded_bits().is_multiple_of(bps) || !self.header_training_bits.is_multiple_of(bps) {
            return Err(invalid_config("bit counts not divisible by log2(M)"));
        }
        let modules = self.total_bits() / bps;
        let side = self.side();
        if side * side != modules {
            return Err(invalid_config(format!("{modules} modules do not form a square grid")));
        }
        if self.training1_count + self.training2_grays.len() > self.non_data_modules() {
            return Err(invalid_config("training symbols exceed the header/training budget"));
        }
        Ok(())
    }
}
