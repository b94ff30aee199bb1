use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{modulate, BarcodeSpec, SymbolStream};
use crate::error::{invalid_input, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Data,
    Header,
    Training1,
    Training2,
}

/// Square grid of module intensities, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleGrid {
    pub side: usize,
    pub intensities: Vec<f64>,
    pub roles: Vec<Role>,
}

impl ModuleGrid {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.intensities[row * self.side + col]
    }

    pub fn count(&self, role: Role) -> usize {
        self.roles.iter().filter(|&&r| r == role).count()
    }
}

/// Role mask plus the module orderings derived from it.
#[derive(Debug, Clone)]
pub struct GridLayout {
    pub side: usize,
    pub roles: Vec<Role>,
    /// Module indices carrying data symbols, in stream order.
    pub data_order: Vec<usize>,
    /// Header and training module indices with their nominal grays.
    pub fixed: Vec<(usize, f64)>,
}

// Plastic constant; its reciprocal powers give a well spread 2D Kronecker sequence.
const PLASTIC: f64 = 1.324_717_957_244_746;

/// Role mask for a spec and layout seed.
///
/// Training2 occupies a centred block, training1 is scattered by a seeded
/// low-discrepancy sequence, and the remaining modules are taken in reverse
/// raster order: first the header, then the data stream.
pub fn layout_roles(spec: &BarcodeSpec, layout_seed: u64) -> Result<Vec<Role>> {
    spec.validate()?;
    let side = spec.side();
    let mut roles: Vec<Option<Role>> = vec![None; side * side];

    let n2 = spec.training2_grays.len();
    if n2 > 0 {
        let w = (n2 as f64).sqrt().ceil() as usize;
        let h = n2.div_ceil(w);
        let (r0, c0) = ((side - h) / 2, (side - w) / 2);
        for j in 0..n2 {
            roles[(r0 + j / w) * side + c0 + j % w] = Some(Role::Training2);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(layout_seed);
    let (u, v): (f64, f64) = (rng.random(), rng.random());
    let (a1, a2) = (1.0 / PLASTIC, 1.0 / (PLASTIC * PLASTIC));
    let mut placed = 0;
    let mut j = 0u64;
    while placed < spec.training1_count {
        let x = (u + j as f64 * a1).fract();
        let y = (v + j as f64 * a2).fract();
        let idx = (y * side as f64) as usize * side + (x * side as f64) as usize;
        if roles[idx].is_none() {
            roles[idx] = Some(Role::Training1);
            placed += 1;
        }
        j += 1;
    }

    let mut header_left = spec.header_modules();
    for idx in (0..side * side).rev() {
        if roles[idx].is_none() {
            roles[idx] = Some(if header_left > 0 {
                header_left -= 1;
                Role::Header
            } else {
                Role::Data
            });
        }
    }
    Ok(roles.into_iter().map(|r| r.expect("every module assigned")).collect())
}

fn header_symbols(spec: &BarcodeSpec) -> Result<SymbolStream> {
    let nbits = spec.header_modules() * spec.bits_per_symbol();
    let mut bits = crate::bits::unpack(&[1, spec.modulation_order as u8, spec.block_count as u8]);
    bits.resize(nbits, 0);
    modulate(&bits, spec)
}

impl GridLayout {
    pub fn new(spec: &BarcodeSpec, layout_seed: u64) -> Result<Self> {
        Self::from_roles(spec, layout_roles(spec, layout_seed)?)
    }

    /// Rebuild orderings from a role mask, checking it against `spec`.
    pub fn from_roles(spec: &BarcodeSpec, roles: Vec<Role>) -> Result<Self> {
        spec.validate()?;
        let side = spec.side();
        if roles.len() != side * side {
            return Err(invalid_input(format!("role mask has {} modules, spec needs {}", roles.len(), side * side)));
        }
        let count = |role| roles.iter().filter(|&&r| r == role).count();
        if count(Role::Data) != spec.data_modules()
            || count(Role::Header) != spec.header_modules()
            || count(Role::Training1) != spec.training1_count
            || count(Role::Training2) != spec.training2_grays.len()
        {
            return Err(invalid_input("role mask counts do not match the barcode layout"));
        }

        let header = header_symbols(spec)?.grays(spec);
        let mut header_iter = header.into_iter();
        let mut t2_iter = spec.training2_grays.iter().copied();
        let mut t2_fwd = Vec::new();
        for (idx, &r) in roles.iter().enumerate() {
            if r == Role::Training2 {
                t2_fwd.push((idx, t2_iter.next().expect("training2 count checked")));
            }
        }

        let mut data_order = Vec::with_capacity(spec.data_modules());
        let mut fixed = Vec::with_capacity(spec.non_data_modules());
        for idx in (0..side * side).rev() {
            match roles[idx] {
                Role::Data => data_order.push(idx),
                Role::Header => fixed.push((idx, header_iter.next().expect("header count checked"))),
                Role::Training1 => fixed.push((idx, spec.training1_gray)),
                Role::Training2 => {
                    let g = t2_fwd.iter().find(|(i, _)| *i == idx).expect("indexed above").1;
                    fixed.push((idx, g));
                }
            }
        }
        Ok(Self { side, roles, data_order, fixed })
    }

    pub fn assemble(&self, data: &SymbolStream, spec: &BarcodeSpec) -> Result<ModuleGrid> {
        if data.len() != self.data_order.len() {
            return Err(invalid_input(format!("{} data symbols, layout holds {}", data.len(), self.data_order.len())));
        }
        let mut intensities = vec![0.0; self.side * self.side];
        for (&idx, &s) in self.data_order.iter().zip(&data.symbols) {
            intensities[idx] = spec.constellation[s as usize];
        }
        for &(idx, g) in &self.fixed {
            intensities[idx] = g;
        }
        Ok(ModuleGrid { side: self.side, intensities, roles: self.roles.clone() })
    }

    /// Data intensities in stream order and `(nominal, observed)` pairs of
    /// header and training modules.
    pub fn disassemble(&self, grid: &ModuleGrid) -> Result<Disassembled> {
        if grid.side != self.side || grid.roles != self.roles {
            return Err(invalid_input("grid role mask differs from layout"));
        }
        let data = self.data_order.iter().map(|&i| grid.intensities[i]).collect();
        let obs = self.fixed.iter().map(|&(i, g)| (g, grid.intensities[i])).collect();
        Ok((data, obs))
    }
}

/// Data intensities in stream order plus `(nominal, observed)` fixed modules.
pub type Disassembled = (Vec<f64>, Vec<(f64, f64)>);

pub fn assemble_grid(data: &SymbolStream, spec: &BarcodeSpec, layout_seed: u64) -> Result<ModuleGrid> {
    let expected = spec.data_modules();
    if data.len() != expected {
        return Err(invalid_input(format!("{} data symbols, expected {expected}", data.len())));
    }
    GridLayout::new(spec, layout_seed)?.assemble(data, spec)
}

pub fn disassemble_grid(grid: &ModuleGrid, spec: &BarcodeSpec) -> Result<Disassembled> {
    GridLayout::from_roles(spec, grid.roles.clone())?.disassemble(grid)
}
