//! Print-scan channel simulation: GGD module noise for legal and copy
//! channels, synthesized-copy attacks, occlusion, and end-to-end trials.

mod batch;
mod pipeline;

pub use batch::{
    batch_trials, summarize, trial_seed, write_trials_csv, BatchConfig, BatchResult, BatchSummary, ChannelModel,
};
pub use pipeline::{
    run_dc_attack, run_legal_trial, run_sc_attack, AttackConfig, AttackMode, BerReport, Channel, Pipeline, Reception,
    ScProfiles, Transmission,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, Error, Result};
use crate::ggd::{ConstellationProfile, GgdParams, GgdSampler};
use crate::layout::ModuleGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelKind {
    /// Single print-and-scan: the legal path.
    LegalSps,
    /// Double print-and-scan: a copy.
    IllegalDps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub kind: ChannelKind,
    pub profile: ConstellationProfile<f64>,
}

impl ChannelProfile {
    pub fn legal(profile: ConstellationProfile<f64>) -> Self {
        Self { kind: ChannelKind::LegalSps, profile }
    }

    pub fn illegal(profile: ConstellationProfile<f64>) -> Self {
        Self { kind: ChannelKind::IllegalDps, profile }
    }

    /// Legal variance must sit strictly below the copy variance at every point.
    pub fn check_ordering(legal: &ChannelProfile, illegal: &ChannelProfile) -> Result<()> {
        for r in &legal.profile.rows {
            let other = illegal
                .profile
                .params_for(r.x)
                .ok_or_else(|| Error::InvalidProfile(format!("{} lacks gray {}", illegal.profile.provenance, r.x)))?;
            if r.sigma2 >= other.sigma2 {
                return Err(Error::InvalidProfile(format!(
                    "legal variance {} at gray {} not below copy variance {}",
                    r.sigma2, r.x, other.sigma2
                )));
            }
        }
        Ok(())
    }
}

/// Per-point samplers plus the cells used to attribute off-constellation grays.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    points: Vec<f64>,
    /// Mean shift mu_i - x_i of each point.
    bias: Vec<f64>,
    samplers: Vec<GgdSampler>,
    cells: Vec<(f64, f64)>,
}

impl NoiseModel {
    pub(crate) fn new(profile: &ConstellationProfile<f64>) -> Result<Self> {
        profile.validate()?;
        Self::from_params(&profile.points(), &profile.rows.iter().map(|r| r.params()).collect::<Vec<_>>())
    }

    pub(crate) fn from_params(points: &[f64], params: &[GgdParams<f64>]) -> Result<Self> {
        let samplers = params.iter().map(GgdSampler::new).collect::<Result<Vec<_>>>()?;
        let bias = points.iter().zip(params).map(|(x, p)| p.mu - x).collect();
        let mut edges = vec![0.0];
        edges.extend(points.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        edges.push(255.0);
        let cells = edges.windows(2).map(|w| (w[0], w[1])).collect();
        Ok(Self { points: points.to_vec(), bias, samplers, cells })
    }

    fn nearest(&self, v: f64) -> usize {
        let mut best = 0;
        for (i, &x) in self.points.iter().enumerate() {
            if (v - x).abs() < (v - self.points[best]).abs() {
                best = i;
            }
        }
        best
    }

    /// Point whose parameters govern nominal gray `v`, if `v` lies within half
    /// a decision cell of it.
    fn attribute(&self, v: f64) -> Result<usize> {
        let i = self.nearest(v);
        let (lo, hi) = self.cells[i];
        if (v - self.points[i]).abs() <= 0.5 * (hi - lo) + 1e-9 {
            Ok(i)
        } else {
            Err(Error::InvalidProfile(format!("gray {v} is not attributable to a constellation point")))
        }
    }

    pub(crate) fn perturb<R: Rng + ?Sized>(&self, v: f64, i: usize, rng: &mut R) -> f64 {
        (v + self.bias[i] + self.samplers[i].sample_offset(rng)).clamp(0.0, 255.0)
    }

    /// Apply noise of the nearest point without the half-cell check.
    pub(crate) fn perturb_nearest<R: Rng + ?Sized>(&self, v: f64, rng: &mut R) -> f64 {
        self.perturb(v, self.nearest(v), rng)
    }

    /// Apply noise to a whole grid, one independent draw per module.
    pub(crate) fn apply<R: Rng + ?Sized>(&self, grid: &ModuleGrid, rng: &mut R) -> Result<ModuleGrid> {
        let idx = grid.intensities.iter().map(|&v| self.attribute(v)).collect::<Result<Vec<_>>>()?;
        let intensities = grid.intensities.iter().zip(idx).map(|(&v, i)| self.perturb(v, i, rng)).collect();
        Ok(ModuleGrid { side: grid.side, intensities, roles: grid.roles.clone() })
    }
}

/// Replace every module with an independent draw from the law of its
/// nominal constellation point, clamped to [0, 255]. Header and training
/// modules use the parameters of the nearest point, shifted to their own
/// nominal gray.
pub fn apply_channel<R: Rng + ?Sized>(grid: &ModuleGrid, ch: &ChannelProfile, rng: &mut R) -> Result<ModuleGrid> {
    NoiseModel::new(&ch.profile)?.apply(grid, rng)
}

/// Rectangle of modules overwritten after capture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Occlusion {
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub row0: usize,
    #[serde(default)]
    pub col0: usize,
    #[serde(default)]
    pub fill: f64,
}

impl Occlusion {
    /// Top-left `rows x cols` block filled with black.
    pub fn top_left(rows: usize, cols: usize) -> Self {
        Self { rows, cols, row0: 0, col0: 0, fill: 0.0 }
    }

    pub fn apply(&self, grid: &ModuleGrid) -> Result<ModuleGrid> {
        if self.row0 + self.rows > grid.side || self.col0 + self.cols > grid.side {
            return Err(invalid_input(format!(
                "occlusion {}x{} at ({}, {}) exceeds {}x{} grid",
                self.rows, self.cols, self.row0, self.col0, grid.side, grid.side
            )));
        }
        if !(0.0..=255.0).contains(&self.fill) {
            return Err(invalid_input(format!("fill gray {} outside [0, 255]", self.fill)));
        }
        let mut out = grid.clone();
        for r in self.row0..self.row0 + self.rows {
            for c in self.col0..self.col0 + self.cols {
                out.intensities[r * grid.side + c] = self.fill;
            }
        }
        Ok(out)
    }
}

/// Overwrite the top-left `a x b` modules with `fill`; roles are kept.
pub fn occlude(grid: &ModuleGrid, a: usize, b: usize, fill: f64) -> Result<ModuleGrid> {
    Occlusion { fill, ..Occlusion::top_left(a, b) }.apply(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{assemble_grid, BarcodeSpec, SymbolStream};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> ModuleGrid {
        let spec = BarcodeSpec::default();
        let s = SymbolStream { symbols: (0..2040).map(|i| (i % 4) as u8).collect() };
        assemble_grid(&s, &spec, 1).unwrap()
    }

    #[test]
    fn noiseless_limit() {
        let g = grid();
        let p = ConstellationProfile::uniform("tiny", &[40.0, 100.0, 160.0, 220.0], 1e-6, 2.0).unwrap();
        let out = apply_channel(&g, &ChannelProfile::legal(p), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for (a, b) in g.intensities.iter().zip(&out.intensities) {
            assert!((a - b).abs() < 0.02);
        }
    }

    #[test]
    fn unattributable_gray_rejected() {
        let mut g = grid();
        g.intensities[0] = 0.0;
        let p = ConstellationProfile::uniform("u", &[40.0, 100.0, 160.0, 220.0], 25.0, 2.0).unwrap();
        assert!(apply_channel(&g, &ChannelProfile::legal(p), &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn occlusion_geometry() {
        let g = grid();
        assert_eq!(occlude(&g, 0, 0, 0.0).unwrap(), g);
        let o = occlude(&g, 7, 11, 0.0).unwrap();
        let changed = g.intensities.iter().zip(&o.intensities).filter(|(a, b)| a != b).count();
        assert!(changed <= 77);
        assert_eq!(o.roles, g.roles);
        assert_eq!(o.get(6, 10), 0.0);
        assert!(occlude(&g, 48, 1, 0.0).is_err());
        let moved = Occlusion { row0: 40, col0: 36, ..Occlusion::top_left(7, 11) }.apply(&g).unwrap();
        assert_eq!(moved.get(46, 46), 0.0);
    }
}
