use serde::{Deserialize, Serialize};

use crate::coding::{bch::PRESETS, BchCode};
use crate::error::{invalid_config, Result};
use crate::layout::BarcodeSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Embed only into RS parity bits.
    Strategy1,
    /// Embed anywhere in the coded stream.
    Strategy2,
}

/// Whether locations address single bits or whole modules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Granularity {
    #[default]
    Bit,
    Module,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthConfig {
    pub n_a: usize,
    pub k_a: usize,
    pub t_a: usize,
    pub strategy: Strategy,
    pub delta: f64,
    #[serde(default)]
    pub granularity: Granularity,
}

pub const DEFAULT_DELTA: f64 = 0.012;

impl Default for AuthConfig {
    fn default() -> Self {
        Self {
            n_a: 255,
            k_a: 147,
            t_a: 14,
            strategy: Strategy::Strategy1,
            delta: DEFAULT_DELTA,
            granularity: Granularity::Bit,
        }
    }
}

impl AuthConfig {
    /// Length-255 preset selected by message length.
    pub fn preset(k_a: usize, strategy: Strategy) -> Result<Self> {
        let &(n_a, k_a, t_a) = PRESETS
            .iter()
            .find(|p| p.1 == k_a)
            .ok_or_else(|| invalid_config(format!("no BCH preset with k_a = {k_a}")))?;
        Ok(Self { n_a, k_a, t_a, strategy, ..Self::default() })
    }

    pub fn presets(strategy: Strategy) -> Vec<Self> {
        PRESETS.iter().map(|p| Self::preset(p.1, strategy).expect("listed preset")).collect()
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    /// The BCH code, checked against the declared parameters.
    pub fn code(&self) -> Result<BchCode> {
        let code = BchCode::new(self.n_a, self.t_a)?;
        if code.k() != self.k_a {
            return Err(invalid_config(format!(
                "BCH({}, t={}) has k = {}, not {}",
                self.n_a,
                self.t_a,
                code.k(),
                self.k_a
            )));
        }
        Ok(code)
    }

    pub fn validate(&self, spec: &BarcodeSpec) -> Result<()> {
        self.code()?;
        if !(0.0..1.0).contains(&self.delta) {
            return Err(invalid_config(format!("delta {} outside [0, 1)", self.delta)));
        }
        let room = super::admissible_bits(self.strategy, spec);
        if self.n_a > room {
            return Err(invalid_config(format!("n_a = {} exceeds {} embeddable bits", self.n_a, room)));
        }
        Ok(())
    }
}
