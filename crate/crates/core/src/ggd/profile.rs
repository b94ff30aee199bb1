use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GgdParams;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One constellation point and its channel parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow<T = f64> {
    pub x: T,
    pub mu: T,
    pub sigma2: T,
    pub gamma: T,
}

impl<T: Real> ProfileRow<T> {
    pub fn params(&self) -> GgdParams<T> {
        GgdParams { mu: self.mu, sigma2: self.sigma2, gamma: self.gamma }
    }
}

/// Channel description: GGD parameters for each nominal constellation gray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationProfile<T = f64> {
    pub provenance: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub rows: Vec<ProfileRow<T>>,
}

impl<T: Real> ConstellationProfile<T> {
    pub fn new(provenance: impl Into<String>, rows: Vec<ProfileRow<T>>) -> Result<Self> {
        let p = Self { provenance: provenance.into(), m: rows.len(), rows };
        p.validate()?;
        Ok(p)
    }

    /// Same parameters `(mu = x, sigma2, gamma)` at every point.
    pub fn uniform(provenance: impl Into<String>, points: &[T], sigma2: T, gamma: T) -> Result<Self> {
        let rows = points.iter().map(|&x| ProfileRow { x, mu: x, sigma2, gamma }).collect();
        Self::new(provenance, rows)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m != self.rows.len() || self.rows.is_empty() {
            return Err(Error::InvalidProfile(format!(
                "{}: M = {} but {} rows",
                self.provenance,
                self.m,
                self.rows.len()
            )));
        }
        if self.rows.windows(2).any(|w| w[0].x >= w[1].x) {
            return Err(Error::InvalidProfile(format!("{}: rows not sorted by x", self.provenance)));
        }
        for r in &self.rows {
            r.params().validate()?;
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.x).collect()
    }

    pub fn params(&self, i: usize) -> GgdParams<T> {
        self.rows[i].params()
    }

    pub fn params_for(&self, x: T) -> Option<GgdParams<T>> {
        self.rows.iter().find(|r| r.x == x).map(|r| r.params())
    }

    /// Check the profile has a row for every given constellation point.
    pub fn covers(&self, points: &[T]) -> Result<()> {
        for &x in points {
            if self.params_for(x).is_none() {
                return Err(Error::InvalidProfile(format!("{}: no row for gray {x}", self.provenance)));
            }
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> ConstellationProfile<U> {
        ConstellationProfile {
            provenance: self.provenance.clone(),
            m: self.m,
            rows: self
                .rows
                .iter()
                .map(|r| ProfileRow {
                    x: U::of(r.x.as_f64()),
                    mu: U::of(r.mu.as_f64()),
                    sigma2: U::of(r.sigma2.as_f64()),
                    gamma: U::of(r.gamma.as_f64()),
                })
                .collect(),
        }
    }
}

impl ConstellationProfile<f64> {
    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}
