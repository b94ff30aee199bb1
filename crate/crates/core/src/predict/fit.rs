use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, Error, Result};
use crate::ggd::{ConstellationProfile, ProfileRow, GAMMA_MAX, GAMMA_MIN};
use crate::scalar::Real;

pub const DEFAULT_EXTRAPOLATION: (f64, f64) = (1.0, 32.0);

/// Least squares fit of mu = a f^b in log-log space.
pub fn fit_mean_power<T: Real>(series: &[(T, T)]) -> Result<(T, T)> {
    if series.len() < 2 {
        return Err(Error::InsufficientData("mean fit needs at least 2 points".into()));
    }
    if series.iter().any(|&(n, m)| !n.positive() || !m.positive()) {
        return Err(invalid_input("mean fit needs positive n_s and mu"));
    }
    let k = T::of(series.len() as f64);
    let lx: Vec<T> = series.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<T> = series.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().fold(T::zero(), |a, &b| a + b) / k;
    let my = ly.iter().fold(T::zero(), |a, &b| a + b) / k;
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for (&x, &y) in lx.iter().zip(&ly) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    if sxx == T::zero() {
        return Err(invalid_input("mean fit needs at least two distinct n_s"));
    }
    let b = sxy / sxx;
    Ok(((my - b * mx).exp(), b))
}

/// Sum of squared residuals of sigma2 = a f^b + c.
pub fn variance_residual<T: Real>(series: &[(T, T)], a: T, b: T, c: T) -> T {
    series.iter().fold(T::zero(), |acc, &(n, y)| {
        let r = y - (a * n.powf(b) + c);
        acc + r * r
    })
}

fn solve_linear<T: Real>(series: &[(T, T)], b: T) -> (T, T) {
    let k = T::of(series.len() as f64);
    let u: Vec<T> = series.iter().map(|p| p.0.powf(b)).collect();
    let mu = u.iter().fold(T::zero(), |a, &v| a + v) / k;
    let my = series.iter().fold(T::zero(), |a, p| a + p.1) / k;
    let (mut suu, mut suy) = (T::zero(), T::zero());
    for (&ui, p) in u.iter().zip(series) {
        suu = suu + (ui - mu) * (ui - mu);
        suy = suy + (ui - mu) * (p.1 - my);
    }
    if suu <= T::epsilon() * mu * mu {
        return (T::zero(), my);
    }
    let a = suy / suu;
    (a, my - a * mu)
}

fn grid_fit<T: Real>(series: &[(T, T)], within: Option<(T, T)>) -> Result<(T, T, T)> {
    if series.len() < 3 {
        return Err(Error::InsufficientData("variance fit needs at least 3 points".into()));
    }
    if series.iter().any(|&(n, _)| !n.positive()) {
        return Err(invalid_input("variance fit needs positive n_s"));
    }
    let mut best: Option<(T, (T, T, T))> = None;
    for i in -3000i32..=3000 {
        let b = T::of(i as f64 * 1e-3);
        let (a, c) = if i == 0 {
            let k = T::of(series.len() as f64);
            (T::zero(), series.iter().fold(T::zero(), |s, p| s + p.1) / k)
        } else {
            solve_linear(series, b)
        };
        if let Some((lo, hi)) = within {
            // a f^b + c is monotone in f, so the endpoints bound it.
            if a * lo.powf(b) + c <= T::zero() || a * hi.powf(b) + c <= T::zero() {
                continue;
            }
        }
        let ssr = variance_residual(series, a, b, c);
        if best.is_none_or(|(s, _)| ssr < s) {
            best = Some((ssr, (a, b, c)));
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| Error::ExtrapolationRange("no positive variance fit on the requested range".into()))
}

/// Fit sigma2 = a f^b + c: grid over b in [-3, 3] at step 1e-3 with the
/// least squares (a, c) at each b.
pub fn fit_variance_power<T: Real>(series: &[(T, T)]) -> Result<(T, T, T)> {
    grid_fit(series, None)
}

/// As [`fit_variance_power`], restricted to fits whose prediction stays
/// positive over `range`.
pub fn fit_variance_power_within<T: Real>(series: &[(T, T)], range: (T, T)) -> Result<(T, T, T)> {
    grid_fit(series, Some(range))
}

pub fn fit_shape_avg<T: Real>(series: &[(T, T)]) -> Result<T> {
    if series.is_empty() {
        return Err(Error::InsufficientData("shape average of no points".into()));
    }
    Ok(series.iter().fold(T::zero(), |a, p| a + p.1) / T::of(series.len() as f64))
}

/// Fitted constants for one constellation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstellationFit {
    pub x: f64,
    pub a_mu: f64,
    pub b_mu: f64,
    pub a_sigma: f64,
    pub b_sigma: f64,
    pub c_sigma: f64,
    pub gamma_bar: f64,
}

impl ConstellationFit {
    pub fn mean(&self, f: f64) -> f64 {
        self.a_mu * f.powf(self.b_mu)
    }

    pub fn variance(&self, f: f64) -> f64 {
        self.a_sigma * f.powf(self.b_sigma) + self.c_sigma
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionModel {
    pub constellation: Vec<ConstellationFit>,
    /// n_s range of the fitted data.
    pub fit_range: (f64, f64),
    /// Range of f accepted by [`PredictionModel::predict_profile`].
    #[serde(default = "default_extrapolation")]
    pub extrapolation_range: (f64, f64),
}

fn default_extrapolation() -> (f64, f64) {
    DEFAULT_EXTRAPOLATION
}

impl PredictionModel {
    /// Fit every constellation point of an `(n_s, profile)` series. The
    /// variance fit is restricted to stay positive over `extrapolation`.
    pub fn fit(series: &[(usize, ConstellationProfile<f64>)], extrapolation: (f64, f64)) -> Result<Self> {
        let first = &series.first().ok_or_else(|| Error::InsufficientData("empty series".into()))?.1;
        let mut constellation = Vec::new();
        for (i, row) in first.rows.iter().enumerate() {
            let pick = |f: fn(&ProfileRow<f64>) -> f64| -> Result<Vec<(f64, f64)>> {
                series
                    .iter()
                    .map(|(n, p)| {
                        p.rows
                            .get(i)
                            .filter(|r| r.x == row.x)
                            .map(|r| (*n as f64, f(r)))
                            .ok_or_else(|| invalid_input(format!("profile for n_s = {n} lacks gray {}", row.x)))
                    })
                    .collect()
            };
            let (a_mu, b_mu) = fit_mean_power(&pick(|r| r.mu)?)?;
            let (a_sigma, b_sigma, c_sigma) = fit_variance_power_within(&pick(|r| r.sigma2)?, extrapolation)?;
            let gamma_bar = fit_shape_avg(&pick(|r| r.gamma)?)?;
            constellation.push(ConstellationFit { x: row.x, a_mu, b_mu, a_sigma, b_sigma, c_sigma, gamma_bar });
        }
        let ns = series.iter().map(|(n, _)| *n as f64);
        let fit_range = (ns.clone().fold(f64::INFINITY, f64::min), ns.fold(f64::NEG_INFINITY, f64::max));
        let model = Self { constellation, fit_range, extrapolation_range: extrapolation };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.constellation.is_empty() {
            return Err(Error::InvalidProfile("prediction model has no constellation points".into()));
        }
        for c in &self.constellation {
            if !(GAMMA_MIN..=GAMMA_MAX).contains(&c.gamma_bar) {
                return Err(Error::InvalidProfile(format!("gamma_bar {} outside [0.1, 10]", c.gamma_bar)));
            }
        }
        Ok(())
    }

    /// Predicted channel profile for f averaged captures.
    pub fn predict_profile(&self, f: f64) -> Result<ConstellationProfile<f64>> {
        let (lo, hi) = self.extrapolation_range;
        if !(lo..=hi).contains(&f) {
            return Err(Error::ExtrapolationRange(format!("f = {f} outside [{lo}, {hi}]")));
        }
        let rows = self
            .constellation
            .iter()
            .map(|c| {
                let sigma2 = c.variance(f);
                if sigma2 <= 0.0 {
                    return Err(Error::ExtrapolationRange(format!(
                        "predicted variance {sigma2} at gray {} for f = {f}",
                        c.x
                    )));
                }
                Ok(ProfileRow { x: c.x, mu: c.mean(f), sigma2, gamma: c.gamma_bar })
            })
            .collect::<Result<_>>()?;
        ConstellationProfile::new(format!("predicted:f={f}"), rows)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let m: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}
