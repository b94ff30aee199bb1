//! Generalized Gaussian distribution: density, distribution function,
//! sampling, and moment-ratio estimators.

mod estimate;
mod profile;
pub mod special;

pub use estimate::{
    estimate_mean, estimate_profile, estimate_shape, estimate_variance, ks_distance, mean_abs_deviation,
    ratio_function, sc_aggregate, shape_from_ratio, SampleSet, ShapeSearch, GAMMA_MAX, GAMMA_MIN,
};
pub use profile::{ConstellationProfile, ProfileRow};

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use special::{ln_gamma, reg_lower_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GgdParams<T = f64> {
    pub mu: T,
    pub sigma2: T,
    pub gamma: T,
}

impl<T: Real> GgdParams<T> {
    pub fn new(mu: T, sigma2: T, gamma: T) -> Result<Self> {
        let p = Self { mu, sigma2, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.sigma2.positive() || !self.gamma.positive() || !self.mu.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "GGD needs sigma2 > 0 and gamma > 0, got ({}, {}, {})",
                self.mu, self.sigma2, self.gamma
            )));
        }
        Ok(())
    }

    /// eta = sqrt(Γ(3/γ) / Γ(1/γ)) / σ
    pub fn eta(&self) -> T {
        let g = self.gamma;
        let three = T::of(3.0);
        ((ln_gamma(three / g) - ln_gamma(T::one() / g)) * T::of(0.5)).exp() / self.sigma2.sqrt()
    }

    pub fn pdf(&self, x: T) -> T {
        let g = self.gamma;
        let eta = self.eta();
        let norm = (g * eta / T::of(2.0)) * (-ln_gamma(T::one() / g)).exp();
        norm * (-(eta * (x - self.mu).abs()).powf(g)).exp()
    }

    pub fn cdf(&self, x: T) -> T {
        let d = x - self.mu;
        let p = reg_lower_gamma(T::one() / self.gamma, (self.eta() * d.abs()).powf(self.gamma));
        let half = T::of(0.5);
        if d >= T::zero() {
            half + half * p
        } else {
            half - half * p
        }
    }

    pub fn cast<U: Real>(&self) -> GgdParams<U> {
        GgdParams {
            mu: U::of(self.mu.as_f64()),
            sigma2: U::of(self.sigma2.as_f64()),
            gamma: U::of(self.gamma.as_f64()),
        }
    }
}

pub fn pdf<T: Real>(x: T, p: &GgdParams<T>) -> T {
    p.pdf(x)
}

pub fn cdf<T: Real>(x: T, p: &GgdParams<T>) -> T {
    p.cdf(x)
}

/// Reusable sampler: X = mu + S G^(1/gamma) / eta with G ~ Gamma(1/gamma, 1)
/// and S a fair sign.
#[derive(Debug, Clone)]
pub struct GgdSampler {
    mu: f64,
    inv_eta: f64,
    inv_gamma: f64,
    base: Gamma<f64>,
}

impl GgdSampler {
    pub fn new<T: Real>(p: &GgdParams<T>) -> Result<Self> {
        p.validate()?;
        let p = p.cast::<f64>();
        let base = Gamma::new(1.0 / p.gamma, 1.0)
            .map_err(|e| Error::InvalidProfile(format!("gamma shape {}: {e}", 1.0 / p.gamma)))?;
        Ok(Self { mu: p.mu, inv_eta: 1.0 / p.eta(), inv_gamma: 1.0 / p.gamma, base })
    }

    /// Deviation from the mean only.
    pub fn sample_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g = self.base.sample(rng);
        let mag = g.powf(self.inv_gamma) * self.inv_eta;
        if rng.random::<bool>() {
            mag
        } else {
            -mag
        }
    }

    pub fn mean(&self) -> f64 {
        self.mu
    }
}

impl Distribution<f64> for GgdSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.mu + self.sample_offset(rng)
    }
}

/// One draw; build a [`GgdSampler`] when drawing repeatedly.
pub fn sample<T: Real, R: Rng + ?Sized>(p: &GgdParams<T>, rng: &mut R) -> Result<T> {
    Ok(T::of(GgdSampler::new(p)?.sample(rng)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaussian_special_case() {
        let p = GgdParams::new(100.0f64, 400.0, 2.0).unwrap();
        let peak = 1.0 / (20.0 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((p.pdf(100.0) - peak).abs() < 1e-15);
        assert!((p.cdf(120.0) - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert_eq!(p.cdf(100.0), 0.5);
        assert_eq!(p.pdf(90.0), p.pdf(110.0));
    }

    #[test]
    fn laplace_special_case() {
        // gamma = 1, sigma2 = 2 gives unit-scale Laplace
        let p = GgdParams::new(0.0f64, 2.0, 1.0).unwrap();
        assert!((p.pdf(1.5) - 0.5 * (-1.5f64).exp()).abs() < 1e-14);
        assert!((p.cdf(-1.0) - 0.5 * (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn single_precision_matches_double() {
        let p64 = GgdParams::new(160.0f64, 273.04, 1.91).unwrap();
        let p32: GgdParams<f32> = p64.cast();
        for x in [120.0, 150.0, 160.0, 175.0, 210.0] {
            assert!((p32.cdf(x as f32) as f64 - p64.cdf(x)).abs() < 1e-5);
        }
    }

    #[test]
    fn sampler_is_seeded() {
        let p = GgdParams::new(40.0, 25.0, 1.3).unwrap();
        let s = GgdSampler::new(&p).unwrap();
        let a: Vec<f64> = (0..5).map(|_| 0.0).scan(ChaCha8Rng::seed_from_u64(1), |r, _| Some(s.sample(r))).collect();
        let b: Vec<f64> = (0..5).map(|_| 0.0).scan(ChaCha8Rng::seed_from_u64(1), |r, _| Some(s.sample(r))).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(GgdParams::new(0.0, 0.0, 2.0).is_err());
        assert!(GgdParams::new(0.0, 1.0, -1.0).is_err());
    }
}
