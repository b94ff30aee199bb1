use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::auth::AuthConfig;
use crate::error::{invalid_input, Result};
use crate::ggd::special::ln_gamma;
use crate::ggd::ConstellationProfile;
use crate::layout::BarcodeSpec;
use crate::scalar::Real;

/// Decision thresholds theta_0 .. theta_M with the per-cell weights of the
/// theoretical symbol error formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemodulationRule<T = f64> {
    pub thresholds: Vec<T>,
}

impl<T: Real> DemodulationRule<T> {
    pub fn from_spec(spec: &BarcodeSpec) -> Self {
        Self { thresholds: spec.thresholds.iter().map(|&t| T::of(t)).collect() }
    }

    pub fn cells(&self) -> usize {
        self.thresholds.len() - 1
    }

    /// Weight of landing in cell `j` when point `i` was sent (both 0-based):
    /// 1/2 within two cells, 1 beyond.
    pub fn alpha(&self, i: usize, j: usize) -> T {
        if i.abs_diff(j) <= 2 {
            T::of(0.5)
        } else {
            T::one()
        }
    }
}

/// Weighted probability that point `i` (0-based) is demodulated into
/// another cell, using the GGD distribution function of its parameters.
pub fn symbol_ber<T: Real>(profile: &ConstellationProfile<T>, rule: &DemodulationRule<T>, i: usize) -> T {
    let p = profile.params(i);
    let th = &rule.thresholds;
    (0..rule.cells())
        .filter(|&j| j != i)
        .fold(T::zero(), |acc, j| acc + rule.alpha(i, j) * (p.cdf(th[j + 1]) - p.cdf(th[j])))
}

/// Mean of [`symbol_ber`] over the constellation.
pub fn raw_auth_ber<T: Real>(profile: &ConstellationProfile<T>, rule: &DemodulationRule<T>) -> T {
    let m = profile.rows.len();
    (0..m).fold(T::zero(), |acc, i| acc + symbol_ber(profile, rule, i)) / T::of(m as f64)
}

/// Expected fraction of wrong bits for point `i` under the barcode's bit map.
pub fn symbol_bit_error_rate<T: Real>(profile: &ConstellationProfile<T>, spec: &BarcodeSpec, i: usize) -> T {
    let p = profile.params(i);
    let th: Vec<T> = spec.thresholds.iter().map(|&t| T::of(t)).collect();
    let bps = T::of(spec.bits_per_symbol() as f64);
    let own = spec.bit_map.pattern(i);
    (0..spec.modulation_order).fold(T::zero(), |acc, j| {
        let flips = (own ^ spec.bit_map.pattern(j)).count_ones() as f64;
        acc + T::of(flips) / bps * (p.cdf(th[j + 1]) - p.cdf(th[j]))
    })
}

/// Mean of [`symbol_bit_error_rate`] over the constellation.
pub fn raw_auth_ber_bit_exact<T: Real>(profile: &ConstellationProfile<T>, spec: &BarcodeSpec) -> T {
    let m = profile.rows.len();
    (0..m).fold(T::zero(), |acc, i| acc + symbol_bit_error_rate(profile, spec, i)) / T::of(m as f64)
}

pub fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let (nf, kf) = (n as f64, k as f64);
    let ln_choose = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0);
    (ln_choose + kf * p.ln() + (nf - kf) * (1.0 - p).ln()).exp()
}

fn check_rate(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(invalid_input(format!("bit error rate {eps} outside [0, 1]")));
    }
    Ok(())
}

/// Monte Carlo decoded error model: e ~ Bin(n_a, eps_a2) errors per
/// codeword; a trial contributes 0 when e <= t_a and e / n_a otherwise.
/// Returns the mean contribution and the fraction of zero trials.
pub fn decoded_auth_ber<R: Rng + ?Sized>(
    eps_a2: f64,
    cfg: &AuthConfig,
    trials: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    check_rate(eps_a2)?;
    if trials == 0 {
        return Err(invalid_input("at least one trial required"));
    }
    let bin = Binomial::new(cfg.n_a as u64, eps_a2).map_err(|e| invalid_input(e.to_string()))?;
    let (mut sum, mut zeros) = (0.0, 0usize);
    for _ in 0..trials {
        let e = bin.sample(rng) as usize;
        if e <= cfg.t_a {
            zeros += 1;
        } else {
            sum += e as f64 / cfg.n_a as f64;
        }
    }
    Ok((sum / trials as f64, zeros as f64 / trials as f64))
}

/// The same model evaluated by binomial summation.
pub fn decoded_auth_ber_exact(eps_a2: f64, n_a: usize, t_a: usize) -> Result<(f64, f64)> {
    check_rate(eps_a2)?;
    let mut mean = 0.0;
    let mut zero = 0.0;
    for e in 0..=n_a {
        let pm = binomial_pmf(n_a, e, eps_a2);
        if e <= t_a {
            zero += pm;
        } else {
            mean += pm * e as f64 / n_a as f64;
        }
    }
    Ok((mean, zero.min(1.0)))
}

/// P(decoded error rate <= delta) under the same model.
pub fn prob_eps_a1_at_most(eps_a2: f64, n_a: usize, t_a: usize, delta: f64) -> Result<f64> {
    check_rate(eps_a2)?;
    let p: f64 =
        (0..=n_a).filter(|&e| e <= t_a || e as f64 / n_a as f64 <= delta).map(|e| binomial_pmf(n_a, e, eps_a2)).sum();
    Ok(p.min(1.0))
}
