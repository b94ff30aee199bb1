use serde::{Deserialize, Serialize};

use super::special::ln_gamma;
use super::{ConstellationProfile, GgdParams, ProfileRow};
use crate::error::{invalid_input, Error, Result};
use crate::scalar::Real;

pub const GAMMA_MIN: f64 = 0.1;
pub const GAMMA_MAX: f64 = 10.0;

/// How the shape factor is located on [0.1, 10].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShapeSearch {
    /// Bisection on the decreasing ratio function to within `tol`.
    Bisection { tol: f64 },
    /// Scan every grid point from 0.1 upward in steps of `step`.
    Exhaustive { step: f64 },
}

impl Default for ShapeSearch {
    fn default() -> Self {
        ShapeSearch::Bisection { tol: 1e-4 }
    }
}

/// Observations grouped per constellation point.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<T = f64> {
    pub points: Vec<T>,
    pub observations: Vec<Vec<T>>,
}

impl<T: Real> SampleSet<T> {
    pub fn new(points: Vec<T>, observations: Vec<Vec<T>>) -> Result<Self> {
        if points.len() != observations.len() {
            return Err(invalid_input("one observation list per constellation point required"));
        }
        Ok(Self { points, observations })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl SampleSet<f64> {
    /// Reads `constellation,value` rows; a non-numeric first row is taken
    /// as a header. Points come out sorted ascending, observations in file order.
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(invalid_input(format!("row {}: expected 2 columns, got {}", line + 1, rec.len())));
            }
            let (x, v) = match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(x), Ok(v)) if x.is_finite() && v.is_finite() => (x, v),
                _ if line == 0 => continue,
                _ => return Err(invalid_input(format!("row {}: non-numeric value", line + 1))),
            };
            match groups.iter_mut().find(|(p, _)| *p == x) {
                Some((_, obs)) => obs.push(v),
                None => groups.push((x, vec![v])),
            }
        }
        groups.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (points, observations) = groups.into_iter().unzip();
        Self::new(points, observations)
    }
}

fn sum<T: Real>(v: impl Iterator<Item = T>) -> T {
    v.fold(T::zero(), |a, b| a + b)
}

pub fn estimate_mean<T: Real>(y: &[T]) -> Result<T> {
    if y.is_empty() {
        return Err(Error::InsufficientData("mean of no samples".into()));
    }
    Ok(sum(y.iter().copied()) / T::of(y.len() as f64))
}

/// Sample variance with divisor J - 1.
pub fn estimate_variance<T: Real>(y: &[T]) -> Result<T> {
    if y.len() < 2 {
        return Err(Error::InsufficientData(format!("variance needs J >= 2, got {}", y.len())));
    }
    let mu = estimate_mean(y)?;
    Ok(sum(y.iter().map(|&v| (v - mu) * (v - mu))) / T::of((y.len() - 1) as f64))
}

/// Sum of |y - mu| divided by `divisor`.
pub fn mean_abs_deviation<T: Real>(y: &[T], mu: T, divisor: usize) -> T {
    sum(y.iter().map(|&v| (v - mu).abs())) / T::of(divisor as f64)
}

/// r(γ) = Γ(1/γ) Γ(3/γ) / Γ(2/γ)^2
pub fn ratio_function<T: Real>(gamma: T) -> T {
    let inv = T::one() / gamma;
    (ln_gamma(inv) + ln_gamma(T::of(3.0) * inv) - T::of(2.0) * ln_gamma(T::of(2.0) * inv)).exp()
}

/// Invert the ratio function, clamping to [0.1, 10].
pub fn shape_from_ratio<T: Real>(rho: T, search: ShapeSearch) -> T {
    let (lo, hi) = (T::of(GAMMA_MIN), T::of(GAMMA_MAX));
    match search {
        ShapeSearch::Bisection { tol } => {
            if rho >= ratio_function(lo) {
                return lo;
            }
            if rho <= ratio_function(hi) {
                return hi;
            }
            let (mut a, mut b) = (lo, hi);
            let tol = T::of(tol);
            let half = T::of(0.5);
            while b - a > tol {
                let mid = (a + b) * half;
                if ratio_function(mid) > rho {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            (a + b) * half
        }
        ShapeSearch::Exhaustive { step } => {
            let steps = ((GAMMA_MAX - GAMMA_MIN) / step).round() as usize;
            let mut best = (lo, (ratio_function(lo) - rho).abs());
            for i in 1..=steps {
                let g = T::of(GAMMA_MIN + i as f64 * step);
                let err = (ratio_function(g) - rho).abs();
                if err < best.1 {
                    best = (g, err);
                }
            }
            best.0
        }
    }
}

/// Shape factor from samples via rho = sigma2 / (mean |y - mu|)^2.
pub fn estimate_shape<T: Real>(y: &[T], mu: T, sigma2: T, search: ShapeSearch) -> Result<T> {
    shape_with_divisor(y, mu, sigma2, y.len(), search)
}

fn shape_with_divisor<T: Real>(y: &[T], mu: T, sigma2: T, divisor: usize, search: ShapeSearch) -> Result<T> {
    let mad = mean_abs_deviation(y, mu, divisor);
    if !mad.positive() || !sigma2.positive() {
        return Err(Error::InsufficientData("samples have zero deviation".into()));
    }
    Ok(shape_from_ratio(sigma2 / (mad * mad), search))
}

fn row_from<T: Real>(x: T, y: &[T], mad_divisor: usize, search: ShapeSearch) -> Result<ProfileRow<T>> {
    let mu = estimate_mean(y)?;
    let sigma2 = estimate_variance(y)?;
    let gamma = shape_with_divisor(y, mu, sigma2, mad_divisor, search)?;
    Ok(ProfileRow { x, mu, sigma2, gamma })
}

pub fn estimate_profile<T: Real>(
    samples: &SampleSet<T>,
    provenance: &str,
    search: ShapeSearch,
) -> Result<ConstellationProfile<T>> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!("{} constellation point(s), need at least 2", samples.len())));
    }
    let rows = samples
        .points
        .iter()
        .zip(&samples.observations)
        .map(|(&x, y)| {
            if y.len() < 2 {
                return Err(Error::InsufficientData(format!("constellation {x} has {} samples", y.len())));
            }
            row_from(x, y, y.len(), search)
        })
        .collect::<Result<_>>()?;
    ConstellationProfile::new(provenance, rows)
}

/// Synthesized-copy estimate: average observation `j` across the `n_s`
/// captures, then estimate mean, variance and shape of the averages. The
/// absolute-deviation term is normalised by J - 1 here, unlike
/// [`estimate_shape`] which uses J.
pub fn sc_aggregate<T: Real>(
    captures: &[SampleSet<T>],
    provenance: &str,
    search: ShapeSearch,
) -> Result<ConstellationProfile<T>> {
    let first = captures.first().ok_or_else(|| Error::InsufficientData("no captures".into()))?;
    for c in captures {
        if c.points != first.points || c.observations.iter().zip(&first.observations).any(|(a, b)| a.len() != b.len()) {
            return Err(invalid_input("capture sets are not aligned"));
        }
    }
    let ns = T::of(captures.len() as f64);
    let rows = first
        .points
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let j = first.observations[i].len();
            if j < 2 {
                return Err(Error::InsufficientData(format!("constellation {x} has {j} samples")));
            }
            let avg: Vec<T> = (0..j).map(|k| sum(captures.iter().map(|c| c.observations[i][k])) / ns).collect();
            row_from(x, &avg, j - 1, search)
        })
        .collect::<Result<_>>()?;
    ConstellationProfile::new(provenance, rows)
}

/// Kolmogorov-Smirnov distance between the samples and a fitted law.
pub fn ks_distance<T: Real>(y: &[T], p: &GgdParams<T>) -> T {
    let mut v = y.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = T::of(v.len() as f64);
    v.iter().enumerate().fold(T::zero(), |d, (i, &x)| {
        let f = p.cdf(x);
        let lo = (f - T::of(i as f64) / n).abs();
        let hi = (T::of((i + 1) as f64) / n - f).abs();
        d.max(lo).max(hi)
    })
}
