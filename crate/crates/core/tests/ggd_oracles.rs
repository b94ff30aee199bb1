use lcac::bundled;
use lcac::ggd::special::{ln_gamma, reg_lower_gamma};
use lcac::ggd::{
    estimate_profile, ks_distance, ratio_function, sample, sc_aggregate, shape_from_ratio, GgdParams, GgdSampler,
    SampleSet, ShapeSearch,
};
use lcac::{GgdParams32, Profile32};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Laplace, Normal};
use statrs::function::gamma as sg;

/// Density written out directly from the closed form, with statrs' gamma.
fn oracle_pdf(x: f64, mu: f64, s2: f64, g: f64) -> f64 {
    let eta = (sg::gamma(3.0 / g) / (s2 * sg::gamma(1.0 / g))).sqrt();
    g * eta / (2.0 * sg::gamma(1.0 / g)) * (-(eta * (x - mu).abs()).powf(g)).exp()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// CDF from symmetry about mu plus composite Simpson over [mu, x], split so
/// the cusp at mu sits on an endpoint.
fn quad_cdf(p: &GgdParams<f64>, x: f64) -> f64 {
    let f = |t: f64| oracle_pdf(t, p.mu, p.sigma2, p.gamma);
    let (lo, hi) = if x >= p.mu { (p.mu, x) } else { (x, p.mu) };
    // Grade the mesh towards mu where the density is sharpest for small shapes.
    let mut acc = 0.0;
    let mut edge = 0.0;
    let width = hi - lo;
    for k in 0..40 {
        let next = width * ((k + 1) as f64 / 40.0).powi(3);
        acc += simpson(&|u| f(lo.min(hi) + if x >= p.mu { u } else { width - u }), edge, next, 200);
        edge = next;
    }
    if x >= p.mu {
        0.5 + acc
    } else {
        0.5 - acc
    }
}

fn all_rows() -> Vec<GgdParams<f64>> {
    bundled::profile_names().into_iter().flat_map(|n| bundled::profile(n).unwrap().rows).map(|r| r.params()).collect()
}

#[test]
fn pdf_matches_closed_form_and_statrs() {
    for p in all_rows() {
        for k in -40..=40 {
            let x = p.mu + k as f64 * p.sigma2.sqrt() / 8.0;
            let want = oracle_pdf(x, p.mu, p.sigma2, p.gamma);
            assert!((p.pdf(x) - want).abs() <= 1e-10 * want.max(1e-300) + 1e-15, "{p:?} at {x}");
        }
    }
    let n = Normal::new(100.0, 20.0).unwrap();
    let g = GgdParams::new(100.0, 400.0, 2.0).unwrap();
    let l = Laplace::new(100.0, 20.0 / 2f64.sqrt()).unwrap();
    let gl = GgdParams::new(100.0, 400.0, 1.0).unwrap();
    for x in [20.0, 70.0, 99.0, 100.0, 101.5, 140.0, 230.0] {
        assert!((g.pdf(x) - n.pdf(x)).abs() < 1e-12);
        assert!((g.cdf(x) - n.cdf(x)).abs() < 1e-9);
        assert!((gl.pdf(x) - l.pdf(x)).abs() < 1e-12);
        assert!((gl.cdf(x) - l.cdf(x)).abs() < 1e-9);
    }
}

#[test]
fn cdf_matches_quadrature_on_every_bundled_row() {
    for p in all_rows() {
        let s = p.sigma2.sqrt();
        for k in [-6.0, -3.0, -1.5, -0.7, -0.1, 0.0, 0.2, 0.9, 2.0, 4.0, 6.0] {
            let x = p.mu + k * s;
            let q = quad_cdf(&p, x);
            assert!((p.cdf(x) - q).abs() < 1e-5, "{p:?} x={x}: {} vs {q}", p.cdf(x));
        }
    }
}

#[test]
fn special_functions_match_statrs() {
    for &x in &[0.05, 0.3, 0.5, 1.0, 1.5, 2.0, 3.3, 7.0, 15.0, 40.0] {
        assert!((ln_gamma(x) - sg::ln_gamma(x)).abs() < 1e-10 * sg::ln_gamma(x).abs().max(1.0));
    }
    for &a in &[0.2, 0.5, 1.0, 2.5, 10.0] {
        for &x in &[0.01, 0.5, 1.0, 3.0, 12.0, 40.0] {
            assert!((reg_lower_gamma(a, x) - sg::gamma_lr(a, x)).abs() < 1e-10, "a={a} x={x}");
        }
    }
}

#[test]
fn ratio_function_anchors() {
    assert!((ratio_function(2.0f64) - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    assert!((ratio_function(1.0f64) - 2.0).abs() < 1e-9);
    let direct = |g: f64| sg::gamma(1.0 / g) * sg::gamma(3.0 / g) / sg::gamma(2.0 / g).powi(2);
    for g in [0.4, 0.8, 1.3, 2.7, 5.0] {
        assert!((ratio_function(g) - direct(g)).abs() < 1e-9 * direct(g));
    }
}

#[test]
fn sampler_moments_and_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for (g, s2) in [(0.7, 30.0), (1.0, 100.0), (2.0, 400.0), (2.35, 90.0)] {
        let p = GgdParams::new(50.0, s2, g).unwrap();
        let s = GgdSampler::new(&p).unwrap();
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| 50.0 + s.sample_offset(&mut rng)).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
        assert!((m - 50.0).abs() < 5.0 * (s2 / n as f64).sqrt());
        assert!((v / s2 - 1.0).abs() < 0.03, "g={g}: var {v}");
        assert!(ks_distance(&xs[..20_000], &p) < 0.015);
    }
}

#[test]
fn estimator_recovers_table2a() {
    let truth = bundled::table2('a').unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let obs: Vec<Vec<f64>> =
        truth.rows.iter().map(|r| (0..50_000).map(|_| sample(&r.params(), &mut rng).unwrap()).collect()).collect();
    let set = SampleSet::new(truth.points(), obs).unwrap();
    let est = estimate_profile(&set, "synthetic", ShapeSearch::default()).unwrap();
    for (e, t) in est.rows.iter().zip(&truth.rows) {
        assert!((e.mu - t.mu).abs() < 1.0);
        assert!((e.sigma2 / t.sigma2 - 1.0).abs() < 0.08);
        assert!((e.gamma - t.gamma).abs() < 0.15);
    }
}

#[test]
fn sc_aggregate_shrinks_variance_by_ns() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let p = GgdParams::new(100.0, 400.0, 2.0).unwrap();
    let captures: Vec<SampleSet<f64>> = (0..4)
        .map(|_| {
            let obs = vec![(0..20_000).map(|_| sample(&p, &mut rng).unwrap()).collect()];
            SampleSet::new(vec![100.0], obs).unwrap()
        })
        .collect();
    let agg = sc_aggregate(&captures, "sc", ShapeSearch::default()).unwrap();
    assert!((agg.rows[0].sigma2 / 100.0 - 1.0).abs() < 0.05);
    assert!((agg.rows[0].gamma - 2.0).abs() < 0.15);
}

#[test]
fn exhaustive_and_bisection_agree() {
    for g in [0.5f64, 1.0, 1.7, 2.4, 4.0] {
        let rho = ratio_function(g);
        let b = shape_from_ratio(rho, ShapeSearch::default());
        let e = shape_from_ratio(rho, ShapeSearch::Exhaustive { step: 1e-3 });
        assert!((b - g).abs() < 2e-4 && (e - g).abs() < 2e-3, "g={g}: {b} {e}");
    }
}

#[test]
fn single_precision_tracks_double() {
    let p64 = bundled::table2('p').unwrap();
    let p32: Profile32 = p64.cast();
    for (r64, r32) in p64.rows.iter().zip(&p32.rows) {
        let g32: GgdParams32 = r32.params();
        let g64 = r64.params();
        for k in -3..=3 {
            let x = g64.mu + k as f64 * 5.0;
            assert!((g32.cdf(x as f32) as f64 - g64.cdf(x)).abs() < 1e-4);
            assert!(((g32.pdf(x as f32) as f64) / g64.pdf(x) - 1.0).abs() < 1e-3);
        }
    }
}

proptest! {
    #[test]
    fn cdf_is_monotone_and_symmetric(mu in 0.0f64..255.0, s2 in 1.0f64..2000.0, g in 0.3f64..4.0, a in -60.0f64..60.0, d in 0.0f64..30.0) {
        let p = GgdParams::new(mu, s2, g).unwrap();
        prop_assert!(p.cdf(mu + a) <= p.cdf(mu + a + d) + 1e-12);
        prop_assert!((p.cdf(mu + a) + p.cdf(mu - a) - 1.0).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&p.cdf(mu + a)));
    }

    #[test]
    fn shape_inversion_roundtrip(g in 0.2f64..8.0) {
        let back = shape_from_ratio(ratio_function(g), ShapeSearch::default());
        prop_assert!((back - g).abs() < 1e-3 * g.max(1.0));
    }
}
