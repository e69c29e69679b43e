//! Monte-Carlo bands and numerical invariants that need realistic sample sizes.

use nullfreq::charfn::gaussian_cf;
use nullfreq::datagen::{generate, MixtureSpec, RngSeed};
use nullfreq::dist::normal_survival;
use nullfreq::proportion::{proportion_t_max, NullSource, ProportionGrid};
use nullfreq::{ecf, estimate_null, select_frequency, NullParams, SampleVector};
use rayon::prelude::*;

fn pure_null(n: usize, null: NullParams) -> MixtureSpec {
    let mut s = MixtureSpec::main_step(n, 0.1, 1.0);
    s.epsilon = 0.0;
    s.null = null;
    s
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn seeds(base: u64, k: u64) -> Vec<RngSeed> {
    (0..k).map(|i| RngSeed::new(base + i)).collect()
}

#[test]
fn ecf_within_sampling_band() {
    let null = NullParams::new(-0.5, 0.5).unwrap();
    let n = 10_000;
    for s in seeds(100, 20) {
        let (d, _) = generate(&pure_null(n, null), s).unwrap();
        for &t in &[0.1, 0.5, 1.0, 2.0, 4.0] {
            let err = (ecf(&d, t).unwrap() - gaussian_cf(null, t)).norm();
            assert!(err < 5.0 / (n as f64).sqrt(), "t={t} err={err}");
        }
    }
}

#[test]
fn frequency_tracks_asymptotic_at_desk_scale() {
    for &sigma0 in &[1.0, 0.5f64.sqrt()] {
        let n = 10_000;
        let null = NullParams::from_sd(0.3, sigma0).unwrap();
        let ts: Vec<f64> = seeds(200, 20)
            .into_par_iter()
            .map(|s| select_frequency(&generate(&pure_null(n, null), s).unwrap().0, 0.1).unwrap().t_hat)
            .collect();
        let target = (0.2 * (n as f64).ln()).sqrt() / sigma0;
        let m = median(ts);
        assert!((m / target - 1.0).abs() < 0.1, "sigma0={sigma0} median {m} target {target}");
    }
}

#[test]
fn pure_null_estimates_within_band() {
    let null = NullParams::new(-0.5, 0.5).unwrap();
    let est: Vec<NullParams> = seeds(300, 20)
        .into_par_iter()
        .map(|s| estimate_null(&generate(&pure_null(100_000, null), s).unwrap().0, 0.1).unwrap().0)
        .collect();
    for e in &est {
        assert!((e.sigma0_sq - 0.5).abs() < 0.02, "{e:?}");
    }
    // the mu0 error has sd ~0.009 here, so a seed or two past 0.02 is expected
    let mu_err: Vec<f64> = est.iter().map(|e| e.mu0 + 0.5).collect();
    let inside = mu_err.iter().filter(|d| d.abs() < 0.02).count();
    let mean = mu_err.iter().sum::<f64>() / mu_err.len() as f64;
    assert!(inside >= 18, "{inside}/20 within band: {mu_err:?}");
    assert!(mean.abs() < 0.01, "mean mu0 error {mean}");
}

#[test]
fn location_equivariance() {
    let (d, _) = generate(&MixtureSpec::main_step(20_000, 0.1, 1.0), RngSeed::new(4)).unwrap();
    let (a, ca) = estimate_null(&d, 0.1).unwrap();
    for &c in &[-3.0, 0.75, 10.0] {
        let (b, cb) = estimate_null(&d.shifted(c).unwrap(), 0.1).unwrap();
        assert!((cb.t_hat - ca.t_hat).abs() < 1e-9, "c={c}");
        assert!((b.mu0 - a.mu0 - c).abs() < 1e-8, "c={c} {a:?} {b:?}");
        assert!((b.sigma0_sq - a.sigma0_sq).abs() < 1e-8, "c={c} {a:?} {b:?}");
    }
}

#[test]
fn consistency_trend_in_n() {
    let spec = |n| MixtureSpec::main_step(n, 0.1, 1.0);
    let med: Vec<f64> = [10_000usize, 40_000, 160_000]
        .iter()
        .map(|&n| {
            let errs: Vec<f64> = seeds(400 + n as u64, 30)
                .into_par_iter()
                .map(|s| (estimate_null(&generate(&spec(n), s).unwrap().0, 0.1).unwrap().0.sigma0_sq - 0.5).abs())
                .collect();
            median(errs)
        })
        .collect();
    assert!(med[0] > med[1] && med[1] > med[2], "{med:?}");
}

#[test]
fn null_subsample_passes_ks() {
    let (d, truth) = generate(&MixtureSpec::main_step(10_000, 0.1, 1.0), RngSeed::new(5)).unwrap();
    let s0 = truth.null.sigma0();
    let mut z: Vec<f64> = d
        .values()
        .iter()
        .zip(&truth.records)
        .filter(|(_, r)| r.is_null)
        .map(|(&x, _)| (x - truth.null.mu0) / s0)
        .collect();
    z.sort_by(f64::total_cmp);
    let m = z.len() as f64;
    let stat = z
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - normal_survival(x);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max);
    assert_eq!(z.len(), 9000);
    assert!(stat < 1.628 / m.sqrt(), "KS statistic {stat}");
}

#[test]
fn doubling_quadrature_nodes_changes_omega_little() {
    let (d, truth) = generate(&MixtureSpec::main_step(10_000, 0.1, 1.0), RngSeed::new(6)).unwrap();
    let t_max = proportion_t_max(d.len(), 0.1);
    let a = ProportionGrid::with_range(&d, t_max, 2001, 201).unwrap().omega(truth.null).unwrap();
    let b = ProportionGrid::with_range(&d, t_max, 2001, 402).unwrap().omega(truth.null).unwrap();
    let worst = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn wider_range_never_lowers_estimate() {
    for s in seeds(700, 5) {
        let (d, truth) = generate(&MixtureSpec::main_step(5_000, 0.1, 1.0), s).unwrap();
        let t_max = proportion_t_max(d.len(), 0.1);
        // The wider grid contains every point of the narrower one.
        let narrow = ProportionGrid::with_range(&d, t_max, 101, 201).unwrap();
        let wide = ProportionGrid::with_range(&d, 2.0 * t_max, 201, 201).unwrap();
        assert_eq!(narrow.ts()[..], wide.ts()[..101]);
        let e1 = narrow.estimate(truth.null, NullSource::Given).unwrap().epsilon_hat;
        let e2 = wide.estimate(truth.null, NullSource::Given).unwrap().epsilon_hat;
        assert!(e2 >= e1 - 1e-12, "{e1} {e2}");
    }
}

#[test]
fn pure_null_proportion_band() {
    let null = NullParams::new(-0.5, 0.5).unwrap();
    let est: Vec<(f64, f64)> = seeds(800, 20)
        .into_par_iter()
        .map(|s| {
            let (d, _) = generate(&pure_null(100_000, null), s).unwrap();
            let grid = ProportionGrid::new(&d, 0.1).unwrap();
            let known = grid.estimate(null, NullSource::Given).unwrap().epsilon_hat;
            let fit = estimate_null(&d, 0.1).unwrap().0;
            (known, grid.estimate(fit, NullSource::PlugIn).unwrap().epsilon_hat)
        })
        .collect();
    for (known, plug) in est {
        assert!((0.0..=0.02).contains(&known), "known-null estimate {known}");
        assert!((0.0..=0.03).contains(&plug), "plug-in estimate {plug}");
    }
}

/// Largest ratio of the change in the estimate to
/// `ln n |d sigma0^2| + sqrt(ln n) |d mu0|` over a set of injected null errors.
fn injection_constant(n: usize, seed: u64) -> f64 {
    let (d, truth) = generate(&MixtureSpec::main_step(n, 0.1, 1.0), RngSeed::new(seed)).unwrap();
    let grid = ProportionGrid::new(&d, 0.1).unwrap();
    let base = grid.estimate(truth.null, NullSource::Given).unwrap().epsilon_hat;
    let ln = (n as f64).ln();
    let mut c = 0.0f64;
    for &dm in &[-0.02, -0.01, 0.0, 0.01, 0.02] {
        for &ds in &[-0.01, -0.005, 0.0, 0.005, 0.01] {
            if dm == 0.0 && ds == 0.0 {
                continue;
            }
            let null = NullParams::new(truth.null.mu0 + dm, truth.null.sigma0_sq + ds).unwrap();
            let e = grid.estimate(null, NullSource::PlugIn).unwrap().epsilon_hat;
            c = c.max((e - base).abs() / (ln * ds.abs() + ln.sqrt() * dm.abs()));
        }
    }
    c
}

#[test]
fn plug_in_error_shape_is_stable_in_n() {
    let c4 = median((0..5).map(|s| injection_constant(10_000, 900 + s)).collect());
    let c5 = median((0..5).map(|s| injection_constant(100_000, 950 + s)).collect());
    assert!(c4 > 0.0 && c5 > 0.0);
    assert!(c4 < 2.0 && c5 < 2.0, "{c4} {c5}");
    let ratio = c4 / c5;
    assert!((1.0 / 3.0..3.0).contains(&ratio), "fitted constants {c4} and {c5}");
}

#[test]
fn sample_vector_rejects_bad_input() {
    assert!(SampleVector::new(vec![]).is_err());
    assert!(SampleVector::new(vec![1.0, f64::INFINITY]).is_err());
}
