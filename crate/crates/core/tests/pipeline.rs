use ginibrenet_core::estimation::{estimate_count_tail, estimate_interference_tail, Estimator};
use ginibrenet_core::sampling::{sample_beta_ginibre, sample_palm_beta_ginibre};
use ginibrenet_core::spectral::{count_distribution, trace_bound};
use ginibrenet_core::validation::{rate_table, spectral_exactness};
use ginibrenet_core::{Disk, DiskRestriction, FadingSpec, NetworkModel, PlanarPoint, PointPattern, RngStream};

fn model(fading: FadingSpec) -> NetworkModel {
    NetworkModel::new(0.5, Disk::centered(2.0).unwrap(), PlanarPoint::new(0.5, 0.0), 1.0, 4.0, fading, 0.1, 1.0).unwrap()
}

#[test]
fn sampled_pattern_survives_csv() {
    let p = sample_beta_ginibre(0.25, 4.0, &mut RngStream::new(5, 0)).unwrap();
    let mut buf = Vec::new();
    p.write_csv(&mut buf).unwrap();
    let back = PointPattern::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.points, p.points);
    assert_eq!((back.kind, back.seed), (p.kind, p.seed));
}

#[test]
fn monte_carlo_count_tails_match_exact_values() {
    let res = DiskRestriction::ginibre(1.5).unwrap().with_palm(true).with_beta(0.5).unwrap();
    let root = RngStream::new(17, 0);
    let n = 10_000;
    let counts: Vec<usize> =
        (0..n).map(|k| sample_palm_beta_ginibre(0.5, 1.5, &mut root.substream(k)).unwrap().len()).collect();
    for m in 1..8u64 {
        let exact = estimate_count_tail(&res, m);
        if exact.probability < 1e-3 {
            break;
        }
        let hits = counts.iter().filter(|&&c| c as u64 >= m).count() as f64 / n as f64;
        let se = (exact.probability * (1.0 - exact.probability) / n as f64).sqrt();
        assert!((hits - exact.probability).abs() <= 3.0 * se, "m={m}: {hits} vs {}", exact.probability);
    }
    let pmf = count_distribution(&res, 40).unwrap();
    let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    assert!((mean - trace_bound(&res)).abs() < 1e-9);
}

#[test]
fn estimates_are_nonincreasing_in_the_level() {
    let m = model(FadingSpec::exponential(1.0).unwrap());
    let rng = RngStream::new(8, 0);
    let est: Vec<_> = [1.0, 2.0, 3.0, 4.0]
        .iter()
        .enumerate()
        .map(|(k, &x)| estimate_interference_tail(&m, x, 20_000, Estimator::Tilted, &rng.substream(k as u64)).unwrap())
        .collect();
    for w in est.windows(2) {
        assert!(w[1].probability <= w[0].probability + 3.0 * (w[0].stderr + w[1].stderr));
    }
}

#[test]
fn estimators_agree_where_crude_is_accurate() {
    let m = model(FadingSpec::exponential(1.0).unwrap());
    let x = 2.0;
    let crude = estimate_interference_tail(&m, x, 40_000, Estimator::Crude, &RngStream::new(1, 0)).unwrap();
    for e in [Estimator::Tilted, Estimator::SingleJump] {
        let other = estimate_interference_tail(&m, x, 40_000, e, &RngStream::new(2, 0)).unwrap();
        let se = crude.stderr.hypot(other.stderr);
        assert!((crude.probability - other.probability).abs() <= 4.0 * se, "{e}: {other:?} vs {crude:?}");
    }
}

#[test]
fn deterministic_checks_pass() {
    assert!(spectral_exactness().passed);
    let r = rate_table();
    assert!(r.passed, "{}", r.line());
}
