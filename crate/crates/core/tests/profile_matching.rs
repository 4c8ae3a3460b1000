//! Matched profiles: regression values, an exact scaling oracle, determinism
//! and the continuous field built on them.

use std::sync::OnceLock;

use fastfront::analysis::{Subsolution, SubsolutionSpec};
use fastfront::pipeline::{compute_profile, profile_field, ProfileRun};
use fastfront::profile::{c0_constant, profile_to_field, shoot_inner, ProfileOdeSpec, ShootingConfig};
use fastfront::ModelParams;

fn run(r: f64) -> ProfileRun {
    compute_profile(&ModelParams::reference(), r, &ShootingConfig::default(), (-8, 3)).unwrap()
}

fn unit_rate() -> &'static ProfileRun {
    static RUN: OnceLock<ProfileRun> = OnceLock::new();
    RUN.get_or_init(|| run(1.0))
}

#[test]
fn unit_rate_regression() {
    let r = unit_rate();
    assert!((r.z_star - 0.138113423223416).abs() < 1e-9, "z* = {}", r.z_star);
    assert!(r.width() < 1e-12);
    assert!(r.estimates.all_pass(), "{:?}", r.estimates);
    assert!(r.solution.is_strictly_decreasing());
}

/// `φ(z) ↦ A φ(B z)` with `A = r^{−1/(β−1)}`, `B = r^{−(1−m)/(2(β−1))}` maps
/// the rate-1 profile equation onto the rate-`r` one, so the blow-up point
/// scales as `z*(r) = r^{(1−m)/(2(β−1))} z*(1)`.
#[test]
fn blowup_point_follows_the_scaling_law() {
    let p = ModelParams::reference();
    let k = (1.0 - p.m) / (2.0 * (p.beta - 1.0));
    let base = unit_rate().z_star;
    for r in [2.0f64, 0.65] {
        let z = run(r).z_star;
        assert!((z - base).abs() > 1e-3, "z*({r}) should differ from z*(1)");
        let want = r.powf(k) * base;
        assert!((z / want - 1.0).abs() < 1e-8, "r = {r}: z* = {z}, scaling gives {want}");
    }
}

#[test]
fn matching_is_deterministic() {
    let again = run(1.0);
    let first = unit_rate();
    assert_eq!(again.z_star.to_bits(), first.z_star.to_bits());
    assert_eq!(again.solution, first.solution);
}

#[test]
fn inner_solutions_for_the_same_point_do_not_cross() {
    let z0 = unit_rate().z_low;
    let spec = ProfileOdeSpec::new(0.5, 1.2, 1.0).unwrap();
    let base = ShootingConfig { z_max: 100.0, ..ShootingConfig::default() };
    let (a, _) = shoot_inner(&spec, z0, &ShootingConfig { inner_decades: 3.0, ..base }).unwrap();
    let (b, _) = shoot_inner(&spec, z0, &ShootingConfig { inner_decades: 4.0, ..base }).unwrap();
    let fb = fastfront::profile::ProfileEvaluator::new(&b, None).unwrap();
    let (lo, hi) = fb.z_range();
    let diffs: Vec<f64> = a
        .samples
        .iter()
        .filter(|s| s.z > lo && s.z < hi && s.z < 10.0 * z0)
        .map(|s| s.phi / fb.eval(s.z).phi - 1.0)
        .collect();
    assert!(diffs.len() > 10);
    let agree = diffs.iter().all(|d| d.abs() < 1e-6);
    let ordered = diffs.iter().all(|d| *d >= -1e-9) || diffs.iter().all(|d| *d <= 1e-9);
    assert!(agree || ordered, "relative differences change sign: {:?}", &diffs[..diffs.len().min(20)]);
}

#[test]
fn fitted_constants_are_stable() {
    let sol = &unit_rate().solution;
    let spec = sol.spec;
    let c0 = c0_constant(&spec, sol.z0);
    assert!((sol.c_blow_fit.unwrap() / c0 - 1.0).abs() < 1e-2);
    let longer = ShootingConfig { z_max: 2e6, ..ShootingConfig::default() };
    let (s2, _) = shoot_inner(&spec, sol.z0, &longer).unwrap();
    let (k1, k2) = (sol.c_decay_fit.unwrap(), s2.c_decay_fit.unwrap());
    assert!((k2 / k1 - 1.0).abs() < 0.1, "tail prefactor {k1} vs {k2}");
}

#[test]
fn field_is_self_similar_and_capped() {
    let w = profile_field(&unit_rate().solution, 4.0).unwrap();
    let (a, s) = (w.profile.a, w.profile.sigma);
    let z0 = w.profile.z0;
    for z in [1.001 * z0, 1.5 * z0, 10.0 * z0, 100.0 * z0] {
        assert!((w.value(1.0, z) / w.profile.eval(z).phi - 1.0).abs() < 1e-14);
        for t in [0.5f64, 3.0, 40.0] {
            let x = z * t.powf(s);
            let lhs = w.value(4.0 * t, x * 4f64.powf(s)) * (4.0 * t).powf(a);
            let rhs = w.value(t, x) * t.powf(a);
            assert!((lhs / rhs - 1.0).abs() < 1e-12, "t = {t}, z = {z}");
        }
    }
    let t = 7.0;
    let front = w.front(t);
    let nodes = [0.0, 0.5 * front, 0.999 * front, 1.01 * front, 3.0 * front];
    let (f, _) = profile_to_field(&w, t, 1.0, &nodes).unwrap();
    assert_eq!(&f.values[..3], &[1.0, 1.0, 1.0]);
    assert!(f.values[3] <= 1.0 && f.values[4] < f.values[3]);
    assert!(profile_to_field(&w, 0.0, 1.0, &nodes).is_err());
}

#[test]
fn subsolution_junction_is_smooth() {
    let p = ModelParams::reference();
    let reduced = run(p.r - p.eps);
    let w = profile_field(&reduced.solution, 4.0).unwrap();
    let spec = SubsolutionSpec::for_params(&p).unwrap();
    let sub = Subsolution::new(&reduced.solution, w, &p, spec).unwrap();
    for t in [1.0, 10.0, 1e3, 1e5] {
        let mm = sub.junction_mismatch(t);
        assert!(mm < 1e-6, "t = {t}: junction mismatch {mm}");
    }
    // the wrong rate is refused
    let w1 = profile_field(&unit_rate().solution, 4.0).unwrap();
    assert!(Subsolution::new(&unit_rate().solution, w1, &p, spec).is_err());
}
