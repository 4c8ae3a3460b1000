//! Cheap invariants checked on random inputs.

use fastfront::analysis::{
    check_sandwich, tail_exponent, LevelSetTrack, track_level_set, verify_parabolic_residual, ResidualSample, Sign, SubsolutionSpec,
};
use fastfront::params::sigma;
use fastfront::pde::{Field, Grid};
use fastfront::profile::{barriers, c0_constant, c_infinity, kappa, ProfileOdeSpec};
use fastfront::{classify_regime, level_bounds, ModelParams};
use proptest::prelude::*;

fn params(m: f64, beta: f64) -> ModelParams {
    ModelParams { m, beta, ..ModelParams::reference() }
}

proptest! {
    #[test]
    fn sigma_decreases_in_m(m in 0.01..0.98f64, dm in 1e-3..0.01f64, beta in 1.01..3.0f64) {
        prop_assert!(sigma(m + dm, beta) < sigma(m, beta));
    }

    #[test]
    fn sigma_decreases_in_beta(m in 0.01..0.99f64, beta in 1.01..3.0f64, db in 1e-3..0.5f64) {
        prop_assert!(sigma(m, beta + db) < sigma(m, beta));
    }

    #[test]
    fn regime_ignores_data_constants(
        m in 0.05..0.95f64,
        beta in 1.01..2.5f64,
        cbar in 0.01..10.0f64,
        x0 in 1.01..5.0f64,
        s0 in 0.01..0.99f64,
    ) {
        let p = params(m, beta);
        let q = ModelParams { Cbar: cbar, x0, s0, ..p };
        match (classify_regime(&p), classify_regime(&q)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.in_scope, b.in_scope);
                prop_assert_eq!(a.improved_upper, b.improved_upper);
                prop_assert_eq!(a.sigma, b.sigma);
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn improved_bounds_grow_with_the_same_exponent(
        z0 in 0.01..1.0f64,
        zbar in 1.0..2.0f64,
        t in 1.0..1e6f64,
        k in 1.5..100.0f64,
    ) {
        let p = ModelParams::reference();
        let s = p.sigma();
        let (lo1, hi1) = level_bounds(&p, t, z0, Some(zbar * z0)).unwrap();
        let (lo2, hi2) = level_bounds(&p, k * t, z0, Some(zbar * z0)).unwrap();
        prop_assert!(((lo2 / lo1).ln() / k.ln() - s).abs() < 1e-9);
        prop_assert!(((hi2 / hi1).ln() / k.ln() - s).abs() < 1e-9);
        prop_assert!(lo1 < hi1);
    }

    #[test]
    fn blowup_barrier_sign_flips_at_c0(
        z0 in 0.05..2.0f64,
        f in prop_oneof![0.3..0.95f64, 1.05..3.0f64],
        d in -8.0..-4.0f64,
    ) {
        let spec = ProfileOdeSpec::new(0.5, 1.2, 1.0).unwrap();
        let c0 = c0_constant(&spec, z0);
        let res = barriers::blowup_residual(&spec, z0, f * c0, z0 + 10f64.powf(d) * z0);
        prop_assert!(if f > 1.0 { res > 0.0 } else { res < 0.0 }, "f = {f}: residual {res}");
    }

    #[test]
    fn tail_barrier_sign_flips_at_c_infinity(
        f in prop_oneof![0.3..0.95f64, 1.05..3.0f64],
        lz in 3.0..6.0f64,
        r in prop_oneof![Just(0.0), 0.1..2.0f64],
    ) {
        let spec = if r > 0.0 {
            ProfileOdeSpec::new(0.5, 1.2, r).unwrap()
        } else {
            ProfileOdeSpec::without_reaction(0.5, 1.2).unwrap()
        };
        let res = barriers::tail_residual(&spec, f * c_infinity(0.5), 10f64.powf(lz));
        prop_assert!(if f > 1.0 { res < 0.0 } else { res > 0.0 }, "f = {f}: residual {res}");
    }

    /// Left shifts of the widened blow-up barrier stay supersolutions of the
    /// profile equation on the whole inner window.
    #[test]
    fn shifted_blowup_barrier_keeps_its_sign(
        z0 in 0.05..2.0f64,
        frac in 1e-6..1.0f64,
        pos in 0.0..1.0f64,
    ) {
        let spec = ProfileOdeSpec::new(0.5, 1.2, 1.0).unwrap();
        let gamma = 1.2;
        let kz = kappa(&spec, gamma) * z0;
        let shift = frac * kz;
        let z = z0 - shift + kz * 10f64.powf(-8.0 * (1.0 - pos));
        let res = barriers::blowup_residual(&spec, z0 - shift, gamma * c0_constant(&spec, z0), z);
        prop_assert!(res >= 0.0, "shift {shift}, z {z}: residual {res}");
    }

    #[test]
    fn plateau_is_the_maximum_of_the_shape(eta in 1.01..6.0f64, a in 0.1..50.0f64) {
        let s = SubsolutionSpec { eta, big_a: a, delta: 1e-3 };
        let closed = eta / (1.0 + eta) * (a * (1.0 + eta)).powf(-1.0 / eta);
        prop_assert!((s.plateau() / closed - 1.0).abs() < 1e-12);
        // the maximizer of w(1 − A w^η) is the junction level
        let g = |w: f64| w * (1.0 - a * w.powf(eta));
        let w0 = s.level();
        prop_assert!((g(w0) / closed - 1.0).abs() < 1e-12);
        prop_assert!(g(w0 * 0.999) <= g(w0) && g(w0 * 1.001) <= g(w0));
    }

    /// A front moving exactly as `x ∝ t^s` is fitted with exponent `s`.
    #[test]
    fn synthetic_front_exponent_is_recovered(s in 1.1..3.0f64, lambda in 0.05..0.95f64) {
        let grid = Grid::new((0..4000).map(|i| 10f64.powf(-1.0 + 8.0 * i as f64 / 3999.0)).collect()).unwrap();
        let snaps: Vec<Field> = (0..20)
            .map(|k| {
                let t = 10f64.powf(1.0 + k as f64 / 19.0);
                Field { t, values: grid.nodes.iter().map(|x| (-x / t.powf(s)).exp()).collect() }
            })
            .collect();
        let tr = track_level_set(&grid, &snaps, lambda, 1.0).unwrap();
        let got = tr.sigma_hat.unwrap();
        prop_assert!((got - s).abs() < 1e-3, "fitted {got}, expected {s}");
    }
}

#[test]
fn unreached_level_gives_an_empty_track() {
    let grid = Grid::new((0..100).map(|i| i as f64).collect()).unwrap();
    let snaps: Vec<Field> =
        (1..5).map(|k| Field { t: k as f64, values: grid.nodes.iter().map(|x| 0.9 * (-x).exp()).collect() }).collect();
    let tr = track_level_set(&grid, &snaps, 0.999, 1.0).unwrap();
    assert!(tr.positions.iter().all(Option::is_none));
    assert_eq!(tr.sigma_hat, None);
    assert!(track_level_set(&grid, &snaps, 1.0, 1.0).is_err());
}

#[test]
fn sandwich_accepts_tracks_between_the_bounds_only() {
    let p = ModelParams::reference();
    let (z0, zbar) = (0.1, 0.2);
    let s = p.sigma();
    let times: Vec<f64> = (0..10).map(|k| 10f64.powf(1.0 + k as f64 / 9.0)).collect();
    let mut tr = LevelSetTrack {
        lambda: 0.5,
        positions: times.iter().map(|t| Some(0.15 * t.powf(s))).collect(),
        multiple_crossings: vec![false; times.len()],
        times,
        sigma_hat: None,
        r2: None,
        fit_from: 10.0,
    };
    let rep = check_sandwich(&tr, &p, z0, Some(zbar), 1.0).unwrap();
    assert!(rep.pass);
    let (lo, hi, x) = rep.exponents.unwrap();
    assert!((lo - s).abs() < 1e-9 && (hi - s).abs() < 1e-9 && (x - s).abs() < 1e-9);

    tr.positions[5] = Some(0.25 * tr.times[5].powf(s));
    tr.positions[7] = None;
    let rep = check_sandwich(&tr, &p, z0, Some(zbar), 1.0).unwrap();
    assert!(!rep.pass);
    assert_eq!(rep.failures().count(), 1);
    assert_eq!(rep.missing, vec![tr.times[7]]);
}

#[test]
fn algebraic_tail_slope_is_exact() {
    let grid = Grid::new((0..500).map(|i| 10f64.powf(1.0 + 4.0 * i as f64 / 499.0)).collect()).unwrap();
    let f = Field { t: 1.0, values: grid.nodes.iter().map(|x| 7.0 * x.powi(-4)).collect() };
    let fit = tail_exponent(&grid, &f, (1e2, 1e4)).unwrap();
    assert!((fit.slope + 4.0).abs() < 1e-12);
    assert!((fit.prefactor / 7.0 - 1.0).abs() < 1e-10);
}

/// `9 t² x^{−4}` solves pure fast diffusion with `m = 1/2` exactly; it is the
/// self-similar field generated by the reaction-free tail `C∞ z^{−4}`.
#[test]
fn reaction_free_tail_field_has_small_residual() {
    let c = c_infinity(0.5);
    assert!((c - 9.0).abs() < 1e-12);
    let (a, s) = (5.0, 1.75);
    let field = move |t: f64, x: f64| t.powf(-a) * c * (x / t.powf(s)).powi(-4);
    let samples: Vec<ResidualSample> = [1.0, 10.0, 100.0]
        .iter()
        .flat_map(|&t| {
            [10.0, 100.0, 1000.0].into_iter().map(move |x| ResidualSample { t, x, ht: 1e-3 * t, hx: 1e-3 * x })
        })
        .collect();
    let zero = |_: f64| 0.0;
    let rep = verify_parabolic_residual(&field, 0.5, &zero, &samples, Sign::NonPositive, 0.0, "tail").unwrap();
    assert!(rep.worst_relative.abs() < 1e-8, "{rep:?}");
    let rep = verify_parabolic_residual(&field, 0.5, &zero, &samples, Sign::NonNegative, 0.0, "tail").unwrap();
    assert!(rep.worst_relative.abs() < 1e-8, "{rep:?}");
}
