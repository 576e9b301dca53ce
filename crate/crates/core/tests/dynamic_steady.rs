mod common;

use common::*;
use phonon_chill::floquet::{solve_dynamic_steady, solve_harmonics_fixed, DriveContext, Sideband, TruncationOptions};
use phonon_chill::harmonics::{series_product, HarmonicSeries};
use phonon_chill::linalg::C64;
use phonon_chill::oracle::{oracle_harmonics, OracleOptions};
use phonon_chill::qudit::{
    build_bloch_matrices, build_level_system, reduce_trace, QuditSpec, ReducedBloch, ThreeLevelParams,
};
use phonon_chill::rates::{ld_spectral, CoolingModel};
use phonon_chill::scenario::{floquet_discrepancy, floquet_point, oracle_point};
use proptest::prelude::*;

fn reduced_for(spec: &QuditSpec, lambda: f64) -> ReducedBloch {
    let bloch = build_bloch_matrices(&build_level_system(spec).unwrap());
    reduce_trace(&bloch, C64::new(0.0, 0.0), lambda).unwrap()
}

#[test]
fn ladder_all_harmonics_match_oracle() {
    let model = CoolingModel::new(ladder_slow(), ladder_osc()).unwrap();
    let ctx = DriveContext::new(&model.reduced, 5.0, 1.0).unwrap();
    let cf = solve_dynamic_steady(&ctx, &TruncationOptions::default()).unwrap();
    let oracle = oracle_harmonics(&ctx, &OracleOptions::default()).unwrap();
    let scale = cf.bloch.series.at(0).norm();
    for n in -8..=8 {
        let err = (cf.bloch.series.at(n) - oracle.at(n)).norm() / scale;
        assert!(err < 1e-6, "harmonic {n}: {err}");
    }
}

#[test]
fn lambda_points_match_oracle() {
    let model = CoolingModel::new(lambda_eit(), lambda_osc(4e-4)).unwrap();
    for r in [10.0, 20.0] {
        let ctx = DriveContext::new(&model.reduced, r, 1.0).unwrap();
        let cf = floquet_point(&ctx, &TruncationOptions::default()).unwrap();
        let oracle = oracle_point(&ctx).unwrap();
        let err = floquet_discrepancy(&cf, &oracle);
        assert!(err < 1e-5, "r = {r}: {err}");
    }
}

#[test]
fn weak_drive_reduces_to_static_spectrum() {
    for spec in [ladder_slow(), lambda_eit()] {
        let reduced = reduced_for(&spec, 1e-6);
        let ctx = DriveContext::new(&reduced, 1.0, 1.0).unwrap();
        let dss = solve_dynamic_steady(&ctx, &TruncationOptions::default()).unwrap();
        let ld = ld_spectral(&reduced, Sideband::Minus, 1.0).unwrap();
        let err = rel(dss.spectral_minus.series.at(0), ld);
        assert!(err < 1e-8, "{:?}: {err}", spec.layout());
    }
}

#[test]
fn coupling_harmonics_are_conjugate_symmetric() {
    let model = CoolingModel::new(ladder_fast(), ladder_osc()).unwrap();
    let ctx = DriveContext::new(&model.reduced, 12.0, 1.0).unwrap();
    let dss = solve_dynamic_steady(&ctx, &TruncationOptions::default()).unwrap();
    for n in 0..=10 {
        let err = (dss.v.at(-n) - dss.v.at(n).conj()).norm();
        assert!(err < 1e-12, "n = {n}: {err}");
    }
}

#[test]
fn truncation_error_shrinks_with_cutoff() {
    let reduced = reduced_for(&ladder_slow(), 0.1);
    let ctx = DriveContext::new(&reduced, 30.0, 1.0).unwrap();
    let reference = solve_harmonics_fixed(&ctx, 128).unwrap().at(0);
    let errors: Vec<f64> = [4usize, 8, 16, 32]
        .iter()
        .map(|&n| (solve_harmonics_fixed(&ctx, n).unwrap().at(0) - &reference).norm())
        .collect();
    for w in errors.windows(2) {
        assert!(w[1] < w[0], "{errors:?}");
    }
    assert!(errors[3] < 1e-10 * reference.norm(), "{errors:?}");
}

#[test]
fn series_product_is_pointwise() {
    let a = HarmonicSeries::new(
        (0..7)
            .map(|k| C64::new(0.3 * k as f64 - 1.0, 0.1 * (k * k) as f64))
            .collect(),
        1.7,
    )
    .unwrap();
    let b = HarmonicSeries::new(vec![C64::new(0.5, -0.2), C64::new(1.0, 0.0), C64::new(-0.3, 0.7)], 1.7).unwrap();
    let p = series_product(&a, &b).unwrap();
    assert_eq!(p.span(), 4);
    for t in [0.0, 0.4, 1.3, 2.9] {
        assert!((p.evaluate(t) - a.evaluate(t) * b.evaluate(t)).norm() < 1e-12);
    }
}

fn random_spec(ladder: bool, p: &[f64]) -> QuditSpec {
    let params = ThreeLevelParams {
        delta1: p[0],
        delta2: p[1],
        omega1: p[2],
        omega2: p[3],
        gamma1: p[4],
        gamma2: p[5],
    };
    if ladder {
        QuditSpec::Ladder(params)
    } else {
        QuditSpec::Lambda(params)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn random_draws_match_oracle(
        ladder in any::<bool>(),
        detunings in prop::collection::vec(-3.0f64..3.0, 2),
        rabi in prop::collection::vec(0.1f64..3.0, 2),
        rates in prop::collection::vec(0.1f64..20.0, 2),
        r in 0.5f64..30.0,
        lambda in 0.01f64..0.2,
    ) {
        let p = [detunings[0], detunings[1], rabi[0], rabi[1], rates[0], rates[1]];
        let reduced = reduced_for(&random_spec(ladder, &p), lambda);
        let ctx = DriveContext::new(&reduced, r, 1.0).unwrap();
        let opts = TruncationOptions { n_ceiling: 1024, ..TruncationOptions::default() };
        let cf = floquet_point(&ctx, &opts).unwrap();
        let oracle = oracle_point(&ctx).unwrap();
        let err = floquet_discrepancy(&cf, &oracle);
        prop_assert!(err < 1e-5, "{p:?} r={r} λ={lambda}: {err}");
        prop_assert!(cf.0.iter().all(|z: &C64| z.is_finite()));
    }
}
