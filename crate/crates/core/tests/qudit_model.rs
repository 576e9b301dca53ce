mod common;

use common::*;
use phonon_chill::linalg::{CMat, CVec, C64};
use phonon_chill::ode::{DormandPrince, OdeOptions};
use phonon_chill::qudit::{
    alpha_residual, build_bloch_matrices, build_level_system, reduce_trace, solve_alpha_ss, solve_static_steady,
    AlphaOptions, BlochSystem, GenericQudit, Jump, QuditSpec, TwoLevelParams,
};
use proptest::prelude::*;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Bloch entry `(m, n)` holds `ρ_nm`, which sits at `n + d·m` in `vec(ρ)`.
fn permuted_oracle(sys: &phonon_chill::qudit::LevelSystem, bloch: &BlochSystem) -> CMat {
    let d = sys.dim();
    let big = kron_liouvillian(sys);
    let idx: Vec<usize> = bloch.basis.elements().iter().map(|&(m, n)| n + d * m).collect();
    CMat::from_fn(idx.len(), idx.len(), |i, j| big[(idx[i], idx[j])])
}

#[test]
fn bloch_matrix_matches_kronecker_liouvillian() {
    for spec in [ladder_slow(), ladder_fast(), lambda_eit()] {
        let sys = build_level_system(&spec).unwrap();
        let bloch = build_bloch_matrices(&sys);
        let oracle = permuted_oracle(&sys, &bloch);
        let err = (&bloch.m - &oracle).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-13, "{:?}: {err}", spec.layout());
        assert!(bloch.trace_leak() < 1e-13);
    }
}

#[test]
fn two_level_population_closed_form() {
    for (delta, omega, gamma) in [(0.0, 1.0, 1.0), (0.8, 0.6, 0.4), (-3.0, 2.0, 5.0)] {
        let spec = QuditSpec::TwoLevel(TwoLevelParams {
            detuning: delta,
            rabi: omega,
            decay: gamma,
        });
        let bloch = build_bloch_matrices(&build_level_system(&spec).unwrap());
        let reduced = reduce_trace(&bloch, zero(), 0.0).unwrap();
        let ss = solve_static_steady(&reduced).unwrap();
        let expected = (omega * omega / 4.0) / (delta * delta + gamma * gamma / 4.0 + omega * omega / 2.0);
        assert!((ss.population(1) - expected).abs() < 1e-13);
        assert!((ss.trace() - 1.0).norm() < 1e-13);
    }
}

#[test]
fn reduced_solve_matches_null_space() {
    for spec in [ladder_slow(), lambda_eit()] {
        let bloch = build_bloch_matrices(&build_level_system(&spec).unwrap());
        let reduced = reduce_trace(&bloch, zero(), 0.0).unwrap();
        let ss = solve_static_steady(&reduced).unwrap();
        // null vector of M from the SVD, normalized to unit trace
        let svd = bloch.m.clone().svd(true, true);
        let (k, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, &s)| if s < acc.1 { (k, s) } else { acc });
        let v_t = svd.v_t.unwrap();
        let null: CVec = v_t.row(k).adjoint();
        let null = &null / bloch.trace_row.dot(&null);
        let err = (&null - &ss.values).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        assert!(ss.hermiticity_error() < 1e-12);
        assert!((&bloch.m * &ss.values).norm() < 1e-12);
    }
}

#[test]
fn lambda_dark_state_is_reached_dynamically() {
    let sys = build_level_system(&lambda_eit()).unwrap();
    let bloch = build_bloch_matrices(&sys);
    let reduced = reduce_trace(&bloch, zero(), 0.0).unwrap();
    let ss = solve_static_steady(&reduced).unwrap();
    // equal Rabi frequencies on Raman resonance: (|g⟩ - |e⟩)/√2, no excitation
    assert!(ss.population(2) < 1e-12);
    assert!((ss.population(0) - 0.5).abs() < 1e-10);
    assert!((ss.entry(0, 1) + 0.5).norm() < 1e-10);

    // on resonance the pumping is fast enough to integrate directly from |d⟩
    let spec = QuditSpec::Lambda(phonon_chill::qudit::ThreeLevelParams {
        delta1: 0.0,
        delta2: 0.0,
        omega1: 1.0,
        omega2: 1.0,
        gamma1: 1.0,
        gamma2: 1.0,
    });
    let sys = build_level_system(&spec).unwrap();
    let ss = solve_static_steady(&reduce_trace(&build_bloch_matrices(&sys), zero(), 0.0).unwrap()).unwrap();
    let mut rho0 = CMat::zeros(3, 3);
    rho0[(2, 2)] = C64::new(1.0, 0.0);
    let mut dp = DormandPrince::new(OdeOptions {
        rtol: 1e-10,
        atol: 1e-12,
        ..OdeOptions::default()
    });
    let y = dp
        .advance(
            |_, y| {
                let rho = CMat::from_column_slice(3, 3, y.as_slice());
                CVec::from_column_slice(sys.lindblad(&rho).as_slice())
            },
            0.0,
            CVec::from_column_slice(rho0.as_slice()),
            400.0,
        )
        .unwrap();
    let rho = CMat::from_column_slice(3, 3, y.as_slice());
    let err = (&rho - ss.density_matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-5, "{err}");
}

#[test]
fn displacement_is_self_consistent() {
    let osc = ladder_osc();
    let bloch = build_bloch_matrices(&build_level_system(&ladder_slow()).unwrap());
    let alpha = solve_alpha_ss(&bloch, &osc, AlphaOptions::default()).unwrap();
    assert!(alpha_residual(&bloch, &osc, alpha).unwrap() < 1e-10);
    // weak coupling: |α| ≈ η |⟨σ_ee⟩| / |1 + iγ/2ν|
    let ss = solve_static_steady(&reduce_trace(&bloch, alpha, osc.lambda).unwrap()).unwrap();
    let estimate = osc.eta() * ss.population(1) / C64::new(1.0, osc.gamma / 2.0).norm();
    assert!(
        (alpha.norm() - estimate).abs() < 1e-10 * estimate.max(1.0),
        "{} vs {estimate}",
        alpha.norm()
    );

    let lambda_osc = lambda_osc(4e-4);
    let bloch = build_bloch_matrices(&build_level_system(&lambda_eit()).unwrap());
    let alpha = solve_alpha_ss(&bloch, &lambda_osc, AlphaOptions::default()).unwrap();
    assert!(alpha_residual(&bloch, &lambda_osc, alpha).unwrap() < 1e-10);
}

#[test]
fn uncoupled_displacement_vanishes() {
    let bloch = build_bloch_matrices(&build_level_system(&ladder_slow()).unwrap());
    let osc = phonon_chill::qudit::OscillatorSpec::new(1e-4, 10.0, 0.0).unwrap();
    assert_eq!(solve_alpha_ss(&bloch, &osc, AlphaOptions::default()).unwrap(), zero());
}

#[test]
fn non_hermitian_generic_is_rejected() {
    let mut h = CMat::zeros(2, 2);
    h[(0, 1)] = C64::new(1.0, 0.0);
    let spec = QuditSpec::Generic(GenericQudit {
        hamiltonian: h,
        coupling: CMat::identity(2, 2),
        jumps: vec![Jump::transition(2, 1, 0, 1.0)],
    });
    assert!(build_level_system(&spec).is_err());
}

fn hermitian_from(values: &[f64], d: usize) -> CMat {
    let mut h = CMat::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        h[(i, i)] = C64::new(values[k], 0.0);
        k += 1;
        for j in 0..i {
            let z = C64::new(values[k], values[k + 1]);
            k += 2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generic_qudit_matches_oracle(
        d in 2usize..5,
        values in prop::collection::vec(-2.0f64..2.0, 32),
        rates in prop::collection::vec(0.1f64..3.0, 4),
    ) {
        let h = hermitian_from(&values, d);
        let v = hermitian_from(&values[16..], d);
        let jumps = (1..d).map(|k| Jump::transition(d, k, k - 1, rates[k - 1])).collect();
        let sys = build_level_system(&QuditSpec::Generic(GenericQudit { hamiltonian: h, coupling: v, jumps })).unwrap();
        let bloch = build_bloch_matrices(&sys);
        let oracle = permuted_oracle(&sys, &bloch);
        let err = (&bloch.m - &oracle).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12);
        prop_assert!(bloch.trace_leak() < 1e-12);

        let reduced = reduce_trace(&bloch, C64::new(values[0] * 0.01, 0.0), 0.1).unwrap();
        // transform round trip on a random Bloch vector
        let x = CVec::from_iterator(bloch.basis.len(), values.iter().take(bloch.basis.len()).map(|&t| C64::new(t, -t)));
        let y = reduced.lift(&reduced.to_reduced(&x), bloch.trace_row.dot(&x));
        prop_assert!((&y - &x).norm() < 1e-12 * x.norm().max(1.0));

        let ss = solve_static_steady(&reduced).unwrap();
        prop_assert!(ss.hermiticity_error() < 1e-10);
        prop_assert!((ss.trace() - 1.0).norm() < 1e-12);
        for k in 0..d {
            prop_assert!(ss.population(k) > -1e-12);
        }
    }
}
