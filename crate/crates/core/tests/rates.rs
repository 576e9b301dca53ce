mod common;

use common::*;
use phonon_chill::floquet::Sideband;
use phonon_chill::ode::OdeOptions;
use phonon_chill::oracle::correlation_spectrum_oracle;
use phonon_chill::qudit::{OscillatorSpec, QuditSpec, ThreeLevelParams, TwoLevelParams};
use phonon_chill::rates::{
    collective_rates, jump_radius, ld_rates, ld_spectral, log_grid, rate_curve, sideband_amplitudes, CoolingModel,
    LdConvention, RateMethod, RateOptions,
};

fn fast_lambda() -> QuditSpec {
    QuditSpec::Lambda(ThreeLevelParams {
        delta1: 2.0,
        delta2: 2.0,
        omega1: 1.0,
        omega2: 1.5,
        gamma1: 1.0,
        gamma2: 1.0,
    })
}

fn tls() -> QuditSpec {
    QuditSpec::TwoLevel(TwoLevelParams {
        detuning: -1.0,
        rabi: 0.5,
        decay: 0.8,
    })
}

#[test]
fn ld_spectrum_matches_time_domain_correlation() {
    let opts = OdeOptions {
        rtol: 1e-12,
        atol: 1e-14,
        ..OdeOptions::default()
    };
    for spec in [ladder_slow(), ladder_fast(), tls(), fast_lambda()] {
        let model = CoolingModel::new(spec.clone(), ladder_osc()).unwrap();
        for side in [Sideband::Plus, Sideband::Minus] {
            let s = ld_spectral(&model.reduced, side, 1.0).unwrap();
            let oracle = correlation_spectrum_oracle(&model.bloch, &model.reduced, side, 1.0, 400.0, &opts).unwrap();
            let err = rel(s, oracle);
            assert!(err < 1e-6, "{:?} {side:?}: {s} vs {oracle}", spec.layout());
        }
    }
}

#[test]
fn red_detuned_ladder_cools_and_spectrum_is_positive() {
    for spec in [ladder_slow(), ladder_fast()] {
        let model = CoolingModel::new(spec, ladder_osc()).unwrap();
        let ld = ld_rates(&model, LdConvention::Lindblad).unwrap();
        assert!(ld.s_plus[0] > ld.s_minus[0], "{:?}", ld);
        assert!(ld.s_minus[0] > 0.0);
        assert!(!ld.unstable);
        assert!(ld.n_ld.unwrap() > 0.0);
    }
}

#[test]
fn conventions_differ_by_factor_two() {
    let model = CoolingModel::new(ladder_slow(), ladder_osc()).unwrap();
    let a = ld_rates(&model, LdConvention::Lindblad).unwrap();
    let b = ld_rates(&model, LdConvention::Text).unwrap();
    let g = model.osc.gamma;
    assert!(((a.gamma_c - g) - 2.0 * (b.gamma_c - g)).abs() < 1e-15);
}

#[test]
fn zero_coupling_is_exactly_bare() {
    let osc = OscillatorSpec::new(3e-4, 70.0, 0.0).unwrap();
    let model = CoolingModel::new(ladder_slow(), osc).unwrap();
    for r in [0.0, 1.0, 25.0] {
        let cr = collective_rates(&model.reduced, &model.osc, r, &RateOptions::default()).unwrap();
        assert_eq!(cr.gamma_c, 3e-4);
        assert_eq!(cr.gamma_n, 3e-4 * 70.0);
    }
    let curve = rate_curve(&model, &[0.5, 2.0], &RateOptions::default()).unwrap();
    assert_eq!(curve.len(), 2);
    assert!(curve.gamma_c.iter().all(|&g| g == 3e-4));
    assert!(curve.lasing_radius().is_none());
}

#[test]
fn small_amplitude_uses_linear_response() {
    let model = CoolingModel::new(ladder_slow(), ladder_osc()).unwrap();
    let opts = RateOptions::default();
    let below = collective_rates(&model.reduced, &model.osc, 0.5 * opts.floor_for(0.1), &opts).unwrap();
    let above = collective_rates(&model.reduced, &model.osc, 2.0 * opts.floor_for(0.1), &opts).unwrap();
    assert_eq!(below.method, RateMethod::LinearResponse);
    assert_eq!(above.method, RateMethod::ContinuedFraction);
    assert!((below.gamma_c - above.gamma_c).abs() < 1e-4 * above.gamma_c);
}

#[test]
fn ladder_cooling_collapses_at_large_amplitude() {
    let model = CoolingModel::new(ladder_slow(), ladder_osc()).unwrap();
    let opts = RateOptions::default();
    let small = collective_rates(&model.reduced, &model.osc, 0.01, &opts).unwrap();
    let large = collective_rates(&model.reduced, &model.osc, 30.0, &opts).unwrap();
    assert!(
        large.gamma_c / small.gamma_c < 1e-2,
        "{} / {}",
        large.gamma_c,
        small.gamma_c
    );
    assert!(large.gamma_c < 3.0 * model.osc.gamma && large.gamma_c > model.osc.gamma / 3.0);
}

#[test]
fn carrier_vanishes_at_bessel_zero() {
    let eta = 0.1;
    let r = 2.404_825_557_695_773 / (2.0 * eta);
    let j = sideband_amplitudes(eta, r, 3);
    assert!(j[0].abs() < 1e-14);
    assert!((j[1] - 0.519_147_497_289_466).abs() < 1e-12);
    assert_eq!(jump_radius(eta), 5.0);
}

#[test]
fn grid_helper_is_logarithmic() {
    let g = log_grid(0.01, 100.0, 5);
    for (a, b) in g.iter().zip([0.01, 0.1, 1.0, 10.0, 100.0]) {
        assert!((a - b).abs() < 1e-12 * b);
    }
}
