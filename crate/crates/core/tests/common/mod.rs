#![allow(dead_code)]

use phonon_chill::linalg::{CMat, C64};
use phonon_chill::qudit::{LevelSystem, OscillatorSpec, QuditSpec, ThreeLevelParams};

pub fn ladder_slow() -> QuditSpec {
    QuditSpec::Ladder(ThreeLevelParams {
        delta1: 0.8,
        delta2: 0.0,
        omega1: 0.6,
        omega2: 0.4f64.sqrt(),
        gamma1: 2.0,
        gamma2: 0.0,
    })
}

pub fn ladder_fast() -> QuditSpec {
    QuditSpec::Ladder(ThreeLevelParams {
        delta1: 0.8,
        delta2: 0.0,
        omega1: 0.6,
        omega2: 2.0,
        gamma1: 20.0,
        gamma2: 0.0,
    })
}

pub fn lambda_eit() -> QuditSpec {
    QuditSpec::Lambda(ThreeLevelParams {
        delta1: -50.0,
        delta2: -50.0,
        omega1: 1.0,
        omega2: 1.0,
        gamma1: 10.0,
        gamma2: 10.0,
    })
}

pub fn ladder_osc() -> OscillatorSpec {
    OscillatorSpec::new(5e-5, 100.0, 0.1).unwrap()
}

pub fn lambda_osc(gamma: f64) -> OscillatorSpec {
    OscillatorSpec::new(gamma, 300.0, 0.1).unwrap()
}

/// Column-stacked Liouvillian `vec(L ρ) = 𝓛 vec(ρ)` built with Kronecker
/// products, independent of the Bloch-basis code.
pub fn kron_liouvillian(sys: &LevelSystem) -> CMat {
    let d = sys.dim();
    let id = CMat::identity(d, d);
    let i = C64::new(0.0, 1.0);
    let h = &sys.hamiltonian;
    let mut l = (id.kronecker(h) - h.transpose().kronecker(&id)) * (-i);
    for j in &sys.jumps {
        let a = &j.operator;
        let ada = a.adjoint() * a;
        let term = a.conjugate().kronecker(a)
            - id.kronecker(&ada) * C64::new(0.5, 0.0)
            - ada.transpose().kronecker(&id) * C64::new(0.5, 0.0);
        l += term * C64::new(j.rate, 0.0);
    }
    l
}

pub fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(a.norm()).max(1e-300)
}
