//! Minimum of the collective cooling rate of a Lambda (EIT) qudit for two
//! drive strengths. A negative minimum marks an amplitude window where the
//! motion is amplified.

use phonon_chill::floquet::TruncationOptions;
use phonon_chill::qudit::{OscillatorSpec, QuditSpec, ThreeLevelParams};
use phonon_chill::rates::{log_grid, rate_curve, CoolingModel, RateOptions};

fn lambda(omega: f64) -> QuditSpec {
    QuditSpec::Lambda(ThreeLevelParams {
        delta1: -50.0,
        delta2: -50.0,
        omega1: omega,
        omega2: omega,
        gamma1: 10.0,
        gamma2: 10.0,
    })
}

fn main() -> phonon_chill::Result<()> {
    let opts = RateOptions {
        truncation: TruncationOptions {
            n_ceiling: 1024,
            ..TruncationOptions::default()
        },
        r_floor: None,
    };
    let grid = log_grid(1e-2, 300.0, 80);
    for omega in [1.0, 10.0] {
        let model = CoolingModel::new(lambda(omega), OscillatorSpec::new(2e-5, 300.0, 0.1)?)?;
        let curve = rate_curve(&model, &grid, &opts)?;
        let (r, g) = curve.min_cooling();
        println!("Omega = {omega:>4}: min Gamma_c = {g:+.4e} at r = {r:.2}");
        for gamma in [2e-5, 1e-4, 4e-4] {
            let (r, g) = curve.rethermalize(gamma, 300.0)?.min_cooling();
            let window = curve
                .rethermalize(gamma, 300.0)?
                .lasing_radius()
                .map_or("none".to_string(), |rl| format!("up to r = {rl:.1}"));
            println!("    gamma = {gamma:.0e}: min {g:+.3e} at r = {r:.1}, negative window {window}");
        }
    }
    Ok(())
}
