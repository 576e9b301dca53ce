//! Continued-fraction harmonics against direct time integration of the
//! driven Bloch equation.

use phonon_chill::floquet::{DriveContext, TruncationOptions};
use phonon_chill::qudit::{OscillatorSpec, QuditSpec, ThreeLevelParams};
use phonon_chill::rates::CoolingModel;
use phonon_chill::scenario::{floquet_discrepancy, floquet_point, oracle_point};
use std::time::Instant;

fn main() -> phonon_chill::Result<()> {
    let spec = QuditSpec::Ladder(ThreeLevelParams {
        delta1: 0.8,
        delta2: 0.0,
        omega1: 0.6,
        omega2: 0.4f64.sqrt(),
        gamma1: 2.0,
        gamma2: 0.0,
    });
    let model = CoolingModel::new(spec, OscillatorSpec::new(5e-5, 100.0, 0.1)?)?;
    for r in [1.0, 5.0, 20.0, 40.0] {
        let ctx = DriveContext::new(&model.reduced, r, 1.0)?;
        let t = Instant::now();
        let cf = floquet_point(&ctx, &TruncationOptions::default())?;
        let t_cf = t.elapsed();
        let t = Instant::now();
        let ode = oracle_point(&ctx)?;
        let t_ode = t.elapsed();
        println!(
            "r = {r:5.1}: V_-1 = {:.6e}, S_0 = {:.6e}, rel. diff {:.1e} (cf {:?}, ode {:?})",
            cf.1,
            cf.2,
            floquet_discrepancy(&cf, &ode),
            t_cf,
            t_ode
        );
    }
    Ok(())
}
