//! Relaxation of the mean excitation from hot thermal states under Ladder
//! cooling, integrated with the conservative implicit scheme.

use phonon_chill::fokker_planck::{evolve_p, steady_p, thermal_dist, EvolveOptions, InterpolatedRates, RadialGrid};
use phonon_chill::qudit::{OscillatorSpec, QuditSpec, ThreeLevelParams};
use phonon_chill::rates::{log_grid, rate_curve, CoolingModel, RateOptions};

fn main() -> phonon_chill::Result<()> {
    let spec = QuditSpec::Ladder(ThreeLevelParams {
        delta1: 0.8,
        delta2: 0.0,
        omega1: 0.6,
        omega2: 2.0,
        gamma1: 20.0,
        gamma2: 0.0,
    });
    let model = CoolingModel::new(spec, OscillatorSpec::new(5e-5, 20.0, 0.1)?)?;
    let curve = rate_curve(&model, &log_grid(1e-2, 80.0, 60), &RateOptions::default())?;
    let profile = InterpolatedRates::new(&curve)?;
    let grid = RadialGrid::with_spacing(80.0, 0.02)?;
    let eq = steady_p(&profile, grid)?;
    println!("equilibrium n_f = {:.4}", eq.mean_excitation());

    let opts = EvolveOptions {
        dt: 20.0,
        t_end: 2e4,
        record_every: 100,
        snapshot_every: None,
    };
    for n0 in [50.0, 25.0] {
        let res = evolve_p(&profile, &thermal_dist(n0, grid)?, &opts)?;
        let trace: Vec<String> = res.mean_excitation.iter().map(|n| format!("{n:.3}")).collect();
        println!("n(0) = {n0}: {}", trace.join(" "));
        println!(
            "    norm drift {:.1e}, distance to equilibrium {:.2e}",
            res.norm_drift,
            res.final_state.l1_distance(&eq)?
        );
    }
    Ok(())
}
