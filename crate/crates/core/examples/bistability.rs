//! Equilibrium radial P function of a strongly driven Lambda qudit around
//! the lasing threshold, with its local maxima.

use phonon_chill::floquet::TruncationOptions;
use phonon_chill::fokker_planck::{default_r_max, steady_p_from_curve, RadialGrid};
use phonon_chill::qudit::{OscillatorSpec, QuditSpec, ThreeLevelParams};
use phonon_chill::rates::{log_grid, rate_curve, CoolingModel, RateOptions};

fn main() -> phonon_chill::Result<()> {
    let spec = QuditSpec::Lambda(ThreeLevelParams {
        delta1: -50.0,
        delta2: -50.0,
        omega1: 10.0,
        omega2: 10.0,
        gamma1: 10.0,
        gamma2: 10.0,
    });
    let n_th = 300.0;
    let model = CoolingModel::new(spec, OscillatorSpec::new(2e-5, n_th, 0.1)?)?;
    let opts = RateOptions {
        truncation: TruncationOptions {
            n_ceiling: 1024,
            ..TruncationOptions::default()
        },
        r_floor: None,
    };
    let base = rate_curve(&model, &log_grid(1e-2, 600.0, 120), &opts)?;
    for gamma in [1e-4, 2e-4, 3e-4, 4e-4, 1e-3] {
        let curve = base.rethermalize(gamma, n_th)?;
        let r_max = default_r_max(n_th, curve.lasing_radius(), 0.1).min(600.0);
        let dist = steady_p_from_curve(&curve, RadialGrid::with_spacing(r_max, 0.05)?)?;
        let peaks: Vec<String> = dist.peak_radii(3).iter().map(|r| format!("{r:.1}")).collect();
        println!(
            "gamma = {gamma:.1e}: n_f = {:10.2}, peaks at r = [{}]",
            dist.mean_excitation(),
            peaks.join(", ")
        );
    }
    Ok(())
}
