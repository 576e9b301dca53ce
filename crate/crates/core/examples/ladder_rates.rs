//! Collective cooling and heating rates of a Ladder qudit against its
//! effective two-level system.

use phonon_chill::qudit::{OscillatorSpec, QuditSpec, ThreeLevelParams};
use phonon_chill::rates::{ld_rates, log_grid, rate_curve, CoolingModel, LdConvention, RateOptions};

fn main() -> phonon_chill::Result<()> {
    let ladder = QuditSpec::Ladder(ThreeLevelParams {
        delta1: 0.8,
        delta2: 0.0,
        omega1: 0.6,
        omega2: 0.4f64.sqrt(),
        gamma1: 2.0,
        gamma2: 0.0,
    });
    let osc = OscillatorSpec::new(5e-5, 100.0, 0.1)?;
    let tls = ladder.effective_tls().expect("ladder has an effective TLS");

    let grid = log_grid(1e-2, 50.0, 25);
    let opts = RateOptions::default();
    let full = CoolingModel::new(ladder, osc)?;
    let reduced = CoolingModel::new(tls, osc)?;
    let a = rate_curve(&full, &grid, &opts)?;
    let b = rate_curve(&reduced, &grid, &opts)?;

    let ld = ld_rates(&full, LdConvention::Lindblad)?;
    println!(
        "alpha_ss = {:.3e}, LD: Gamma_c = {:.4e}, n_LD = {:.4}",
        full.alpha_ss(),
        ld.gamma_c,
        ld.n_ld.unwrap_or(f64::NAN)
    );
    println!("{:>10} {:>14} {:>14} {:>14}", "r", "Gamma_c", "Gamma_c(TLS)", "gammaN");
    for k in 0..grid.len() {
        println!(
            "{:10.4} {:14.6e} {:14.6e} {:14.6e}",
            a.r[k], a.gamma_c[k], b.gamma_c[k], a.gamma_n[k]
        );
    }
    Ok(())
}
