//! Step-rate toy model: final excitation across the jump radius, closed
//! form against the Fokker-Planck quadrature.

use phonon_chill::fokker_planck::{steady_p, toy_nf_printed, toy_transition_scan, RadialGrid, StepRates};
use phonon_chill::rates::log_grid;

fn main() -> phonon_chill::Result<()> {
    let (n_plus, r_c) = (2000.0, 5.0);
    println!("{:>10} {:>12} {:>12} {:>12}", "n_LD", "n_f", "quadrature", "printed");
    for (n_ld, n_f) in toy_transition_scan(n_plus, r_c, &log_grid(0.25, 2500.0, 13)) {
        let rates = StepRates::from_excitations(n_ld, n_plus, r_c, 1.0);
        let grid = RadialGrid::with_spacing(7.2 * n_plus.max(n_ld).sqrt(), r_c / 2500.0)?;
        let quad = steady_p(&rates, grid)?.mean_excitation();
        println!(
            "{n_ld:10.3} {n_f:12.5} {quad:12.5} {:12.5}",
            toy_nf_printed(n_ld, n_plus, r_c)
        );
    }
    Ok(())
}
