//! Final excitation of a Ladder-cooled oscillator against background
//! temperature, driven through the scenario layer from an inline config.

use phonon_chill::config::parse_config;
use phonon_chill::scenario::compute_steady;

const CONFIG: &str = "
qudit.layout = ladder
qudit.delta1 = 0.8
qudit.delta2 = 0
qudit.omega1 = 0.6
qudit.omega2 = 0.6324555320336759
qudit.gamma1 = 2
qudit.gamma2 = 0
qudit.effective_tls = true
oscillator.gamma = 5e-5
oscillator.n_th = 100
oscillator.eta = 0.1
solver.n_ceiling = 1024
command.sweep = n_th
command.sweep_range = 10, 10000, 10
";

fn main() -> phonon_chill::Result<()> {
    let cfg = parse_config(CONFIG)?;
    for sweep in compute_steady(&cfg)? {
        println!("[{}]", sweep.label);
        for row in &sweep.rows {
            println!(
                "N_th = {:8.1}  n_f = {:10.3}  n_LD = {:8.3}  eta sqrt(n_LD) = {:.3}  peaks = {}",
                row.n_th,
                row.n_f,
                row.n_ld.unwrap_or(f64::NAN),
                row.mld,
                row.peaks
            );
        }
    }
    Ok(())
}
