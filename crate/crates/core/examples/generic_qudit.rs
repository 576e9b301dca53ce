//! A user-defined four-level qudit: two ground states, a cooling
//! transition and a repumper.

use phonon_chill::linalg::{ket_bra, C64};
use phonon_chill::qudit::{GenericQudit, Jump, OscillatorSpec, QuditSpec};
use phonon_chill::rates::{ld_rates, log_grid, rate_curve, CoolingModel, LdConvention, RateOptions};

fn main() -> phonon_chill::Result<()> {
    let d = 4;
    let re = |x: f64| C64::new(x, 0.0);
    // |0⟩, |1⟩ ground, |2⟩ cooling level, |3⟩ repump level
    let mut h = ket_bra(d, 2, 2) * re(0.9) + ket_bra(d, 3, 3) * re(0.5);
    h += (ket_bra(d, 0, 2) + ket_bra(d, 2, 0)) * re(0.3);
    h += (ket_bra(d, 1, 3) + ket_bra(d, 3, 1)) * re(1.0);
    let spec = QuditSpec::Generic(GenericQudit {
        hamiltonian: h,
        coupling: ket_bra(d, 2, 2) + ket_bra(d, 3, 3),
        jumps: vec![
            Jump::transition(d, 2, 0, 0.4),
            Jump::transition(d, 3, 0, 2.0),
            Jump::transition(d, 2, 1, 0.05),
        ],
    });
    let model = CoolingModel::new(spec, OscillatorSpec::new(1e-4, 50.0, 0.08)?)?;
    let ld = ld_rates(&model, LdConvention::Lindblad)?;
    println!(
        "LD: Gamma_c = {:.4e}, gammaN = {:.4e}, n_LD = {:?}",
        ld.gamma_c, ld.gamma_n, ld.n_ld
    );
    let curve = rate_curve(&model, &log_grid(1e-2, 60.0, 12), &RateOptions::default())?;
    for k in 0..curve.len() {
        println!(
            "r = {:8.3}: Gamma_c = {:+.4e}, gammaN = {:.4e}",
            curve.r[k], curve.gamma_c[k], curve.gamma_n[k]
        );
    }
    Ok(())
}
