//! Adaptive Dormand-Prince 5(4) integrator for complex linear-algebra states.

use crate::error::{Error, Result};
use crate::linalg::{CVec, C64};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-11,
            atol: 1e-13,
            h_min: 1e-14,
            max_steps: 50_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// error weights: fifth minus fourth order
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lincomb(y: &CVec, h: f64, terms: &[(f64, &CVec)]) -> CVec {
    let mut out = y.clone();
    for (w, k) in terms {
        if *w != 0.0 {
            out.axpy(C64::new(h * w, 0.0), k, C64::new(1.0, 0.0));
        }
    }
    out
}

/// Stateful stepper remembering the last accepted step size across calls.
#[derive(Debug, Clone)]
pub struct DormandPrince {
    opts: OdeOptions,
    h: Option<f64>,
    pub steps: usize,
}

impl DormandPrince {
    pub fn new(opts: OdeOptions) -> Self {
        DormandPrince {
            opts,
            h: None,
            steps: 0,
        }
    }

    /// Integrates `dy/dt = f(t, y)` from `t0` to `t1` (forward only).
    pub fn advance<F>(&mut self, mut f: F, t0: f64, y0: CVec, t1: f64) -> Result<CVec>
    where
        F: FnMut(f64, &CVec) -> CVec,
    {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(y0);
        }
        let mut t = t0;
        let mut y = y0;
        let mut h = self.h.unwrap_or((span * 1e-3).max(1e-6)).min(span);
        let mut k1 = f(t, &y);
        loop {
            if self.steps >= self.opts.max_steps {
                return Err(Error::StepUnderflow { t });
            }
            let last = t + h >= t1;
            if last {
                h = t1 - t;
            }
            let k2 = f(t + C2 * h, &lincomb(&y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &lincomb(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * h, &lincomb(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + C5 * h,
                &lincomb(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &lincomb(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = lincomb(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(t + h, &y_new);
            let err = lincomb(
                &CVec::zeros(y.len()),
                h,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            let mut acc = 0.0;
            for i in 0..y.len() {
                let scale = self.opts.atol + self.opts.rtol * y[i].norm().max(y_new[i].norm());
                acc += (err[i].norm() / scale).powi(2);
            }
            let err_norm = (acc / y.len() as f64).sqrt();
            self.steps += 1;
            if err_norm <= 1.0 {
                t = if last { t1 } else { t + h };
                y = y_new;
                k1 = k7;
                let factor = if err_norm == 0.0 {
                    5.0
                } else {
                    (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last {
                    self.h = Some(h);
                }
                if last {
                    return Ok(y);
                }
                h *= factor;
            } else {
                h *= (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.9);
                if h < self.opts.h_min {
                    return Err(Error::StepUnderflow { t });
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotating_decay_matches_exponential() {
        let rate = C64::new(-0.3, 2.0);
        let mut dp = DormandPrince::new(OdeOptions::default());
        let y0 = CVec::from_element(1, C64::new(1.0, 0.5));
        let y = dp.advance(|_, y| y * rate, 0.0, y0.clone(), 7.0).unwrap();
        let exact = y0[0] * (rate * 7.0).exp();
        assert!((y[0] - exact).norm() < 1e-10);
    }

    #[test]
    fn forced_oscillator_with_time_dependence() {
        // y' = cos t, y(0) = 0 → y = sin t
        let mut dp = DormandPrince::new(OdeOptions::default());
        let y = dp
            .advance(
                |t, _| CVec::from_element(1, C64::new(t.cos(), 0.0)),
                0.0,
                CVec::zeros(1),
                3.0,
            )
            .unwrap();
        assert!((y[0].re - 3f64.sin()).abs() < 1e-11);
    }
}
