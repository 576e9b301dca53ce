//! ν-periodic dynamic steady state of the qudit driven by harmonic motion.
//!
//! With `α(t) - α_ss = r e^{-iνt}` the reduced Bloch equation reads
//! `dσ̃/dt = (M̃ - iλr(e^{iνt} + e^{-iνt})Ṽ) σ̃ + u`. Its periodic solution
//! `σ̃(t) = Σ σ⁽ⁿ⁾ e^{inνt}` obeys the block-tridiagonal recursion
//!
//! ```text
//! inν σ⁽ⁿ⁾ = M̃ σ⁽ⁿ⁾ - iλr Ṽ (σ⁽ⁿ⁺¹⁾ + σ⁽ⁿ⁻¹⁾) + δ_n0 u
//! ```
//!
//! which is solved here by matrix continued fractions: transfer matrices are
//! built from the outermost harmonic inward on both sides, the central block
//! is solved, and the solution is propagated back outward. The spectral
//! vector harmonics `S̃_n(±ν)` satisfy the same recursion with the diagonal
//! shifted by `±iν` and a source at every harmonic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonics::HarmonicSeries;
use crate::linalg::{self, c, CMat, CVec, C64, I};
use crate::qudit::ReducedBloch;

/// Reduced qudit driven at motional amplitude `r` (phase fixed to zero).
#[derive(Debug, Clone, Copy)]
pub struct DriveContext<'a> {
    pub reduced: &'a ReducedBloch,
    pub r: f64,
    pub nu: f64,
}

impl<'a> DriveContext<'a> {
    pub fn new(reduced: &'a ReducedBloch, r: f64, nu: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("motional amplitude must be >= 0, got {r}")));
        }
        Ok(DriveContext { reduced, r, nu })
    }

    pub fn lambda(&self) -> f64 {
        self.reduced.lambda
    }

    /// Off-diagonal block `-iλrṼ` coupling neighbouring harmonics.
    pub fn coupling(&self) -> CMat {
        &self.reduced.v * (-I * (self.lambda() * self.r))
    }
}

/// Which sideband the spectral function is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sideband {
    /// `S(+ν)`, the absorption (cooling) side.
    Plus,
    /// `S(-ν)`, the emission (heating) side.
    Minus,
}

impl Sideband {
    pub fn sign(self) -> f64 {
        match self {
            Sideband::Plus => 1.0,
            Sideband::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TruncationOptions {
    /// Initial harmonic cutoff `N_h`.
    pub n_start: usize,
    /// Largest cutoff tried before giving up.
    pub n_ceiling: usize,
    /// Relative change that counts as converged.
    pub tol: f64,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        TruncationOptions {
            n_start: 8,
            n_ceiling: 256,
            tol: 1e-10,
        }
    }
}

/// Converged harmonics together with the convergence history.
#[derive(Debug, Clone)]
pub struct HarmonicSolution<T> {
    pub series: HarmonicSeries<T>,
    pub n_h: usize,
    /// `(N_h, relative change)` for each doubling.
    pub trace: Vec<(usize, f64)>,
}

/// Solves `A_n x_n + B (x_{n+1} + x_{n-1}) + s_n = 0` for `|n| ≤ span`
/// with `A_n = base + (shift - inν)𝟙` and `x_{|n|>span} = 0`.
fn solve_ladder(
    base: &CMat,
    shift: C64,
    nu: f64,
    coupling: &CMat,
    source: &HarmonicSeries<CVec>,
    span: usize,
) -> Result<HarmonicSeries<CVec>> {
    let dim = base.nrows();
    let zero = CVec::zeros(dim);
    let block = |n: i64| -> CMat {
        let mut a = base.clone();
        let diag = shift - I * (n as f64 * nu);
        for k in 0..dim {
            a[(k, k)] += diag;
        }
        a
    };
    let invert = |a: &CMat, n: i64| -> Result<CMat> {
        let inv = a.clone().try_inverse().ok_or(Error::Resonance {
            harmonic: n,
            condition: f64::INFINITY,
        })?;
        let condition = linalg::norm1(a) * linalg::norm1(&inv);
        if !condition.is_finite() || condition > linalg::MAX_CONDITION {
            return Err(Error::Resonance { harmonic: n, condition });
        }
        Ok(inv)
    };
    let s = |n: i64| -> CVec { source.get(n).cloned().unwrap_or_else(|| zero.clone()) };
    let span_i = span as i64;

    // Upward side: x_n = K_n x_{n-1} + g_n for n = 1..span.
    let mut up_k: Vec<CMat> = vec![CMat::zeros(dim, dim); span + 2];
    let mut up_g: Vec<CVec> = vec![zero.clone(); span + 2];
    for n in (1..=span_i).rev() {
        let idx = n as usize;
        let d = block(n) + coupling * &up_k[idx + 1];
        let inv = invert(&d, n)?;
        up_k[idx] = -(&inv * coupling);
        up_g[idx] = -(&inv * (coupling * &up_g[idx + 1] + s(n)));
    }
    // Downward side: x_n = L_n x_{n+1} + h_n for n = -1..-span.
    let mut dn_k: Vec<CMat> = vec![CMat::zeros(dim, dim); span + 2];
    let mut dn_g: Vec<CVec> = vec![zero.clone(); span + 2];
    for n in (1..=span_i).rev() {
        let idx = n as usize;
        let d = block(-n) + coupling * &dn_k[idx + 1];
        let inv = invert(&d, -n)?;
        dn_k[idx] = -(&inv * coupling);
        dn_g[idx] = -(&inv * (coupling * &dn_g[idx + 1] + s(-n)));
    }

    let center = block(0) + coupling * (&up_k[1] + &dn_k[1]);
    let inv0 = invert(&center, 0)?;
    let rhs = -(s(0) + coupling * (&up_g[1] + &dn_g[1]));
    let x0 = inv0 * rhs;

    let mut coeffs = vec![zero; 2 * span + 1];
    coeffs[span] = x0;
    for n in 1..=span {
        let prev = coeffs[span + n - 1].clone();
        coeffs[span + n] = &up_k[n] * prev + &up_g[n];
        let next = coeffs[span - n + 1].clone();
        coeffs[span - n] = &dn_k[n] * next + &dn_g[n];
    }
    HarmonicSeries::new(coeffs, nu)
}

/// Bloch harmonics at a fixed truncation `|n| ≤ n_h`.
pub fn solve_harmonics_fixed(ctx: &DriveContext<'_>, n_h: usize) -> Result<HarmonicSeries<CVec>> {
    let source = HarmonicSeries::single(0, ctx.reduced.u.clone(), ctx.nu);
    solve_ladder(&ctx.reduced.m, c(0.0), ctx.nu, &ctx.coupling(), &source, n_h)
}

fn relative_change(old: &[&CVec], new: &[&CVec]) -> f64 {
    let mut diff = 0.0;
    let mut scale = 0.0;
    for (a, b) in old.iter().zip(new) {
        diff += (*a - *b).norm_squared();
        scale += b.norm_squared();
    }
    if diff == 0.0 {
        0.0
    } else {
        (diff / scale.max(f64::MIN_POSITIVE)).sqrt()
    }
}

fn scalar_change(old: &[C64], new: &[C64]) -> f64 {
    let diff: f64 = old.iter().zip(new).map(|(a, b)| (a - b).norm_sqr()).sum();
    let scale: f64 = new.iter().map(|b| b.norm_sqr()).sum();
    if diff == 0.0 {
        0.0
    } else {
        (diff / scale.max(f64::MIN_POSITIVE)).sqrt()
    }
}

/// Bloch harmonics `σ̃⁽ⁿ⁾` with the cutoff doubled until `σ̃⁽⁰⁾` and
/// `σ̃⁽⁻¹⁾` stop changing.
pub fn solve_harmonics(ctx: &DriveContext<'_>, opts: &TruncationOptions) -> Result<HarmonicSolution<CVec>> {
    let mut n_h = opts.n_start.max(1);
    let mut current = solve_harmonics_fixed(ctx, n_h)?;
    let mut trace = Vec::new();
    loop {
        let next_n = 2 * n_h;
        if next_n > opts.n_ceiling {
            return Err(Error::TruncationNotConverged {
                ceiling: opts.n_ceiling,
                trace,
            });
        }
        let next = solve_harmonics_fixed(ctx, next_n)?;
        let change = relative_change(&[&current.at(0), &current.at(-1)], &[&next.at(0), &next.at(-1)]);
        trace.push((next_n, change));
        if change < opts.tol {
            return Ok(HarmonicSolution {
                series: next,
                n_h: next_n,
                trace,
            });
        }
        current = next;
        n_h = next_n;
    }
}

/// Harmonics `V_n` of `⟨V_α(t)⟩` from reduced Bloch harmonics.
pub fn v_harmonics(bloch: &HarmonicSeries<CVec>, reduced: &ReducedBloch) -> HarmonicSeries<C64> {
    let mut out = bloch.map(|x| reduced.v_component(x));
    let span = out.span() as i64;
    let mut coeffs = out.coefficients().to_vec();
    coeffs[span as usize] += reduced.v_offset;
    out = HarmonicSeries::new(coeffs, bloch.nu()).expect("odd length preserved");
    out
}

/// Harmonics of the source `Tr{σ̃ δV_α(t) ρ_ss(t)}` with
/// `δV_α(t) = V - ⟨V_α(t)⟩` using the full time-dependent mean.
pub fn spectral_source(bloch: &HarmonicSeries<CVec>, reduced: &ReducedBloch) -> Result<HarmonicSeries<CVec>> {
    let v = v_harmonics(bloch, reduced);
    let cross = bloch.times_scalar(&v)?;
    let span = cross.span();
    let direct = bloch.map(|x| &reduced.w * x).padded(span);
    let coeffs = cross
        .coefficients()
        .iter()
        .zip(direct.coefficients())
        .enumerate()
        .map(|(k, (cross, direct))| {
            let mut out = direct - cross;
            if k == span {
                out += &reduced.w_offset;
            }
            out
        })
        .collect();
    HarmonicSeries::new(coeffs, bloch.nu())
}

/// Spectral vector harmonics at a fixed truncation.
pub fn solve_spectral_fixed(
    ctx: &DriveContext<'_>,
    source: &HarmonicSeries<CVec>,
    sideband: Sideband,
    span: usize,
) -> Result<HarmonicSeries<CVec>> {
    let shift = I * (sideband.sign() * ctx.nu);
    solve_ladder(&ctx.reduced.m, shift, ctx.nu, &ctx.coupling(), source, span)
}

/// Scalar spectral harmonics picked from the vector solution.
pub fn pick_spectral(vector: &HarmonicSeries<CVec>, reduced: &ReducedBloch) -> HarmonicSeries<C64> {
    vector.map(|x| reduced.v_component(x))
}

/// Dynamic steady spectral harmonics `S_n(±ν)`.
///
/// The cutoff starts at the span of `bloch` and doubles until `S_0` and
/// `S_{-2}` agree between consecutive cutoffs.
pub fn solve_spectral_harmonics(
    ctx: &DriveContext<'_>,
    bloch: &HarmonicSeries<CVec>,
    sideband: Sideband,
    opts: &TruncationOptions,
) -> Result<HarmonicSolution<C64>> {
    let source = spectral_source(bloch, ctx.reduced)?;
    let ceiling = opts.n_ceiling.max(source.span());
    let mut span = bloch.span().max(1);
    let mut current = pick_spectral(&solve_spectral_fixed(ctx, &source, sideband, span)?, ctx.reduced);
    let mut trace = Vec::new();
    loop {
        let next_span = 2 * span;
        if next_span > 2 * ceiling {
            return Err(Error::TruncationNotConverged { ceiling, trace });
        }
        let next = pick_spectral(&solve_spectral_fixed(ctx, &source, sideband, next_span)?, ctx.reduced);
        let change = scalar_change(&[current.at(0), current.at(-2)], &[next.at(0), next.at(-2)]);
        trace.push((next_span, change));
        if change < opts.tol {
            return Ok(HarmonicSolution {
                series: next,
                n_h: next_span,
                trace,
            });
        }
        current = next;
        span = next_span;
    }
}

/// Everything the collective rates need at one amplitude.
#[derive(Debug, Clone)]
pub struct DynamicSteadyState {
    pub bloch: HarmonicSolution<CVec>,
    pub v: HarmonicSeries<C64>,
    pub spectral_minus: HarmonicSolution<C64>,
}

pub fn solve_dynamic_steady(ctx: &DriveContext<'_>, opts: &TruncationOptions) -> Result<DynamicSteadyState> {
    let bloch = solve_harmonics(ctx, opts)?;
    let v = v_harmonics(&bloch.series, ctx.reduced);
    let spectral_minus = solve_spectral_harmonics(ctx, &bloch.series, Sideband::Minus, opts)?;
    Ok(DynamicSteadyState {
        bloch,
        v,
        spectral_minus,
    })
}
