//! Time-domain oracles for the continued-fraction solvers.
//!
//! These integrate the reduced Bloch equation (and the spectral-vector
//! equation) directly in time and Fourier-project the periodic orbit. The
//! periodic initial condition is found by shooting over one drive period
//! (monodromy matrix), after which the orbit is integrated for a few more
//! periods before sampling.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::floquet::{DriveContext, Sideband};
use crate::harmonics::{fourier_project, HarmonicSeries};
use crate::linalg::{self, c, CMat, CVec, C64, I};
use crate::ode::{DormandPrince, OdeOptions};
use crate::qudit::{static_reduced, BlochSystem, ReducedBloch};

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Periods integrated from the periodic initial condition before sampling.
    pub settle_periods: usize,
    pub sample_periods: usize,
    pub points_per_period: usize,
    /// Harmonics `|n| ≤ span` returned.
    pub span: usize,
    pub ode: OdeOptions,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            settle_periods: 2,
            sample_periods: 2,
            points_per_period: 256,
            span: 16,
            ode: OdeOptions::default(),
        }
    }
}

fn drive_matrix(ctx: &DriveContext<'_>, t: f64) -> CMat {
    let amp = 2.0 * ctx.lambda() * ctx.r * (ctx.nu * t).cos();
    &ctx.reduced.m - &ctx.reduced.v * (I * amp)
}

fn period(ctx: &DriveContext<'_>) -> f64 {
    2.0 * PI / ctx.nu
}

/// Solves `(𝟙 - Φ) x = p` where `(Φ, p)` is the one-period affine propagator.
fn shoot<F>(dim: usize, mut rhs: F, t0: f64, t1: f64, opts: &OdeOptions) -> Result<CVec>
where
    F: FnMut(f64, &CMat) -> CMat,
{
    // columns 0..dim: homogeneous propagator, column dim: particular solution
    let mut y0 = CMat::zeros(dim, dim + 1);
    for k in 0..dim {
        y0[(k, k)] = c(1.0);
    }
    let flat = CVec::from_column_slice(y0.as_slice());
    let mut dp = DormandPrince::new(*opts);
    let end = dp.advance(
        |t, y| {
            let ymat = DMatrix::from_column_slice(dim, dim + 1, y.as_slice());
            let out = rhs(t, &ymat);
            CVec::from_column_slice(out.as_slice())
        },
        t0,
        flat,
        t1,
    )?;
    let end = DMatrix::from_column_slice(dim, dim + 1, end.as_slice());
    let phi = end.columns(0, dim).into_owned();
    let p = end.column(dim).into_owned();
    let lhs = CMat::identity(dim, dim) - phi;
    let inv = linalg::checked_inverse(&lhs, "one-period propagator (no unique limit cycle)")?;
    Ok(inv * p)
}

/// Initial condition `σ̃(0)` of the ν-periodic orbit.
pub fn periodic_orbit(ctx: &DriveContext<'_>, ode: &OdeOptions) -> Result<CVec> {
    let dim = ctx.reduced.reduced_len();
    let u = ctx.reduced.u.clone();
    shoot(
        dim,
        |t, y| {
            let mut out = drive_matrix(ctx, t) * y;
            let mut last = out.column_mut(dim);
            last += &u;
            out
        },
        0.0,
        period(ctx),
        ode,
    )
}

/// Bloch harmonics from direct time integration and Fourier projection.
pub fn oracle_harmonics(ctx: &DriveContext<'_>, opts: &OracleOptions) -> Result<HarmonicSeries<CVec>> {
    let u = ctx.reduced.u.clone();
    let rhs = |t: f64, y: &CVec| drive_matrix(ctx, t) * y + &u;
    let t_period = period(ctx);
    // without dissipation the one-period propagator has eigenvalue 1 and shooting fails
    let x0 = periodic_orbit(ctx, &opts.ode)?;
    let mut dp = DormandPrince::new(opts.ode);
    let t_settle = opts.settle_periods as f64 * t_period;
    let y = dp.advance(rhs, 0.0, x0, t_settle)?;
    let (samples, times) = sample(&mut dp, rhs, y, t_settle, t_period, opts)?;
    fourier_project(&samples, &times, ctx.nu, opts.span)
}

fn sample<F>(
    dp: &mut DormandPrince,
    mut rhs: F,
    mut y: CVec,
    t_start: f64,
    t_period: f64,
    opts: &OracleOptions,
) -> Result<(Vec<CVec>, Vec<f64>)>
where
    F: FnMut(f64, &CVec) -> CVec,
{
    let total = opts.sample_periods * opts.points_per_period;
    let dt = t_period / opts.points_per_period as f64;
    let mut samples = Vec::with_capacity(total);
    let mut times = Vec::with_capacity(total);
    let mut t = t_start;
    for k in 0..total {
        let target = t_start + k as f64 * dt;
        y = dp.advance(&mut rhs, t, y, target)?;
        t = target;
        samples.push(y.clone());
        times.push(t);
    }
    Ok((samples, times))
}

/// Spectral harmonics `S_n(±ν)` by integrating the spectral-vector equation
/// with the dynamic steady source computed pointwise in time.
pub fn oracle_spectral(
    ctx: &DriveContext<'_>,
    sideband: Sideband,
    opts: &OracleOptions,
) -> Result<HarmonicSeries<C64>> {
    let reduced = ctx.reduced;
    let n = reduced.reduced_len();
    let shift = I * (sideband.sign() * ctx.nu);
    let t_period = period(ctx);
    let sigma0 = periodic_orbit(ctx, &opts.ode)?;

    let source = |sigma: &CVec| -> CVec {
        let mean_v = reduced.expectation_v(sigma);
        &reduced.w * sigma + &reduced.w_offset - sigma * mean_v
    };

    // joint state: [σ̃ | Φ_S (n columns) | p_S], shot over one period
    let width = n + 2;
    let mut y0 = CMat::zeros(n, width);
    y0.column_mut(0).copy_from(&sigma0);
    for k in 0..n {
        y0[(k, 1 + k)] = c(1.0);
    }
    let joint = |t: f64, y: &CVec| -> CVec {
        let ymat = DMatrix::from_column_slice(n, width, y.as_slice());
        let a = drive_matrix(ctx, t);
        let sigma = ymat.column(0).into_owned();
        let mut out = CMat::zeros(n, width);
        out.column_mut(0).copy_from(&(&a * &sigma + &reduced.u));
        let mut shifted = a.clone();
        for k in 0..n {
            shifted[(k, k)] += shift;
        }
        let rest = &shifted * ymat.columns(1, n + 1);
        out.columns_mut(1, n + 1).copy_from(&rest);
        let mut last = out.column_mut(width - 1);
        last += source(&sigma);
        CVec::from_column_slice(out.as_slice())
    };
    let mut dp = DormandPrince::new(opts.ode);
    let end = dp.advance(joint, 0.0, CVec::from_column_slice(y0.as_slice()), t_period)?;
    let end = DMatrix::from_column_slice(n, width, end.as_slice());
    let phi = end.columns(1, n).into_owned();
    let p = end.column(width - 1).into_owned();
    let lhs = CMat::identity(n, n) - phi;
    let s0 = linalg::checked_inverse(&lhs, "spectral one-period propagator")? * p;

    // integrate the periodic pair [σ̃, S̃] and sample S = V·S̃
    let pair = |t: f64, y: &CVec| -> CVec {
        let a = drive_matrix(ctx, t);
        let sigma = y.rows(0, n).into_owned();
        let spec = y.rows(n, n).into_owned();
        let mut out = CVec::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&(&a * &sigma + &reduced.u));
        let ds = &a * &spec + &spec * shift + source(&sigma);
        out.rows_mut(n, n).copy_from(&ds);
        out
    };
    let mut y = CVec::zeros(2 * n);
    y.rows_mut(0, n).copy_from(&sigma0);
    y.rows_mut(n, n).copy_from(&s0);
    let mut dp = DormandPrince::new(opts.ode);
    let t_settle = opts.settle_periods as f64 * t_period;
    let y = dp.advance(pair, 0.0, y, t_settle)?;
    let (samples, times) = sample(&mut dp, pair, y, t_settle, t_period, opts)?;
    let scalars: Vec<C64> = samples
        .iter()
        .map(|s| reduced.v_component(&s.rows(n, n).into_owned()))
        .collect();
    fourier_project(&scalars, &times, ctx.nu, opts.span)
}

/// `S(±ν) = ∫₀^∞ Tr{δV U_q(τ) δV ρ_ss} e^{±iντ} dτ` by integrating the full
/// (untransformed) Bloch equation up to `t_max` alongside the quadrature.
pub fn correlation_spectrum_oracle(
    bloch: &BlochSystem,
    reduced: &ReducedBloch,
    sideband: Sideband,
    nu: f64,
    t_max: f64,
    ode: &OdeOptions,
) -> Result<C64> {
    let ss = reduced.to_bloch(&static_reduced(reduced)?).values;
    let mean_v = bloch.v_row.dot(&ss);
    // generator including the static displacement shift
    let gen = &bloch.m - &bloch.v * (I * (2.0 * reduced.lambda * reduced.alpha_ss.re));
    let start = &bloch.v_left * &ss - &ss * mean_v;
    let dim = start.len();
    let mut y0 = CVec::zeros(dim + 1);
    y0.rows_mut(0, dim).copy_from(&start);
    let sign = sideband.sign();
    let mut dp = DormandPrince::new(*ode);
    let end = dp.advance(
        |t, y| {
            let x = y.rows(0, dim).into_owned();
            let mut out = CVec::zeros(dim + 1);
            out.rows_mut(0, dim).copy_from(&(&gen * &x));
            out[dim] = bloch.v_row.dot(&x) * C64::from_polar(1.0, sign * nu * t);
            out
        },
        0.0,
        y0,
        t_max,
    )?;
    Ok(end[dim])
}
