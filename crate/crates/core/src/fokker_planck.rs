//! Radial Fokker-Planck equation for the phase-symmetric Glauber P function,
//!
//! ```text
//! ∂_t (rP) = ∂_r F,   F = (r²/2) Γ_c P + (r/4) ∂_r(γN P)
//! ```
//!
//! with the normalization `∫ r P dr = 1`. The grid is cell-centred,
//! `r_i = (i + ½)Δr`, and all integrals are midpoint sums.
//!
//! Writing `Q = γN P` and `E(r) = ∫₀^r 2r'Γ_c/γN dr'`, the flux is
//! `F = (r/4) e^{-E} ∂_r(e^{E} Q)`. Face fluxes use exponential fitting
//! (Scharfetter-Gummel) with the same `E` that defines the equilibrium
//! `P_eq ∝ e^{-E}/γN`, so the discrete equilibrium is exactly stationary
//! and the implicit step is an M-matrix (positivity preserving).

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::rates::RateCurve;

/// Uniform cell-centred radial grid on `[0, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialGrid {
    pub dr: f64,
    pub cells: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, cells: usize) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) || cells < 4 {
            return Err(Error::InvalidInput(format!(
                "radial grid needs r_max > 0 and at least 4 cells (got {r_max}, {cells})"
            )));
        }
        Ok(RadialGrid {
            dr: r_max / cells as f64,
            cells,
        })
    }

    /// Grid with spacing at most `dr`.
    pub fn with_spacing(r_max: f64, dr: f64) -> Result<Self> {
        if !(dr > 0.0) {
            return Err(Error::InvalidInput("grid spacing must be positive".into()));
        }
        Self::new(r_max, ((r_max / dr).ceil() as usize).max(4))
    }

    pub fn r_max(&self) -> f64 {
        self.dr * self.cells as f64
    }

    pub fn centre(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr
    }

    pub fn centres(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.centre(i)).collect()
    }
}

/// Default outer radius: `max(6√N_th, 1.5 r_lasing, 8/η)`.
pub fn default_r_max(n_th: f64, lasing_radius: Option<f64>, eta: f64) -> f64 {
    let mut r = 6.0 * n_th.max(0.0).sqrt();
    if let Some(rl) = lasing_radius {
        r = r.max(1.5 * rl);
    }
    if eta > 0.0 {
        r = r.max(8.0 / eta);
    }
    r
}

/// Radial P function sampled at cell centres.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialDistribution {
    pub grid: RadialGrid,
    pub p: Vec<f64>,
}

impl RadialDistribution {
    pub fn new(grid: RadialGrid, p: Vec<f64>) -> Result<Self> {
        if p.len() != grid.cells {
            return Err(Error::InvalidInput("distribution length does not match grid".into()));
        }
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(
                "distribution values must be finite and non-negative".into(),
            ));
        }
        let mut d = RadialDistribution { grid, p };
        d.renormalize()?;
        Ok(d)
    }

    pub fn renormalize(&mut self) -> Result<()> {
        let norm = self.moment(1);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidInput("distribution cannot be normalized".into()));
        }
        for v in &mut self.p {
            *v /= norm;
        }
        Ok(())
    }

    pub fn moment(&self, k: i32) -> f64 {
        moment(self, k)
    }

    /// Mean excitation `∫ r³ P dr`.
    pub fn mean_excitation(&self) -> f64 {
        moment(self, 3)
    }

    /// Indices of local maxima exceeding every neighbour within `window`
    /// cells on each side; the first cell counts when it tops its right
    /// neighbours.
    pub fn peaks(&self, window: usize) -> Vec<usize> {
        let n = self.p.len();
        (0..n)
            .filter(|&i| {
                let lo = i.saturating_sub(window);
                let hi = (i + window).min(n - 1);
                self.p[i] > 0.0 && (lo..=hi).all(|j| j == i || self.p[i] > self.p[j])
            })
            .collect()
    }

    pub fn peak_radii(&self, window: usize) -> Vec<f64> {
        self.peaks(window).into_iter().map(|i| self.grid.centre(i)).collect()
    }

    /// `Σ r_i |P_i - Q_i| Δr`.
    pub fn l1_distance(&self, other: &RadialDistribution) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidInput("distributions live on different grids".into()));
        }
        Ok((0..self.p.len())
            .map(|i| self.grid.centre(i) * (self.p[i] - other.p[i]).abs() * self.grid.dr)
            .sum())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,P")?;
        for (i, v) in self.p.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e}", self.grid.centre(i), v)?;
        }
        Ok(())
    }
}

/// `Σ r_i^k P_i Δr`.
pub fn moment(dist: &RadialDistribution, k: i32) -> f64 {
    let g = dist.grid;
    dist.p
        .iter()
        .enumerate()
        .map(|(i, p)| g.centre(i).powi(k) * p * g.dr)
        .sum()
}

/// Thermal P function `∝ e^{-r²/N}`.
pub fn thermal_dist(n: f64, grid: RadialGrid) -> Result<RadialDistribution> {
    if !(n > 0.0) {
        return Err(Error::InvalidInput(format!(
            "thermal occupation must be positive, got {n}"
        )));
    }
    let need = 6.0 * n.sqrt();
    if grid.r_max() < need * (1.0 - 1e-12) {
        return Err(Error::InvalidInput(format!(
            "grid reaches r = {} but a thermal state with N = {n} needs {need}",
            grid.r_max()
        )));
    }
    let p = grid.centres().iter().map(|r| (-r * r / n).exp()).collect();
    RadialDistribution::new(grid, p)
}

/// Rates as functions of the amplitude `r`.
pub trait RateProfile: Sync {
    /// Largest radius where the rates are defined.
    fn coverage(&self) -> f64;
    /// `Γ_c(r) / γN(r)`.
    fn ratio(&self, r: f64) -> f64;
    /// `γN(r)`.
    fn heating(&self, r: f64) -> f64;
    /// Radii where the profile changes its functional form; exponent
    /// quadrature never straddles them.
    fn knots(&self) -> Vec<f64>;

    fn cooling(&self, r: f64) -> f64 {
        self.ratio(r) * self.heating(r)
    }
}

/// Monotone-cubic interpolation of a sampled rate curve, constant below
/// the first sample.
#[derive(Debug, Clone)]
pub struct InterpolatedRates {
    ratio: MonotoneCubic,
    heating: MonotoneCubic,
}

impl InterpolatedRates {
    pub fn new(curve: &RateCurve) -> Result<Self> {
        if curve.len() < 2 {
            return Err(Error::InvalidInput("rate curve needs at least two points".into()));
        }
        for (r, g) in curve.r.iter().zip(&curve.gamma_n) {
            if !(*g > 0.0) {
                return Err(Error::NonPositiveHeating { r: *r, value: *g });
            }
        }
        let ratio: Vec<f64> = curve.gamma_c.iter().zip(&curve.gamma_n).map(|(c, n)| c / n).collect();
        Ok(InterpolatedRates {
            ratio: MonotoneCubic::new(curve.r.clone(), ratio)?,
            heating: MonotoneCubic::new(curve.r.clone(), curve.gamma_n.clone())?,
        })
    }
}

impl RateProfile for InterpolatedRates {
    fn coverage(&self) -> f64 {
        self.ratio.range().1
    }
    fn ratio(&self, r: f64) -> f64 {
        self.ratio.eval(r)
    }
    fn heating(&self, r: f64) -> f64 {
        self.heating.eval(r)
    }
    fn knots(&self) -> Vec<f64> {
        self.ratio.nodes().to_vec()
    }
}

/// `r`-independent rates.
#[derive(Debug, Clone, Copy)]
pub struct ConstantRates {
    pub gamma_c: f64,
    pub gamma_n: f64,
}

impl RateProfile for ConstantRates {
    fn coverage(&self) -> f64 {
        f64::INFINITY
    }
    fn ratio(&self, _: f64) -> f64 {
        self.gamma_c / self.gamma_n
    }
    fn heating(&self, _: f64) -> f64 {
        self.gamma_n
    }
    fn knots(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Step cooling rate `Γ_c = inner` for `r < r_c`, `outer` beyond, with a
/// constant heating rate.
#[derive(Debug, Clone, Copy)]
pub struct StepRates {
    pub r_c: f64,
    pub inner: f64,
    pub outer: f64,
    pub gamma_n: f64,
}

impl StepRates {
    /// Step rates reproducing given `n_LD = γN/Γ_in` and `n₊ = γN/Γ_out`.
    pub fn from_excitations(n_ld: f64, n_plus: f64, r_c: f64, gamma_n: f64) -> Self {
        StepRates {
            r_c,
            inner: gamma_n / n_ld,
            outer: gamma_n / n_plus,
            gamma_n,
        }
    }
}

impl RateProfile for StepRates {
    fn coverage(&self) -> f64 {
        f64::INFINITY
    }
    fn ratio(&self, r: f64) -> f64 {
        if r < self.r_c {
            self.inner / self.gamma_n
        } else {
            self.outer / self.gamma_n
        }
    }
    fn heating(&self, _: f64) -> f64 {
        self.gamma_n
    }
    fn knots(&self) -> Vec<f64> {
        vec![self.r_c]
    }
}

// three-point Gauss-Legendre on [0, 1]
const GL_X: [f64; 3] = [0.112_701_665_379_258_31, 0.5, 0.887_298_334_620_741_7];
const GL_W: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Cumulative exponent `E(r) = ∫₀^r 2r' Γ_c/γN dr'` at sorted radii.
///
/// Integration runs over the union of the requested radii and the profile
/// knots, with Gauss-Legendre on each piece, so the integral of a
/// piecewise-cubic ratio is exact.
pub fn exponent(profile: &dyn RateProfile, radii: &[f64]) -> Result<Vec<f64>> {
    if radii.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidInput("exponent radii must be sorted".into()));
    }
    let last = radii.last().copied().unwrap_or(0.0);
    let cover = profile.coverage();
    if last > cover * (1.0 + 1e-12) {
        return Err(Error::OutsideCoverage {
            r: last,
            lo: 0.0,
            hi: cover,
        });
    }
    let mut knots: Vec<f64> = profile.knots().into_iter().filter(|k| *k > 0.0 && *k < last).collect();
    knots.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(radii.len());
    let mut acc = 0.0;
    let mut pos = 0.0;
    let mut k = 0;
    let integrate_to = |target: f64, acc: &mut f64, pos: &mut f64| {
        let h = target - *pos;
        if h > 0.0 {
            let mut s = 0.0;
            for (x, w) in GL_X.iter().zip(GL_W) {
                let r = *pos + x * h;
                s += w * 2.0 * r * profile.ratio(r);
            }
            *acc += s * h;
            *pos = target;
        }
    };
    for &r in radii {
        while k < knots.len() && knots[k] < r {
            integrate_to(knots[k], &mut acc, &mut pos);
            k += 1;
        }
        integrate_to(r, &mut acc, &mut pos);
        if !acc.is_finite() {
            return Err(Error::ExponentOverflow { r });
        }
        out.push(acc);
    }
    Ok(out)
}

/// Exponent and heating rate at the cell centres.
fn grid_coefficients(profile: &dyn RateProfile, grid: RadialGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    let centres = grid.centres();
    let e = exponent(profile, &centres)?;
    let mut heat = Vec::with_capacity(centres.len());
    for &r in &centres {
        let h = profile.heating(r);
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::NonPositiveHeating { r, value: h });
        }
        heat.push(h);
    }
    Ok((e, heat))
}

/// Equilibrium `P_eq(r) = (𝒜/γN) exp(-∫₀^r 2r'Γ_c/γN dr')`.
pub fn steady_p(profile: &dyn RateProfile, grid: RadialGrid) -> Result<RadialDistribution> {
    let (e, heat) = grid_coefficients(profile, grid)?;
    let log_p: Vec<f64> = e.iter().zip(&heat).map(|(e, h)| -e - h.ln()).collect();
    let top = log_p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::ExponentOverflow { r: grid.centre(0) });
    }
    let p = log_p.iter().map(|l| (l - top).exp()).collect();
    RadialDistribution::new(grid, p)
}

/// Convenience wrapper interpolating a sampled curve.
pub fn steady_p_from_curve(curve: &RateCurve, grid: RadialGrid) -> Result<RadialDistribution> {
    steady_p(&InterpolatedRates::new(curve)?, grid)
}

/// `B(x) = x / (eˣ - 1)`.
fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-10 {
        1.0 - 0.5 * x
    } else {
        x / x.exp_m1()
    }
}

/// Tridiagonal implicit-Euler operator for a fixed step.
#[derive(Debug, Clone)]
struct ImplicitStep {
    mass: Vec<f64>,
    // Thomas factorization of the system matrix
    lower: Vec<f64>,
    diag_inv: Vec<f64>,
    upper_scaled: Vec<f64>,
}

impl ImplicitStep {
    fn new(profile: &dyn RateProfile, grid: RadialGrid, dt: f64) -> Result<Self> {
        let n = grid.cells;
        let (e, heat) = grid_coefficients(profile, grid)?;
        // face i+1/2 flux: a[i] P[i+1] - b[i] P[i]
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for i in 0..n - 1 {
            let d = (i + 1) as f64 * grid.dr / (4.0 * grid.dr);
            let de = e[i + 1] - e[i];
            a[i] = d * bernoulli(-de) * heat[i + 1];
            b[i] = d * bernoulli(de) * heat[i];
        }
        let mass: Vec<f64> = (0..n).map(|i| grid.centre(i) * grid.dr / dt).collect();
        let mut diag = vec![0.0; n];
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n {
            diag[i] = mass[i] + b[i] + if i > 0 { a[i - 1] } else { 0.0 };
            if i + 1 < n {
                upper[i] = -a[i];
            }
            if i > 0 {
                lower[i] = -b[i - 1];
            }
        }
        let mut diag_inv = vec![0.0; n];
        let mut upper_scaled = vec![0.0; n];
        let mut pivot = diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = diag[i] - lower[i] * upper_scaled[i - 1];
            }
            if !(pivot > 0.0 && pivot.is_finite()) {
                return Err(Error::Singular {
                    context: format!("implicit Fokker-Planck step at cell {i}"),
                    condition: f64::INFINITY,
                });
            }
            diag_inv[i] = 1.0 / pivot;
            upper_scaled[i] = upper[i] * diag_inv[i];
        }
        Ok(ImplicitStep {
            mass,
            lower,
            diag_inv,
            upper_scaled,
        })
    }

    fn apply(&self, p: &mut [f64]) {
        let n = p.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let rhs = self.mass[i] * p[i] - if i > 0 { self.lower[i] * y[i - 1] } else { 0.0 };
            y[i] = rhs * self.diag_inv[i];
        }
        for i in (0..n).rev() {
            p[i] = y[i]
                - if i + 1 < n {
                    self.upper_scaled[i] * p[i + 1]
                } else {
                    0.0
                };
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Record `⟨n⟩` every this many steps (the running minimum sees every step).
    pub record_every: usize,
    /// Keep a distribution snapshot every this many steps.
    pub snapshot_every: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransientResult {
    pub times: Vec<f64>,
    pub mean_excitation: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub t_min: f64,
    pub n_min: f64,
    /// Largest `|Σ r P Δr - 1|` seen during the run.
    pub norm_drift: f64,
    pub final_state: RadialDistribution,
}

impl TransientResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,n")?;
        for (t, n) in self.times.iter().zip(&self.mean_excitation) {
            writeln!(w, "{:.16e},{:.16e}", t, n)?;
        }
        Ok(())
    }
}

/// Integrates the radial Fokker-Planck equation with implicit Euler steps.
pub fn evolve_p(profile: &dyn RateProfile, init: &RadialDistribution, opts: &EvolveOptions) -> Result<TransientResult> {
    if !(opts.dt > 0.0 && opts.t_end >= 0.0) {
        return Err(Error::InvalidInput("dt must be positive and t_end non-negative".into()));
    }
    let grid = init.grid;
    let step = ImplicitStep::new(profile, grid, opts.dt)?;
    let steps = (opts.t_end / opts.dt).round() as usize;
    let record_every = opts.record_every.max(1);
    let mut dist = init.clone();
    let n0 = dist.mean_excitation();
    let mut out = TransientResult {
        times: vec![0.0],
        mean_excitation: vec![n0],
        snapshots: Vec::new(),
        t_min: 0.0,
        n_min: n0,
        norm_drift: (dist.moment(1) - 1.0).abs(),
        final_state: init.clone(),
    };
    if opts.snapshot_every.is_some() {
        out.snapshots.push(Snapshot {
            t: 0.0,
            p: dist.p.clone(),
        });
    }
    for s in 1..=steps {
        step.apply(&mut dist.p);
        let t = s as f64 * opts.dt;
        if let Some((i, v)) = dist.p.iter().enumerate().find(|(_, v)| **v < -1e-9 || !v.is_finite()) {
            return Err(Error::NegativeDensity {
                r: grid.centre(i),
                t,
                value: *v,
            });
        }
        let n = dist.mean_excitation();
        if n < out.n_min {
            out.n_min = n;
            out.t_min = t;
        }
        out.norm_drift = out.norm_drift.max((dist.moment(1) - 1.0).abs());
        if s % record_every == 0 || s == steps {
            out.times.push(t);
            out.mean_excitation.push(n);
        }
        if let Some(every) = opts.snapshot_every {
            if every > 0 && s % every == 0 {
                out.snapshots.push(Snapshot { t, p: dist.p.clone() });
            }
        }
    }
    out.final_state = dist;
    Ok(out)
}

/// Final excitation of the step-rate toy model, `∫r³P / ∫rP` for
/// `Γ_c = γN/n_LD` below `r_c` and `γN/n₊` beyond:
///
/// ```text
/// n_f = [n_LD² + e(n₊(n₊+r_c²) - n_LD(n_LD+r_c²))] / [n_LD(1-e) + e n₊]
/// ```
///
/// with `e = exp(-r_c²/n_LD)`. Saturates to `n_LD` once `r_c²/n_LD > 700`.
pub fn toy_nf(n_ld: f64, n_plus: f64, r_c: f64) -> f64 {
    toy_form(n_ld, n_plus, r_c, true)
}

/// The commonly quoted closed form with denominator `n_LD + e n₊`. It
/// drops the `-e n_LD` term, so it agrees with [`toy_nf`] only where
/// `e^{-r_c²/n_LD}` is negligible.
pub fn toy_nf_printed(n_ld: f64, n_plus: f64, r_c: f64) -> f64 {
    toy_form(n_ld, n_plus, r_c, false)
}

fn toy_form(n_ld: f64, n_plus: f64, r_c: f64, exact: bool) -> f64 {
    let x = r_c * r_c / n_ld;
    if x > 700.0 {
        return n_ld;
    }
    let e = (-x).exp();
    let num = n_ld * n_ld + e * (n_plus * (n_plus + r_c * r_c) - n_ld * (n_ld + r_c * r_c));
    // 1 - e without cancellation
    let inner = if exact { -(-x).exp_m1() } else { 1.0 };
    num / (n_ld * inner + e * n_plus)
}

/// `(n_LD, n_f)` along a list of `n_LD` values.
pub fn toy_transition_scan(n_plus: f64, r_c: f64, n_ld_grid: &[f64]) -> Vec<(f64, f64)> {
    n_ld_grid.iter().map(|&n| (n, toy_nf(n, n_plus, r_c))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_moments() {
        for n in [4.0, 25.0, 50.0] {
            let grid = RadialGrid::new(6.0 * f64::sqrt(n) * 1.5, 4000).unwrap();
            let d = thermal_dist(n, grid).unwrap();
            assert!((d.moment(1) - 1.0).abs() < 1e-12);
            assert!((d.moment(3) / n - 1.0).abs() < 1e-3);
            assert!(d.p.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn thermal_rejects_short_grid() {
        let grid = RadialGrid::new(10.0, 100).unwrap();
        assert!(thermal_dist(50.0, grid).is_err());
    }

    #[test]
    fn constant_rates_give_thermal_equilibrium() {
        let rates = ConstantRates {
            gamma_c: 1e-3,
            gamma_n: 1e-3 * 30.0,
        };
        let grid = RadialGrid::new(6.0 * 30f64.sqrt(), 3000).unwrap();
        let d = steady_p(&rates, grid).unwrap();
        assert!((d.mean_excitation() / 30.0 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn narrow_peak_moment() {
        let grid = RadialGrid::new(20.0, 2000).unwrap();
        let r0 = 7.005;
        let p = grid
            .centres()
            .iter()
            .map(|r| if (r - r0).abs() < 0.006 { 1.0 } else { 0.0 })
            .collect();
        let d = RadialDistribution::new(grid, p).unwrap();
        assert!((d.mean_excitation() - r0 * r0).abs() < 1e-9);
    }

    #[test]
    fn toy_limits() {
        assert_eq!(toy_nf(2.0, 200.0, 100.0), 2.0);
        let small = toy_nf_printed(1.0, 1000.0, 1e-4);
        assert!((small - 1000.0 * 1000.0 / 1001.0).abs() < 1e-3);
        assert!((toy_nf(1.0, 1000.0, 1e-8) - 1000.0).abs() < 1e-6);
        assert_eq!(toy_nf_printed(2.0, 200.0, 100.0), 2.0);
    }

    #[test]
    fn toy_matches_step_quadrature() {
        let (n_ld, n_plus, r_c) = (2.0, 200.0, 5.0);
        let rates = StepRates::from_excitations(n_ld, n_plus, r_c, 1.0);
        let grid = RadialGrid::with_spacing(6.0 * n_plus.sqrt() * 1.2, r_c / 2500.0).unwrap();
        let d = steady_p(&rates, grid).unwrap();
        let q = d.mean_excitation();
        assert!((q / toy_nf(n_ld, n_plus, r_c) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn one_step_keeps_equilibrium() {
        let rates = StepRates::from_excitations(1.0, 40.0, 3.0, 0.02);
        let grid = RadialGrid::new(60.0, 1200).unwrap();
        let eq = steady_p(&rates, grid).unwrap();
        let res = evolve_p(
            &rates,
            &eq,
            &EvolveOptions {
                dt: 5.0,
                t_end: 5.0,
                record_every: 1,
                snapshot_every: None,
            },
        )
        .unwrap();
        let n0 = eq.mean_excitation();
        assert!((res.mean_excitation[1] / n0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relaxes_to_thermal_and_conserves_norm() {
        let rates = ConstantRates {
            gamma_c: 0.05,
            gamma_n: 0.05 * 10.0,
        };
        let grid = RadialGrid::new(6.0 * 40f64.sqrt(), 800).unwrap();
        let init = thermal_dist(40.0, grid).unwrap();
        let res = evolve_p(
            &rates,
            &init,
            &EvolveOptions {
                dt: 0.5,
                t_end: 400.0,
                record_every: 10,
                snapshot_every: Some(200),
            },
        )
        .unwrap();
        assert!(res.norm_drift < 1e-10);
        let last = *res.mean_excitation.last().unwrap();
        assert!((last / 10.0 - 1.0).abs() < 1e-3, "{last}");
        assert_eq!(res.snapshots.len(), 5);
    }

    #[test]
    fn peak_finder_sees_origin_and_ring() {
        let grid = RadialGrid::new(30.0, 300).unwrap();
        let p = grid
            .centres()
            .iter()
            .map(|r| (-r * r / 4.0).exp() + 0.1 * (-(r - 20.0) * (r - 20.0)).exp())
            .collect();
        let d = RadialDistribution::new(grid, p).unwrap();
        let peaks = d.peak_radii(3);
        assert_eq!(peaks.len(), 2);
        assert!(peaks[0] < 0.2 && (peaks[1] - 20.0).abs() < 0.1);
    }

    #[test]
    fn toy_scan_regimes() {
        let r_c: f64 = 5.0;
        let n_plus = 500.0;
        let low = toy_nf(r_c * r_c / 100.0, n_plus, r_c) / (r_c * r_c / 100.0);
        assert!((1.0..=1.01).contains(&low));
        let high = toy_nf(10.0 * r_c * r_c, n_plus, r_c) / n_plus;
        assert!((0.9..=1.0).contains(&high), "{high}");
        let grid: Vec<f64> = (0..200).map(|k| 0.05 * 1.05f64.powi(k)).collect();
        let scan = toy_transition_scan(n_plus, r_c, &grid);
        assert!(scan.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12));
    }
}
