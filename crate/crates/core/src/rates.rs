//! Cooling and heating rates: the Lamb-Dicke baseline and the collective
//! rates `Γ_c(r)`, `γN(r)` of a displaced oscillator.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::{solve_dynamic_steady, spectral_source, DriveContext, Sideband, TruncationOptions};
use crate::harmonics::HarmonicSeries;
use crate::linalg::{self, CMat, CVec, C64, I};
use crate::qudit::{
    build_bloch_matrices, build_level_system, reduce_trace, solve_alpha_ss, static_reduced, AlphaOptions, BlochSystem,
    OscillatorSpec, QuditSpec, ReducedBloch,
};
use crate::special::bessel_j_all;

/// How the spectral function enters the LD rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LdConvention {
    /// `Γ_c = γ + 2λ² Re(S(ν) - S(-ν))`, `γN = γN_th + 2λ² Re S(-ν)`.
    #[default]
    Lindblad,
    /// Same without the factor 2.
    Text,
}

impl LdConvention {
    fn factor(self) -> f64 {
        match self {
            LdConvention::Lindblad => 2.0,
            LdConvention::Text => 1.0,
        }
    }
}

impl FromStr for LdConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lindblad" => Ok(LdConvention::Lindblad),
            "text" => Ok(LdConvention::Text),
            other => Err(Error::InvalidInput(format!(
                "unknown LD convention `{other}` (expected lindblad or text)"
            ))),
        }
    }
}

impl fmt::Display for LdConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LdConvention::Lindblad => "lindblad",
            LdConvention::Text => "text",
        })
    }
}

/// A qudit coupled to an oscillator, with the steady displacement resolved.
#[derive(Debug, Clone)]
pub struct CoolingModel {
    pub qudit: QuditSpec,
    pub osc: OscillatorSpec,
    pub bloch: BlochSystem,
    pub reduced: ReducedBloch,
}

impl CoolingModel {
    pub fn new(qudit: QuditSpec, osc: OscillatorSpec) -> Result<Self> {
        osc.validate()?;
        let system = build_level_system(&qudit)?;
        let bloch = build_bloch_matrices(&system);
        let alpha = solve_alpha_ss(&bloch, &osc, AlphaOptions::default())?;
        let reduced = reduce_trace(&bloch, alpha, osc.lambda)?;
        Ok(CoolingModel {
            qudit,
            osc,
            bloch,
            reduced,
        })
    }

    pub fn alpha_ss(&self) -> C64 {
        self.reduced.alpha_ss
    }

    pub fn eta(&self) -> f64 {
        self.osc.eta()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LDRates {
    pub s_plus: [f64; 2],
    pub s_minus: [f64; 2],
    pub gamma_c: f64,
    pub gamma_n: f64,
    /// `γN / Γ_c`; `None` when the LD cooling rate is not positive.
    pub n_ld: Option<f64>,
    pub unstable: bool,
    pub convention: LdConvention,
}

/// Static source `Tr{σ̃ δV ρ_ss}` in reduced coordinates.
fn static_source(reduced: &ReducedBloch, nu: f64) -> Result<CVec> {
    let sigma = static_reduced(reduced)?;
    let series = HarmonicSeries::single(0, sigma, nu);
    Ok(spectral_source(&series, reduced)?.at(0))
}

/// LD spectral function `S(±ν)` from `(±iν + M̃) x = -v₀`.
pub fn ld_spectral(reduced: &ReducedBloch, sideband: Sideband, nu: f64) -> Result<C64> {
    let v0 = static_source(reduced, nu)?;
    let mut a = reduced.m.clone();
    let shift = I * (sideband.sign() * nu);
    for k in 0..a.nrows() {
        a[(k, k)] += shift;
    }
    let inv = resonance_inverse(&a, 0)?;
    Ok(reduced.v_component(&(-(inv * v0))))
}

fn resonance_inverse(a: &CMat, harmonic: i64) -> Result<CMat> {
    match linalg::checked_inverse(a, "spectral block") {
        Ok(inv) => Ok(inv),
        Err(Error::Singular { condition, .. }) => Err(Error::Resonance { harmonic, condition }),
        Err(e) => Err(e),
    }
}

pub fn ld_rates(model: &CoolingModel, convention: LdConvention) -> Result<LDRates> {
    let nu = model.osc.nu;
    let lambda = model.osc.lambda;
    let s_plus = ld_spectral(&model.reduced, Sideband::Plus, nu)?;
    let s_minus = ld_spectral(&model.reduced, Sideband::Minus, nu)?;
    let k = convention.factor() * lambda * lambda;
    let gamma_c = model.osc.gamma + k * (s_plus.re - s_minus.re);
    let gamma_n = model.osc.thermal_heating() + k * s_minus.re;
    let unstable = !(gamma_c > 0.0);
    Ok(LDRates {
        s_plus: [s_plus.re, s_plus.im],
        s_minus: [s_minus.re, s_minus.im],
        gamma_c,
        gamma_n,
        n_ld: if unstable { None } else { Some(gamma_n / gamma_c) },
        unstable,
        convention,
    })
}

/// How a collective-rate sample was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    ContinuedFraction,
    LinearResponse,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct RateOptions {
    pub truncation: TruncationOptions,
    /// Below this amplitude the linear-response limit is used; `None`
    /// means `1e-3 / η`.
    pub r_floor: Option<f64>,
}

impl RateOptions {
    pub fn floor_for(&self, eta: f64) -> f64 {
        self.r_floor.unwrap_or(if eta > 0.0 { 1e-3 / eta } else { 0.0 })
    }
}

/// Collective rates at one amplitude, split into bare and qudit parts.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CollectiveRates {
    pub r: f64,
    pub gamma_c: f64,
    pub gamma_n: f64,
    /// `Γ_c - γ`.
    pub qudit_cooling: f64,
    /// `γN - γN_th`.
    pub qudit_heating: f64,
    pub method: RateMethod,
    /// Harmonic cutoffs used for the Bloch and spectral solves.
    pub n_h: usize,
    pub n_h_spectral: usize,
}

struct QuditTerms {
    cooling: f64,
    heating: f64,
    method: RateMethod,
    n_h: usize,
    n_h_spectral: usize,
}

/// `(V_{-1}, S_0(-ν), S_{-2}(-ν))` at amplitude `r`.
fn floquet_terms(
    reduced: &ReducedBloch,
    r: f64,
    nu: f64,
    opts: &TruncationOptions,
) -> Result<(C64, C64, C64, usize, usize)> {
    let ctx = DriveContext::new(reduced, r, nu)?;
    let dss = solve_dynamic_steady(&ctx, opts)?;
    let s = &dss.spectral_minus.series;
    Ok((dss.v.at(-1), s.at(0), s.at(-2), dss.bloch.n_h, dss.spectral_minus.n_h))
}

fn qudit_terms(reduced: &ReducedBloch, osc: &OscillatorSpec, r: f64, opts: &RateOptions) -> Result<QuditTerms> {
    let lambda = osc.lambda;
    let nu = osc.nu;
    if lambda == 0.0 {
        return Ok(QuditTerms {
            cooling: 0.0,
            heating: 0.0,
            method: RateMethod::LinearResponse,
            n_h: 0,
            n_h_spectral: 0,
        });
    }
    let floor = opts.floor_for(osc.eta());
    if r >= floor && r > 0.0 {
        let (v_m1, s0, s_m2, n_h, n_hs) = floquet_terms(reduced, r, nu, &opts.truncation)?;
        let cooling = (I * 2.0 * lambda * v_m1 / r).re - 2.0 * lambda * lambda * (s_m2 / (r * r)).re;
        let heating = 2.0 * lambda * lambda * (s0 - s_m2).re;
        return Ok(QuditTerms {
            cooling,
            heating,
            method: RateMethod::ContinuedFraction,
            n_h,
            n_h_spectral: n_hs,
        });
    }
    // linear response: σ⁽⁻¹⁾/r = iλ (M̃ + iν)⁻¹ Ṽ σ̃⁽⁰⁾
    let sigma0 = static_reduced(reduced)?;
    let mut a = reduced.m.clone();
    for k in 0..a.nrows() {
        a[(k, k)] += I * nu;
    }
    let inv = resonance_inverse(&a, -1)?;
    let v_m1_over_r = reduced.v_component(&(inv * (&reduced.v * &sigma0) * (I * lambda)));
    // S_{-2}/r² is even in r: Richardson on f(h) = S_{-2}(h)/h²
    let h = floor;
    let (_, s0_h, s_m2_h, n_h, n_hs) = floquet_terms(reduced, h, nu, &opts.truncation)?;
    let (_, _, s_m2_2h, _, _) = floquet_terms(reduced, 2.0 * h, nu, &opts.truncation)?;
    let f_h = s_m2_h / (h * h);
    let f_2h = s_m2_2h / (4.0 * h * h);
    let s_m2_over_r2 = (f_h * 4.0 - f_2h) / 3.0;
    let s0 = if r > 0.0 {
        floquet_terms(reduced, r, nu, &opts.truncation)?.1
    } else {
        // S_0 is even in r as well
        let (_, s0_2h, _, _, _) = floquet_terms(reduced, 2.0 * h, nu, &opts.truncation)?;
        (s0_h * 4.0 - s0_2h) / 3.0
    };
    let s_m2 = s_m2_over_r2 * (r * r);
    let cooling = (I * 2.0 * lambda * v_m1_over_r).re - 2.0 * lambda * lambda * s_m2_over_r2.re;
    let heating = 2.0 * lambda * lambda * (s0 - s_m2).re;
    if !(cooling.is_finite() && heating.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite linear-response rates at r = {r}"
        )));
    }
    Ok(QuditTerms {
        cooling,
        heating,
        method: RateMethod::LinearResponse,
        n_h,
        n_h_spectral: n_hs,
    })
}

/// `Γ_c(r) = γ + Re(2iλV_{-1}/r - 2λ²S_{-2}(-ν)/r²)` and
/// `γN(r) = γN_th + 2λ² Re(S_0(-ν) - S_{-2}(-ν))`.
pub fn collective_rates(
    reduced: &ReducedBloch,
    osc: &OscillatorSpec,
    r: f64,
    opts: &RateOptions,
) -> Result<CollectiveRates> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("amplitude must be >= 0, got {r}")));
    }
    let terms = qudit_terms(reduced, osc, r, opts)?;
    Ok(CollectiveRates {
        r,
        gamma_c: osc.gamma + terms.cooling,
        gamma_n: osc.thermal_heating() + terms.heating,
        qudit_cooling: terms.cooling,
        qudit_heating: terms.heating,
        method: terms.method,
        n_h: terms.n_h,
        n_h_spectral: terms.n_h_spectral,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveProvenance {
    pub qudit: String,
    pub oscillator: OscillatorSpec,
    pub alpha_ss: [f64; 2],
    pub options: RateOptions,
    pub version: &'static str,
}

/// A point that failed during a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct PointFailure {
    pub r: f64,
    pub error: String,
}

/// Sampled `Γ_c(r)` and `γN(r)`.
#[derive(Debug, Clone, Serialize)]
pub struct RateCurve {
    pub r: Vec<f64>,
    #[serde(rename = "Gamma_c")]
    pub gamma_c: Vec<f64>,
    #[serde(rename = "gammaN")]
    pub gamma_n: Vec<f64>,
    #[serde(skip)]
    pub qudit_cooling: Vec<f64>,
    #[serde(skip)]
    pub qudit_heating: Vec<f64>,
    pub failures: Vec<PointFailure>,
    pub provenance: CurveProvenance,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty radial grid".into()));
    }
    if grid.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::InvalidInput("radial grid values must be finite and >= 0".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("radial grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `n` log-spaced points over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Default grid: 60 log-spaced points over `[1e-2, 6/η]`.
pub fn default_rate_grid(eta: f64) -> Vec<f64> {
    log_grid(1e-2, 6.0 / eta, 60)
}

/// Evaluates the collective rates on `grid` in parallel. Up to 1% of the
/// points may fail; they are dropped from the curve and listed in
/// `failures`.
pub fn rate_curve(model: &CoolingModel, grid: &[f64], opts: &RateOptions) -> Result<RateCurve> {
    check_grid(grid)?;
    let results: Vec<Result<CollectiveRates>> = grid
        .par_iter()
        .map(|&r| collective_rates(&model.reduced, &model.osc, r, opts))
        .collect();
    let mut curve = RateCurve {
        r: Vec::new(),
        gamma_c: Vec::new(),
        gamma_n: Vec::new(),
        qudit_cooling: Vec::new(),
        qudit_heating: Vec::new(),
        failures: Vec::new(),
        provenance: CurveProvenance {
            qudit: model.qudit.describe(),
            oscillator: model.osc,
            alpha_ss: [model.alpha_ss().re, model.alpha_ss().im],
            options: *opts,
            version: env!("CARGO_PKG_VERSION"),
        },
    };
    for (&r, res) in grid.iter().zip(results) {
        match res {
            Ok(p) => {
                curve.r.push(r);
                curve.gamma_c.push(p.gamma_c);
                curve.gamma_n.push(p.gamma_n);
                curve.qudit_cooling.push(p.qudit_cooling);
                curve.qudit_heating.push(p.qudit_heating);
            }
            Err(e) => curve.failures.push(PointFailure {
                r,
                error: e.to_string(),
            }),
        }
    }
    let failed = curve.failures.len();
    if failed as f64 > 0.01 * grid.len() as f64 {
        return Err(Error::CurveRejected {
            failed,
            total: grid.len(),
            first: format!("r = {}: {}", curve.failures[0].r, curve.failures[0].error),
        });
    }
    Ok(curve)
}

impl RateCurve {
    /// Same qudit contributions with a different bare damping and thermal
    /// occupation. The steady displacement depends on `γ` only through
    /// `γ²/ν²` corrections, which are ignored here.
    pub fn rethermalize(&self, gamma: f64, n_th: f64) -> Result<RateCurve> {
        if !(gamma >= 0.0 && n_th >= 0.0) {
            return Err(Error::InvalidInput("gamma and n_th must be non-negative".into()));
        }
        let mut out = self.clone();
        out.provenance.oscillator.gamma = gamma;
        out.provenance.oscillator.n_th = n_th;
        out.gamma_c = self.qudit_cooling.iter().map(|c| gamma + c).collect();
        out.gamma_n = self.qudit_heating.iter().map(|h| gamma * n_th + h).collect();
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Smallest `Γ_c` on the curve with its radius.
    pub fn min_cooling(&self) -> (f64, f64) {
        self.r.iter().zip(&self.gamma_c).fold(
            (f64::NAN, f64::INFINITY),
            |acc, (&r, &g)| if g < acc.1 { (r, g) } else { acc },
        )
    }

    /// Radius beyond the last sign change of `Γ_c` from negative to
    /// positive, if `Γ_c` ever goes negative.
    pub fn lasing_radius(&self) -> Option<f64> {
        let mut last = None;
        for k in 0..self.r.len() {
            if self.gamma_c[k] < 0.0 {
                last = Some(self.r[k]);
            }
        }
        last
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,Gamma_c,gammaN")?;
        for k in 0..self.r.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e}",
                self.r[k], self.gamma_c[k], self.gamma_n[k]
            )?;
        }
        Ok(())
    }
}

/// Amplitude at which the carrier is Bessel-suppressed, `r_c = 1/(2η)`.
pub fn jump_radius(eta: f64) -> f64 {
    1.0 / (2.0 * eta)
}

/// Sideband amplitudes `J_n(2ηr)` for `n = 0..=n_max`.
pub fn sideband_amplitudes(eta: f64, r: f64, n_max: usize) -> Vec<f64> {
    bessel_j_all(n_max, 2.0 * eta * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MldCriterion {
    pub value: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

/// `η √n_LD`, compared against `threshold` (0.3 by convention).
pub fn mld_criterion(eta: f64, n_ld: f64, threshold: f64) -> MldCriterion {
    let value = eta * n_ld.max(0.0).sqrt();
    MldCriterion {
        value,
        threshold,
        satisfied: value < threshold,
    }
}
