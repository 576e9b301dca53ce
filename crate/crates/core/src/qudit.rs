//! Level systems and their Bloch-vector (generalised Bloch) representation.
//!
//! A qudit is described by a Hamiltonian `H_q`, the coupling operator `V`
//! through which the oscillator position enters (`H_int = λ V (a + a†)`), and a
//! list of Lindblad jump operators. All frequencies are expressed in units of
//! the oscillator frequency ν.
//!
//! The Bloch basis consists of the matrix units `σ_mn = |m⟩⟨n|`, ordered level
//! by level: for each new level `k` we append `σ_kk` followed by the pairs
//! `σ_jk, σ_kj` for `j < k`. For three levels (g, e, d) this yields
//! `σ_gg, σ_ee, σ_ge, σ_eg, σ_dd, σ_gd, σ_dg, σ_ed, σ_de`.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, checked_inverse, commutator, ket_bra, CMat, CVec, C64, I};

/// Tolerance for Hermiticity checks on user supplied operators.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    TwoLevel,
    Ladder,
    Lambda,
    Generic,
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Layout::TwoLevel => "two_level",
            Layout::Ladder => "ladder",
            Layout::Lambda => "lambda",
            Layout::Generic => "generic",
        };
        f.write_str(s)
    }
}

/// Drive and decay parameters of a three-level (Ladder or Λ) system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeLevelParams {
    pub delta1: f64,
    pub delta2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

/// A driven two-level system with detuning, Rabi frequency and decay `e → g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoLevelParams {
    pub detuning: f64,
    pub rabi: f64,
    pub decay: f64,
}

/// A single dissipation channel `rate · D[operator]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    pub rate: f64,
    pub operator: CMat,
}

impl Jump {
    /// Transition `from → to`, i.e. the operator `|to⟩⟨from|`.
    pub fn transition(d: usize, from: usize, to: usize, rate: f64) -> Self {
        Jump {
            rate,
            operator: ket_bra(d, to, from),
        }
    }
}

/// Arbitrary d-level system given by its operators.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericQudit {
    pub hamiltonian: CMat,
    pub coupling: CMat,
    pub jumps: Vec<Jump>,
}

/// Physical description of the dissipative multi-level system.
#[derive(Debug, Clone, PartialEq)]
pub enum QuditSpec {
    TwoLevel(TwoLevelParams),
    Ladder(ThreeLevelParams),
    Lambda(ThreeLevelParams),
    Generic(GenericQudit),
}

impl QuditSpec {
    pub fn layout(&self) -> Layout {
        match self {
            QuditSpec::TwoLevel(_) => Layout::TwoLevel,
            QuditSpec::Ladder(_) => Layout::Ladder,
            QuditSpec::Lambda(_) => Layout::Lambda,
            QuditSpec::Generic(_) => Layout::Generic,
        }
    }

    pub fn level_count(&self) -> usize {
        match self {
            QuditSpec::TwoLevel(_) => 2,
            QuditSpec::Ladder(_) | QuditSpec::Lambda(_) => 3,
            QuditSpec::Generic(g) => g.hamiltonian.nrows(),
        }
    }

    /// Effective two-level system of a Ladder obtained by eliminating the
    /// fast-decaying level `d`, using `Γ_eff = Ω2² / Γ1`.
    ///
    /// This mapping is an inferred default; the decay can be overridden by
    /// callers that know a better value.
    pub fn effective_tls(&self) -> Option<QuditSpec> {
        match self {
            QuditSpec::Ladder(p) if p.gamma1 > 0.0 => Some(QuditSpec::TwoLevel(TwoLevelParams {
                detuning: p.delta1,
                rabi: p.omega1,
                decay: p.omega2 * p.omega2 / p.gamma1,
            })),
            _ => None,
        }
    }

    /// Short human readable summary used in provenance records.
    pub fn describe(&self) -> String {
        match self {
            QuditSpec::TwoLevel(p) => format!("two_level(detuning={}, rabi={}, decay={})", p.detuning, p.rabi, p.decay),
            QuditSpec::Ladder(p) | QuditSpec::Lambda(p) => format!(
                "{}(delta1={}, delta2={}, omega1={}, omega2={}, gamma1={}, gamma2={})",
                self.layout(),
                p.delta1,
                p.delta2,
                p.omega1,
                p.omega2,
                p.gamma1,
                p.gamma2
            ),
            QuditSpec::Generic(g) => format!("generic(d={}, jumps={})", g.hamiltonian.nrows(), g.jumps.len()),
        }
    }
}

/// Oscillator mode parameters. Frequencies share the unit of `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatorSpec {
    pub nu: f64,
    pub gamma: f64,
    pub n_th: f64,
    pub lambda: f64,
}

impl OscillatorSpec {
    pub fn new(gamma: f64, n_th: f64, lambda: f64) -> Result<Self> {
        let osc = OscillatorSpec {
            nu: 1.0,
            gamma,
            n_th,
            lambda,
        };
        osc.validate()?;
        Ok(osc)
    }

    /// Damping from the quality factor, `γ = ν / Q`.
    pub fn from_q(q: f64, n_th: f64, lambda: f64) -> Result<Self> {
        if !(q > 0.0) {
            return Err(Error::InvalidInput(format!("quality factor must be positive, got {q}")));
        }
        Self::new(1.0 / q, n_th, lambda)
    }

    pub fn eta(&self) -> f64 {
        self.lambda / self.nu
    }

    pub fn thermal_heating(&self) -> f64 {
        self.gamma * self.n_th
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.nu > 0.0 && self.nu.is_finite(), "nu must be positive"),
            (
                self.gamma >= 0.0 && self.gamma.is_finite(),
                "gamma must be non-negative",
            ),
            (self.n_th >= 0.0 && self.n_th.is_finite(), "n_th must be non-negative"),
            (
                self.lambda >= 0.0 && self.lambda.is_finite(),
                "lambda must be non-negative",
            ),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::InvalidInput(msg.to_string()));
            }
        }
        Ok(())
    }
}

/// Validated operators of a qudit.
#[derive(Debug, Clone)]
pub struct LevelSystem {
    pub layout: Layout,
    pub hamiltonian: CMat,
    pub coupling: CMat,
    pub jumps: Vec<Jump>,
}

impl LevelSystem {
    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// Action of the qudit Liouvillian `L_q` on an arbitrary operator.
    pub fn lindblad(&self, rho: &CMat) -> CMat {
        let mut out = commutator(&self.hamiltonian, rho) * -I;
        for jump in &self.jumps {
            let l = &jump.operator;
            let ld = l.adjoint();
            let ldl = &ld * l;
            let term = l * rho * &ld - (&ldl * rho + rho * &ldl) * c(0.5);
            out += term * c(jump.rate);
        }
        out
    }
}

fn hermitian_deviation(a: &CMat) -> f64 {
    linalg::max_abs(&(a - a.adjoint()))
}

/// Builds the Hamiltonian, coupling operator and jump list of a qudit.
pub fn build_level_system(spec: &QuditSpec) -> Result<LevelSystem> {
    let sys = match spec {
        QuditSpec::TwoLevel(p) => {
            check_rates(&[("decay", p.decay)])?;
            check_finite(&[p.detuning, p.rabi])?;
            let (g, e) = (0, 1);
            let h = ket_bra(2, e, e) * c(p.detuning) + (ket_bra(2, e, g) + ket_bra(2, g, e)) * c(p.rabi / 2.0);
            LevelSystem {
                layout: Layout::TwoLevel,
                hamiltonian: h,
                coupling: ket_bra(2, e, e),
                jumps: vec![Jump::transition(2, e, g, p.decay)],
            }
        }
        QuditSpec::Ladder(p) => {
            check_rates(&[("gamma1", p.gamma1), ("gamma2", p.gamma2)])?;
            check_finite(&[p.delta1, p.delta2, p.omega1, p.omega2])?;
            let (g, e, d) = (0, 1, 2);
            let h = ket_bra(3, e, e) * c(p.delta1)
                + ket_bra(3, d, d) * c(p.delta1 + p.delta2)
                + (ket_bra(3, e, g) + ket_bra(3, g, e)) * c(p.omega1 / 2.0)
                + (ket_bra(3, e, d) + ket_bra(3, d, e)) * c(p.omega2 / 2.0);
            LevelSystem {
                layout: Layout::Ladder,
                hamiltonian: h,
                coupling: ket_bra(3, e, e),
                jumps: vec![Jump::transition(3, d, g, p.gamma1), Jump::transition(3, d, e, p.gamma2)],
            }
        }
        QuditSpec::Lambda(p) => {
            check_rates(&[("gamma1", p.gamma1), ("gamma2", p.gamma2)])?;
            check_finite(&[p.delta1, p.delta2, p.omega1, p.omega2])?;
            let (g, e, d) = (0, 1, 2);
            let h = ket_bra(3, g, g) * c(-p.delta1)
                + ket_bra(3, e, e) * c(-p.delta2)
                + (ket_bra(3, g, d) + ket_bra(3, d, g)) * c(p.omega1 / 2.0)
                + (ket_bra(3, e, d) + ket_bra(3, d, e)) * c(p.omega2 / 2.0);
            LevelSystem {
                layout: Layout::Lambda,
                hamiltonian: h,
                coupling: ket_bra(3, e, e) - ket_bra(3, g, g),
                jumps: vec![Jump::transition(3, d, g, p.gamma1), Jump::transition(3, d, e, p.gamma2)],
            }
        }
        QuditSpec::Generic(gq) => {
            let d = gq.hamiltonian.nrows();
            if d < 2 || gq.hamiltonian.ncols() != d {
                return Err(Error::InvalidInput(format!(
                    "hamiltonian must be square with d >= 2, got {}x{}",
                    gq.hamiltonian.nrows(),
                    gq.hamiltonian.ncols()
                )));
            }
            if gq.coupling.shape() != (d, d) {
                return Err(Error::InvalidInput("coupling operator dimension mismatch".into()));
            }
            for (name, op) in [("hamiltonian", &gq.hamiltonian), ("coupling", &gq.coupling)] {
                let deviation = hermitian_deviation(op);
                if !(deviation <= HERMITIAN_TOL) {
                    return Err(Error::NotHermitian {
                        name: name.to_string(),
                        deviation,
                    });
                }
            }
            for (k, jump) in gq.jumps.iter().enumerate() {
                if jump.operator.shape() != (d, d) {
                    return Err(Error::InvalidInput(format!("jump {k} has wrong dimension")));
                }
                check_rates(&[("jump rate", jump.rate)])?;
            }
            LevelSystem {
                layout: Layout::Generic,
                hamiltonian: gq.hamiltonian.clone(),
                coupling: gq.coupling.clone(),
                jumps: gq.jumps.clone(),
            }
        }
    };
    Ok(sys)
}

fn check_rates(rates: &[(&str, f64)]) -> Result<()> {
    for (name, rate) in rates {
        if !(*rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{name} must be a non-negative rate, got {rate}"
            )));
        }
    }
    Ok(())
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("non-finite qudit parameter".into()))
    }
}

/// Ordered list of matrix units spanning the operator space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlochBasis {
    dim: usize,
    elements: Vec<(usize, usize)>,
}

impl BlochBasis {
    pub fn new(dim: usize) -> Self {
        let mut elements = Vec::with_capacity(dim * dim);
        for k in 0..dim {
            elements.push((k, k));
            for j in 0..k {
                elements.push((j, k));
                elements.push((k, j));
            }
        }
        BlochBasis { dim, elements }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `(m, n)` labels of `σ_mn = |m⟩⟨n|` in basis order.
    pub fn elements(&self) -> &[(usize, usize)] {
        &self.elements
    }

    pub fn index_of(&self, m: usize, n: usize) -> usize {
        self.elements
            .iter()
            .position(|&e| e == (m, n))
            .expect("matrix unit outside basis")
    }

    /// Density operator `ρ_j` dual to basis element `j`: `Tr{σ_i ρ_j} = δ_ij`.
    pub fn dual(&self, j: usize) -> CMat {
        let (m, n) = self.elements[j];
        ket_bra(self.dim, n, m)
    }

    /// Row functional `x ↦ Tr{op ρ(x)}` acting on Bloch vectors.
    pub fn functional(&self, op: &CMat) -> CVec {
        CVec::from_iterator(self.len(), (0..self.len()).map(|j| linalg::trace(&(op * self.dual(j)))))
    }

    /// Matrix of the linear map `ρ ↦ f(ρ)` expressed on Bloch vectors,
    /// i.e. `out_ij = Tr{σ_i f(ρ_j)}`.
    pub fn represent(&self, f: impl Fn(&CMat) -> CMat) -> CMat {
        let n = self.len();
        let mut out = CMat::zeros(n, n);
        for j in 0..n {
            let image = f(&self.dual(j));
            for (i, &(m, k)) in self.elements.iter().enumerate() {
                // Tr{|m⟩⟨k| X} = X_km
                out[(i, j)] = image[(k, m)];
            }
        }
        out
    }
}

/// Liouvillian and coupling matrices on the full Bloch vector.
#[derive(Debug, Clone)]
pub struct BlochSystem {
    pub layout: Layout,
    pub basis: BlochBasis,
    /// `Tr{σ_i L_q ρ} = Σ_j M_ij ⟨σ_j⟩`
    pub m: CMat,
    /// `Tr{[σ_i, V] ρ} = Σ_j V_ij ⟨σ_j⟩`
    pub v: CMat,
    /// `Tr{σ_i V ρ} = Σ_j W_ij ⟨σ_j⟩`, used for correlation sources.
    pub v_left: CMat,
    /// `⟨V⟩ = v_row · ⟨σ⟩`
    pub v_row: CVec,
    /// `Tr ρ = trace_row · ⟨σ⟩`
    pub trace_row: CVec,
}

pub fn build_bloch_matrices(sys: &LevelSystem) -> BlochSystem {
    let basis = BlochBasis::new(sys.dim());
    let m = basis.represent(|rho| sys.lindblad(rho));
    let v = basis.represent(|rho| commutator(&sys.coupling, rho));
    let v_left = basis.represent(|rho| &sys.coupling * rho);
    let v_row = basis.functional(&sys.coupling);
    let trace_row = basis.functional(&CMat::identity(sys.dim(), sys.dim()));
    BlochSystem {
        layout: sys.layout,
        basis,
        m,
        v,
        v_left,
        v_row,
        trace_row,
    }
}

impl BlochSystem {
    /// Norm of `τ·M`, which vanishes by trace conservation.
    pub fn trace_leak(&self) -> f64 {
        let row = self.trace_row.transpose() * &self.m;
        row.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Transform whose first row is the trace functional.
    ///
    /// Populations are replaced by the trace, `-σ_00 + σ_11` and the
    /// differences `σ_(k-1)(k-1) - σ_kk`; coherences are left untouched.
    pub fn trace_transform(&self) -> CMat {
        let n = self.basis.len();
        let d = self.basis.dim();
        let mut t = CMat::identity(n, n);
        let diag: Vec<usize> = (0..d).map(|k| self.basis.index_of(k, k)).collect();
        for &p in &diag {
            t[(diag[0], p)] = c(1.0);
        }
        let p1 = diag[1];
        t[(p1, diag[0])] = c(-1.0);
        t[(p1, p1)] = c(1.0);
        for k in 2..d {
            let pk = diag[k];
            t[(pk, diag[k - 1])] = c(1.0);
            t[(pk, pk)] = c(-1.0);
        }
        t
    }
}

/// The trace-reduced linear system `dσ̃/dt = M̃ σ̃ + u` (plus the drive `Ṽ`).
#[derive(Debug, Clone)]
pub struct ReducedBloch {
    pub layout: Layout,
    pub basis: BlochBasis,
    pub m: CMat,
    pub v: CMat,
    pub u: CVec,
    pub transform: CMat,
    pub transform_inv: CMat,
    pub alpha_ss: C64,
    pub lambda: f64,
    /// `⟨V⟩ = v_row · σ̃ + v_offset`
    pub v_row: CVec,
    pub v_offset: C64,
    /// Reduced representation of `ρ ↦ Vρ`: `R T W σ = w · σ̃ + w_offset`.
    pub w: CMat,
    pub w_offset: CVec,
}

fn reduce_matrix(t: &CMat, t_inv: &CMat, a: &CMat) -> CMat {
    let full = t * a * t_inv;
    let n = full.nrows();
    full.view((1, 1), (n - 1, n - 1)).into_owned()
}

fn reduce_offset(t: &CMat, t_inv: &CMat, a: &CMat) -> CVec {
    let full = t * a * t_inv;
    let n = full.nrows();
    full.view((1, 0), (n - 1, 1)).column(0).into_owned()
}

/// Removes the trace direction, baking in the static shift `-2iλ Re(α_ss) V`.
pub fn reduce_trace(bloch: &BlochSystem, alpha_ss: C64, lambda: f64) -> Result<ReducedBloch> {
    if !(alpha_ss.re.is_finite() && alpha_ss.im.is_finite()) {
        return Err(Error::InvalidInput("alpha_ss must be finite".into()));
    }
    let t = bloch.trace_transform();
    let t_inv = checked_inverse(&t, "trace transform")?;
    let shifted = &bloch.m - &bloch.v * (I * c(2.0 * lambda * alpha_ss.re));
    let m = reduce_matrix(&t, &t_inv, &shifted);
    let v = reduce_matrix(&t, &t_inv, &bloch.v);
    let u = reduce_offset(&t, &t_inv, &bloch.m);
    let w = reduce_matrix(&t, &t_inv, &bloch.v_left);
    let w_offset = reduce_offset(&t, &t_inv, &bloch.v_left);
    let row = bloch.v_row.transpose() * &t_inv;
    let n = row.ncols();
    let v_row = CVec::from_iterator(n - 1, row.iter().skip(1).cloned());
    let v_offset = row[(0, 0)];
    Ok(ReducedBloch {
        layout: bloch.layout,
        basis: bloch.basis.clone(),
        m,
        v,
        u,
        transform: t,
        transform_inv: t_inv,
        alpha_ss,
        lambda,
        v_row,
        v_offset,
        w,
        w_offset,
    })
}

impl ReducedBloch {
    pub fn reduced_len(&self) -> usize {
        self.m.nrows()
    }

    /// Physical Bloch vector `T⁻¹ (1, σ̃)`.
    pub fn to_bloch(&self, reduced: &CVec) -> BlochVector {
        BlochVector {
            basis: self.basis.clone(),
            values: self.lift(reduced, c(1.0)),
        }
    }

    /// `T⁻¹ (head, σ̃)`; `head = 0` lifts trace-free quantities.
    pub fn lift(&self, reduced: &CVec, head: C64) -> CVec {
        let n = self.basis.len();
        let mut y = CVec::zeros(n);
        y[0] = head;
        y.rows_mut(1, n - 1).copy_from(reduced);
        &self.transform_inv * y
    }

    /// Reduced coordinates of a physical Bloch vector.
    pub fn to_reduced(&self, bloch: &CVec) -> CVec {
        let y = &self.transform * bloch;
        y.rows(1, y.len() - 1).into_owned()
    }

    pub fn expectation_v(&self, reduced: &CVec) -> C64 {
        self.v_row.dot(reduced) + self.v_offset
    }

    /// Trace-free part `V · x` for a lifted vector with zero trace component.
    pub fn v_component(&self, reduced: &CVec) -> C64 {
        self.v_row.dot(reduced)
    }

    pub fn condition(&self) -> f64 {
        linalg::condition_1norm(&self.m)
    }
}

/// Bloch vector `⟨σ_i⟩` in a given basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochVector {
    pub basis: BlochBasis,
    pub values: CVec,
}

impl BlochVector {
    /// `⟨σ_mn⟩ = Tr{|m⟩⟨n| ρ} = ρ_nm`
    pub fn entry(&self, m: usize, n: usize) -> C64 {
        self.values[self.basis.index_of(m, n)]
    }

    pub fn density_matrix(&self) -> CMat {
        let d = self.basis.dim();
        let mut rho = CMat::zeros(d, d);
        for (j, &(m, n)) in self.basis.elements().iter().enumerate() {
            rho[(n, m)] = self.values[j];
        }
        rho
    }

    pub fn population(&self, k: usize) -> f64 {
        self.entry(k, k).re
    }

    pub fn trace(&self) -> C64 {
        (0..self.basis.dim()).map(|k| self.entry(k, k)).sum()
    }

    pub fn expectation(&self, op: &CMat) -> C64 {
        linalg::trace(&(op * self.density_matrix()))
    }

    /// Largest violation of `⟨σ_mn⟩ = conj⟨σ_nm⟩`.
    pub fn hermiticity_error(&self) -> f64 {
        let rho = self.density_matrix();
        linalg::max_abs(&(&rho - rho.adjoint()))
    }
}

/// Solves `M̃ σ̃ = -u` and returns the physical steady state.
pub fn solve_static_steady(reduced: &ReducedBloch) -> Result<BlochVector> {
    Ok(reduced.to_bloch(&static_reduced(reduced)?))
}

/// Reduced static steady state `σ̃ = -M̃⁻¹ u`.
pub fn static_reduced(reduced: &ReducedBloch) -> Result<CVec> {
    let condition = reduced.condition();
    if !condition.is_finite() || condition > linalg::MAX_CONDITION {
        return Err(Error::Singular {
            context: "reduced Liouvillian (dark state degeneracy or missing dissipation)".into(),
            condition,
        });
    }
    let lu = reduced.m.clone().lu();
    lu.solve(&(-&reduced.u)).ok_or(Error::Singular {
        context: "reduced Liouvillian".into(),
        condition,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct AlphaOptions {
    pub max_iterations: usize,
    pub tol: f64,
}

impl Default for AlphaOptions {
    fn default() -> Self {
        AlphaOptions {
            max_iterations: 200,
            tol: 1e-12,
        }
    }
}

/// Residual of `(iν + γ/2) α + iλ ⟨V⟩_ss(α)`.
pub fn alpha_residual(bloch: &BlochSystem, osc: &OscillatorSpec, alpha: C64) -> Result<f64> {
    let v = steady_v(bloch, osc.lambda, alpha)?;
    Ok(((I * osc.nu + osc.gamma / 2.0) * alpha + I * osc.lambda * v).norm())
}

fn steady_v(bloch: &BlochSystem, lambda: f64, alpha: C64) -> Result<C64> {
    let reduced = reduce_trace(bloch, alpha, lambda)?;
    let x = static_reduced(&reduced)?;
    Ok(reduced.expectation_v(&x))
}

/// Self-consistent steady displacement of the oscillator.
///
/// Plain fixed-point iteration from `α = 0`, switching to a damping factor of
/// 0.5 as soon as successive steps stop shrinking.
pub fn solve_alpha_ss(bloch: &BlochSystem, osc: &OscillatorSpec, opts: AlphaOptions) -> Result<Complex64> {
    osc.validate()?;
    if osc.lambda == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let denom = I * osc.nu + osc.gamma / 2.0;
    let map = |alpha: C64| -> Result<C64> { Ok(-I * osc.lambda * steady_v(bloch, osc.lambda, alpha)? / denom) };

    let mut alpha = C64::new(0.0, 0.0);
    let mut damping = 1.0;
    let mut last_step = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let next = map(alpha)?;
        let step = (next - alpha).norm();
        if step < opts.tol * alpha.norm().max(1.0) {
            return Ok(next);
        }
        if step >= last_step {
            damping = 0.5;
        }
        last_step = step;
        alpha += (next - alpha) * damping;
    }
    let residual = alpha_residual(bloch, osc, alpha)?;
    Err(Error::DisplacementNotConverged {
        iterations: opts.max_iterations,
        last: alpha,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn slow_ladder() -> QuditSpec {
        QuditSpec::Ladder(ThreeLevelParams {
            delta1: 0.8,
            delta2: 0.0,
            omega1: 0.6,
            omega2: 0.4f64.sqrt(),
            gamma1: 2.0,
            gamma2: 0.0,
        })
    }

    fn lambda_spec(delta: f64, omega: f64, gamma: f64) -> QuditSpec {
        QuditSpec::Lambda(ThreeLevelParams {
            delta1: delta,
            delta2: delta,
            omega1: omega,
            omega2: omega,
            gamma1: gamma,
            gamma2: gamma,
        })
    }

    #[test]
    fn ladder_hamiltonian_entries() {
        let sys = build_level_system(&slow_ladder()).unwrap();
        let h = &sys.hamiltonian;
        assert_eq!(h[(1, 1)], c(0.8));
        assert_eq!(h[(1, 0)], c(0.3));
        assert_eq!(h[(0, 1)], c(0.3));
        assert!((h[(1, 2)].re - 0.4f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((h[(2, 1)].re - 0.4f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(sys.coupling, ket_bra(3, 1, 1));
        assert_eq!(sys.jumps.len(), 2);
        assert_eq!(sys.jumps[0].operator, ket_bra(3, 0, 2));
        assert_eq!(sys.jumps[1].operator, ket_bra(3, 1, 2));
    }

    #[test]
    fn undriven_lambda_is_diagonal() {
        let spec = QuditSpec::Lambda(ThreeLevelParams {
            delta1: 3.0,
            delta2: 5.0,
            omega1: 0.0,
            omega2: 0.0,
            gamma1: 1.0,
            gamma2: 1.0,
        });
        let sys = build_level_system(&spec).unwrap();
        let mut expected = CMat::zeros(3, 3);
        expected[(0, 0)] = c(-3.0);
        expected[(1, 1)] = c(-5.0);
        assert_eq!(sys.hamiltonian, expected);
        assert_eq!(sys.coupling, ket_bra(3, 1, 1) - ket_bra(3, 0, 0));
    }

    #[test]
    fn generic_two_level_accepted() {
        let (delta, omega, gamma) = (0.5f64, 0.7f64, 1.3f64);
        let h = ket_bra(2, 1, 1) * c(delta) + (ket_bra(2, 1, 0) + ket_bra(2, 0, 1)) * c(omega / 2.0);
        let spec = QuditSpec::Generic(GenericQudit {
            hamiltonian: h,
            coupling: ket_bra(2, 1, 1),
            jumps: vec![Jump {
                rate: 1.0,
                operator: ket_bra(2, 0, 1) * c(gamma.sqrt()),
            }],
        });
        let sys = build_level_system(&spec).unwrap();
        assert_eq!(sys.dim(), 2);
        assert_eq!(spec.level_count(), 2);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut h = CMat::zeros(2, 2);
        h[(0, 1)] = c(1.0);
        let spec = QuditSpec::Generic(GenericQudit {
            hamiltonian: h,
            coupling: ket_bra(2, 1, 1),
            jumps: vec![],
        });
        assert!(matches!(build_level_system(&spec), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn negative_rate_rejected() {
        let spec = lambda_spec(-1.0, 1.0, -2.0);
        assert!(matches!(build_level_system(&spec), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn basis_order_matches_three_level_convention() {
        let b = BlochBasis::new(3);
        let (g, e, d) = (0, 1, 2);
        assert_eq!(
            b.elements(),
            &[(g, g), (e, e), (g, e), (e, g), (d, d), (g, d), (d, g), (e, d), (d, e)]
        );
    }

    #[test]
    fn trace_is_conserved_by_m() {
        for spec in [slow_ladder(), lambda_spec(-50.0, 1.0, 10.0)] {
            let bloch = build_bloch_matrices(&build_level_system(&spec).unwrap());
            assert!(bloch.trace_leak() < 1e-10);
        }
    }

    #[test]
    fn lambda_commutator_row_for_sigma_ge() {
        let bloch = build_bloch_matrices(&build_level_system(&lambda_spec(-50.0, 1.0, 10.0)).unwrap());
        let row = bloch.basis.index_of(0, 1);
        for j in 0..9 {
            let expected = if j == row { c(2.0) } else { c(0.0) };
            assert!((bloch.v[(row, j)] - expected).norm() < 1e-15, "column {j}");
        }
    }

    #[test]
    fn three_level_transform_matches_convention() {
        let bloch = build_bloch_matrices(&build_level_system(&slow_ladder()).unwrap());
        let t = bloch.trace_transform();
        // σ̃_1 = gg + ee + dd, σ̃_2 = -gg + ee, σ̃_5 = ee - dd
        let rows: [(usize, [f64; 9]); 3] = [
            (0, [1., 1., 0., 0., 1., 0., 0., 0., 0.]),
            (1, [-1., 1., 0., 0., 0., 0., 0., 0., 0.]),
            (4, [0., 1., 0., 0., -1., 0., 0., 0., 0.]),
        ];
        for (i, row) in rows {
            for j in 0..9 {
                assert_eq!(t[(i, j)], c(row[j]));
            }
        }
        assert_eq!(t[(2, 2)], c(1.0));
        assert_eq!(t[(8, 8)], c(1.0));
    }

    #[test]
    fn reduced_is_lambda_independent_without_displacement() {
        let bloch = build_bloch_matrices(&build_level_system(&slow_ladder()).unwrap());
        let a = reduce_trace(&bloch, C64::new(0.0, 0.0), 0.1).unwrap();
        let b = reduce_trace(&bloch, C64::new(0.0, 0.0), 7.0).unwrap();
        assert_eq!(a.m, b.m);
    }

    #[test]
    fn fully_undriven_ladder_is_degenerate() {
        let spec = QuditSpec::Ladder(ThreeLevelParams {
            delta1: 0.8,
            delta2: 0.0,
            omega1: 0.0,
            omega2: 0.0,
            gamma1: 2.0,
            gamma2: 0.0,
        });
        let bloch = build_bloch_matrices(&build_level_system(&spec).unwrap());
        let reduced = reduce_trace(&bloch, C64::new(0.0, 0.0), 0.0).unwrap();
        // nothing empties |e⟩, so its population is a second conserved quantity
        match solve_static_steady(&reduced) {
            Err(Error::Singular { condition, .. }) => assert!(condition > 1e12),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn repumped_ladder_without_cooling_drive_sits_in_ground() {
        let spec = QuditSpec::Ladder(ThreeLevelParams {
            delta1: 0.8,
            delta2: 0.0,
            omega1: 0.0,
            omega2: 0.7,
            gamma1: 2.0,
            gamma2: 0.0,
        });
        let bloch = build_bloch_matrices(&build_level_system(&spec).unwrap());
        let reduced = reduce_trace(&bloch, C64::new(0.0, 0.0), 0.0).unwrap();
        let ss = solve_static_steady(&reduced).unwrap();
        for (j, value) in ss.values.iter().enumerate() {
            let expected = if j == 0 { 1.0 } else { 0.0 };
            assert!((value - c(expected)).norm() < 1e-12, "component {j}: {value}");
        }
    }

    #[test]
    fn zero_coupling_gives_zero_displacement() {
        let bloch = build_bloch_matrices(&build_level_system(&slow_ladder()).unwrap());
        let osc = OscillatorSpec::new(5e-5, 10.0, 0.0).unwrap();
        assert_eq!(
            solve_alpha_ss(&bloch, &osc, AlphaOptions::default()).unwrap(),
            C64::new(0.0, 0.0)
        );
    }

    #[test]
    fn q_factor_sets_damping() {
        let osc = OscillatorSpec::from_q(20000.0, 1.0, 0.1).unwrap();
        assert_eq!(osc.gamma, 5e-5);
        assert_eq!(osc.eta(), 0.1);
    }

    #[test]
    fn effective_tls_decay_matches_both_ladder_variants() {
        let a = slow_ladder().effective_tls().unwrap();
        let b = QuditSpec::Ladder(ThreeLevelParams {
            delta1: 0.8,
            delta2: 0.0,
            omega1: 0.6,
            omega2: 2.0,
            gamma1: 20.0,
            gamma2: 0.0,
        })
        .effective_tls()
        .unwrap();
        for tls in [a, b] {
            match tls {
                QuditSpec::TwoLevel(p) => assert!((p.decay - 0.2).abs() < 1e-12),
                _ => unreachable!(),
            }
        }
    }
}
