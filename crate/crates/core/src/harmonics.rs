//! Fourier series of ν-periodic quantities, `x(t) = Σ_n c_n e^{inνt}`.

use crate::error::{Error, Result};
use crate::linalg::{CVec, C64};

/// Coefficient types that can be scaled by a complex number and summed.
pub trait Coefficient: Clone {
    fn zero_like(&self) -> Self;
    fn scaled(&self, factor: C64) -> Self;
    fn add_scaled(&mut self, other: &Self, factor: C64);
    fn magnitude(&self) -> f64;
}

impl Coefficient for C64 {
    fn zero_like(&self) -> Self {
        C64::new(0.0, 0.0)
    }
    fn scaled(&self, factor: C64) -> Self {
        self * factor
    }
    fn add_scaled(&mut self, other: &Self, factor: C64) {
        *self += other * factor;
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Coefficient for CVec {
    fn zero_like(&self) -> Self {
        CVec::zeros(self.len())
    }
    fn scaled(&self, factor: C64) -> Self {
        self * factor
    }
    fn add_scaled(&mut self, other: &Self, factor: C64) {
        self.axpy(factor, other, C64::new(1.0, 0.0));
    }
    fn magnitude(&self) -> f64 {
        crate::linalg::vec_norm(self)
    }
}

/// Coefficients `c_n` for `n ∈ [-span, span]` of a ν-periodic signal.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSeries<T> {
    span: usize,
    coeffs: Vec<T>,
    nu: f64,
}

impl<T: Coefficient> HarmonicSeries<T> {
    /// `coeffs[k]` holds harmonic `n = k - span`; the length must be odd.
    pub fn new(coeffs: Vec<T>, nu: f64) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "harmonic series needs an odd number of coefficients, got {}",
                coeffs.len()
            )));
        }
        let span = coeffs.len() / 2;
        Ok(HarmonicSeries { span, coeffs, nu })
    }

    /// Series with a single nonzero harmonic.
    pub fn single(n: i64, value: T, nu: f64) -> Self {
        let span = n.unsigned_abs() as usize;
        let mut coeffs = vec![value.zero_like(); 2 * span + 1];
        coeffs[(n + span as i64) as usize] = value;
        HarmonicSeries { span, coeffs, nu }
    }

    pub fn span(&self) -> usize {
        self.span
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coeffs
    }

    pub fn get(&self, n: i64) -> Option<&T> {
        if n.unsigned_abs() as usize > self.span {
            return None;
        }
        self.coeffs.get((n + self.span as i64) as usize)
    }

    /// Coefficient `n`, or zero outside the stored span.
    pub fn at(&self, n: i64) -> T {
        self.get(n).cloned().unwrap_or_else(|| self.coeffs[0].zero_like())
    }

    pub fn harmonics(&self) -> impl Iterator<Item = (i64, &T)> {
        let span = self.span as i64;
        self.coeffs.iter().enumerate().map(move |(k, c)| (k as i64 - span, c))
    }

    pub fn map<U: Coefficient>(&self, f: impl Fn(&T) -> U) -> HarmonicSeries<U> {
        HarmonicSeries {
            span: self.span,
            coeffs: self.coeffs.iter().map(f).collect(),
            nu: self.nu,
        }
    }

    pub fn evaluate(&self, t: f64) -> T {
        let mut out = self.coeffs[0].zero_like();
        for (n, c) in self.harmonics() {
            out.add_scaled(c, C64::from_polar(1.0, n as f64 * self.nu * t));
        }
        out
    }

    /// Largest coefficient magnitude at the outermost harmonics `|n| = span`.
    pub fn edge_magnitude(&self) -> f64 {
        self.coeffs[0].magnitude().max(self.coeffs[2 * self.span].magnitude())
    }

    /// Keeps only `|n| ≤ span`.
    pub fn truncated(&self, span: usize) -> Self {
        if span == self.span {
            return self.clone();
        }
        if span > self.span {
            return self.padded(span);
        }
        let start = self.span - span;
        HarmonicSeries {
            span,
            coeffs: self.coeffs[start..start + 2 * span + 1].to_vec(),
            nu: self.nu,
        }
    }

    /// Zero-pads to `|n| ≤ span`.
    pub fn padded(&self, span: usize) -> Self {
        if span == self.span {
            return self.clone();
        }
        if span < self.span {
            return self.truncated(span);
        }
        let zero = self.coeffs[0].zero_like();
        let pad = span - self.span;
        let mut coeffs = vec![zero.clone(); pad];
        coeffs.extend(self.coeffs.iter().cloned());
        coeffs.extend(std::iter::repeat_n(zero, pad));
        HarmonicSeries {
            span,
            coeffs,
            nu: self.nu,
        }
    }

    /// Product with a scalar series: the discrete convolution
    /// `(a·b)_n = Σ_k a_k b_{n-k}`, kept in full (span `a.span + b.span`).
    pub fn times_scalar(&self, other: &HarmonicSeries<C64>) -> Result<HarmonicSeries<T>> {
        if (self.nu - other.nu).abs() > 1e-12 * self.nu.abs().max(other.nu.abs()) {
            return Err(Error::InvalidInput(format!(
                "cannot multiply series with fundamentals {} and {}",
                self.nu, other.nu
            )));
        }
        let span = self.span + other.span;
        let mut coeffs = vec![self.coeffs[0].zero_like(); 2 * span + 1];
        for (n, a) in self.harmonics() {
            for (m, b) in other.harmonics() {
                let k = (n + m + span as i64) as usize;
                coeffs[k].add_scaled(a, *b);
            }
        }
        Ok(HarmonicSeries {
            span,
            coeffs,
            nu: self.nu,
        })
    }
}

/// Product of two scalar series.
pub fn series_product(a: &HarmonicSeries<C64>, b: &HarmonicSeries<C64>) -> Result<HarmonicSeries<C64>> {
    a.times_scalar(b)
}

/// Projects uniformly spaced samples covering whole periods onto harmonics
/// `|n| ≤ span`: `c_n = (1/K) Σ_k x(t_k) e^{-inνt_k}`.
pub fn fourier_project<T: Coefficient>(
    samples: &[T],
    times: &[f64],
    nu: f64,
    span: usize,
) -> Result<HarmonicSeries<T>> {
    if samples.is_empty() || samples.len() != times.len() {
        return Err(Error::InvalidInput(
            "sample and time arrays must be non-empty and equal length".into(),
        ));
    }
    if 2 * span + 1 > samples.len() {
        return Err(Error::InvalidInput(format!(
            "{} samples cannot resolve harmonics up to |n| = {span}",
            samples.len()
        )));
    }
    let weight = 1.0 / samples.len() as f64;
    let coeffs = (-(span as i64)..=span as i64)
        .map(|n| {
            let mut acc = samples[0].zero_like();
            for (x, &t) in samples.iter().zip(times) {
                acc.add_scaled(x, C64::from_polar(weight, -(n as f64) * nu * t));
            }
            acc
        })
        .collect();
    HarmonicSeries::new(coeffs, nu)
}
