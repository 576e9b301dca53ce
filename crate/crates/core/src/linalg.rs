//! Small dense complex linear-algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Condition numbers above this are treated as singular.
pub const MAX_CONDITION: f64 = 1e13;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// 1-norm condition estimate `‖A‖₁ ‖A⁻¹‖₁`, computed from an explicit inverse.
///
/// The blocks handled here are at most 63×63, so the inverse is cheap.
pub fn condition_1norm(a: &CMat) -> f64 {
    match a.clone().try_inverse() {
        Some(inv) => norm1(a) * norm1(&inv),
        None => f64::INFINITY,
    }
}

pub fn norm1(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse of `a`, rejecting near-singular input.
pub fn checked_inverse(a: &CMat, context: &str) -> Result<CMat> {
    let inv = a.clone().try_inverse().ok_or_else(|| Error::Singular {
        context: context.to_string(),
        condition: f64::INFINITY,
    })?;
    let condition = norm1(a) * norm1(&inv);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::Singular {
            context: context.to_string(),
            condition,
        });
    }
    Ok(inv)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Matrix unit `|m⟩⟨n|` in dimension `d`.
pub fn ket_bra(d: usize, m: usize, n: usize) -> CMat {
    let mut out = CMat::zeros(d, d);
    out[(m, n)] = c(1.0);
    out
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn trace(a: &CMat) -> C64 {
    (0..a.nrows()).map(|k| a[(k, k)]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_well_conditioned() {
        let id = CMat::identity(4, 4);
        assert!((condition_1norm(&id) - 1.0).abs() < 1e-14);
        assert!(checked_inverse(&id, "id").is_ok());
    }

    #[test]
    fn singular_matrix_rejected() {
        let mut a = CMat::zeros(2, 2);
        a[(0, 0)] = c(1.0);
        let err = checked_inverse(&a, "test").unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }
}
