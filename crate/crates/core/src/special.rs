//! Bessel functions of the first kind for the sideband amplitudes.

/// `J_n(x)` for `n = 0..=n_max` by Miller's backward recurrence,
/// normalized with `J_0 + 2 Σ_k J_{2k} = 1`.
pub fn bessel_j_all(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = n_max.max(ax.ceil() as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / ax * cur - next;
        next = cur;
        cur = prev;
        // cur is now J_{k-1} up to scale
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
        let order = k - 1;
        if order <= n_max {
            out[order] = cur;
        }
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * cur;
        }
    }
    norm += cur;
    for (n, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

pub fn bessel_j(n: usize, x: f64) -> f64 {
    bessel_j_all(n, x)[n]
}

#[cfg(test)]
mod tests {
    use super::*;

    // ascending series, only trustworthy for moderate x
    fn series(n: usize, x: f64) -> f64 {
        let half = x / 2.0;
        let mut term = half.powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
        let mut sum = term;
        for k in 1..200 {
            term *= -half * half / (k as f64 * (k + n) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    }

    #[test]
    fn matches_power_series() {
        for &x in &[0.1, 0.5, 1.0, 2.4048, 3.7, 7.5, 12.0] {
            let all = bessel_j_all(12, x);
            for (n, v) in all.iter().enumerate() {
                assert!((v - series(n, x)).abs() < 1e-12, "n={n} x={x}: {v} vs {}", series(n, x));
            }
        }
    }

    #[test]
    fn origin_values() {
        let v = bessel_j_all(4, 0.0);
        assert_eq!(v, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn first_zero() {
        assert!(bessel_j(0, 2.4048).abs() < 1e-3);
        assert!(series(0, 2.404825557695773).abs() < 1e-14);
    }

    #[test]
    fn large_argument_parseval() {
        let x = 120.0;
        let v = bessel_j_all(400, x);
        let sum: f64 = v[0] * v[0] + 2.0 * v[1..].iter().map(|j| j * j).sum::<f64>();
        assert!((sum - 1.0).abs() < 1e-10);
        // asymptotic form J_0(x) ≈ sqrt(2/πx) cos(x - π/4)
        let asym = (2.0 / (std::f64::consts::PI * x)).sqrt() * (x - std::f64::consts::FRAC_PI_4).cos();
        assert!((v[0] - asym).abs() < 1e-3);
    }

    #[test]
    fn odd_orders_flip_for_negative_argument() {
        let a = bessel_j_all(3, 1.3);
        let b = bessel_j_all(3, -1.3);
        assert!((a[1] + b[1]).abs() < 1e-15 && (a[2] - b[2]).abs() < 1e-15);
    }
}
