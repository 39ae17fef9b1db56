use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("log log n is undefined for n = {0}")]
    LogLog(usize),
    #[error("log n is undefined for n = 0")]
    ZeroTotal,
    #[error("scaffold count must be at least 1")]
    ZeroCount,
}

/// Bernoulli Kullback-Leibler divergence KL(p ‖ q), with the usual limits
/// at the borders.
pub fn kl_bernoulli<F: Scalar>(p: F, q: F) -> F {
    let zero = F::zero();
    let one = F::one();
    let term = |a: F, b: F| {
        if a <= zero {
            zero
        } else if b <= zero {
            F::infinity()
        } else {
            a * (a / b).ln()
        }
    };
    term(p, q) + term(one - p, one - q)
}

/// Largest q in [p̂, 1] with `count · KL(p̂, q) ≤ bound`, by bisection to
/// `tol`.
pub fn klucb_with_bound<F: Scalar>(p_hat: F, count: usize, bound: F, tol: F) -> F {
    let p = p_hat.max(F::zero()).min(F::one());
    let n = F::from_usize_lossy(count);
    let feasible = |q: F| n * kl_bernoulli(p, q) <= bound;
    if feasible(F::one()) {
        return F::one();
    }
    let (mut lo, mut hi) = (p, F::one());
    while hi - lo > tol {
        let mid = (lo + hi) * F::lit(0.5);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// KL-UCB index with exploration bound `ln n + c · ln ln n`.
pub fn klucb_solve<F: Scalar>(
    p_hat: F,
    count: usize,
    n: usize,
    c: F,
    tol: F,
) -> Result<F, DomainError> {
    if count == 0 {
        return Err(DomainError::ZeroCount);
    }
    if n == 0 {
        return Err(DomainError::ZeroTotal);
    }
    let log_n = F::from_usize_lossy(n).ln();
    let bound = if c == F::zero() {
        log_n
    } else {
        if n < 2 {
            return Err(DomainError::LogLog(n));
        }
        log_n + c * log_n.ln()
    };
    Ok(klucb_with_bound(p_hat, count, bound, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-6;

    /// Scan of a uniform grid over [p, 1]: the last feasible grid point.
    fn grid_oracle(p: f64, count: usize, bound: f64) -> f64 {
        let steps = ((1.0 - p) / 1e-5).round() as usize;
        let mut best = p;
        for k in 0..=steps {
            let q = p + (1.0 - p) * k as f64 / steps.max(1) as f64;
            if count as f64 * kl_bernoulli(p, q) <= bound {
                best = q;
            }
        }
        best
    }

    #[test]
    fn certain_success_is_one() {
        assert_eq!(klucb_solve(1.0, 3, 10, 0.0, TOL).unwrap(), 1.0);
    }

    #[test]
    fn closed_form_from_zero() {
        let q = klucb_with_bound(0.0, 1, 1.0, TOL);
        assert!((q - (1.0 - (-1.0f64).exp())).abs() < 1e-6);
    }

    #[test]
    fn matches_grid_search() {
        let q = klucb_solve(0.5, 2, 8, 0.0, TOL).unwrap();
        assert!((q - grid_oracle(0.5, 2, 8f64.ln())).abs() < 1e-3);
        assert!((q - 0.968).abs() < 1e-3);
    }

    #[test]
    fn domain_errors() {
        assert_eq!(klucb_solve(0.5, 1, 1, 1.0, TOL), Err(DomainError::LogLog(1)));
        assert_eq!(klucb_solve(0.5, 0, 10, 0.0, TOL), Err(DomainError::ZeroCount));
        assert_eq!(klucb_solve(0.5, 1, 0, 0.0, TOL), Err(DomainError::ZeroTotal));
        assert!(klucb_solve(0.5, 1, 1, 0.0, TOL).is_ok());
    }

    #[test]
    fn index_shrinks_with_more_observations() {
        let a = klucb_solve(0.6, 1, 1000, 0.0, TOL).unwrap();
        let b = klucb_solve(0.6, 100, 1000, 0.0, TOL).unwrap();
        assert!(a > b && b > 0.6);
    }

    #[test]
    fn kl_limits() {
        assert!((kl_bernoulli(0.0, 0.3) + (0.7f64).ln()).abs() < 1e-15);
        assert!((kl_bernoulli(1.0, 0.3) + (0.3f64).ln()).abs() < 1e-15);
        assert!(kl_bernoulli(0.4f64, 1.0).is_infinite());
        assert_eq!(kl_bernoulli(0.4, 0.4), 0.0);
    }
}
