//! Multiplicative penalties on the extrinsic reward of an active, as a
//! function of `n`, the number of actives in memory sharing its molecular
//! scaffold (the active itself included), and the bucket size `m`.

use crate::{logistic, Scalar};

/// Hard cut-off: 0 once the bucket is full.
pub fn penalty_ims<F: Scalar>(n: usize, m: usize) -> F {
    if n >= m {
        F::zero()
    } else {
        F::one()
    }
}

/// `1 + erf(√π/m) − erf(√π·n/m)`.
pub fn penalty_erf<F: Scalar>(n: usize, m: usize) -> F {
    let sqrt_pi = F::PI().sqrt();
    let m = F::from_usize_lossy(m);
    let n = F::from_usize_lossy(n);
    F::one() + (sqrt_pi / m).erf() - (sqrt_pi * n / m).erf()
}

/// `max(0, 1 − n/m)`.
pub fn penalty_linear<F: Scalar>(n: usize, m: usize) -> F {
    (F::one() - F::from_usize_lossy(n) / F::from_usize_lossy(m)).max(F::zero())
}

/// `1 − logistic((2n/m − 1) / 0.15)`.
pub fn penalty_sigmoid<F: Scalar>(n: usize, m: usize) -> F {
    let x = (F::lit(2.0) * F::from_usize_lossy(n) / F::from_usize_lossy(m) - F::one()) / F::lit(0.15);
    F::one() - logistic(x)
}

/// `1 − tanh(c·(n − 1)/m)`.
pub fn penalty_tanh<F: Scalar>(n: usize, m: usize, c: F) -> F {
    let k = F::from_usize_lossy(n.saturating_sub(1));
    F::one() - (c * k / F::from_usize_lossy(m)).tanh()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed independently with scipy.special.erf and
    // numpy (see the formulas above); frozen here.
    const ERF_25_25: f64 = 0.092_055_042_786_076_01;
    const SIG_1_25: f64 = 0.997_835_358_069_958_4;
    const SIG_25_25: f64 = 0.001_271_016_263_081_348_2;
    const TANH_26_25: f64 = 0.004_945_246_313_269_536;
    const TANH_13_25: f64 = 0.106_302_272_796_127_47;

    #[test]
    fn ims_boundary() {
        assert_eq!(penalty_ims::<f64>(1, 25), 1.0);
        assert_eq!(penalty_ims::<f64>(24, 25), 1.0);
        assert_eq!(penalty_ims::<f64>(25, 25), 0.0);
    }

    #[test]
    fn erf_values() {
        assert_eq!(penalty_erf::<f64>(1, 25), 1.0);
        assert!((penalty_erf::<f64>(25, 25) - ERF_25_25).abs() < 1e-12);
    }

    #[test]
    fn linear_values() {
        assert!((penalty_linear::<f64>(5, 25) - 0.8).abs() < 1e-15);
        assert_eq!(penalty_linear::<f64>(25, 25), 0.0);
        assert_eq!(penalty_linear::<f64>(30, 25), 0.0);
    }

    #[test]
    fn sigmoid_values() {
        assert!((penalty_sigmoid::<f64>(1, 25) - SIG_1_25).abs() < 1e-12);
        assert!((penalty_sigmoid::<f64>(25, 25) - SIG_25_25).abs() < 1e-12);
        assert_eq!(penalty_sigmoid::<f64>(5, 10), 0.5);
    }

    #[test]
    fn tanh_values() {
        assert_eq!(penalty_tanh::<f64>(1, 25, 3.0), 1.0);
        assert!((penalty_tanh::<f64>(26, 25, 3.0) - TANH_26_25).abs() < 1e-12);
        assert!((penalty_tanh::<f64>(13, 25, 3.0) - TANH_13_25).abs() < 1e-12);
    }

    #[test]
    fn all_penalties_are_monotone() {
        for m in [1usize, 2, 7, 25, 60] {
            for n in 1..3 * m + 2 {
                assert!(penalty_ims::<f64>(n + 1, m) <= penalty_ims::<f64>(n, m));
                assert!(penalty_erf::<f64>(n + 1, m) <= penalty_erf::<f64>(n, m));
                assert!(penalty_linear::<f64>(n + 1, m) <= penalty_linear::<f64>(n, m));
                assert!(penalty_sigmoid::<f64>(n + 1, m) <= penalty_sigmoid::<f64>(n, m));
                assert!(penalty_tanh::<f64>(n + 1, m, 3.0) <= penalty_tanh::<f64>(n, m, 3.0));
            }
        }
    }

    #[test]
    fn single_precision_agrees() {
        assert!((penalty_erf::<f32>(25, 25) as f64 - ERF_25_25).abs() < 1e-6);
        assert!((penalty_tanh::<f32>(13, 25, 3.0) as f64 - TANH_13_25).abs() < 1e-6);
    }
}
