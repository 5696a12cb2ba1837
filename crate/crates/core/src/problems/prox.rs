//! Proximal operators of the ADMM y-updates.

use crate::Scalar;

/// Componentwise `sign(v)·max(|v| - kappa, 0)`, the prox of `kappa‖·‖₁`.
pub fn soft_threshold<T: Scalar>(v: &[T], kappa: T) -> Vec<T> {
    debug_assert!(kappa >= T::zero());
    v.iter()
        .map(|&x| {
            let m = x.abs() - kappa;
            if m > T::zero() {
                x.signum() * m
            } else {
                T::zero()
            }
        })
        .collect()
}

/// Componentwise `max(v, 0)`: projection onto the nonnegative orthant.
pub fn project_nonneg<T: Scalar>(v: &[T]) -> Vec<T> {
    v.iter().map(|&x| x.max(T::zero())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(&[2.0, -3.0, 0.5], 1.0), vec![1.0, -2.0, 0.0]);
        let v = [0.3, -7.0, 0.0];
        assert_eq!(soft_threshold(&v, 0.0), v.to_vec());
    }

    #[test]
    fn project_examples() {
        assert_eq!(project_nonneg(&[-1.0, 2.0]), vec![0.0, 2.0]);
        assert_eq!(project_nonneg(&[0.0, 3.5]), vec![0.0, 3.5]);
    }

    /// Grid minimizer of `g(y) + ½(y - v)²` on a 1e-4 grid around `v`.
    fn grid_prox(v: f64, g: impl Fn(f64) -> f64) -> f64 {
        let lo = v.min(0.0) - 1.0;
        let hi = v.max(0.0) + 1.0;
        let steps = ((hi - lo) / 1e-4).ceil() as usize;
        let mut best = (f64::INFINITY, lo);
        for i in 0..=steps {
            let y = lo + i as f64 * 1e-4;
            let f = g(y) + 0.5 * (y - v) * (y - v);
            if f < best.0 {
                best = (f, y);
            }
        }
        best.1
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn soft_threshold_is_the_l1_prox(v in -3.0f64..3.0, kappa in 0.0f64..2.0) {
            let want = grid_prox(v, |y| kappa * y.abs());
            prop_assert!((soft_threshold(&[v], kappa)[0] - want).abs() <= 1e-4);
        }

        #[test]
        fn projection_is_the_indicator_prox(v in -3.0f64..3.0) {
            let want = grid_prox(v, |y| if y >= 0.0 { 0.0 } else { f64::INFINITY });
            prop_assert!((project_nonneg(&[v])[0] - want).abs() <= 1e-4);
        }

        #[test]
        fn projection_idempotent(v in prop::collection::vec(-5.0f64..5.0, 0..10)) {
            let p = project_nonneg(&v);
            prop_assert_eq!(project_nonneg(&p), p);
        }
    }
}
