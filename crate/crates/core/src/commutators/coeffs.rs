//! Coefficients of the odd-order expansion and the admissible truncation order.

/// `c_{2j+1}(a) = prod_{k<j} (a^2 - (2k+1)^2) / (2j+1)!`, with `c_1 = 1`.
///
/// Evaluated as a running product of `(a - (2k+1)) (a + (2k+1)) / ((2k+2)(2k+3))`
/// so that vanishing factors are exact and no factorial overflows.
pub fn c_coeff(a: f64, j: usize) -> f64 {
    let mut c = 1.0;
    for k in 0..j {
        let odd = (2 * k + 1) as f64;
        c *= (a - odd) * (a + odd) / ((2 * k + 2) as f64 * (2 * k + 3) as f64);
    }
    c
}

/// Table `c_1, c_3, .., c_{2n+1}`.
pub fn coefficient_table(a: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|j| c_coeff(a, j)).collect()
}

const TIE_TOL: f64 = 1e-12;

/// The `n >= 0` with `2n + 1 <= a + 2 sigma <= 2n + 3`, smallest on ties;
/// `None` when `a + 2 sigma < 1`.
pub fn admissible_n(a: f64, sigma: f64) -> Option<usize> {
    let x = a + 2.0 * sigma;
    if !x.is_finite() || x < 1.0 - TIE_TOL {
        return None;
    }
    let n = ((x - 3.0) / 2.0 - TIE_TOL).ceil().max(0.0);
    Some(n as usize)
}

/// Whether `(n, a, sigma)` satisfies the two-sided window.
pub fn is_admissible(n: usize, a: f64, sigma: f64) -> bool {
    let x = a + 2.0 * sigma;
    let lo = (2 * n + 1) as f64;
    x >= lo - TIE_TOL && x <= lo + 2.0 + TIE_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(c_coeff(2.7, 0), 1.0);
        assert_eq!(c_coeff(1.0, 1), 0.0);
        assert!((c_coeff(3.0, 1) - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(admissible_n(1.75, 2.0), Some(2));
        assert_eq!(admissible_n(1.75, 3.0 + 1.0 - 0.375), Some(3));
        assert_eq!(admissible_n(1.0, 0.0), Some(0));
        assert_eq!(admissible_n(0.5, 0.1), None);
    }

    #[test]
    fn ties_go_to_the_smaller_order() {
        // a + 2 sigma = 5 sits on both windows [3, 5] and [5, 7].
        assert_eq!(admissible_n(3.0, 1.0), Some(1));
        assert_eq!(admissible_n(3.0, 0.0), Some(0));
    }

    #[test]
    fn odd_integer_exponent_truncates() {
        for k0 in 0..4 {
            let a = (2 * k0 + 1) as f64;
            for j in k0 + 1..8 {
                assert_eq!(c_coeff(a, j), 0.0, "a {a} j {j}");
            }
        }
    }

    proptest! {
        #[test]
        fn admissible_n_lies_in_window(a in 1.0f64..6.0, sigma in 0.0f64..4.0) {
            let n = admissible_n(a, sigma).unwrap();
            prop_assert!(is_admissible(n, a, sigma));
            if n > 0 {
                prop_assert!(!is_admissible(n - 1, a, sigma) || (a + 2.0 * sigma - (2 * n + 1) as f64).abs() < 1e-9);
            }
        }

        #[test]
        fn recurrence_between_consecutive_coefficients(a in 1.0f64..4.0, j in 0usize..6) {
            let odd = (2 * j + 1) as f64;
            let expected = c_coeff(a, j) * (a - odd) * (a + odd) / (((2 * j + 2) * (2 * j + 3)) as f64);
            let got = c_coeff(a, j + 1);
            prop_assert!((got - expected).abs() <= 1e-14 * expected.abs().max(1e-300));
        }
    }
}
