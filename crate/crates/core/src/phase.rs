//! Unit phasors with range reduction.
//!
//! Phases in this crate are carried as *cycles* (turns) rather than radians. Products
//! such as `f_c * d / c` reach 10^4 cycles and more, so the integer part is removed
//! before multiplying by 2π to keep the argument of `sin`/`cos` in [-π, π].

use num_complex::Complex64;
use std::f64::consts::TAU;

/// Reduces a cycle count to the interval [-0.5, 0.5].
#[inline]
pub fn reduce_cycles(cycles: f64) -> f64 {
    cycles - cycles.round()
}

/// `e^{-j 2π cycles}`.
#[inline]
pub fn cis_neg(cycles: f64) -> Complex64 {
    let (s, c) = (TAU * reduce_cycles(cycles)).sin_cos();
    Complex64::new(c, -s)
}

/// `e^{+j 2π cycles}`.
#[inline]
pub fn cis_pos(cycles: f64) -> Complex64 {
    cis_neg(cycles).conj()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_cycles_are_unity() {
        for n in [-3.0, 0.0, 1.0, 12345.0] {
            let z = cis_neg(n);
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn half_cycle_is_minus_one() {
        assert!((cis_neg(0.5) + 1.0).norm() < 1e-15);
        assert!((cis_neg(-2.5) + 1.0).norm() < 1e-15);
    }

    #[test]
    fn quarter_cycle_sign() {
        // e^{-jπ/2} = -j
        assert!((cis_neg(0.25) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((cis_pos(0.25) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn reduction_matches_direct_for_small_args() {
        for &x in &[0.1, -0.37, 0.49, 0.0] {
            let direct = Complex64::from_polar(1.0, -TAU * x);
            assert!((cis_neg(x) - direct).norm() < 1e-15);
        }
    }
}
