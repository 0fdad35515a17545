//! Built-in case-study systems used by the bundled analysis suite and the
//! test corpus: a first-order voltage-regulation lag, integrator-driven
//! phase-angle dynamics, filtered frequency-swing dynamics, and their
//! 2x2 cross-coupled combination.

use crate::ratpoly::{Polynomial, RationalFunction, RationalMatrix};

pub const TAU: f64 = 0.1;
pub const K: f64 = 0.5;
pub const M: f64 = 0.3;
pub const D: f64 = 0.5;
pub const T: f64 = 0.02;
pub const C: f64 = 0.1;

/// G1 = 1 / (tau*s + k)
pub fn g1() -> RationalFunction {
    RationalFunction::new(Polynomial::one(), Polynomial::new(vec![K, TAU])).unwrap()
}

/// G2 = 1 / (s * (M*s + d))
pub fn g2() -> RationalFunction {
    RationalFunction::new(
        Polynomial::one(),
        Polynomial::new(vec![0.0, 1.0]).mul(&Polynomial::new(vec![D, M])),
    )
    .unwrap()
}

/// G3 = 1 / ((T*s + 1) * (M*s + d))
pub fn g3() -> RationalFunction {
    RationalFunction::new(
        Polynomial::one(),
        Polynomial::new(vec![1.0, T]).mul(&Polynomial::new(vec![D, M])),
    )
    .unwrap()
}

/// Cross-loop gain Gc = C / (T*s + 1)
pub fn gc() -> RationalFunction {
    RationalFunction::new(Polynomial::constant(C), Polynomial::new(vec![1.0, T])).unwrap()
}

/// G4 = [[G3, Gc], [Gc, G1]]
pub fn g4() -> RationalMatrix {
    RationalMatrix::new(vec![vec![g3(), gc()], vec![gc(), g1()]]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expected_denominators() {
        assert_eq!(g3().den().coeffs(), &[0.5 / 0.006, 0.31 / 0.006, 1.0]);
        assert_eq!(g2().den().coeffs(), &[0.0, 0.5 / 0.3, 1.0]);
        assert_eq!(g4().dim(), 2);
    }
}
