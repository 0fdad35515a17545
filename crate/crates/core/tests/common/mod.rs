//! Shared generators for randomized integration tests. Everything is
//! seeded so failures reproduce.
#![allow(dead_code)] // each test binary uses a different subset
#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use pdregion::cmatrix::CMatrix;
use pdregion::{PassivityIndex, Polynomial, RationalFunction, ToleranceConfig};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Conjugate-closed random root set with real parts in [-hi, -lo].
pub fn random_stable_roots(rng: &mut StdRng, n: usize, lo: f64, hi: f64) -> Vec<Complex64> {
    let mut roots = Vec::with_capacity(n);
    let mut remaining = n;
    while remaining > 0 {
        let re = -rng.random_range(lo..hi);
        if remaining >= 2 && rng.random_bool(0.5) {
            let im = rng.random_range(0.1..5.0);
            roots.push(Complex64::new(re, im));
            roots.push(Complex64::new(re, -im));
            remaining -= 2;
        } else {
            roots.push(Complex64::new(re, 0.0));
            remaining -= 1;
        }
    }
    roots
}

/// Random stable strictly proper SISO system of denominator degree in
/// [1, max_deg].
pub fn random_stable_siso(rng: &mut StdRng, max_deg: usize) -> RationalFunction {
    let n = rng.random_range(1..=max_deg);
    let den = Polynomial::from_roots(&random_stable_roots(rng, n, 0.05, 8.0), 1.0);
    let m = rng.random_range(0..n);
    let num_coeffs: Vec<f64> = (0..=m).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut num = Polynomial::new(num_coeffs);
    if num.is_zero() {
        num = Polynomial::one();
    }
    RationalFunction::new(num, den).unwrap()
}

/// Random stable minimal-phase strictly proper system with the given
/// relative degree.
pub fn random_min_phase_siso(rng: &mut StdRng, rel_deg: usize, den_deg: usize) -> RationalFunction {
    assert!(rel_deg >= 1 && den_deg >= rel_deg);
    let den = Polynomial::from_roots(&random_stable_roots(rng, den_deg, 0.1, 6.0), 1.0);
    let num_deg = den_deg - rel_deg;
    let num = if num_deg == 0 {
        Polynomial::constant(rng.random_range(0.2..3.0))
    } else {
        Polynomial::from_roots(
            &random_stable_roots(rng, num_deg, 0.1, 6.0),
            rng.random_range(0.2..3.0),
        )
    };
    RationalFunction::new(num, den).unwrap()
}

pub fn random_complex_matrix(rng: &mut StdRng, p: usize) -> CMatrix {
    CMatrix::from_fn(p, |_, _| {
        Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
    })
}

/// Random symmetric positive definite index: A^T A + eps I, scaled.
pub fn random_spd_index(rng: &mut StdRng, p: usize, cfg: &ToleranceConfig) -> PassivityIndex {
    let a: Vec<f64> = (0..p * p).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut m = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            let mut acc = 0.0;
            for k in 0..p {
                acc += a[k * p + i] * a[k * p + j];
            }
            m[i * p + j] = acc + if i == j { 0.05 } else { 0.0 };
        }
    }
    let rows: Vec<Vec<f64>> = (0..p).map(|i| m[i * p..(i + 1) * p].to_vec()).collect();
    PassivityIndex::from_matrix(rows, cfg).unwrap()
}

/// Random unitary matrix from Gram-Schmidt on a random complex matrix.
pub fn random_unitary(rng: &mut StdRng, p: usize) -> CMatrix {
    loop {
        let a = random_complex_matrix(rng, p);
        let mut cols: Vec<Vec<Complex64>> = (0..p)
            .map(|j| (0..p).map(|i| a.get(i, j)).collect())
            .collect();
        let mut ok = true;
        for j in 0..p {
            for k in 0..j {
                let mut dot = Complex64::new(0.0, 0.0);
                for i in 0..p {
                    dot += cols[k][i].conj() * cols[j][i];
                }
                for i in 0..p {
                    let corr = dot * cols[k][i];
                    cols[j][i] -= corr;
                }
            }
            let norm: f64 = cols[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            for v in &mut cols[j] {
                *v = v.scale(1.0 / norm);
            }
        }
        if ok {
            return CMatrix::from_fn(p, |i, j| cols[j][i]);
        }
    }
}
