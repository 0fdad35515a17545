//! Real-coefficient polynomial and rational-function algebra.
//!
//! Everything downstream (PD checks, bands, winding numbers, the
//! conservation integral) reduces to evaluating and transforming the
//! rational data defined here. Coefficients are stored ascending in power;
//! denominators are kept monic so equality and serialization are
//! deterministic. Near pole/zero cancellations are never cancelled
//! automatically, only reported, because silent cancellation can flip a
//! stability verdict.

mod roots;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tol::ToleranceConfig;

/// Polynomial with ascending real coefficients; trailing zeros trimmed.
/// The zero polynomial is represented as `[0]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn one() -> Self {
        Polynomial { coeffs: vec![1.0] }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// Monomial c * s^k.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Polynomial::new(coeffs)
    }

    /// leading * prod (s - r_i). The root set must be closed under
    /// conjugation; tiny imaginary residue from pairing is dropped.
    pub fn from_roots(roots: &[Complex64], leading: f64) -> Self {
        let mut acc = vec![Complex64::new(leading, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (k, a) in acc.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            acc = next;
        }
        Polynomial::new(acc.iter().map(|c| c.re).collect::<Vec<_>>())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * s + c;
        }
        acc
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Sum of |c_i| |s|^i, the natural scale for evaluation residuals.
    pub fn eval_abs(&self, s_mag: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * s_mag + c.abs();
        }
        acc
    }

    pub fn derivative(&self) -> Polynomial {
        if self.degree() == 0 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect::<Vec<_>>(),
        )
    }

    pub fn scale(&self, k: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&c| c * k).collect::<Vec<_>>())
    }

    /// Divide every coefficient; x/x is exactly 1, which keeps monic
    /// normalization bitwise stable.
    pub fn div_scalar(&self, k: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&c| c / k).collect::<Vec<_>>())
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|k| self.coeff(k) + other.coeff(k))
                .collect::<Vec<_>>(),
        )
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|k| self.coeff(k) - other.coeff(k))
                .collect::<Vec<_>>(),
        )
    }

    /// Exact expansion by coefficient convolution.
    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    /// Quotient and remainder of self / divisor.
    pub fn div_rem(&self, divisor: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        if divisor.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let dd = divisor.degree();
        if self.degree() < dd || self.is_zero() {
            return Ok((Polynomial::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0.0; self.degree() - dd + 1];
        let lead = divisor.leading();
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            if q == 0.0 {
                continue;
            }
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * dc;
            }
        }
        rem.truncate(dd.max(1));
        Ok((Polynomial::new(quot), Polynomial::new(rem)))
    }

    /// All complex roots with multiplicity. Companion-matrix eigenvalues
    /// followed by Newton polish; scaled residual must meet
    /// `cfg.root_residual`.
    pub fn roots(&self, cfg: &ToleranceConfig) -> Result<Vec<Complex64>> {
        roots::poly_roots(self, cfg)
    }
}

/// Re and Im of A(jw) * conj(B(jw)) as real polynomials in w.
///
/// The real part contains only even powers, the imaginary part only odd
/// powers; this is what makes exact tail-sign analysis of PD margins
/// possible.
pub fn freq_product_re_im(a: &Polynomial, b: &Polynomial) -> (Polynomial, Polynomial) {
    let deg = a.degree() + b.degree();
    let mut re = vec![0.0; deg + 1];
    let mut im = vec![0.0; deg + 1];
    for (k, &ak) in a.coeffs().iter().enumerate() {
        if ak == 0.0 {
            continue;
        }
        for (l, &bl) in b.coeffs().iter().enumerate() {
            let v = ak * bl;
            match (k as i64 - l as i64).rem_euclid(4) {
                0 => re[k + l] += v,
                1 => im[k + l] += v,
                2 => re[k + l] -= v,
                3 => im[k + l] -= v,
                _ => unreachable!(),
            }
        }
    }
    (Polynomial::new(re), Polynomial::new(im))
}

/// Rational function num/den with monic denominator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    /// Canonicalize: denominator leading coefficient becomes 1, the common
    /// real scalar is factored into the numerator.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let lead = den.leading();
        Ok(RationalFunction {
            num: num.div_scalar(lead),
            den: den.div_scalar(lead),
        })
    }

    pub fn constant(c: f64) -> Self {
        RationalFunction {
            num: Polynomial::constant(c),
            den: Polynomial::one(),
        }
    }

    /// The identity map G(s) = s.
    pub fn s() -> Self {
        RationalFunction {
            num: Polynomial::monomial(1.0, 1),
            den: Polynomial::one(),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn relative_degree(&self) -> i64 {
        if self.num.is_zero() {
            return self.den.degree() as i64;
        }
        self.den.degree() as i64 - self.num.degree() as i64
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.relative_degree() > 0
    }

    pub fn eval(&self, s: Complex64, cfg: &ToleranceConfig) -> Result<Complex64> {
        let d = self.den.eval(s);
        if d.norm() <= cfg.pole_guard {
            return Err(Error::PoleAt {
                re: s.re,
                im: s.im,
                den_mag: d.norm(),
                entry: None,
            });
        }
        Ok(self.num.eval(s) / d)
    }

    /// Frequency response G(jw).
    pub fn eval_jw(&self, w: f64, cfg: &ToleranceConfig) -> Result<Complex64> {
        self.eval(Complex64::new(0.0, w), cfg)
    }

    pub fn neg(&self) -> Self {
        RationalFunction {
            num: self.num.scale(-1.0),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let num = self
            .num
            .mul(&other.den)
            .add(&other.num.mul(&self.den));
        RationalFunction::new(num, self.den.mul(&other.den))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        RationalFunction::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    /// Division only combines rational functions; a zero numerator on the
    /// right is a zero denominator polynomial error.
    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.num.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        RationalFunction::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn powi(&self, k: u32) -> Result<Self> {
        let mut acc = RationalFunction::constant(1.0);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// s * G(s); the substitution used by generalized passivity checks.
    pub fn times_s(&self) -> Result<Self> {
        self.mul(&RationalFunction::s())
    }

    /// Output-feedback map H = N / (D - sigma*N).
    pub fn of_transform(&self, sigma: f64) -> Result<Self> {
        let den = self.den.sub(&self.num.scale(sigma));
        if den.is_zero() {
            return Err(Error::SingularTransform {
                msg: format!("D - sigma*N is identically zero at sigma = {sigma}"),
            });
        }
        RationalFunction::new(self.num.clone(), den)
    }

    /// Input-feedforward map H = G - sigma = (N - sigma*D) / D.
    pub fn if_transform(&self, sigma: f64) -> Self {
        RationalFunction {
            num: self.num.sub(&self.den.scale(sigma)),
            den: self.den.clone(),
        }
    }

    /// Pole/zero census against the stability boundary.
    pub fn classify(&self, cfg: &ToleranceConfig) -> Result<Classification> {
        let poles = self.den.roots(cfg)?;
        let zeros = if self.num.is_zero() || self.num.degree() == 0 {
            Vec::new()
        } else {
            self.num.roots(cfg)?
        };
        let max_mag = poles
            .iter()
            .chain(zeros.iter())
            .map(|r| r.norm())
            .fold(0.0, f64::max);
        let tol_stab = cfg.stab_scale * (1.0 + max_mag);
        let unstable_pole_count = poles.iter().filter(|r| r.re > tol_stab).count();
        let imaginary_axis_poles: Vec<Complex64> = poles
            .iter()
            .filter(|r| r.re.abs() <= tol_stab)
            .copied()
            .collect();
        let minimal_phase = zeros.iter().all(|z| z.re < -tol_stab);
        let mut warnings = Vec::new();
        for p in &poles {
            for z in &zeros {
                if (p - z).norm() < cfg.cancel_warn * (1.0 + p.norm()) {
                    warnings.push(format!(
                        "near pole/zero cancellation: pole {p} vs zero {z} (not cancelled)"
                    ));
                }
            }
        }
        Ok(Classification {
            relative_degree: self.relative_degree(),
            unstable_pole_count,
            imaginary_axis_poles,
            minimal_phase,
            poles,
            zeros,
            warnings,
        })
    }

    /// Split 1/G into L(s) + C + R(s): polynomial part without constant
    /// term, the constant, and a strictly proper remainder.
    pub fn inverse_decomposition(&self, cfg: &ToleranceConfig) -> Result<InverseDecomposition> {
        if !self.is_strictly_proper() {
            return Err(Error::NotStrictlyProper);
        }
        if self.num.is_zero() {
            return Err(Error::Invalid {
                msg: "cannot invert a zero transfer function".into(),
            });
        }
        let (q, rem) = self.den.div_rem(&self.num)?;
        let c = q.coeff(0);
        let l = q.sub(&Polynomial::constant(c));
        let r = RationalFunction::new(rem, self.num.clone())?;
        let _ = cfg;
        Ok(InverseDecomposition { l, c, r })
    }

    /// Canonical text form; reparsing it reproduces the coefficients
    /// bitwise.
    pub fn to_canonical_string(&self) -> String {
        fn poly_str(p: &Polynomial) -> String {
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| match k {
                    0 => format!("({c:?})"),
                    1 => format!("({c:?})*s"),
                    _ => format!("({c:?})*s^{k}"),
                })
                .collect::<Vec<_>>()
                .join("+")
        }
        format!("({})/({})", poly_str(&self.num), poly_str(&self.den))
    }
}

/// Result of `RationalFunction::classify`.
#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub relative_degree: i64,
    pub unstable_pole_count: usize,
    #[serde(serialize_with = "crate::serdeutil::cpx_vec")]
    pub imaginary_axis_poles: Vec<Complex64>,
    pub minimal_phase: bool,
    #[serde(serialize_with = "crate::serdeutil::cpx_vec")]
    pub poles: Vec<Complex64>,
    #[serde(serialize_with = "crate::serdeutil::cpx_vec")]
    pub zeros: Vec<Complex64>,
    pub warnings: Vec<String>,
}

/// 1/G = L(s) + C + R(s) for strictly proper minimal-phase G.
#[derive(Debug, Clone)]
pub struct InverseDecomposition {
    /// Polynomial part with zero constant term; deg L = relative degree.
    pub l: Polynomial,
    pub c: f64,
    /// Strictly proper remainder.
    pub r: RationalFunction,
}

impl InverseDecomposition {
    pub fn eval(&self, s: Complex64, cfg: &ToleranceConfig) -> Result<Complex64> {
        Ok(self.l.eval(s) + self.c + self.r.eval(s, cfg)?)
    }
}

/// Square matrix of rational functions; the system G(s).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalMatrix {
    dim: usize,
    entries: Vec<RationalFunction>,
}

impl RationalMatrix {
    pub fn new(rows: Vec<Vec<RationalFunction>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape {
                msg: format!("system matrix must be square and nonempty, got {dim} rows"),
            });
        }
        Ok(RationalMatrix {
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_scalar(f: RationalFunction) -> Self {
        RationalMatrix {
            dim: 1,
            entries: vec![f],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_siso(&self) -> bool {
        self.dim == 1
    }

    pub fn entry(&self, i: usize, j: usize) -> &RationalFunction {
        &self.entries[i * self.dim + j]
    }

    pub fn as_siso(&self) -> Option<&RationalFunction> {
        if self.dim == 1 {
            Some(&self.entries[0])
        } else {
            None
        }
    }

    pub fn eval(&self, s: Complex64, cfg: &ToleranceConfig) -> Result<crate::cmatrix::CMatrix> {
        let mut m = crate::cmatrix::CMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = self
                    .entry(i, j)
                    .eval(s, cfg)
                    .map_err(|e| e.with_entry(i, j))?;
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn eval_jw(&self, w: f64, cfg: &ToleranceConfig) -> Result<crate::cmatrix::CMatrix> {
        self.eval(Complex64::new(0.0, w), cfg)
    }

    /// Entrywise H = G - sigma.
    pub fn if_transform(&self, sigma: &crate::pdcore::PassivityIndex) -> Result<RationalMatrix> {
        if sigma.dim() != self.dim {
            return Err(Error::Shape {
                msg: format!(
                    "index dimension {} does not match system dimension {}",
                    sigma.dim(),
                    self.dim
                ),
            });
        }
        let mut rows = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut row = Vec::with_capacity(self.dim);
            for j in 0..self.dim {
                row.push(self.entry(i, j).if_transform(sigma.get(i, j)));
            }
            rows.push(row);
        }
        RationalMatrix::new(rows)
    }

    /// Union of all entry poles.
    pub fn all_poles(&self, cfg: &ToleranceConfig) -> Result<Vec<Complex64>> {
        let mut out = Vec::new();
        for e in &self.entries {
            if e.den().degree() >= 1 {
                out.extend(e.den().roots(cfg)?);
            }
        }
        Ok(out)
    }

    /// True if any entry has a pole within `cfg.pole_guard` of jw.
    pub fn is_pole_at_jw(&self, w: f64, cfg: &ToleranceConfig) -> bool {
        self.eval_jw(w, cfg).is_err()
    }
}
