//! Normal-ordered differential operators `Σ c·ħ^e z^a ∂^b` with `a ∈ ℤ`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::coeffs::{format_rational, CycScalar, Rational};
use crate::series::Series;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiffOpError {
    #[error("index {index} lies outside the range ({lo}, {hi}]")]
    BadDegreeRange { index: i64, lo: i64, hi: i64 },
    #[error("Kac-Schwarz order p must be positive")]
    BadOrder,
    #[error("operator has ħ-degree {0} but no value for ħ was supplied")]
    HbarUnspecified(u32),
    #[error("cannot apply an operator to a ramified series")]
    Ramified,
}

/// Term key: z-exponent, ∂-order, ħ-degree.
pub type Key = (i64, u32, u32);

#[derive(Clone, PartialEq, Eq, Default)]
pub struct DiffOp {
    terms: BTreeMap<Key, CycScalar>,
}

fn falling_factorial(a: i64, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for t in 0..k as i64 {
        acc *= a - t;
    }
    acc
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for t in 0..k {
        acc = acc * (n - t) / (t + 1);
    }
    acc
}

impl DiffOp {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(CycScalar::one())
    }

    pub fn scalar(c: CycScalar) -> Self {
        Self::term(c, 0, 0, 0)
    }

    pub fn rational(r: Rational) -> Self {
        Self::scalar(CycScalar::from_rational(r))
    }

    /// `c·ħ^e z^a ∂^b`.
    pub fn term(c: CycScalar, a: i64, b: u32, e: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((a, b, e), c);
        }
        DiffOp { terms }
    }

    pub fn z_pow(a: i64) -> Self {
        Self::term(CycScalar::one(), a, 0, 0)
    }

    pub fn d() -> Self {
        Self::term(CycScalar::one(), 0, 1, 0)
    }

    pub fn hbar() -> Self {
        Self::term(CycScalar::one(), 0, 0, 1)
    }

    /// Multiplication operator by an exact Laurent polynomial.
    pub fn from_series(s: &Series) -> Result<Self, DiffOpError> {
        if s.ram() != 1 || !s.is_exact() {
            return Err(DiffOpError::Ramified);
        }
        Ok(Self::from_terms(s.terms().map(|(k, c)| ((k, 0, 0), c.clone()))))
    }

    pub fn from_terms(iter: impl IntoIterator<Item = (Key, CycScalar)>) -> Self {
        let mut terms: BTreeMap<Key, CycScalar> = BTreeMap::new();
        for (k, c) in iter {
            *terms.entry(k).or_insert_with(CycScalar::zero) += &c;
        }
        terms.retain(|_, c| !c.is_zero());
        DiffOp { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &CycScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, a: i64, b: u32, e: u32) -> CycScalar {
        self.terms.get(&(a, b, e)).cloned().unwrap_or_else(CycScalar::zero)
    }

    /// Part of ħ-degree exactly `e`, with ħ removed.
    pub fn hbar_part(&self, e: u32) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|((_, _, d), _)| *d == e)
                .map(|((a, b, _), c)| ((*a, *b, 0), c.clone())),
        )
    }

    pub fn scale(&self, c: &CycScalar) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, v)| (*k, v * c)))
    }

    fn product(&self, other: &Self) -> Self {
        let mut out: BTreeMap<Key, CycScalar> = BTreeMap::new();
        for (&(a1, b1, e1), c1) in &self.terms {
            for (&(a2, b2, e2), c2) in &other.terms {
                let c = c1 * c2;
                // ∂^{b1} z^{a2} = Σ_k C(b1,k)·a2^{(k)}·z^{a2-k} ∂^{b1-k}
                for k in 0..=b1 {
                    let ff = falling_factorial(a2, k);
                    if ff.is_zero() {
                        break;
                    }
                    let w = CycScalar::from_rational(Rational::from_integer(binomial(b1, k) * ff));
                    let key = (a1 + a2 - k as i64, b1 - k + b2, e1 + e2);
                    *out.entry(key).or_insert_with(CycScalar::zero) += &(&c * &w);
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        DiffOp { terms: out }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &self.product(other) - &other.product(self)
    }

    /// Applies the operator to a Laurent series, substituting `hbar` for ħ.
    pub fn apply(&self, s: &Series, hbar: Option<&CycScalar>) -> Result<Series, DiffOpError> {
        let mut out = Series::zero();
        let mut derivs: Vec<Series> = vec![s.clone()];
        for (&(a, b, e), c) in &self.terms {
            while derivs.len() <= b as usize {
                let next = derivs.last().expect("nonempty").derivative();
                derivs.push(next);
            }
            let mut coef = c.clone();
            if e > 0 {
                let h = hbar.ok_or(DiffOpError::HbarUnspecified(e))?;
                coef = &coef * &h.pow(e as i64).expect("ħ value is invertible or e = 0");
            }
            let piece = derivs[b as usize].shift(a, 1).scale(&coef);
            out = &out + &piece;
        }
        if self.terms.is_empty() {
            // The zero operator still cannot see below the input's bound.
            out = match s.trunc() {
                Some(t) => Series::from_terms(s.ram(), [], Some(t)),
                None => Series::zero(),
            };
        }
        Ok(out)
    }
}

impl Add for &DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: &DiffOp) -> DiffOp {
        DiffOp::from_terms(
            self.terms
                .iter()
                .chain(rhs.terms.iter())
                .map(|(k, c)| (*k, c.clone())),
        )
    }
}

impl Sub for &DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: &DiffOp) -> DiffOp {
        self + &(-rhs)
    }
}

impl Mul for &DiffOp {
    type Output = DiffOp;
    fn mul(self, rhs: &DiffOp) -> DiffOp {
        self.product(rhs)
    }
}

impl Neg for &DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        DiffOp::from_terms(self.terms.iter().map(|(k, c)| (*k, -c)))
    }
}

impl Add for DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: DiffOp) -> DiffOp {
        &self + &rhs
    }
}

impl Sub for DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: DiffOp) -> DiffOp {
        &self - &rhs
    }
}

impl Mul for DiffOp {
    type Output = DiffOp;
    fn mul(self, rhs: DiffOp) -> DiffOp {
        &self * &rhs
    }
}

impl Neg for DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        -&self
    }
}

pub fn op_mul(a: &DiffOp, b: &DiffOp) -> DiffOp {
    a * b
}

pub fn commutator(a: &DiffOp, b: &DiffOp) -> DiffOp {
    a.commutator(b)
}

/// `A^{p,q} = (1/p) z^{1-p} ∂ + (1-p)/(2p) z^{-p} + Σ a_i z^i` with `-p < i <= q`.
pub fn kac_schwarz(p: u32, q: i64, a: &BTreeMap<i64, CycScalar>) -> Result<DiffOp, DiffOpError> {
    if p == 0 {
        return Err(DiffOpError::BadOrder);
    }
    let pi = p as i64;
    if let Some(&index) = a.keys().find(|&&i| i <= -pi || i > q) {
        return Err(DiffOpError::BadDegreeRange {
            index,
            lo: -pi,
            hi: q,
        });
    }
    let mut op = DiffOp::term(CycScalar::from_frac(1, pi), 1 - pi, 1, 0);
    op = &op + &DiffOp::term(CycScalar::from_frac(1 - pi, 2 * pi), -pi, 0, 0);
    for (i, c) in a {
        op = &op + &DiffOp::term(c.clone(), *i, 0, 0);
    }
    Ok(op)
}

/// The canonical operator with `a_q = 1` and every other `a_i = 0`.
pub fn kac_schwarz_canonical(p: u32, q: i64) -> Result<DiffOp, DiffOpError> {
    kac_schwarz(p, q, &BTreeMap::from([(q, CycScalar::one())]))
}

/// `[A, z^{p(i+1)} A / (i+1)] − z^{pi} A` for the canonical `A^{p,q}`; zero when the identity holds.
pub fn ks_commutator_identity(p: u32, q: i64, i: u32) -> Result<DiffOp, DiffOpError> {
    let a = kac_schwarz_canonical(p, q)?;
    let pi = p as i64;
    let right = DiffOp::term(
        CycScalar::from_frac(1, i as i64 + 1),
        pi * (i as i64 + 1),
        0,
        0,
    ) * a.clone();
    let left = DiffOp::z_pow(pi * i as i64) * a.clone();
    Ok(&a.commutator(&right) - &left)
}

/// `[A^{p,q}, z^p]`, which the string equation asserts is 1.
pub fn string_equation(p: u32, q: i64) -> Result<DiffOp, DiffOpError> {
    Ok(kac_schwarz_canonical(p, q)?.commutator(&DiffOp::z_pow(p as i64)))
}

/// `ℓ_n = −z^n (z∂ + (1+n)/2)`.
pub fn witt_op(n: i64) -> DiffOp {
    &DiffOp::term(-CycScalar::one(), n + 1, 1, 0) + &DiffOp::term(CycScalar::from_frac(-(1 + n), 2), n, 0, 0)
}

/// `[ℓ_m, ℓ_n] − (m−n) ℓ_{m+n}`; zero when the Witt relation holds.
pub fn witt_relation(m: i64, n: i64) -> DiffOp {
    &witt_op(m).commutator(&witt_op(n)) - &witt_op(m + n).scale(&CycScalar::from_int(m - n))
}

fn factor_text(a: i64, b: u32, e: u32) -> Vec<String> {
    let mut parts = Vec::new();
    match e {
        0 => {}
        1 => parts.push("h".to_string()),
        _ => parts.push(format!("h^{e}")),
    }
    match a {
        0 => {}
        1 => parts.push("z".to_string()),
        _ => parts.push(format!("z^{a}")),
    }
    match b {
        0 => {}
        1 => parts.push("D".to_string()),
        _ => parts.push(format!("D^{b}")),
    }
    parts
}

impl fmt::Display for DiffOp {
    /// Terms by ħ-degree and ∂-order descending, then z-exponent ascending.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut keys: Vec<&Key> = self.terms.keys().collect();
        keys.sort_by(|x, y| y.2.cmp(&x.2).then(y.1.cmp(&x.1)).then(x.0.cmp(&y.0)));
        for (idx, key) in keys.into_iter().enumerate() {
            let c = &self.terms[key];
            let factors = factor_text(key.0, key.1, key.2);
            let (neg, coef) = match c.as_rational() {
                Some(r) => (r.is_negative(), {
                    let mag = r.abs();
                    if mag.is_one() && !factors.is_empty() {
                        None
                    } else {
                        Some(format_rational(&mag))
                    }
                }),
                None => (false, Some(format!("({c})"))),
            };
            let mut body: Vec<String> = coef.into_iter().collect();
            body.extend(factors);
            let body = body.join("*");
            match (idx == 0, neg) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Series {
        text.parse().unwrap()
    }

    #[test]
    fn leibniz_examples() {
        let d = DiffOp::d();
        let z = DiffOp::z_pow(1);
        assert_eq!(&d * &z, &(&z * &d) + &DiffOp::one());
        let d2 = &d * &d;
        assert_eq!(
            &d2 * &z,
            &(&z * &d2) + &d.scale(&CycScalar::from_int(2))
        );
        let hd = &DiffOp::hbar() * &d;
        assert_eq!(&hd * &z, &(&z * &hd) + &DiffOp::hbar());
    }

    #[test]
    fn commutator_examples() {
        let a = &DiffOp::d() + &DiffOp::z_pow(2);
        assert_eq!(a.commutator(&DiffOp::z_pow(1)), DiffOp::one());
        assert_eq!(string_equation(2, 3).unwrap(), DiffOp::one());
        let euler = &DiffOp::z_pow(1) * &DiffOp::d();
        assert_eq!(
            euler.commutator(&DiffOp::z_pow(3)),
            DiffOp::term(CycScalar::from_int(3), 3, 0, 0)
        );
    }

    #[test]
    fn kac_schwarz_examples() {
        assert_eq!(
            kac_schwarz_canonical(1, 2).unwrap(),
            &DiffOp::d() + &DiffOp::z_pow(2)
        );
        assert_eq!(
            kac_schwarz_canonical(2, 3).unwrap().to_string(),
            "1/2*z^-1*D - 1/4*z^-2 + z^3"
        );
        let c = CycScalar::from_int(7);
        let op = kac_schwarz(1, 0, &BTreeMap::from([(0, c.clone())])).unwrap();
        assert_eq!(op, &DiffOp::d() + &DiffOp::scalar(c));
        assert_eq!(
            kac_schwarz(2, 3, &BTreeMap::from([(-2, CycScalar::one())])),
            Err(DiffOpError::BadDegreeRange { index: -2, lo: -2, hi: 3 })
        );
    }

    #[test]
    fn identity_examples() {
        assert!(ks_commutator_identity(1, 2, 1).unwrap().is_zero());
        assert!(ks_commutator_identity(2, 3, 0).unwrap().is_zero());
        assert!(ks_commutator_identity(1, 4, 2).unwrap().is_zero());
        assert!(witt_relation(1, -1).is_zero());
        assert!(witt_relation(2, 3).is_zero());
        assert_eq!(witt_op(0).to_string(), "-z*D - 1/2");
    }

    #[test]
    fn apply_examples() {
        let a = &DiffOp::d() + &DiffOp::z_pow(2);
        assert_eq!(a.apply(&Series::one(), None).unwrap(), s("z^2"));
        let euler = &DiffOp::z_pow(1) * &DiffOp::d();
        assert_eq!(euler.apply(&s("z^5"), None).unwrap(), s("5*z^5"));
        assert_eq!(
            DiffOp::d().apply(&s("1 + z^-1 + O(z^-3)"), None).unwrap(),
            s("-z^-2 + O(z^-4)")
        );
        assert_eq!(
            DiffOp::hbar().apply(&Series::one(), None),
            Err(DiffOpError::HbarUnspecified(1))
        );
    }
}
