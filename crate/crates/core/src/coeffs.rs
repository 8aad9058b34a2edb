//! Exact scalars: arbitrary-precision rationals and elements of the
//! cyclotomic fields `Q(ζ_n) = Q[x]/Φ_n(x)`.
//!
//! Every [`CycScalar`] carries the order `n` of the field it lives in.
//! Values that happen to be rational are always stored at order 1, so a
//! rational can be combined with an element of any `Q(ζ_n)` and equality of
//! rationals is independent of where they were computed. When one order
//! divides the other the smaller field is embedded first; any other pair of
//! irrational operands is an error, and [`CycScalar::lift`] moves a value
//! into a larger cyclotomic field explicitly.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::cell::RefCell;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cyclotomic orders {0} and {1} cannot be combined")]
    OrderMismatch(u32, u32),
    #[error("Q(zeta_{from}) is not a subfield of Q(zeta_{to})")]
    NotSubfield { from: u32, to: u32 },
    #[error("cannot parse scalar `{text}`: {reason}")]
    Parse { text: String, reason: String },
}

/// Shorthand for the rational `n/d`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Renders `p/q`, or `p` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(text: &str) -> Result<Rational, CoeffError> {
    let err = |reason: &str| CoeffError::Parse {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err("bad numerator"))?;
    let den: BigInt = den.parse().map_err(|_| err("bad denominator"))?;
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

fn totient(n: u32) -> usize {
    let mut result = n as u64;
    let mut m = n as u64;
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result as usize
}

/// Coefficients (constant term first) of the n-th cyclotomic polynomial.
pub fn cyclotomic_polynomial(n: u32) -> Vec<i64> {
    assert!(n >= 1, "cyclotomic order must be positive");
    // x^n - 1 divided by every Φ_d with d | n, d < n.
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = exact_monic_division(&num, &cyclotomic_polynomial(d));
        }
    }
    num
}

fn exact_monic_division(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let nd = rem.len() - 1;
    let mut quot = vec![0i64; nd - dd + 1];
    for k in (0..=nd - dd).rev() {
        let c = rem[k + dd];
        quot[k] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[k + j] -= c * dj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quot
}

/// Precomputed data for one cyclotomic field.
#[derive(Debug)]
struct CycField {
    phi: usize,
    /// `powers[k]` = x^k mod Φ_n, for k < max(n, 2φ - 1).
    powers: Vec<Vec<i64>>,
}

impl CycField {
    fn build(n: u32) -> CycField {
        let modulus = cyclotomic_polynomial(n);
        let phi = modulus.len() - 1;
        let count = (n as usize).max(2 * phi);
        let mut powers = Vec::with_capacity(count);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for _ in 0..count {
            powers.push(cur.clone());
            // multiply by x and reduce
            let carry = cur[phi - 1];
            for j in (1..phi).rev() {
                cur[j] = cur[j - 1];
            }
            cur[0] = 0;
            if carry != 0 {
                for j in 0..phi {
                    cur[j] -= carry * modulus[j];
                }
            }
        }
        CycField { phi, powers }
    }
}

/// Fields are built once per process and leaked; the per-thread map keeps
/// lookups free of shared atomics.
fn field(n: u32) -> &'static CycField {
    thread_local! {
        static LOCAL: RefCell<HashMap<u32, &'static CycField>> = RefCell::new(HashMap::new());
    }
    static GLOBAL: OnceLock<Mutex<HashMap<u32, &'static CycField>>> = OnceLock::new();
    if let Some(f) = LOCAL.with(|m| m.borrow().get(&n).copied()) {
        return f;
    }
    let f = *GLOBAL
        .get_or_init(|| Mutex::new(HashMap::new()))
        .lock()
        .expect("field cache poisoned")
        .entry(n)
        .or_insert_with(|| Box::leak(Box::new(CycField::build(n))));
    LOCAL.with(|m| m.borrow_mut().insert(n, f));
    f
}

/// An exact element of `Q(ζ_n)` in the power basis `1, ζ, …, ζ^{φ(n)-1}`,
/// stored as integer numerators over one positive denominator in lowest
/// terms, so each operation normalizes with a single gcd sweep.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycScalar {
    order: u32,
    num: Vec<BigInt>,
    den: BigInt,
}

impl CycScalar {
    pub fn from_rational(r: Rational) -> Self {
        let (num, den) = r.into_raw();
        CycScalar {
            order: 1,
            num: vec![num],
            den,
        }
    }

    pub fn from_int(n: i64) -> Self {
        CycScalar {
            order: 1,
            num: vec![BigInt::from(n)],
            den: BigInt::one(),
        }
    }

    pub fn from_frac(n: i64, d: i64) -> Self {
        Self::from_rational(rat(n, d))
    }

    /// Builds `Σ coeffs[k] ζ_n^k`; `coeffs` may be longer than φ(n).
    pub fn from_power_coeffs(order: u32, coeffs: &[Rational]) -> Self {
        assert!(order >= 1, "cyclotomic order must be positive");
        let den = coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints = coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        Self::from_poly(order, ints, den)
    }

    /// `(Σ ints[k] x^k mod Φ_order) / den`.
    fn from_poly(order: u32, ints: Vec<BigInt>, den: BigInt) -> Self {
        let fld = field(order);
        let mut out = vec![BigInt::zero(); fld.phi];
        for (k, c) in ints.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if k < fld.phi {
                out[k] += c;
                continue;
            }
            for (o, &p) in out.iter_mut().zip(&fld.powers[k % order as usize]) {
                if p != 0 {
                    *o += &c * p;
                }
            }
        }
        Self::normalize(order, out, den)
    }

    /// ζ_n^k, reduced to the canonical representative.
    pub fn zeta_pow(n: u32, k: i64) -> Self {
        assert!(n >= 1, "cyclotomic order must be positive");
        let e = k.rem_euclid(n as i64) as usize;
        let fld = field(n);
        let num = fld.powers[e].iter().map(|&c| BigInt::from(c)).collect();
        Self::normalize(n, num, BigInt::one())
    }

    fn normalize(order: u32, mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        // Q(ζ_2m) = Q(ζ_m) for odd m; storing at m keeps equality structural.
        if order % 4 == 2 && order > 2 {
            let m = order / 2;
            let mut ints = vec![BigInt::zero(); m as usize];
            for (k, c) in num.into_iter().enumerate() {
                // ζ_2m = −ζ_m^{(m+1)/2}
                let e = (k as u64 * (m as u64 + 1) / 2 % m as u64) as usize;
                if k % 2 == 0 {
                    ints[e] += c;
                } else {
                    ints[e] -= c;
                }
            }
            return Self::from_poly(m, ints, den);
        }
        let order = if order == 1 || num.iter().skip(1).all(Zero::is_zero) {
            num.truncate(1);
            if num.is_empty() {
                num.push(BigInt::zero());
            }
            1
        } else {
            order
        };
        if den.is_negative() {
            den = -den;
            for x in num.iter_mut() {
                *x = -std::mem::take(x);
            }
        }
        if num.iter().all(Zero::is_zero) {
            return CycScalar {
                order,
                num,
                den: BigInt::one(),
            };
        }
        if !den.is_one() {
            let mut g = den.clone();
            for x in &num {
                if !x.is_zero() {
                    g = gcd_positive(&g, x);
                    if g.is_one() {
                        break;
                    }
                }
            }
            if !g.is_one() {
                den /= &g;
                for x in num.iter_mut() {
                    *x /= &g;
                }
            }
        }
        CycScalar { order, num, den }
    }

    /// The cyclotomic order this value is stored at (1 for rationals).
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Coefficients in the power basis of `Q(ζ_order)`.
    pub fn coeffs(&self) -> Vec<Rational> {
        self.num
            .iter()
            .map(|x| Rational::new(x.clone(), self.den.clone()))
            .collect()
    }

    pub fn is_rational(&self) -> bool {
        self.order == 1
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.is_rational()
            .then(|| Rational::new_raw(self.num[0].clone(), self.den.clone()))
    }

    pub fn is_integer(&self) -> bool {
        self.is_rational() && self.den.is_one()
    }

    /// Representative modulo ℤ: the rational part is moved into `[0, 1)`.
    pub fn reduce_mod_integers(&self) -> Self {
        let mut num = self.num.clone();
        num[0] = num[0].mod_floor(&self.den);
        Self::normalize(self.order, num, self.den.clone())
    }

    /// Embeds this value into `Q(ζ_target)`; requires `order | target`.
    pub fn lift(&self, target: u32) -> Result<Self, CoeffError> {
        let target = canonical_order(target);
        if self.order == 1 || self.order == target {
            return Ok(self.clone());
        }
        if !target.is_multiple_of(self.order) {
            return Err(CoeffError::NotSubfield {
                from: self.order,
                to: target,
            });
        }
        let step = (target / self.order) as usize;
        let mut spread = vec![BigInt::zero(); step * (self.num.len() - 1) + 1];
        for (k, c) in self.num.iter().enumerate() {
            spread[k * step] = c.clone();
        }
        Ok(Self::from_poly(target, spread, self.den.clone()))
    }

    /// Common order of two operands: equal orders, a rational operand, or
    /// one order dividing the other (the smaller field embeds). Any other
    /// pair would need a compositum and is rejected.
    fn common_order(&self, other: &Self) -> Result<u32, CoeffError> {
        match (self.order, other.order) {
            (a, b) if a == b => Ok(a),
            (1, b) => Ok(b),
            (a, 1) => Ok(a),
            (a, b) if b % a == 0 => Ok(b),
            (a, b) if a % b == 0 => Ok(a),
            (a, b) => Err(CoeffError::OrderMismatch(a, b)),
        }
    }

    /// Applies `f` to operands sharing an order (or with a rational side),
    /// lifting the smaller field first when needed.
    fn with_aligned(
        &self,
        other: &Self,
        f: impl FnOnce(u32, &Self, &Self) -> Self,
    ) -> Result<Self, CoeffError> {
        let n = self.common_order(other)?;
        let lift = |x: &Self| -> Result<Option<Self>, CoeffError> {
            if x.order == n || x.order == 1 {
                Ok(None)
            } else {
                x.lift(n).map(Some)
            }
        };
        let a = lift(self)?;
        let b = lift(other)?;
        Ok(f(n, a.as_ref().unwrap_or(self), b.as_ref().unwrap_or(other)))
    }

    fn combine(n: u32, a: &Self, b: &Self, sign: bool) -> Self {
        let len = a.num.len().max(b.num.len());
        let zero = BigInt::zero();
        let at = |v: &Self, i: usize| v.num.get(i).unwrap_or(&zero).clone();
        let (num, den) = if a.den == b.den {
            let num = (0..len)
                .map(|i| {
                    let (x, y) = (at(a, i), at(b, i));
                    if sign {
                        x + y
                    } else {
                        x - y
                    }
                })
                .collect();
            (num, a.den.clone())
        } else {
            let g = a.den.gcd(&b.den);
            let ma = &b.den / &g;
            let mb = &a.den / &g;
            let num = (0..len)
                .map(|i| {
                    let x = at(a, i) * &ma;
                    let y = at(b, i) * &mb;
                    if sign {
                        x + y
                    } else {
                        x - y
                    }
                })
                .collect();
            (num, &a.den * &ma)
        };
        Self::normalize(n, num, den)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, CoeffError> {
        self.with_aligned(other, |n, a, b| Self::combine(n, a, b, true))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, CoeffError> {
        self.with_aligned(other, |n, a, b| Self::combine(n, a, b, false))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, CoeffError> {
        self.with_aligned(other, Self::mul_aligned)
    }

    fn mul_aligned(n: u32, a: &Self, b: &Self) -> Self {
        if a.is_zero() || b.is_zero() {
            return Self::zero();
        }
        let den = &a.den * &b.den;
        if a.is_rational() || b.is_rational() {
            let (r, v) = if a.is_rational() { (&a.num[0], b) } else { (&b.num[0], a) };
            let num = v.num.iter().map(|x| x * r).collect();
            return Self::normalize(n, num, den);
        }
        let mut prod = vec![BigInt::zero(); a.num.len() + b.num.len() - 1];
        for (i, x) in a.num.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.num.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        Self::from_poly(n, prod, den)
    }

    pub fn inverse(&self) -> Result<Self, CoeffError> {
        if self.is_zero() {
            return Err(CoeffError::DivisionByZero);
        }
        if self.is_rational() {
            return Ok(Self::normalize(1, vec![self.den.clone()], self.num[0].clone()));
        }
        // Solve (multiplication-by-self matrix) · u = e_0 over Q.
        let n = self.order;
        let phi = field(n).phi;
        let mut columns = Vec::with_capacity(phi);
        for k in 0..phi {
            let mut col = self.checked_mul(&Self::zeta_pow(n, k as i64))?.coeffs();
            col.resize(phi, Rational::zero());
            columns.push(col);
        }
        let mut aug: Vec<Vec<Rational>> = (0..phi)
            .map(|r| {
                let mut row: Vec<Rational> = (0..phi).map(|c| columns[c][r].clone()).collect();
                row.push(if r == 0 { Rational::one() } else { Rational::zero() });
                row
            })
            .collect();
        for col in 0..phi {
            let pivot = (col..phi)
                .find(|&r| !aug[r][col].is_zero())
                .ok_or(CoeffError::DivisionByZero)?;
            aug.swap(col, pivot);
            let inv = aug[col][col].recip();
            for v in aug[col].iter_mut() {
                *v *= &inv;
            }
            for r in 0..phi {
                if r != col && !aug[r][col].is_zero() {
                    let factor = aug[r][col].clone();
                    let (pivot, target) = if r < col {
                        let (lo, hi) = aug.split_at_mut(col);
                        (&hi[0], &mut lo[r])
                    } else {
                        let (lo, hi) = aug.split_at_mut(r);
                        (&lo[col], &mut hi[0])
                    };
                    for (t, p) in target[col..=phi].iter_mut().zip(&pivot[col..=phi]) {
                        *t -= p * &factor;
                    }
                }
            }
        }
        let sol: Vec<Rational> = aug.into_iter().map(|row| row[phi].clone()).collect();
        Ok(Self::from_power_coeffs(n, &sol))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, CoeffError> {
        self.common_order(other)?;
        self.checked_mul(&other.inverse()?)
    }

    pub fn pow(&self, k: i64) -> Result<Self, CoeffError> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// Writes `self = q·ζ_m^k` with `q` rational when such a form exists,
    /// searching `m` among the divisors of `2·order`.
    pub fn as_scaled_root_of_unity(&self) -> Option<(Rational, u32, i64)> {
        if let Some(r) = self.as_rational() {
            return Some((r, 1, 0));
        }
        let m = 2 * self.order;
        for k in 0..m as i64 {
            let z = Self::zeta_pow(m, k);
            let lifted = self.lift(m).ok()?;
            if let Ok(q) = lifted.checked_mul(&z.inverse().ok()?) {
                if let Some(r) = q.as_rational() {
                    return Some((r, m, k));
                }
            }
        }
        None
    }
}

/// The order a field `Q(ζ_n)` is stored at: `n/2` when `n ≡ 2 (mod 4)`.
pub fn canonical_order(n: u32) -> u32 {
    if n % 4 == 2 {
        n / 2
    } else {
        n
    }
}

/// `gcd(g, x)` for `g > 0`. Reducing `x` modulo `g` first keeps the binary
/// gcd on operands no larger than `g`, which is usually a small denominator.
fn gcd_positive(g: &BigInt, x: &BigInt) -> BigInt {
    let r = x.mod_floor(g);
    if r.is_zero() {
        return g.clone();
    }
    match (g.to_u64(), r.to_u64()) {
        (Some(a), Some(b)) => BigInt::from(a.gcd(&b)),
        _ => g.gcd(&r),
    }
}

/// Exact field arithmetic in `Q(ζ_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn field_arith(a: &CycScalar, b: &CycScalar, op: FieldOp) -> Result<CycScalar, CoeffError> {
    match op {
        FieldOp::Add => a.checked_add(b),
        FieldOp::Sub => a.checked_sub(b),
        FieldOp::Mul => a.checked_mul(b),
        FieldOp::Div => a.checked_div(b),
    }
}

impl Zero for CycScalar {
    fn zero() -> Self {
        CycScalar::from_rational(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        self.order == 1 && self.num[0].is_zero()
    }
}

impl One for CycScalar {
    fn one() -> Self {
        CycScalar::from_rational(Rational::one())
    }
}

impl From<Rational> for CycScalar {
    fn from(r: Rational) -> Self {
        CycScalar::from_rational(r)
    }
}

impl From<i64> for CycScalar {
    fn from(n: i64) -> Self {
        CycScalar::from_int(n)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<'a> $tr<&'a CycScalar> for &'a CycScalar {
            type Output = CycScalar;
            fn $method(self, rhs: &'a CycScalar) -> CycScalar {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $method(self, rhs: CycScalar) -> CycScalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $method(self, rhs: &'a CycScalar) -> CycScalar {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl AddAssign<&CycScalar> for CycScalar {
    fn add_assign(&mut self, rhs: &CycScalar) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&CycScalar> for CycScalar {
    fn sub_assign(&mut self, rhs: &CycScalar) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&CycScalar> for CycScalar {
    fn mul_assign(&mut self, rhs: &CycScalar) {
        *self = &*self * rhs;
    }
}

impl Neg for &CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        CycScalar {
            order: self.order,
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

impl Neg for CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        -&self
    }
}

impl fmt::Display for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rational() {
            return f.write_str(&format_rational(&r));
        }
        let mut first = true;
        for (k, c) in self.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let atom = match k {
                0 => String::new(),
                1 => format!("z{}", self.order),
                _ => format!("z{}^{}", self.order, k),
            };
            if atom.is_empty() {
                f.write_str(&format_rational(&mag))?;
            } else if mag.is_one() {
                f.write_str(&atom)?;
            } else {
                write!(f, "{}*{}", format_rational(&mag), atom)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for CycScalar {
    type Err = CoeffError;

    /// Parses sums such as `1/2 - 3*z5 + z5^3`; powers of `zN` are reduced.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| CoeffError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err("empty input"));
        }
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut negative = false;
        let mut prev = None;
        for (i, ch) in compact.chars().enumerate() {
            let after_caret = prev.replace(ch) == Some('^');
            if (ch == '+' || ch == '-') && !after_caret {
                if !cur.is_empty() {
                    terms.push((negative, std::mem::take(&mut cur)));
                } else if i > 0 {
                    return Err(err("dangling sign"));
                }
                negative = ch == '-';
            } else {
                cur.push(ch);
            }
        }
        if cur.is_empty() {
            return Err(err("dangling sign"));
        }
        terms.push((negative, cur));

        let mut acc = CycScalar::zero();
        for (neg, body) in terms {
            let (coef_txt, atom) = match body.find('z') {
                Some(pos) => {
                    let (c, a) = body.split_at(pos);
                    let c = c.strip_suffix('*').unwrap_or(c);
                    (c.to_string(), Some(a[1..].to_string()))
                }
                None => (body.clone(), None),
            };
            let coef = if coef_txt.is_empty() {
                Rational::one()
            } else {
                parse_rational(&coef_txt)?
            };
            let mut term = CycScalar::from_rational(if neg { -coef } else { coef });
            if let Some(atom) = atom {
                let (ord_txt, pow_txt) = match atom.split_once('^') {
                    Some((o, p)) => (o, p),
                    None => (atom.as_str(), "1"),
                };
                let order: u32 = ord_txt.parse().map_err(|_| err("bad root-of-unity order"))?;
                if order == 0 {
                    return Err(err("root-of-unity order must be positive"));
                }
                let k: i64 = pow_txt.parse().map_err(|_| err("bad exponent"))?;
                term = term.checked_mul(&CycScalar::zeta_pow(order, k))?;
            }
            acc = acc.checked_add(&term)?;
        }
        Ok(acc)
    }
}

/// Exact r-th root of a rational when numerator and denominator are perfect powers.
pub fn rational_root(q: &Rational, r: u32) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let num = q.numer().nth_root(r);
    let den = q.denom().nth_root(r);
    (num.pow(r) == *q.numer() && den.pow(r) == *q.denom()).then(|| Rational::new(num, den))
}

/// Number of basis coefficients of `Q(ζ_n)`.
pub fn field_degree(n: u32) -> usize {
    totient(n)
}

pub fn lcm(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}
