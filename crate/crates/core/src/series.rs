//! Truncated Laurent and Puiseux series in `z` over [`CycScalar`].
//!
//! A [`Series`] stores finitely many terms `c·z^{k/e}` together with an
//! optional lower truncation bound `L`: the series is exact for exponents
//! strictly greater than `L` and unknown at or below it. Series expand
//! downwards, in powers of `1/z`, matching expansions at `z = ∞`. Without a
//! bound the value is an exact Laurent (or Puiseux) polynomial.
//!
//! Exponents are stored as integer numerators over the ramification index
//! `e`; binary operations bring both operands to the lcm of their indices.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::coeffs::{
    format_rational, lcm, rational_root, CoeffError, CycScalar, Rational,
};

/// Default number of exponents kept below the leading one.
pub const DEFAULT_ORDER: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("scale factor must be nonzero")]
    ZeroScale,
    #[error("series has no visible terms")]
    ZeroSeries,
    #[error("series is not invertible: {0}")]
    NotInvertible(String),
    #[error("operation requires an exact polynomial with nonnegative integer exponents")]
    NotPolynomial,
    #[error("scaling a ramified series needs an explicit root of the scale factor")]
    RamifiedScale,
    #[error("no {r}-th root of {value} is available in a cyclotomic field")]
    NoBranchRoot { r: u32, value: String },
    #[error("cannot parse series `{text}`: {reason}")]
    Parse { text: String, reason: String },
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

#[derive(Clone)]
pub struct Series {
    ram: u32,
    terms: BTreeMap<i64, CycScalar>,
    trunc: Option<i64>,
}

impl Series {
    pub fn zero() -> Self {
        Series {
            ram: 1,
            terms: BTreeMap::new(),
            trunc: None,
        }
    }

    pub fn one() -> Self {
        Self::constant(CycScalar::one())
    }

    pub fn constant(c: CycScalar) -> Self {
        Self::monomial(c, 0)
    }

    /// `c·z^exp`.
    pub fn monomial(c: CycScalar, exp: i64) -> Self {
        Self::from_terms(1, [(exp, c)], None)
    }

    /// `c·z^{num/ram}`.
    pub fn ramified_monomial(c: CycScalar, num: i64, ram: u32) -> Self {
        Self::from_terms(ram, [(num, c)], None)
    }

    /// `z`.
    pub fn var() -> Self {
        Self::monomial(CycScalar::one(), 1)
    }

    /// Builds a series from `(numerator, coefficient)` pairs; repeated
    /// numerators are summed and terms at or below `trunc` dropped.
    pub fn from_terms(
        ram: u32,
        terms: impl IntoIterator<Item = (i64, CycScalar)>,
        trunc: Option<i64>,
    ) -> Self {
        assert!(ram >= 1, "ramification index must be positive");
        let mut map: BTreeMap<i64, CycScalar> = BTreeMap::new();
        for (k, c) in terms {
            if trunc.is_some_and(|t| k <= t) {
                continue;
            }
            let slot = map.entry(k).or_insert_with(CycScalar::zero);
            *slot += &c;
        }
        map.retain(|_, c| !c.is_zero());
        Series {
            ram,
            terms: map,
            trunc,
        }
    }

    /// Exact Laurent polynomial from `(exponent, coefficient)` pairs.
    pub fn polynomial(terms: &[(i64, CycScalar)]) -> Self {
        Self::from_terms(1, terms.iter().cloned(), None)
    }

    /// Exact Laurent polynomial with rational coefficients `(exponent, n, d)`.
    pub fn rational_polynomial(terms: &[(i64, i64, i64)]) -> Self {
        Self::from_terms(
            1,
            terms
                .iter()
                .map(|&(e, n, d)| (e, CycScalar::from_frac(n, d))),
            None,
        )
    }

    pub fn ram(&self) -> u32 {
        self.ram
    }

    /// Truncation bound as a numerator over [`Series::ram`].
    pub fn trunc(&self) -> Option<i64> {
        self.trunc
    }

    pub fn trunc_exponent(&self) -> Option<Rational> {
        self.trunc.map(|t| Rational::new(BigInt::from(t), BigInt::from(self.ram)))
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_none()
    }

    /// True when no term is stored (an exact zero, or zero as far as visible).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in descending exponent order, as `(numerator, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &CycScalar)> + '_ {
        self.terms.iter().rev().map(|(k, c)| (*k, c))
    }

    /// Coefficient at `z^{num/ram}` (zero when absent).
    pub fn coeff(&self, num: i64) -> CycScalar {
        self.terms.get(&num).cloned().unwrap_or_else(CycScalar::zero)
    }

    /// Coefficient at an integer exponent; zero if not on this series' grid.
    pub fn coeff_int(&self, exp: i64) -> CycScalar {
        self.coeff(exp * self.ram as i64)
    }

    /// Whether the coefficient at integer exponent `exp` is known.
    pub fn is_visible_int(&self, exp: i64) -> bool {
        self.trunc.is_none_or(|t| exp * self.ram as i64 > t)
    }

    /// Highest stored numerator.
    pub fn degree(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Lowest stored numerator.
    pub fn low_degree(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn top_exponent(&self) -> Option<Rational> {
        self.degree().map(|d| self.exponent_of(d))
    }

    fn exponent_of(&self, num: i64) -> Rational {
        Rational::new(BigInt::from(num), BigInt::from(self.ram))
    }

    /// Highest-exponent term as `(exponent, coefficient)`.
    pub fn leading(&self) -> Result<(Rational, CycScalar), SeriesError> {
        let (k, c) = self.terms.iter().next_back().ok_or(SeriesError::ZeroSeries)?;
        Ok((self.exponent_of(*k), c.clone()))
    }

    /// Raises the truncation bound to `num` (over the current ram), dropping
    /// terms that are no longer claimed.
    pub fn truncated(&self, num: i64) -> Self {
        let t = self.trunc.map_or(num, |old| old.max(num));
        Self::from_terms(self.ram, self.terms.iter().map(|(k, c)| (*k, c.clone())), Some(t))
    }

    /// Truncation at an integer exponent.
    pub fn truncated_int(&self, exp: i64) -> Self {
        self.truncated(exp * self.ram as i64)
    }

    /// Keeps only terms with numerator `>= num`, as an exact series.
    pub fn part_from(&self, num: i64) -> Self {
        Self::from_terms(
            self.ram,
            self.terms.range(num..).map(|(k, c)| (*k, c.clone())),
            None,
        )
    }

    /// Re-expresses the series over a multiple of its ramification index.
    pub fn to_ram(&self, ram: u32) -> Self {
        assert!(ram.is_multiple_of(self.ram), "target ramification must be a multiple");
        let f = (ram / self.ram) as i64;
        Series {
            ram,
            terms: self.terms.iter().map(|(k, c)| (k * f, c.clone())).collect(),
            trunc: self.trunc.map(|t| t * f),
        }
    }

    /// Smallest ramification index that still represents every stored
    /// exponent; the truncation bound is rounded up (never claiming more).
    pub fn simplified(&self) -> Self {
        let mut g = self.ram as i64;
        for k in self.terms.keys() {
            g = g.gcd(k);
        }
        if g <= 1 {
            return self.clone();
        }
        Series {
            ram: self.ram / g as u32,
            terms: self.terms.iter().map(|(k, c)| (k / g, c.clone())).collect(),
            trunc: self.trunc.map(|t| Integer::div_ceil(&t, &g)),
        }
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&CycScalar) -> CycScalar) -> Self {
        Self::from_terms(self.ram, self.terms.iter().map(|(k, c)| (*k, f(c))), self.trunc)
    }

    pub fn try_map_coeffs(
        &self,
        mut f: impl FnMut(&CycScalar) -> Result<CycScalar, CoeffError>,
    ) -> Result<Self, CoeffError> {
        let mut out = Vec::with_capacity(self.terms.len());
        for (k, c) in &self.terms {
            out.push((*k, f(c)?));
        }
        Ok(Self::from_terms(self.ram, out, self.trunc))
    }

    /// Moves every coefficient into `Q(ζ_order)`.
    pub fn lift(&self, order: u32) -> Result<Self, CoeffError> {
        self.try_map_coeffs(|c| c.lift(order))
    }

    pub fn scale(&self, c: &CycScalar) -> Self {
        if c.is_zero() {
            return Series {
                ram: self.ram,
                terms: BTreeMap::new(),
                trunc: self.trunc,
            };
        }
        self.map_coeffs(|x| x * c)
    }

    /// Multiplication by `z^{num/ram}`.
    pub fn shift(&self, num: i64, ram: u32) -> Self {
        let e = lcm(self.ram, ram);
        let a = self.to_ram(e);
        let s = num * (e / ram) as i64;
        Series {
            ram: e,
            terms: a.terms.into_iter().map(|(k, c)| (k + s, c)).collect(),
            trunc: a.trunc.map(|t| t + s),
        }
    }

    /// Termwise `c·z^q ↦ c·q·z^{q-1}`; the truncation bound drops by one.
    pub fn derivative(&self) -> Self {
        let e = self.ram as i64;
        let terms = self.terms.iter().filter(|(k, _)| **k != 0).map(|(k, c)| {
            let factor = CycScalar::from_rational(Rational::new(BigInt::from(*k), BigInt::from(e)));
            (k - e, c * &factor)
        });
        Self::from_terms(self.ram, terms, self.trunc.map(|t| t - e))
    }

    /// `a(c·z)`: the coefficient at `z^k` is multiplied by `c^k`.
    pub fn scale_substitute(&self, c: &CycScalar) -> Result<Self, SeriesError> {
        if c.is_zero() {
            return Err(SeriesError::ZeroScale);
        }
        if self.ram != 1 && self.terms.keys().any(|k| k % self.ram as i64 != 0) && !c.is_one() {
            return Err(SeriesError::RamifiedScale);
        }
        let e = self.ram as i64;
        let mut out = Vec::with_capacity(self.terms.len());
        for (k, x) in &self.terms {
            out.push((*k, x * &c.pow(k / e)?));
        }
        Ok(Self::from_terms(self.ram, out, self.trunc))
    }

    /// Substitutes `z^{1/e} ↦ root·z^{1/e}`, i.e. `a(root^e·z)` on a chosen branch.
    pub fn scale_substitute_root(&self, root: &CycScalar) -> Result<Self, SeriesError> {
        if root.is_zero() {
            return Err(SeriesError::ZeroScale);
        }
        let mut out = Vec::with_capacity(self.terms.len());
        for (k, x) in &self.terms {
            out.push((*k, x * &root.pow(*k)?));
        }
        Ok(Self::from_terms(self.ram, out, self.trunc))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Series::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// True for an exact series whose exponents are nonnegative integers.
    pub fn is_polynomial(&self) -> bool {
        self.is_exact()
            && self
                .terms
                .keys()
                .all(|k| *k >= 0 && k % self.ram as i64 == 0)
    }

    /// Coefficients `(exponent, coefficient)` of an exact polynomial, descending.
    pub fn polynomial_terms(&self) -> Result<Vec<(u64, CycScalar)>, SeriesError> {
        if !self.is_polynomial() {
            return Err(SeriesError::NotPolynomial);
        }
        let e = self.ram as i64;
        Ok(self
            .terms()
            .map(|(k, c)| ((k / e) as u64, c.clone()))
            .collect())
    }

    /// `self(g)` for an exact polynomial `self`, by Horner evaluation.
    pub fn compose(&self, g: &Series) -> Result<Self, SeriesError> {
        let terms = self.polynomial_terms()?;
        let Some((top, _)) = terms.first() else {
            return Ok(Series::zero());
        };
        let mut acc = Series::zero();
        let mut next = terms.iter().peekable();
        for d in (0..=*top).rev() {
            acc = &acc * g;
            if let Some((e, c)) = next.peek() {
                if *e == d {
                    acc = &acc + &Series::constant(c.clone());
                    next.next();
                }
            }
        }
        Ok(acc)
    }

    fn combine(&self, other: &Series, negate: bool) -> Series {
        let e = lcm(self.ram, other.ram);
        let a = if self.ram == e { self.clone() } else { self.to_ram(e) };
        let b = if other.ram == e { other.clone() } else { other.to_ram(e) };
        let trunc = match (a.trunc, b.trunc) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, None) => x,
            (None, y) => y,
        };
        let iter = a.terms.into_iter().chain(
            b.terms
                .into_iter()
                .map(|(k, c)| (k, if negate { -c } else { c })),
        );
        Series::from_terms(e, iter, trunc)
    }

    fn product(&self, other: &Series) -> Series {
        let e = lcm(self.ram, other.ram);
        let a = if self.ram == e { self.clone() } else { self.to_ram(e) };
        let b = if other.ram == e { other.clone() } else { other.to_ram(e) };
        // Error terms of A+O(La) times B+O(Lb) reach top(A)+Lb and top(B)+La.
        let top_a = a.degree().or(a.trunc);
        let top_b = b.degree().or(b.trunc);
        let mut trunc: Option<i64> = None;
        if let (Some(lb), Some(ta)) = (b.trunc, top_a) {
            trunc = Some(ta + lb);
        }
        if let (Some(la), Some(tb)) = (a.trunc, top_b) {
            trunc = Some(trunc.map_or(tb + la, |t| t.max(tb + la)));
        }
        let mut acc: BTreeMap<i64, CycScalar> = BTreeMap::new();
        for (ka, ca) in &a.terms {
            for (kb, cb) in b.terms.iter().rev() {
                let k = ka + kb;
                if trunc.is_some_and(|t| k <= t) {
                    break;
                }
                let p = ca * cb;
                match acc.get_mut(&k) {
                    Some(slot) => *slot += &p,
                    None => {
                        acc.insert(k, p);
                    }
                }
            }
        }
        Series::from_terms(e, acc, trunc)
    }

    /// Canonical text form, e.g. `z^5 - 14/5*z^4 + O(z^-12)`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

/// Exact ring operation selector for [`arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Sub,
    Mul,
}

pub fn arith(a: &Series, b: &Series, op: SeriesOp) -> Series {
    match op {
        SeriesOp::Add => a + b,
        SeriesOp::Sub => a - b,
        SeriesOp::Mul => a * b,
    }
}

impl PartialEq for Series {
    fn eq(&self, other: &Self) -> bool {
        let e = lcm(self.ram, other.ram);
        let a = self.to_ram(e);
        let b = other.to_ram(e);
        a.trunc == b.trunc && a.terms == b.terms
    }
}

impl Eq for Series {}

impl Zero for Series {
    fn zero() -> Self {
        Series::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.trunc.is_none()
    }
}

impl One for Series {
    fn one() -> Self {
        Series::one()
    }
}

impl<'a> Add<&'a Series> for &'a Series {
    type Output = Series;
    fn add(self, rhs: &'a Series) -> Series {
        self.combine(rhs, false)
    }
}

impl<'a> Sub<&'a Series> for &'a Series {
    type Output = Series;
    fn sub(self, rhs: &'a Series) -> Series {
        self.combine(rhs, true)
    }
}

impl<'a> Mul<&'a Series> for &'a Series {
    type Output = Series;
    fn mul(self, rhs: &'a Series) -> Series {
        self.product(rhs)
    }
}

impl Add for Series {
    type Output = Series;
    fn add(self, rhs: Series) -> Series {
        &self + &rhs
    }
}

impl Sub for Series {
    type Output = Series;
    fn sub(self, rhs: Series) -> Series {
        &self - &rhs
    }
}

impl Mul for Series {
    type Output = Series;
    fn mul(self, rhs: Series) -> Series {
        &self * &rhs
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.map_coeffs(|c| -c)
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        -&self
    }
}

fn format_exponent(num: i64, ram: u32) -> String {
    let q = Rational::new(BigInt::from(num), BigInt::from(ram));
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("({})", format_rational(&q))
    }
}

fn format_power(num: i64, ram: u32) -> String {
    if num == ram as i64 {
        "z".to_string()
    } else {
        format!("z^{}", format_exponent(num, ram))
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.terms() {
            let (negative, body) = match c.as_rational() {
                Some(r) => {
                    let mag = r.abs();
                    let body = if k == 0 {
                        format_rational(&mag)
                    } else if mag.is_one() {
                        format_power(k, self.ram)
                    } else {
                        format!("{}*{}", format_rational(&mag), format_power(k, self.ram))
                    };
                    (r.is_negative(), body)
                }
                None => {
                    let body = if k == 0 {
                        format!("({c})")
                    } else {
                        format!("({c})*{}", format_power(k, self.ram))
                    };
                    (false, body)
                }
            };
            match (first, negative) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
            first = false;
        }
        match self.trunc {
            Some(t) => {
                let big_o = if t == 0 {
                    "O(1)".to_string()
                } else {
                    format!("O({})", format_power(t, self.ram))
                };
                if first {
                    write!(f, "{big_o}")
                } else {
                    write!(f, " + {big_o}")
                }
            }
            None if first => f.write_str("0"),
            None => Ok(()),
        }
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Slash,
    Star,
    Caret,
    Plus,
    Minus,
    LParen,
    RParen,
    Var,
    Zeta(u32),
    BigO,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let start = i;
        match ch {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '0'..='9' => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                out.push((start, Tok::Num(s.parse().map_err(|_| "bad integer")?)));
                i = j;
                continue;
            }
            'z' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j > i + 1 {
                    let s: String = chars[i + 1..j].iter().collect();
                    let n: u32 = s.parse().map_err(|_| "bad root-of-unity order")?;
                    if n == 0 {
                        return Err("root-of-unity order must be positive".into());
                    }
                    out.push((start, Tok::Zeta(n)));
                } else {
                    out.push((start, Tok::Var));
                }
                i = j;
                continue;
            }
            'O' => out.push((start, Tok::BigO)),
            '/' => out.push((start, Tok::Slash)),
            '*' => out.push((start, Tok::Star)),
            '^' => out.push((start, Tok::Caret)),
            '+' => out.push((start, Tok::Plus)),
            '-' | '\u{2212}' => out.push((start, Tok::Minus)),
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            other => return Err(format!("unexpected character `{other}` at {start}")),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), String> {
        match self.next() {
            Some(ref got) if *got == t => Ok(()),
            other => Err(format!("expected {t:?}, found {other:?}")),
        }
    }

    fn signed_int(&mut self) -> Result<BigInt, String> {
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.next() {
            Some(Tok::Num(n)) => Ok(if neg { -n } else { n }),
            other => Err(format!("expected integer, found {other:?}")),
        }
    }

    /// Exponent after `^`: `k`, `-k` or `(a/b)`.
    fn exponent(&mut self) -> Result<Rational, String> {
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let n = self.signed_int()?;
            let d = if self.peek() == Some(&Tok::Slash) {
                self.pos += 1;
                match self.next() {
                    Some(Tok::Num(d)) if !d.is_zero() => d,
                    other => return Err(format!("bad exponent denominator {other:?}")),
                }
            } else {
                BigInt::one()
            };
            self.expect(Tok::RParen)?;
            Ok(Rational::new(n, d))
        } else {
            Ok(Rational::from_integer(self.signed_int()?))
        }
    }

    /// Raw text inside a parenthesised coefficient.
    fn paren_text(&mut self) -> Result<String, String> {
        let open = self.toks[self.pos].0;
        self.pos += 1;
        let mut depth = 1;
        while let Some((at, t)) = self.toks.get(self.pos) {
            match t {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        let inner = self.text[open + 1..*at].to_string();
                        self.pos += 1;
                        return Ok(inner);
                    }
                }
                _ => {}
            }
            self.pos += 1;
        }
        Err("unbalanced parentheses".into())
    }

    fn factor(&mut self, coef: &mut CycScalar, exp: &mut Rational) -> Result<(), String> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                let mut r = Rational::from_integer(n);
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    match self.next() {
                        Some(Tok::Num(d)) if !d.is_zero() => r /= Rational::from_integer(d),
                        other => return Err(format!("bad denominator {other:?}")),
                    }
                }
                *coef = coef.checked_mul(&CycScalar::from_rational(r)).map_err(|e| e.to_string())?;
            }
            Some(Tok::Zeta(n)) => {
                self.pos += 1;
                let mut k = BigInt::one();
                if self.peek() == Some(&Tok::Caret) {
                    self.pos += 1;
                    k = self.signed_int()?;
                }
                let k: i64 = k.try_into().map_err(|_| "exponent too large")?;
                *coef = coef
                    .checked_mul(&CycScalar::zeta_pow(n, k))
                    .map_err(|e| e.to_string())?;
            }
            Some(Tok::LParen) => {
                let inner = self.paren_text()?;
                let c: CycScalar = inner.parse().map_err(|e: CoeffError| e.to_string())?;
                *coef = coef.checked_mul(&c).map_err(|e| e.to_string())?;
            }
            Some(Tok::Var) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Caret) {
                    self.pos += 1;
                    *exp += self.exponent()?;
                } else {
                    *exp += Rational::one();
                }
            }
            other => return Err(format!("unexpected token {other:?}")),
        }
        Ok(())
    }
}

impl FromStr for Series {
    type Err = SeriesError;

    /// Accepts the canonical text form, including `O(z^L)` markers.
    fn from_str(text: &str) -> Result<Self, SeriesError> {
        let err = |reason: String| SeriesError::Parse {
            text: text.to_string(),
            reason,
        };
        let toks = lex(text).map_err(err)?;
        if toks.is_empty() {
            return Err(err("empty input".into()));
        }
        let mut p = Parser { text, toks, pos: 0 };
        let mut terms: Vec<(Rational, CycScalar)> = Vec::new();
        let mut trunc: Option<Rational> = None;
        let mut first = true;
        while p.peek().is_some() {
            let mut negative = false;
            match p.peek() {
                Some(Tok::Plus) => {
                    p.pos += 1;
                }
                Some(Tok::Minus) => {
                    p.pos += 1;
                    negative = true;
                }
                _ if first => {}
                other => return Err(err(format!("expected `+` or `-`, found {other:?}"))),
            }
            first = false;
            if p.peek() == Some(&Tok::BigO) {
                p.pos += 1;
                p.expect(Tok::LParen).map_err(err)?;
                let mut c = CycScalar::one();
                let mut e = Rational::zero();
                while p.peek() != Some(&Tok::RParen) {
                    if p.peek() == Some(&Tok::Star) {
                        p.pos += 1;
                    }
                    p.factor(&mut c, &mut e).map_err(err)?;
                }
                p.expect(Tok::RParen).map_err(err)?;
                trunc = Some(match trunc {
                    Some(t) if t > e => t,
                    _ => e,
                });
                continue;
            }
            let mut coef = CycScalar::one();
            let mut exp = Rational::zero();
            p.factor(&mut coef, &mut exp).map_err(err)?;
            while p.peek() == Some(&Tok::Star) {
                p.pos += 1;
                p.factor(&mut coef, &mut exp).map_err(err)?;
            }
            terms.push((exp, if negative { -coef } else { coef }));
        }
        let mut ram: u32 = 1;
        for (e, _) in &terms {
            ram = lcm(ram, e.denom().try_into().map_err(|_| err("exponent too large".into()))?);
        }
        if let Some(t) = &trunc {
            ram = lcm(ram, t.denom().try_into().map_err(|_| err("exponent too large".into()))?);
        }
        let to_num = |q: &Rational| -> Result<i64, SeriesError> {
            let scaled = q * Rational::from_integer(BigInt::from(ram));
            scaled
                .to_integer()
                .try_into()
                .map_err(|_| err("exponent too large".into()))
        };
        let mut out = Vec::with_capacity(terms.len());
        for (e, c) in &terms {
            out.push((to_num(e)?, c.clone()));
        }
        let trunc = trunc.as_ref().map(to_num).transpose()?;
        Ok(Series::from_terms(ram, out, trunc))
    }
}

/// `r`-th root `c` of `1/lead`, taken as a principal value in a cyclotomic
/// field: `1/lead = q·ζ_m^k` gives `c = |q|^{1/r}·ζ_{M r}^{K}`.
pub fn principal_inverse_root(lead: &CycScalar, r: u32) -> Result<CycScalar, SeriesError> {
    let no_root = || SeriesError::NoBranchRoot {
        r,
        value: lead.to_string(),
    };
    let inv = lead.inverse()?;
    let (q, m, k) = inv.as_scaled_root_of_unity().ok_or_else(no_root)?;
    let big_m = lcm(m, 2);
    let mut big_k = k * (big_m / m) as i64;
    if q.is_negative() {
        big_k += (big_m / 2) as i64;
    }
    let mag = rational_root(&q.abs(), r).ok_or_else(no_root)?;
    Ok(&CycScalar::from_rational(mag) * &CycScalar::zeta_pow(big_m * r, big_k))
}

/// Compositional inverse of `f`.
///
/// When the lowest exponent of `f` is 1 the inverse is taken at the origin
/// and returned as its Taylor polynomial through `ẑ^order`. Otherwise `f`
/// must be a polynomial of degree `r >= 1` and the inverse is the Puiseux
/// expansion at infinity in `u = ẑ^{1/r}` on the principal branch.
pub fn compositional_inverse(f: &Series, order: usize) -> Result<Series, SeriesError> {
    if !f.is_exact() {
        return Err(SeriesError::NotPolynomial);
    }
    let e = f.ram() as i64;
    if f.low_degree() == Some(e) {
        return inverse_at_zero(f, order);
    }
    let (top, lead) = f.leading().map_err(|_| SeriesError::NotInvertible("f = 0".into()))?;
    if !top.is_integer() || top < Rational::one() {
        return Err(SeriesError::NotInvertible(format!("degree {top} is not a positive integer")));
    }
    let r: u32 = top.to_integer().try_into().map_err(|_| SeriesError::NotPolynomial)?;
    let root = principal_inverse_root(&lead, r)?;
    inverse_at_infinity(f, order, &root)
}

/// Taylor polynomial (degree `order`) of the inverse of `f = a₁z + a₂z² + …` at 0.
pub fn inverse_at_zero(f: &Series, order: usize) -> Result<Series, SeriesError> {
    let terms = f.polynomial_terms()?;
    if terms.last().map(|(e, _)| *e) != Some(1) {
        return Err(SeriesError::NotInvertible("lowest exponent must be 1".into()));
    }
    let a1 = f.coeff_int(1);
    if a1.is_zero() {
        return Err(SeriesError::NotInvertible("vanishing linear coefficient".into()));
    }
    let a1_inv = a1.inverse()?;
    let order = order.max(1) as i64;
    let mut g = Series::monomial(a1_inv.clone(), 1);
    for k in 2..=order {
        let residual = compose_up_to(&terms, &g, k);
        let c = residual.coeff_int(k);
        if !c.is_zero() {
            g = &g - &Series::monomial(&c * &a1_inv, k);
        }
    }
    Ok(g)
}

/// Horner evaluation of an ascending composition, dropping exponents above `max`.
fn compose_up_to(terms: &[(u64, CycScalar)], g: &Series, max: i64) -> Series {
    let top = terms[0].0;
    let mut acc = Series::zero();
    let mut next = terms.iter().peekable();
    for d in (0..=top).rev() {
        acc = (&acc * g).part_from(i64::MIN).upto(max);
        if let Some((e, c)) = next.peek() {
            if *e == d {
                acc = &acc + &Series::constant(c.clone());
                next.next();
            }
        }
    }
    acc
}

impl Series {
    /// Drops terms with integer exponent above `max` (exact series only).
    fn upto(&self, max: i64) -> Series {
        let cap = max * self.ram as i64;
        Series::from_terms(
            self.ram,
            self.terms.range(..=cap).map(|(k, c)| (*k, c.clone())),
            self.trunc,
        )
    }
}

/// Puiseux inverse at infinity of a polynomial `f` of degree `r`, in
/// `u = ẑ^{1/r}`, with leading term `root·u` where `root^r · t_r = 1`.
/// Carries `order` coefficients, exact for `u`-exponents `> 1 - order`;
/// exact outright when `r = 1`.
pub fn inverse_at_infinity(
    f: &Series,
    order: usize,
    root: &CycScalar,
) -> Result<Series, SeriesError> {
    let terms = f.polynomial_terms()?;
    let (r, lead) = terms
        .first()
        .cloned()
        .ok_or_else(|| SeriesError::NotInvertible("f = 0".into()))?;
    if r == 0 {
        return Err(SeriesError::NotInvertible("f is constant".into()));
    }
    if !(&root.pow(r as i64)? * &lead).is_one() {
        return Err(SeriesError::NotInvertible(format!(
            "{root} is not an {r}-th root of 1/({lead})"
        )));
    }
    let r32 = r as u32;
    if r == 1 {
        // f = t1 z + t0 inverts to (w - t0)/t1 exactly.
        let t0 = f.coeff_int(0);
        return Ok(Series::from_terms(
            1,
            [(1, root.clone()), (0, -(&t0 * root))],
            None,
        ));
    }
    let order = order.max(2) as i64;
    let target = Series::ramified_monomial(CycScalar::one(), r as i64, r32);
    // f'(X) ≈ r·t_r·root^{r-1}·u^{r-1}
    let slope = &(&lead * &CycScalar::from_int(r as i64)) * &root.pow(r as i64 - 1)?;
    let slope_inv = slope.inverse()?;
    let mut x = Series::from_terms(r32, [(1, root.clone())], Some(1 - order));
    for j in 1..order {
        let residual = &f.compose(&x)? - &target;
        let c = residual.coeff(r as i64 - j);
        if !c.is_zero() {
            let fix = Series::from_terms(r32, [(1 - j, &c * &slope_inv)], Some(1 - order));
            x = &x - &fix;
        }
    }
    Ok(x)
}
