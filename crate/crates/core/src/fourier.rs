//! Local Fourier transform `F^(∞,∞)` on rank-one classes `∂ + ζ_n^i f(ζ_n^i z)`.
//!
//! Two independent routes are implemented. The direct route inverts `f` at
//! infinity and applies the closed formula
//! `λ̂ = ζ_n^i f^{-1}(ζ_n^i z) − (1+r)/(2r)·z^{-1}`. The chain route follows
//! the substitutions `g = 1/(ζ ẑ)`, `h = −g + (r+1)/(2r)` in the coordinate
//! `ζ = 1/z`, with its own power-series reversion. [`gh_consistency`]
//! compares the two.
//!
//! The chain route lands on twist `−i` of the closed formula; the two agree
//! as multisets over `i`, and the comparison accounts for the relabeling.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeffs::{lcm, CycScalar, Rational};
use crate::connections::{ramified_class, ConnError, RamifiedClass};
use crate::series::{inverse_at_infinity, principal_inverse_root, Series, SeriesError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FourierError {
    #[error("input must be an exact polynomial of degree at least 1")]
    NotPolynomial,
    #[error("twist order must be positive")]
    ZeroOrder,
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Conn(#[from] ConnError),
}

/// The class `∂ + ζ_n^i f(ζ_n^i z)` with `f` a polynomial of degree `r >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LftInput {
    pub f: Series,
    pub twist: i64,
    pub n: u32,
}

impl LftInput {
    pub fn new(f: Series, twist: i64, n: u32) -> Result<Self, FourierError> {
        if n == 0 {
            return Err(FourierError::ZeroOrder);
        }
        if !f.is_polynomial() || f.degree().unwrap_or(0) < 1 {
            return Err(FourierError::NotPolynomial);
        }
        Ok(LftInput { f, twist, n })
    }

    pub fn degree(&self) -> u32 {
        self.f.degree().unwrap_or(0) as u32
    }

    /// The principal root `c` with `c^r·t_r = 1`, and a field holding it
    /// together with `ζ_{nr}`, the branch roots `ζ_r^k` and the input.
    fn root_and_field(&self) -> Result<(CycScalar, u32), FourierError> {
        let r = self.degree();
        let (_, lead) = self.f.leading()?;
        let root = principal_inverse_root(&lead, r)?;
        let mut order = lcm(lcm(self.n, 2) * r, root.order());
        for (_, c) in self.f.terms() {
            order = lcm(order, c.order());
        }
        Ok((root, order))
    }

    fn with_twist(&self, twist: i64) -> Self {
        LftInput {
            twist: twist.rem_euclid(self.n as i64),
            ..self.clone()
        }
    }

    fn shift(&self) -> Rational {
        let r = self.degree() as i64;
        Rational::new((r + 1).into(), (2 * r).into())
    }
}

/// Output of the direct route, with its intermediates.
#[derive(Clone, Debug)]
pub struct LftOutput {
    pub r: u32,
    /// `f^{-1}` at infinity, in `u = z^{1/r}`.
    pub inverse: Series,
    /// `g = z·ζ_n^i f^{-1}(ζ_n^i z)`.
    pub g: Series,
    /// `h = −g + (r+1)/(2r)`.
    pub h: Series,
    /// `λ̂ = −h/z`.
    pub lambda: Series,
    pub class: RamifiedClass,
}

fn scalar_in(c: CycScalar, order: u32) -> Result<CycScalar, FourierError> {
    Ok(c.lift(order).map_err(SeriesError::from)?)
}

/// The transformed class by the closed formula. At least `order` exponents
/// below the top are carried, and never fewer than needed to see `z^{-1}`.
pub fn lft_infty_infty(input: &LftInput, order: usize) -> Result<LftOutput, FourierError> {
    let r = input.degree();
    let (root, field) = input.root_and_field()?;
    let root = scalar_in(root, field)?;
    let prec = order.max(r as usize + 2);
    let f = input.f.lift(field).map_err(SeriesError::from)?;
    let inverse = inverse_at_infinity(&f, prec, &root)?;
    let inner = scalar_in(CycScalar::zeta_pow(input.n * r, input.twist), field)?;
    let outer = scalar_in(CycScalar::zeta_pow(input.n, input.twist), field)?;
    let twisted = inverse.scale_substitute_root(&inner)?.scale(&outer);
    let shift = CycScalar::from_rational(input.shift());
    let g = twisted.shift(1, 1);
    let h = &Series::constant(shift) - &g;
    let lambda = -h.shift(-1, 1);
    let class = ramified_class(&lambda)?;
    Ok(LftOutput {
        r,
        inverse,
        g,
        h,
        lambda,
        class,
    })
}

/// Classes of `F^(∞,∞)` applied to every twist `i = 0..n`.
pub fn lft_all_twists(f: &Series, n: u32, order: usize) -> Result<Vec<RamifiedClass>, FourierError> {
    (0..n as i64)
        .map(|i| lft_infty_infty(&LftInput::new(f.clone(), i, n)?, order).map(|o| o.class))
        .collect()
}

/// Truncated power series in one variable, ascending coefficients.
type Pow = Vec<CycScalar>;

fn pow_mul(a: &[CycScalar], b: &[CycScalar], len: usize) -> Pow {
    let mut out = vec![CycScalar::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += &(x * y);
        }
    }
    out
}

fn pow_reciprocal(a: &[CycScalar], len: usize) -> Result<Pow, FourierError> {
    let a0_inv = a[0].inverse().map_err(SeriesError::from)?;
    let mut out = vec![CycScalar::zero(); len];
    out[0] = a0_inv.clone();
    for k in 1..len {
        let mut acc = CycScalar::zero();
        for j in 1..=k.min(a.len() - 1) {
            acc += &(&a[j] * &out[k - j]);
        }
        out[k] = -(&acc * &a0_inv);
    }
    Ok(out)
}

/// `a^α` for `a[0] = 1`, by `k·p_k = Σ_{j=1}^{k} ((α+1)j − k)·a_j·p_{k−j}`.
fn pow_power(a: &[CycScalar], alpha: &Rational, len: usize) -> Pow {
    debug_assert!(a[0].is_one());
    let mut out = vec![CycScalar::zero(); len];
    out[0] = CycScalar::one();
    let alpha1 = alpha + Rational::one();
    for k in 1..len {
        let mut acc = CycScalar::zero();
        for j in 1..=k.min(a.len() - 1) {
            let w = &alpha1 * Rational::from_integer(j.into()) - Rational::from_integer(k.into());
            acc += &(&(&a[j] * &out[k - j]) * &CycScalar::from_rational(w));
        }
        out[k] = &acc * &CycScalar::from_frac(1, k as i64);
    }
    out
}

/// Reversion of `v = c₁ζ + c₂ζ² + …`: returns `ζ(v)` through `v^{len-1}`.
fn pow_reversion(v: &[CycScalar], len: usize) -> Result<Pow, FourierError> {
    let c1_inv = v[1].inverse().map_err(SeriesError::from)?;
    let mut d = vec![CycScalar::zero(); len];
    d[1] = c1_inv.clone();
    for k in 2..len {
        // v(ζ(v)) by Horner, kept through v^k.
        let mut acc = vec![CycScalar::zero(); k + 1];
        for c in v.iter().take(k + 1).rev() {
            acc = pow_mul(&acc, &d, k + 1);
            acc[0] += c;
        }
        let e = &acc[k];
        if !e.is_zero() {
            d[k] = &d[k] - &(e * &c1_inv);
        }
    }
    Ok(d)
}

/// `λ̂` by the substitution chain, with an explicit shift constant.
///
/// With `F(w) = ζ_n^i f(ζ_n^i w)` and `ζ` the coordinate at infinity,
/// `g(ζ) = F(1/ζ)/ζ` and `ẑ = 1/(ζ g) = ζ^r / Q(ζ)`, where
/// `Q(ζ) = ζ^r F(1/ζ)`. Then `v = ẑ^{1/r}` is reverted to `ζ(v)`, and in
/// `z = 1/ẑ` (so `v = u^{-1}`) the output is `−h(ẑ)/z = 1/ζ − shift/z`.
fn chain_route(input: &LftInput, prec: usize, shift: &Rational) -> Result<Series, FourierError> {
    let r = input.degree() as usize;
    let (root, field) = input.root_and_field()?;
    let zeta = scalar_in(CycScalar::zeta_pow(input.n, input.twist), field)?;
    // F_j = ζ^{i(j+1)} t_j
    let mut big_f = vec![CycScalar::zero(); r + 1];
    let mut zp = zeta.clone();
    for (j, slot) in big_f.iter_mut().enumerate() {
        *slot = &input.f.coeff_int(j as i64) * &zp;
        zp = &zp * &zeta;
    }
    let lead = big_f[r].clone();
    let lead_inv = lead.inverse().map_err(SeriesError::from)?;
    // c^r·F_r = 1
    let twist_root = CycScalar::zeta_pow(input.n * r as u32, -input.twist * (r as i64 + 1));
    let c = &scalar_in(root, field)? * &scalar_in(twist_root, field)?;
    let len = prec + 2;
    let a: Pow = (0..=r).map(|k| &big_f[r - k] * &lead_inv).collect();
    let p = pow_power(&a, &Rational::new((-1).into(), (r as i64).into()), len);
    let mut v = vec![CycScalar::zero(); len];
    for k in 0..len - 1 {
        v[k + 1] = &c * &p[k];
    }
    let d = pow_reversion(&v, len)?;
    let e = pow_reciprocal(&d[1..], len - 1)?;
    // 1/ζ = Σ e_k v^{k-1} = Σ e_k u^{1-k}
    let k_max = e.len() as i64;
    let mut lambda = Series::from_terms(
        r as u32,
        e.iter().enumerate().map(|(k, x)| (1 - k as i64, x.clone())),
        Some(1 - k_max),
    );
    lambda = &lambda - &Series::monomial(CycScalar::from_rational(shift.clone()), -1);
    Ok(lambda)
}

/// Compares the chain route (with the given shift constant) against the
/// closed formula, up to the branch relabeling `u ↦ ζ_r^k u` and at the
/// common precision of the two.
pub fn gh_consistency_with_shift(
    input: &LftInput,
    order: usize,
    shift: &Rational,
) -> Result<bool, FourierError> {
    let r = input.degree();
    let prec = order.max(r as usize + 2);
    let direct = lft_infty_infty(&input.with_twist(-input.twist), prec)?;
    let chain = chain_route(input, prec, shift)?;
    let (_, field) = input.root_and_field()?;
    let bound = direct
        .lambda
        .to_ram(r)
        .trunc()
        .max(chain.trunc())
        .expect("both routes are truncated");
    let target = direct.lambda.to_ram(r).truncated(bound);
    for k in 0..r as i64 {
        let branch = scalar_in(CycScalar::zeta_pow(r, k), field)?;
        let moved = chain.scale_substitute_root(&branch)?.truncated(bound);
        if moved == target {
            return Ok(true);
        }
    }
    Ok(false)
}

/// [`gh_consistency_with_shift`] with the transform's shift `(r+1)/(2r)`.
pub fn gh_consistency(input: &LftInput, order: usize) -> Result<bool, FourierError> {
    gh_consistency_with_shift(input, order, &input.shift())
}

/// Serializable transform summary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LftReport {
    pub f: String,
    pub r: u32,
    pub twist: i64,
    pub n: u32,
    pub output: RamifiedReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamifiedReport {
    pub ram: u32,
    pub polypart: String,
    pub residue: String,
}

impl From<&RamifiedClass> for RamifiedReport {
    fn from(c: &RamifiedClass) -> Self {
        RamifiedReport {
            ram: c.ram(),
            polypart: c.polypart().to_string(),
            residue: c.residue().to_string(),
        }
    }
}

impl LftReport {
    pub fn new(input: &LftInput, out: &LftOutput) -> Self {
        LftReport {
            f: input.f.to_string(),
            r: out.r,
            twist: input.twist,
            n: input.n,
            output: RamifiedReport::from(&out.class),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::rat;

    fn s(text: &str) -> Series {
        text.parse().unwrap()
    }

    fn input(f: &str, twist: i64, n: u32) -> LftInput {
        LftInput::new(s(f), twist, n).unwrap()
    }

    #[test]
    fn linear_examples() {
        let out = lft_infty_infty(&input("z", 0, 1), 8).unwrap();
        assert_eq!(out.lambda, s("z - z^-1"));
        let c = out.class.as_one_dim().unwrap();
        assert_eq!(c.polypart(), &s("z"));
        assert!((c.residue() - &CycScalar::from_int(-1)).is_zero());

        let out = lft_infty_infty(&input("2*z", 0, 1), 8).unwrap();
        assert_eq!(out.class.polypart(), &s("1/2*z"));
        assert_eq!(out.class.residue(), &CycScalar::from_int(-1));
        assert_eq!(out.h, s("1 - 1/2*z^2"));
    }

    #[test]
    fn quadratic_is_ramified() {
        let out = lft_infty_infty(&input("z^2", 0, 1), 8).unwrap();
        assert_eq!(out.class.ram(), 2);
        assert_eq!(out.class.polypart(), &s("z^(1/2)"));
        assert_eq!(out.class.residue(), &CycScalar::from_frac(-3, 4));
    }

    #[test]
    fn twisted_linear() {
        // i = 1, n = 4: ζ f^{-1}(ζ z) = ζ² z/a − ζ b/a for f = a z + b.
        let out = lft_infty_infty(&input("3*z + 2", 1, 4), 6).unwrap();
        let i4 = CycScalar::zeta_pow(4, 1);
        let expected = Series::polynomial(&[
            (1, CycScalar::from_frac(-1, 3)),
            (0, &i4 * &CycScalar::from_frac(-2, 3)),
        ]);
        assert_eq!(out.class.polypart(), &expected);
    }

    #[test]
    fn routes_agree() {
        for (f, n) in [("z", 1), ("z + z^2", 1), ("z^3 - 2*z + 5", 3), ("z^4 + z^3 - z", 2), ("-z^2 + z", 5)] {
            for i in 0..n as i64 {
                assert!(gh_consistency(&input(f, i, n), 8).unwrap(), "f = {f}, i = {i}");
            }
        }
    }

    #[test]
    fn wrong_shift_is_detected() {
        for f in ["z", "z + z^2", "z^3"] {
            let inp = input(f, 0, 1);
            let r = inp.degree() as i64;
            let wrong = rat(r - 1, 2 * r);
            assert!(!gh_consistency_with_shift(&inp, 8, &wrong).unwrap(), "f = {f}");
        }
    }

    #[test]
    fn monomial_slope() {
        for r in 1..=3u32 {
            let f = Series::monomial(CycScalar::one(), r as i64);
            let out = lft_infty_infty(&LftInput::new(f, 0, 1).unwrap(), 6).unwrap();
            let (top, _) = out.class.polypart().leading().unwrap();
            assert_eq!(top, rat(1, r as i64));
        }
    }

    #[test]
    fn rejects_constants() {
        assert_eq!(LftInput::new(s("3"), 0, 1), Err(FourierError::NotPolynomial));
        assert_eq!(LftInput::new(s("z^-1"), 0, 1), Err(FourierError::NotPolynomial));
    }
}
