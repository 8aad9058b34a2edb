//! Normal-ordered differential operators in `t_1, …, t_T` and the Virasoro
//! generators `L_n`, currents `J_n` and deformed `L'`.
//!
//! Identities are checked by applying both sides to every monomial of
//! bounded degree in `t_1, …, t_G`. Each operator records its `reach`, the
//! largest index shift it can cause; a guard `G` is accepted only when
//! `G + reach <= T`, so the cutoff never touches a checked term.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeffs::{format_rational, Rational};
use crate::series::Series;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VirasoroError {
    #[error("index {index} exceeds the cutoff T = {cutoff}")]
    IndexCutoff { index: i64, cutoff: u32 },
    #[error("J_0 is undefined")]
    J0Undefined,
    #[error("guard G = {guard} with reach {reach} exceeds the cutoff T = {cutoff}")]
    GuardTooLarge { guard: u32, reach: u32, cutoff: u32 },
    #[error("operators have different cutoffs ({0} and {1})")]
    CutoffMismatch(u32, u32),
    #[error("cutoff must be at least 1")]
    ZeroCutoff,
    #[error("deformation coefficients must be rational polynomial coefficients")]
    NonRational,
}

/// Sparse exponent vector: `(index, exponent)` sorted by index, exponents > 0.
pub type Mono = Vec<(u32, u32)>;

fn mono_degree(m: &Mono) -> u32 {
    m.iter().map(|(_, e)| e).sum()
}

fn mono_get(m: &Mono, i: u32) -> u32 {
    m.iter().find(|(j, _)| *j == i).map_or(0, |(_, e)| *e)
}

fn mono_combine(a: &Mono, b: &Mono, sign: i64) -> Mono {
    let mut map: BTreeMap<u32, i64> = a.iter().map(|(i, e)| (*i, *e as i64)).collect();
    for (i, e) in b {
        *map.entry(*i).or_insert(0) += sign * *e as i64;
    }
    map.into_iter()
        .filter(|(_, e)| *e != 0)
        .map(|(i, e)| {
            debug_assert!(e > 0);
            (i, e as u32)
        })
        .collect()
}

fn falling(n: u32, k: u32) -> Rational {
    (0..k).fold(Rational::one(), |acc, j| acc * Rational::from_integer((n - j).into()))
}

fn binomial(n: u32, k: u32) -> Rational {
    falling(n, k) / falling(k, k)
}

fn mono_text(m: &Mono, name: &str) -> Vec<String> {
    m.iter()
        .map(|(i, e)| {
            if *e == 1 {
                format!("{name}_{i}")
            } else {
                format!("{name}_{i}^{e}")
            }
        })
        .collect()
}

/// A polynomial in `t_1, …, t_T` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockPoly {
    pub cutoff: u32,
    terms: BTreeMap<Mono, Rational>,
}

impl FockPoly {
    pub fn zero(cutoff: u32) -> Self {
        FockPoly {
            cutoff,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(cutoff: u32, m: Mono) -> Self {
        let mut p = Self::zero(cutoff);
        p.add_term(m, Rational::one());
        p
    }

    fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Every monomial of total degree `<= degree` in `t_1, …, t_guard`.
pub fn guarded_monomials(guard: u32, degree: u32) -> Vec<Mono> {
    fn rec(start: u32, guard: u32, left: u32, cur: &mut Mono, out: &mut Vec<Mono>) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for i in start..=guard {
            for e in 1..=left {
                cur.push((i, e));
                rec(i + 1, guard, left - e, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(1, guard, degree, &mut Vec::new(), &mut out);
    out
}

/// `Σ c·t^a ∂^b`, every `t` to the left of every `∂`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockOp {
    pub cutoff: u32,
    pub reach: u32,
    terms: BTreeMap<(Mono, Mono), Rational>,
}

impl FockOp {
    pub fn zero(cutoff: u32) -> Self {
        FockOp {
            cutoff,
            reach: 0,
            terms: BTreeMap::new(),
        }
    }

    /// The constant operator `c`.
    pub fn scalar(cutoff: u32, c: Rational) -> Self {
        let mut op = Self::zero(cutoff);
        op.add_term(Vec::new(), Vec::new(), c);
        op
    }

    fn add_term(&mut self, t: Mono, d: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        let key = (t, d);
        let slot = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    fn push(&mut self, t: &[u32], d: &[u32], c: Rational) {
        let mono = |idx: &[u32]| {
            let mut m: BTreeMap<u32, u32> = BTreeMap::new();
            for i in idx {
                *m.entry(*i).or_insert(0) += 1;
            }
            m.into_iter().collect::<Mono>()
        };
        self.add_term(mono(t), mono(d), c);
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn check_cutoff(&self, other: &Self) -> Result<(), VirasoroError> {
        if self.cutoff != other.cutoff {
            return Err(VirasoroError::CutoffMismatch(self.cutoff, other.cutoff));
        }
        Ok(())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = FockOp::zero(self.cutoff);
        out.reach = self.reach;
        for (k, v) in &self.terms {
            out.add_term(k.0.clone(), k.1.clone(), v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, VirasoroError> {
        self.check_cutoff(other)?;
        let mut out = self.clone();
        out.reach = self.reach.max(other.reach);
        for (k, v) in &other.terms {
            out.add_term(k.0.clone(), k.1.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, VirasoroError> {
        self.add(&other.scale(&-Rational::one()))
    }

    /// Normal-ordered product: `∂^b t^c = Σ_k C(b,k) C(c,k) k! t^{c−k} ∂^{b−k}` per variable.
    pub fn mul(&self, other: &Self) -> Result<Self, VirasoroError> {
        self.check_cutoff(other)?;
        let mut out = FockOp::zero(self.cutoff);
        out.reach = self.reach + other.reach;
        for ((ta, da), ca) in &self.terms {
            for ((tb, db), cb) in &other.terms {
                // shared variables between ∂^{da} and t^{tb}
                let shared: Vec<(u32, u32)> = da
                    .iter()
                    .filter_map(|(i, e)| {
                        let f = mono_get(tb, *i);
                        (f > 0).then_some((*i, (*e).min(f)))
                    })
                    .collect();
                let mut ks = vec![0u32; shared.len()];
                loop {
                    let mut coeff = ca * cb;
                    let mut contracted: Mono = Vec::new();
                    for ((i, _), k) in shared.iter().zip(&ks) {
                        if *k > 0 {
                            let b = mono_get(da, *i);
                            let c = mono_get(tb, *i);
                            coeff *= binomial(b, *k) * binomial(c, *k) * falling(*k, *k);
                            contracted.push((*i, *k));
                        }
                    }
                    let t = mono_combine(ta, &mono_combine(tb, &contracted, -1), 1);
                    let d = mono_combine(&mono_combine(da, &contracted, -1), db, 1);
                    out.add_term(t, d, coeff);
                    // next contraction pattern
                    let mut pos = 0;
                    while pos < ks.len() {
                        if ks[pos] < shared[pos].1 {
                            ks[pos] += 1;
                            break;
                        }
                        ks[pos] = 0;
                        pos += 1;
                    }
                    if pos == ks.len() {
                        break;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `[a, b] = ab − ba`; its reach is the sum of the reaches.
    pub fn commutator(&self, other: &Self) -> Result<Self, VirasoroError> {
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        ab.sub(&ba)
    }

    /// Action on a polynomial: `t^a ∂^b · t^m = Π m!/(m−b)! · t^{a+m−b}`.
    pub fn apply(&self, p: &FockPoly) -> FockPoly {
        let mut out = FockPoly::zero(p.cutoff);
        for (m, cm) in &p.terms {
            for ((t, d), c) in &self.terms {
                if d.iter().any(|(i, e)| mono_get(m, *i) < *e) {
                    continue;
                }
                let mut coeff = c * cm;
                for (i, e) in d {
                    coeff *= falling(mono_get(m, *i), *e);
                }
                out.add_term(mono_combine(t, &mono_combine(m, d, -1), 1), coeff);
            }
        }
        out
    }

    /// Terms that act on polynomials in `t_1, …, t_guard`: every `∂` index `<= guard`.
    pub fn restricted(&self, guard: u32) -> Self {
        let mut out = FockOp::zero(self.cutoff);
        out.reach = self.reach;
        for ((t, d), c) in &self.terms {
            if d.iter().all(|(i, _)| *i <= guard) {
                out.add_term(t.clone(), d.clone(), c.clone());
            }
        }
        out
    }

    fn check_guard(&self, guard: u32) -> Result<(), VirasoroError> {
        if guard + self.reach > self.cutoff {
            return Err(VirasoroError::GuardTooLarge {
                guard,
                reach: self.reach,
                cutoff: self.cutoff,
            });
        }
        Ok(())
    }
}

impl fmt::Display for FockOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, ((t, d), c)) in self.terms.iter().enumerate() {
            let mut factors = mono_text(t, "t");
            factors.extend(mono_text(d, "d"));
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            match n {
                0 if c.is_negative() => write!(f, "-")?,
                0 => {}
                _ => write!(f, " {sign} ")?,
            }
            if factors.is_empty() {
                write!(f, "{}", format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&mag), factors.join("*"))?;
            }
        }
        Ok(())
    }
}

fn require_cutoff(cutoff: u32) -> Result<(), VirasoroError> {
    if cutoff == 0 {
        return Err(VirasoroError::ZeroCutoff);
    }
    Ok(())
}

/// `L_n = ½ Σ_{k+l=−n} kl t_k t_l + Σ_{k−l=−n} k t_k ∂_l + ½ Σ_{k+l=n} ∂_k ∂_l`
/// over `k, l >= 1`, truncated to indices `<= T`.
pub fn build_l(n: i64, cutoff: u32) -> Result<FockOp, VirasoroError> {
    require_cutoff(cutoff)?;
    if n.unsigned_abs() > 2 * cutoff as u64 {
        return Err(VirasoroError::IndexCutoff { index: n, cutoff });
    }
    let t = cutoff as i64;
    let half = Rational::new(1.into(), 2.into());
    let mut op = FockOp::zero(cutoff);
    op.reach = n.unsigned_abs() as u32;
    for k in 1..=t {
        let l = -n - k;
        if (1..=t).contains(&l) {
            op.push(&[k as u32, l as u32], &[], &half * Rational::from_integer((k * l).into()));
        }
        let l = k + n;
        if (1..=t).contains(&l) {
            op.push(&[k as u32], &[l as u32], Rational::from_integer(k.into()));
        }
        let l = n - k;
        if (1..=t).contains(&l) {
            op.push(&[], &[k as u32, l as u32], half.clone());
        }
    }
    Ok(op)
}

/// `J_n = t_n` for `n > 0` and `−n ∂_{−n}` for `n < 0`.
pub fn build_j(n: i64, cutoff: u32) -> Result<FockOp, VirasoroError> {
    require_cutoff(cutoff)?;
    if n == 0 {
        return Err(VirasoroError::J0Undefined);
    }
    if n.unsigned_abs() > cutoff as u64 {
        return Err(VirasoroError::IndexCutoff { index: n, cutoff });
    }
    let mut op = FockOp::zero(cutoff);
    op.reach = n.unsigned_abs() as u32;
    let i = n.unsigned_abs() as u32;
    if n > 0 {
        op.push(&[i], &[], Rational::one());
    } else {
        op.push(&[], &[i], Rational::from_integer((-n).into()));
    }
    Ok(op)
}

/// `L'` attached to `f = Σ r_i z^i` on a degree-`n_quiver` string quiver, at
/// level `j`: `L_{j n} + Σ r_i J_{j n + i + 1}`.
pub fn build_l_deformed(j: i64, f: &Series, n_quiver: u32, cutoff: u32) -> Result<FockOp, VirasoroError> {
    let jn = j * n_quiver as i64;
    let mut op = build_l(jn, cutoff)?;
    let terms = f.polynomial_terms().map_err(|_| VirasoroError::NonRational)?;
    for (i, c) in terms {
        let r = c.as_rational().ok_or(VirasoroError::NonRational)?;
        let index = jn + i as i64 + 1;
        op = op.add(&build_j(index, cutoff)?.scale(&r))?;
    }
    Ok(op)
}

/// Applies both operators to every monomial of degree `<= degree` in
/// `t_1, …, t_guard` and compares exactly.
pub fn guarded_equal(a: &FockOp, b: &FockOp, degree: u32, guard: u32) -> Result<bool, VirasoroError> {
    a.check_cutoff(b)?;
    a.check_guard(guard)?;
    b.check_guard(guard)?;
    Ok(guarded_monomials(guard, degree).into_iter().all(|m| {
        let p = FockPoly::monomial(a.cutoff, m);
        a.apply(&p) == b.apply(&p)
    }))
}

/// Largest absolute coefficient of `(a − b)·m` over guarded monomials `m`,
/// per degree of `m`.
pub fn guarded_discrepancy(
    a: &FockOp,
    b: &FockOp,
    degree: u32,
    guard: u32,
) -> Result<BTreeMap<u32, Rational>, VirasoroError> {
    let diff = a.sub(b)?;
    diff.check_guard(guard)?;
    let mut out: BTreeMap<u32, Rational> = BTreeMap::new();
    for m in guarded_monomials(guard, degree) {
        let deg = mono_degree(&m);
        let image = diff.apply(&FockPoly::monomial(a.cutoff, m));
        let worst = image.terms().map(|(_, c)| c.abs()).max().unwrap_or_else(Rational::zero);
        let slot = out.entry(deg).or_insert_with(Rational::zero);
        if worst > *slot {
            *slot = worst;
        }
    }
    Ok(out)
}

/// Witt relation `[L_m, L_n] = (m − n) L_{m+n}` on the guarded domain.
pub fn witt_relation(m: i64, n: i64, cutoff: u32, degree: u32, guard: u32) -> Result<bool, VirasoroError> {
    let lhs = build_l(m, cutoff)?.commutator(&build_l(n, cutoff)?)?;
    let rhs = build_l(m + n, cutoff)?.scale(&Rational::from_integer((m - n).into()));
    guarded_equal(&lhs, &rhs, degree, guard)
}

/// `L_{nk} = [L_{nk}, L_0]/(nk)` on the guarded domain.
pub fn string_identity_check(
    n_quiver: u32,
    k: u32,
    cutoff: u32,
    degree: u32,
    guard: u32,
) -> Result<bool, VirasoroError> {
    let nk = (n_quiver * k) as i64;
    let l = build_l(nk, cutoff)?;
    let rhs = l
        .commutator(&build_l(0, cutoff)?)?
        .scale(&Rational::new(1.into(), nk.into()));
    guarded_equal(&l, &rhs, degree, guard)
}

/// Outcome of one identity check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    pub params: BTreeMap<String, i64>,
    pub cutoff: u32,
    pub degree: u32,
    pub guard: u32,
    pub pass: bool,
    /// For excluded central cases: the residual operator on the guarded
    /// domain and, per monomial degree, the largest coefficient it produces.
    pub residual: Option<String>,
    pub discrepancy: Option<BTreeMap<u32, String>>,
}

/// Witt relation report; for `m + n = 0` the relation is not asserted and
/// the residual `[L_m, L_{−m}] − 2m L_0` is recorded instead.
pub fn witt_report(m: i64, n: i64, cutoff: u32, degree: u32, guard: u32) -> Result<IdentityReport, VirasoroError> {
    let params = BTreeMap::from([("m".to_string(), m), ("n".to_string(), n)]);
    let mut report = IdentityReport {
        identity: "[L_m, L_n] = (m - n) L_{m+n}".into(),
        params,
        cutoff,
        degree,
        guard,
        pass: false,
        residual: None,
        discrepancy: None,
    };
    if m + n != 0 {
        report.pass = witt_relation(m, n, cutoff, degree, guard)?;
        return Ok(report);
    }
    let lhs = build_l(m, cutoff)?.commutator(&build_l(n, cutoff)?)?;
    let rhs = build_l(0, cutoff)?.scale(&Rational::from_integer((m - n).into()));
    report.pass = guarded_equal(&lhs, &rhs, degree, guard)?;
    report.residual = Some(lhs.sub(&rhs)?.restricted(guard).to_string());
    report.discrepancy = Some(
        guarded_discrepancy(&lhs, &rhs, degree, guard)?
            .into_iter()
            .map(|(d, c)| (d, format_rational(&c)))
            .collect(),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::rat;

    fn witt(m: i64, n: i64) -> bool {
        witt_relation(m, n, 14, 3, 6).unwrap()
    }

    #[test]
    fn generator_examples() {
        let mut expected = FockOp::zero(5);
        for l in 1..=4u32 {
            expected.push(&[l + 1], &[l], Rational::from_integer((l + 1).into()));
        }
        let l = build_l(-1, 5).unwrap();
        assert_eq!(l.terms, expected.terms);

        let l0 = build_l(0, 4).unwrap();
        assert_eq!(l0.to_string(), "t_1*d_1 + 2*t_2*d_2 + 3*t_3*d_3 + 4*t_4*d_4");
        assert_eq!(build_j(-3, 5).unwrap().to_string(), "3*d_3");
        assert_eq!(build_j(0, 5), Err(VirasoroError::J0Undefined));
        assert!(matches!(build_l(11, 5), Err(VirasoroError::IndexCutoff { .. })));
    }

    #[test]
    fn weyl_product() {
        // ∂_1 · t_1^2 = t_1^2 ∂_1 + 2 t_1
        let mut d = FockOp::zero(3);
        d.push(&[], &[1], Rational::one());
        let mut t2 = FockOp::zero(3);
        t2.push(&[1, 1], &[], Rational::one());
        assert_eq!(d.mul(&t2).unwrap().to_string(), "2*t_1 + t_1^2*d_1");
    }

    #[test]
    fn witt_examples() {
        let lhs = build_l(1, 12).unwrap().commutator(&build_l(2, 12).unwrap()).unwrap();
        let rhs = build_l(3, 12).unwrap().scale(&rat(-1, 1));
        assert!(guarded_equal(&lhs, &rhs, 3, 6).unwrap());
        for n in 1..=4 {
            assert!(witt(0, n));
        }
        assert!(witt(-3, 4) && witt(2, -1) && witt(-4, -4));
    }

    #[test]
    fn central_regime_is_reported() {
        let r = witt_report(2, -2, 12, 3, 6).unwrap();
        assert!(!r.pass);
        // ½[∂_1², t_1²] and ∂_1 ∂_1 terms leave a pure constant
        assert_eq!(r.residual.as_deref(), Some("1/2"));
        assert_eq!(r.discrepancy.unwrap()[&0], "1/2");
    }

    #[test]
    fn currents() {
        let c = 10;
        for m in -3i64..=3 {
            for n in -3i64..=3 {
                if m == 0 || n == 0 {
                    continue;
                }
                let comm = build_j(m, c).unwrap().commutator(&build_j(n, c).unwrap()).unwrap();
                let expected = if m + n == 0 {
                    FockOp::scalar(c, Rational::from_integer((-m).into()))
                } else {
                    FockOp::zero(c)
                };
                assert!(guarded_equal(&comm, &expected, 3, 4).unwrap(), "m={m} n={n}");
            }
        }
    }

    #[test]
    fn deformed_examples() {
        let f: Series = "z^2".parse().unwrap();
        let l = build_l_deformed(0, &f, 2, 8).unwrap();
        assert_eq!(l, build_l(0, 8).unwrap().add(&build_j(3, 8).unwrap()).unwrap());
        let l = build_l_deformed(1, &f, 2, 8).unwrap();
        assert_eq!(l, build_l(2, 8).unwrap().add(&build_j(5, 8).unwrap()).unwrap());
        let umm: Series = "-3*z^2".parse().unwrap();
        let l = build_l_deformed(1, &umm, 2, 8).unwrap();
        let expected = build_l(2, 8).unwrap().sub(&build_j(5, 8).unwrap().scale(&rat(3, 1))).unwrap();
        assert_eq!(l, expected);
        let bad: Series = "z".parse().unwrap();
        assert_eq!(build_l_deformed(-1, &bad, 2, 8), Err(VirasoroError::J0Undefined));
    }

    #[test]
    fn string_identity() {
        for (n, k) in [(2, 1), (3, 1), (2, 2)] {
            assert!(string_identity_check(n, k, 14, 3, 6).unwrap());
        }
    }

    #[test]
    fn guard_is_enforced() {
        let lhs = build_l(4, 12).unwrap().commutator(&build_l(3, 12).unwrap()).unwrap();
        let rhs = build_l(7, 12).unwrap();
        assert!(matches!(
            guarded_equal(&lhs, &rhs, 2, 6),
            Err(VirasoroError::GuardTooLarge { reach: 7, .. })
        ));
    }

    #[test]
    fn cutoff_consistency() {
        for n in -3..=3 {
            let small = build_l(n, 8).unwrap();
            let big = build_l(n, 12).unwrap();
            for m in guarded_monomials(8 - n.unsigned_abs() as u32, 2) {
                let p = FockPoly::monomial(8, m);
                assert_eq!(small.apply(&p).terms, big.apply(&p).terms);
            }
        }
    }

    #[test]
    fn monomial_count() {
        // C(G + d, d) monomials of degree <= d in G variables
        assert_eq!(guarded_monomials(6, 3).len(), 84);
        assert_eq!(guarded_monomials(2, 0), vec![Vec::<(u32, u32)>::new()]);
    }
}
