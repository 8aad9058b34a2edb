use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::QuiverError;
use crate::coeffs::{CycScalar, Rational};
use crate::connections::{one_dim_class, BiPoly, Connection, OneDimClass};
use crate::linalg::{Matrix, Ring};
use crate::series::Series;

/// A permutation of `{0, …, n−1}` in one-line form: `map[i] = σ(i)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn from_one_line(map: Vec<usize>) -> Result<Self, QuiverError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &j in &map {
            if j >= n || seen[j] {
                return Err(QuiverError::InvalidPermutation(format!("{map:?} is not a bijection")));
            }
            seen[j] = true;
        }
        Ok(Permutation { map })
    }

    /// From disjoint cycles on `{1, …, n}`; omitted points are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self, QuiverError> {
        let mut map: Vec<usize> = (0..n).collect();
        let mut seen = vec![false; n];
        for cycle in cycles {
            for (pos, &a) in cycle.iter().enumerate() {
                if a == 0 || a > n {
                    return Err(QuiverError::InvalidPermutation(format!(
                        "entry {a} is outside 1..={n}"
                    )));
                }
                if seen[a - 1] {
                    return Err(QuiverError::InvalidPermutation(format!(
                        "entry {a} appears twice"
                    )));
                }
                seen[a - 1] = true;
                let b = cycle[(pos + 1) % cycle.len()];
                if b == 0 || b > n {
                    return Err(QuiverError::InvalidPermutation(format!(
                        "entry {b} is outside 1..={n}"
                    )));
                }
                map[a - 1] = b - 1;
            }
        }
        Self::from_one_line(map)
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    /// `σ(i) = i + k mod n`.
    pub fn shift(n: usize, k: i64) -> Self {
        Permutation {
            map: (0..n)
                .map(|i| (i as i64 + k).rem_euclid(n as i64) as usize)
                .collect(),
        }
    }

    /// The string permutation `(n n−1 ⋯ 1)`, i.e. `σ(i) = i − 1`.
    pub fn string(n: usize) -> Self {
        Self::shift(n, -1)
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn one_line(&self) -> &[usize] {
        &self.map
    }

    pub fn is_n_cycle(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return false;
        }
        let mut len = 1;
        let mut i = self.map[0];
        while i != 0 {
            i = self.map[i];
            len += 1;
        }
        len == n
    }

    pub fn is_string(&self) -> bool {
        *self == Self::string(self.n())
    }

    /// `k ∈ [0, n)` with `σ(i) − i ≡ k` for every `i`, if one exists.
    pub fn constant_shift(&self) -> Option<i64> {
        let n = self.n() as i64;
        let k = (self.map.first().copied()? as i64).rem_euclid(n);
        self.map
            .iter()
            .enumerate()
            .all(|(i, &s)| (s as i64 - i as i64).rem_euclid(n) == k)
            .then_some(k)
    }

    /// Disjoint cycles (1-based), omitting fixed points.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.map[start] == start {
                continue;
            }
            let mut cyc = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cyc.push(i + 1);
                i = self.map[i];
            }
            out.push(cyc);
        }
        out
    }

    /// Every constant-shift n-cycle of degree `n`: `σ(i) = i + k`, `gcd(k, n) = 1`.
    pub fn constant_shift_cycles(n: usize) -> Vec<Permutation> {
        (1..n as i64)
            .filter(|k| num_integer::gcd(*k, n as i64) == 1)
            .map(|k| Self::shift(n, k))
            .collect()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for c in cycles {
            let parts: Vec<String> = c.iter().map(|a| a.to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuiverKind {
    Permutation,
    String,
}

#[derive(Clone, PartialEq, Debug)]
pub struct QuiverSpec {
    pub n: usize,
    pub sigma: Permutation,
    pub f: Series,
    pub p: u32,
}

impl QuiverSpec {
    pub fn new(sigma: Permutation, f: Series) -> Self {
        QuiverSpec {
            n: sigma.n(),
            sigma,
            f,
            p: 1,
        }
    }

    /// String quiver of degree `n` with potential `f`.
    pub fn string(n: usize, f: Series) -> Self {
        Self::new(Permutation::string(n), f)
    }

    pub fn kind(&self) -> QuiverKind {
        if self.sigma.is_string() {
            QuiverKind::String
        } else {
            QuiverKind::Permutation
        }
    }

    fn require_string_p1(&self) -> Result<(), QuiverError> {
        if self.p != 1 {
            return Err(QuiverError::UnsupportedP(self.p));
        }
        if self.kind() != QuiverKind::String {
            return Err(QuiverError::NotStringQuiver(self.sigma.to_string()));
        }
        Ok(())
    }
}

/// A matrix `B` of polynomials together with its permutation and degree.
#[derive(Clone, PartialEq, Debug)]
pub struct CompanionMatrix {
    pub n: usize,
    pub sigma: Permutation,
    pub s: u32,
    pub b: Matrix<Series>,
}

impl CompanionMatrix {
    /// Takes `s` as the largest exponent present; does not validate.
    pub fn new(sigma: Permutation, b: Matrix<Series>) -> Self {
        let s = b
            .entries()
            .filter_map(|(_, _, e)| e.degree().map(|d| d / e.ram() as i64))
            .max()
            .unwrap_or(0)
            .max(0) as u32;
        CompanionMatrix {
            n: sigma.n(),
            sigma,
            s,
            b,
        }
    }

    pub fn validate(&self) -> Validation {
        validate_b(self.n, &self.sigma, self.s, &self.b)
    }

    /// The common top coefficient `b_{ijs}`.
    pub fn top_coefficient(&self) -> Option<CycScalar> {
        self.b
            .entries()
            .map(|(_, _, e)| e.coeff_int(self.s as i64))
            .find(|c| !Ring::is_zero(c))
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Shape { rows: usize, cols: usize, n: usize },
    NotPolynomial { row: usize, col: usize },
    Congruence { row: usize, col: usize, exponent: i64 },
    Degree { found: i64, expected: u32 },
    TopSlot { row: usize, col: usize },
    TopCoefficient { row: usize, col: usize, found: String, expected: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { rows, cols, n } => write!(f, "shape {rows}x{cols}, expected {n}x{n}"),
            Violation::NotPolynomial { row, col } => write!(f, "entry ({row},{col}) is not a polynomial"),
            Violation::Congruence { row, col, exponent } => write!(
                f,
                "(i) entry ({row},{col}) has z^{exponent} off the congruence class"
            ),
            Violation::Degree { found, expected } => {
                write!(f, "(ii) degree is {found}, expected {expected}")
            }
            Violation::TopSlot { row, col } => write!(
                f,
                "(ii) entry ({row},{col}) has a top-degree term outside the top slots"
            ),
            Violation::TopCoefficient {
                row,
                col,
                found,
                expected,
            } => write!(
                f,
                "(ii) top coefficient at ({row},{col}) is {found}, expected {expected}"
            ),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Validation {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Checks membership of `b` in `B(σ, s)`. Positions in violations are 1-based.
pub fn validate_b(n: usize, sigma: &Permutation, s: u32, b: &Matrix<Series>) -> Validation {
    let mut violations = Vec::new();
    if b.rows() != n || b.cols() != n || sigma.n() != n {
        violations.push(Violation::Shape {
            rows: b.rows(),
            cols: b.cols(),
            n,
        });
        return Validation {
            ok: false,
            violations,
        };
    }
    let nn = n as i64;
    let mut degree: Option<i64> = None;
    for (i, j, e) in b.entries() {
        if !e.is_polynomial() {
            violations.push(Violation::NotPolynomial { row: i + 1, col: j + 1 });
            continue;
        }
        let class = (sigma.apply(i) as i64 - j as i64).rem_euclid(nn);
        for (k, _) in e.terms() {
            let k = k / e.ram() as i64;
            degree = Some(degree.map_or(k, |d| d.max(k)));
            if k.rem_euclid(nn) != class {
                violations.push(Violation::Congruence {
                    row: i + 1,
                    col: j + 1,
                    exponent: k,
                });
            }
        }
    }
    let found = degree.unwrap_or(-1);
    if found != s as i64 {
        violations.push(Violation::Degree { found, expected: s });
    }
    let top_class = (s as i64).rem_euclid(nn);
    let mut expected: Option<CycScalar> = None;
    for (i, j, e) in b.entries() {
        let c = e.coeff_int(s as i64);
        let is_top_slot = (sigma.apply(i) as i64 - j as i64).rem_euclid(nn) == top_class;
        if !is_top_slot {
            if !Ring::is_zero(&c) {
                violations.push(Violation::TopSlot { row: i + 1, col: j + 1 });
            }
            continue;
        }
        match &expected {
            None if !Ring::is_zero(&c) => expected = Some(c),
            Some(x) if *x != c => violations.push(Violation::TopCoefficient {
                row: i + 1,
                col: j + 1,
                found: c.to_string(),
                expected: x.to_string(),
            }),
            _ => {}
        }
    }
    // A zero top slot counts once some other top slot fixed the value.
    if let Some(x) = &expected {
        for (i, j, e) in b.entries() {
            let is_top_slot =
                (sigma.apply(i) as i64 - j as i64).rem_euclid(nn) == top_class;
            if is_top_slot && Ring::is_zero(&e.coeff_int(s as i64)) {
                violations.push(Violation::TopCoefficient {
                    row: i + 1,
                    col: j + 1,
                    found: "0".into(),
                    expected: x.to_string(),
                });
            }
        }
    }
    Validation {
        ok: violations.is_empty(),
        violations,
    }
}

/// `(σ(i) − j) mod n`, represented in `1..=n`.
pub fn congruence_pattern(n: usize, sigma: &Permutation) -> Vec<Vec<usize>> {
    let nn = n as i64;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let r = (sigma.apply(i) as i64 - j as i64).rem_euclid(nn);
                    if r == 0 {
                        n
                    } else {
                        r as usize
                    }
                })
                .collect()
        })
        .collect()
}

/// `ε·f(ε z)` for `ε = ζ_n^i`, `i = 0..n`.
pub fn twisted_potentials(f: &Series, n: usize) -> Result<Vec<Series>, QuiverError> {
    (0..n)
        .map(|i| {
            let eps = CycScalar::zeta_pow(n as u32, i as i64);
            Ok(f.scale_substitute(&eps)?.scale(&eps))
        })
        .collect()
}

/// Normal form of the Kac–Schwarz connection of a string quiver.
///
/// The z-shift acts on the `n` generators as a cyclic permutation matrix;
/// the DFT matrix conjugates it to `diag(1, ζ, …, ζ^{n−1})`, and on the
/// eigenline of `ε` the substitution `w = ε^{-1} z` turns the operator into
/// `∂ + ε f(ε z)`.
pub fn ks_normal_form(spec: &QuiverSpec) -> Result<Vec<OneDimClass>, QuiverError> {
    spec.require_string_p1()?;
    let n = spec.n;
    let eigen = dft_eigenvalues(n)?;
    eigen
        .iter()
        .map(|eps| {
            let lambda = spec.f.scale_substitute(eps)?.scale(eps);
            Ok(one_dim_class(&lambda)?)
        })
        .collect()
}

/// Diagonal of `F⁻¹ C F` for the cyclic shift `C` and `F_{jk} = ζ_n^{jk}`,
/// after checking that the conjugate is diagonal.
fn dft_eigenvalues(n: usize) -> Result<Vec<CycScalar>, QuiverError> {
    let zeta = |k: usize| CycScalar::zeta_pow(n as u32, k as i64);
    let one = CycScalar::from_int(1);
    let zero = CycScalar::from_int(0);
    let c = Matrix::from_fn(n, n, |i, j| if (i + 1) % n == j { one.clone() } else { zero.clone() });
    let f = Matrix::from_fn(n, n, |j, k| zeta(j * k));
    let f_inv = f
        .inverse()
        .ok_or_else(|| QuiverError::IncompatibleLeading("DFT matrix is singular".into()))?;
    let d = f_inv.mul(&c).mul(&f);
    if !d.is_diagonal() {
        return Err(QuiverError::IncompatibleLeading(
            "DFT conjugate of the cyclic shift is not diagonal".into(),
        ));
    }
    Ok(d.diag())
}

/// `ħ∂ + diag(f(z), ζ f(ζ z), …)`.
pub fn ks_hbar_connection(spec: &QuiverSpec) -> Result<Connection, QuiverError> {
    spec.require_string_p1()?;
    let diag = twisted_potentials(&spec.f, spec.n)?;
    Ok(Connection::hbar_connection(Matrix::diagonal(diag))?)
}

/// `∏ (y − ζ^i f(ζ^i z))`, required to have rational coefficients.
pub fn classical_limit_curve(spec: &QuiverSpec) -> Result<BiPoly, QuiverError> {
    spec.require_string_p1()?;
    let mut acc = BiPoly::one();
    for lambda in twisted_potentials(&spec.f, spec.n)? {
        acc = acc.mul(&BiPoly::linear(&lambda));
    }
    if !acc.has_rational_coefficients() {
        return Err(QuiverError::NonRationalCurve(acc.to_string()));
    }
    Ok(acc)
}

/// Degree-2 string quiver with `f = Σ a_{2i} z^{2i}`, `a_{2i} = −(2i+1) t_{2i+1}`.
pub fn umm_ks_from_potential(t: &BTreeMap<u32, Rational>) -> Result<QuiverSpec, QuiverError> {
    if let Some(&even) = t.iter().find(|(k, v)| *k % 2 == 0 && !v.is_zero()).map(|(k, _)| k) {
        return Err(QuiverError::EvenPotentialIndex(even));
    }
    let terms: Vec<(i64, CycScalar)> = t
        .iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|(&k, v)| {
            let a = -(v * Rational::from_integer(k.into()));
            ((k - 1) as i64, CycScalar::from_rational(a))
        })
        .collect();
    if terms.is_empty() {
        return Err(QuiverError::EmptyPotential);
    }
    Ok(QuiverSpec::string(2, Series::polynomial(&terms)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::class_multiset_equal;

    fn s(text: &str) -> Series {
        text.parse().unwrap()
    }

    fn cls(poly: &str) -> OneDimClass {
        OneDimClass::new(s(poly), CycScalar::from_int(0))
    }

    #[test]
    fn permutations() {
        let p = Permutation::from_cycles(5, &[vec![1, 4, 2, 5, 3]]).unwrap();
        assert_eq!(p.one_line(), &[3, 4, 0, 1, 2]);
        assert!(p.is_n_cycle());
        assert_eq!(p.constant_shift(), Some(3));
        assert_eq!(p.to_string(), "(1 4 2 5 3)");
        let st = Permutation::from_cycles(3, &[vec![3, 2, 1]]).unwrap();
        assert!(st.is_string());
        assert_eq!(st.constant_shift(), Some(2));
        assert!(Permutation::from_cycles(3, &[vec![1, 1]]).is_err());
        assert!(!Permutation::from_cycles(4, &[vec![1, 2], vec![3, 4]]).unwrap().is_n_cycle());
        assert_eq!(Permutation::constant_shift_cycles(6).len(), 2);
    }

    #[test]
    fn congruence_examples() {
        let p = Permutation::from_cycles(5, &[vec![1, 4, 2, 5, 3]]).unwrap();
        assert_eq!(
            congruence_pattern(5, &p),
            vec![
                vec![3, 2, 1, 5, 4],
                vec![4, 3, 2, 1, 5],
                vec![5, 4, 3, 2, 1],
                vec![1, 5, 4, 3, 2],
                vec![2, 1, 5, 4, 3],
            ]
        );
        let t = Permutation::from_cycles(2, &[vec![1, 2]]).unwrap();
        assert_eq!(congruence_pattern(2, &t), vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(congruence_pattern(1, &Permutation::identity(1)), vec![vec![1]]);
    }

    #[test]
    fn validation_examples() {
        let t = Permutation::from_cycles(2, &[vec![1, 2]]).unwrap();
        let good = Matrix::from_rows(vec![
            vec![s("3*z"), s("z^2 + 4")],
            vec![s("z^2 - 1"), s("-z")],
        ]);
        assert!(validate_b(2, &t, 2, &good).ok);
        let bad = Matrix::from_rows(vec![
            vec![s("z^2 + 3*z"), s("z^2")],
            vec![s("z^2"), s("0")],
        ]);
        let v = validate_b(2, &t, 2, &bad);
        assert!(!v.ok);
        assert!(v
            .violations
            .iter()
            .any(|x| matches!(x, Violation::Congruence { row: 1, col: 1, exponent: 2 })));
        let uneven = Matrix::from_rows(vec![
            vec![Series::zero(), s("z^2")],
            vec![s("2*z^2"), Series::zero()],
        ]);
        assert!(!validate_b(2, &t, 2, &uneven).ok);
    }

    #[test]
    fn ks_examples() {
        let umm = QuiverSpec::string(2, s("z^2"));
        assert!(class_multiset_equal(
            &ks_normal_form(&umm).unwrap(),
            &[cls("z^2"), cls("-z^2")]
        ));
        let one = QuiverSpec::string(1, s("z^3 + 2"));
        assert_eq!(ks_normal_form(&one).unwrap(), vec![cls("z^3 + 2")]);
        let three = ks_normal_form(&QuiverSpec::string(3, s("z^3 + z"))).unwrap();
        let z3 = |k: i64| CycScalar::zeta_pow(3, k);
        let expect: Vec<OneDimClass> = (0..3)
            .map(|i| {
                OneDimClass::new(
                    Series::polynomial(&[(3, z3(i)), (1, z3(2 * i))]),
                    CycScalar::from_int(0),
                )
            })
            .collect();
        assert!(class_multiset_equal(&three, &expect));
        let perm = QuiverSpec::new(Permutation::shift(3, 1), s("z"));
        assert!(matches!(ks_normal_form(&perm), Err(QuiverError::NotStringQuiver(_))));
    }

    #[test]
    fn curve_examples() {
        assert_eq!(
            classical_limit_curve(&QuiverSpec::string(2, s("z^2"))).unwrap().to_string(),
            "y^2 - z^4"
        );
        assert_eq!(
            classical_limit_curve(&QuiverSpec::string(2, s("z"))).unwrap().to_string(),
            "y^2 - 2*y*z + z^2"
        );
        assert_eq!(
            classical_limit_curve(&QuiverSpec::string(1, s("z + 1"))).unwrap().to_string(),
            "y - z - 1"
        );
    }

    #[test]
    fn umm_dictionary() {
        let t = BTreeMap::from([(3, Rational::from_integer(1.into()))]);
        let spec = umm_ks_from_potential(&t).unwrap();
        assert_eq!(spec.f, s("-3*z^2"));
        assert!(class_multiset_equal(
            &ks_normal_form(&spec).unwrap(),
            &[cls("-3*z^2"), cls("3*z^2")]
        ));
        let t1 = BTreeMap::from([(1, Rational::from_integer(1.into()))]);
        assert_eq!(umm_ks_from_potential(&t1).unwrap().f, s("-1"));
        let t35 = BTreeMap::from([
            (3, Rational::from_integer(1.into())),
            (5, Rational::from_integer(2.into())),
        ]);
        assert_eq!(umm_ks_from_potential(&t35).unwrap().f, s("-3*z^2 - 10*z^4"));
        assert_eq!(
            umm_ks_from_potential(&BTreeMap::new()),
            Err(QuiverError::EmptyPotential)
        );
        let even = BTreeMap::from([(2, Rational::from_integer(1.into()))]);
        assert_eq!(umm_ks_from_potential(&even), Err(QuiverError::EvenPotentialIndex(2)));
    }
}
