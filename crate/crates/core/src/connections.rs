//! Matrix connections `∂ + M` (or `ħ∂ + M₀ + ħM₁`) on the formal punctured
//! disc at infinity, gauge action, rank-one class data and classical limits.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeffs::{format_rational, CycScalar, Rational};
use crate::linalg::Matrix;
use crate::series::Series;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConnError {
    #[error("gauge matrices are not mutually inverse: entry ({row}, {col}) of g·g⁻¹ − I is {residual}")]
    NotInverse {
        row: usize,
        col: usize,
        residual: String,
    },
    #[error("series is not known down to z^-1 (truncated at {trunc})")]
    InsufficientPrecision { trunc: String },
    #[error("expected an unramified series, found ramification {0}")]
    Ramified(u32),
    #[error("matrix must be square with matching dimensions")]
    DimMismatch,
    #[error("classical limit requires an ħ-connection")]
    NotHbar,
    #[error("connection matrix is not diagonal")]
    NotDiagonal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    m: Matrix<Series>,
    m_hbar: Option<Matrix<Series>>,
    hbar: bool,
}

impl Connection {
    /// `∂ + m`.
    pub fn new(m: Matrix<Series>) -> Result<Self, ConnError> {
        if !m.is_square() {
            return Err(ConnError::DimMismatch);
        }
        Ok(Connection {
            m,
            m_hbar: None,
            hbar: false,
        })
    }

    /// `ħ∂ + m0`.
    pub fn hbar_connection(m0: Matrix<Series>) -> Result<Self, ConnError> {
        Self::hbar_with_correction(m0, None)
    }

    /// `ħ∂ + m0 + ħ·m1`.
    pub fn hbar_with_correction(
        m0: Matrix<Series>,
        m1: Option<Matrix<Series>>,
    ) -> Result<Self, ConnError> {
        if !m0.is_square() || m1.as_ref().is_some_and(|m| m.rows() != m0.rows() || !m.is_square()) {
            return Err(ConnError::DimMismatch);
        }
        Ok(Connection {
            m: m0,
            m_hbar: m1,
            hbar: true,
        })
    }

    /// Rank one `∂ + λ`.
    pub fn rank_one(lambda: Series) -> Self {
        Connection {
            m: Matrix::diagonal(vec![lambda]),
            m_hbar: None,
            hbar: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    /// The ħ-degree 0 matrix (the full matrix for ordinary connections).
    pub fn matrix(&self) -> &Matrix<Series> {
        &self.m
    }

    /// The ħ-degree 1 correction, if any.
    pub fn hbar_part(&self) -> Option<&Matrix<Series>> {
        self.m_hbar.as_ref()
    }

    pub fn is_hbar(&self) -> bool {
        self.hbar
    }
}

fn check_inverse(g: &Matrix<Series>, g_inv: &Matrix<Series>) -> Result<(), ConnError> {
    if g.rows() != g_inv.rows() || !g.is_square() || !g_inv.is_square() {
        return Err(ConnError::DimMismatch);
    }
    let prod = g.mul(g_inv);
    let id = Matrix::<Series>::identity(g.rows());
    for (i, j, v) in prod.sub(&id).entries() {
        if !v.is_zero() {
            return Err(ConnError::NotInverse {
                row: i,
                col: j,
                residual: v.to_string(),
            });
        }
    }
    Ok(())
}

/// `M ↦ g⁻¹ M g + g⁻¹ g'`; for ħ-connections the derivative term joins the ħ-part.
pub fn gauge_transform(
    c: &Connection,
    g: &Matrix<Series>,
    g_inv: &Matrix<Series>,
) -> Result<Connection, ConnError> {
    if g.rows() != c.dim() {
        return Err(ConnError::DimMismatch);
    }
    check_inverse(g, g_inv)?;
    let conj = |m: &Matrix<Series>| g_inv.mul(m).mul(g);
    let dterm = g_inv.mul(&g.derivative());
    if c.hbar {
        let m1 = match &c.m_hbar {
            Some(m1) => conj(m1).add(&dterm),
            None => dterm,
        };
        Ok(Connection {
            m: conj(&c.m),
            m_hbar: Some(m1),
            hbar: true,
        })
    } else {
        Ok(Connection {
            m: conj(&c.m).add(&dterm),
            m_hbar: None,
            hbar: false,
        })
    }
}

/// Block-diagonal sum; the result is an ħ-connection only if every input is.
pub fn direct_sum(cs: &[Connection]) -> Connection {
    let hbar = !cs.is_empty() && cs.iter().all(|c| c.hbar);
    let blocks: Vec<Matrix<Series>> = cs.iter().map(|c| c.m.clone()).collect();
    let m_hbar = if hbar && cs.iter().any(|c| c.m_hbar.is_some()) {
        let parts: Vec<Matrix<Series>> = cs
            .iter()
            .map(|c| {
                c.m_hbar
                    .clone()
                    .unwrap_or_else(|| Matrix::zeros(c.dim(), c.dim()))
            })
            .collect();
        Some(Matrix::block_diagonal(&parts))
    } else {
        None
    };
    Connection {
        m: Matrix::block_diagonal(&blocks),
        m_hbar,
        hbar,
    }
}

/// Isomorphism class of the rank-one connection `∂ + λ`.
#[derive(Clone, Debug)]
pub struct OneDimClass {
    polypart: Series,
    residue: CycScalar,
}

impl OneDimClass {
    /// `polypart` must be an exact polynomial in `z`.
    pub fn new(polypart: Series, residue: CycScalar) -> Self {
        assert!(polypart.is_polynomial(), "class polypart must be a polynomial");
        OneDimClass {
            polypart: polypart.simplified(),
            residue,
        }
    }

    pub fn polypart(&self) -> &Series {
        &self.polypart
    }

    pub fn residue(&self) -> &CycScalar {
        &self.residue
    }

    /// Residue shifted by an integer so its rational part lies in `[0, 1)`.
    pub fn canonical_residue(&self) -> CycScalar {
        shift_into_unit_interval(&self.residue, 1)
    }

    /// The representative `∂ + polypart + residue/z`.
    pub fn representative(&self) -> Series {
        &self.polypart + &Series::monomial(self.residue.clone(), -1)
    }

    fn sort_key(&self) -> (i64, Vec<(i64, CycScalar)>, CycScalar) {
        let deg = self.polypart.degree().unwrap_or(-1);
        let coeffs = self.polypart.terms().map(|(k, c)| (k, c.clone())).collect();
        (deg, coeffs, self.canonical_residue())
    }

    pub fn cmp_canonical(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

/// `r·residue` shifted by an integer into `[0, 1)` in its rational part, divided by `r`.
fn shift_into_unit_interval(residue: &CycScalar, r: u32) -> CycScalar {
    let scaled = residue * &CycScalar::from_int(r as i64);
    let c0 = scaled.coeffs().first().cloned().unwrap_or_else(Rational::zero);
    let shifted = &scaled - &CycScalar::from_rational(c0.floor());
    &shifted * &CycScalar::from_frac(1, r as i64)
}

impl PartialEq for OneDimClass {
    fn eq(&self, other: &Self) -> bool {
        self.polypart == other.polypart && (&self.residue - &other.residue).is_integer()
    }
}

impl Eq for OneDimClass {}

impl fmt::Display for OneDimClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.polypart, self.residue)
    }
}

fn require_visible_residue(lambda: &Series) -> Result<(), ConnError> {
    if lambda.trunc().is_some_and(|t| t >= -(lambda.ram() as i64)) {
        return Err(ConnError::InsufficientPrecision {
            trunc: lambda.to_string(),
        });
    }
    Ok(())
}

/// Class of `∂ + λ`: nonnegative part of `λ` and its `z^{-1}` coefficient.
pub fn one_dim_class(lambda: &Series) -> Result<OneDimClass, ConnError> {
    let lambda = lambda.simplified();
    if lambda.ram() != 1 {
        return Err(ConnError::Ramified(lambda.ram()));
    }
    require_visible_residue(&lambda)?;
    Ok(OneDimClass {
        polypart: lambda.part_from(0),
        residue: lambda.coeff_int(-1),
    })
}

/// Multiset equality of classes, residues taken modulo ℤ.
pub fn class_multiset_equal(a: &[OneDimClass], b: &[OneDimClass]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut a: Vec<&OneDimClass> = a.iter().collect();
    let mut b: Vec<&OneDimClass> = b.iter().collect();
    a.sort_by(|x, y| x.cmp_canonical(y));
    b.sort_by(|x, y| x.cmp_canonical(y));
    a.iter().zip(&b).all(|(x, y)| x == y)
}

/// Classes sorted into the canonical reporting order.
pub fn sorted_classes(classes: &[OneDimClass]) -> Vec<OneDimClass> {
    let mut out = classes.to_vec();
    out.sort_by(|x, y| x.cmp_canonical(y));
    out
}

/// Classes of the diagonal entries of a diagonal connection.
pub fn diagonal_classes(c: &Connection) -> Result<Vec<OneDimClass>, ConnError> {
    if !c.m.is_diagonal() {
        return Err(ConnError::NotDiagonal);
    }
    c.m.diag().iter().map(one_dim_class).collect()
}

/// Class of a rank-one connection over `C((z^{-1/r}))`.
///
/// Terms `u^{-1}, …, u^{-(r-1)}` (with `u^r = z`) cannot be gauged away by
/// ramified units, so the polynomial part keeps every exponent above `-1`;
/// the residue is defined modulo `(1/r)ℤ`.
#[derive(Clone, Debug)]
pub struct RamifiedClass {
    ram: u32,
    polypart: Series,
    residue: CycScalar,
}

impl RamifiedClass {
    pub fn ram(&self) -> u32 {
        self.ram
    }

    pub fn polypart(&self) -> &Series {
        &self.polypart
    }

    pub fn residue(&self) -> &CycScalar {
        &self.residue
    }

    pub fn canonical_residue(&self) -> CycScalar {
        shift_into_unit_interval(&self.residue, self.ram)
    }

    /// Unramified view, when the ramification index is 1.
    pub fn as_one_dim(&self) -> Option<OneDimClass> {
        (self.ram == 1).then(|| OneDimClass {
            polypart: self.polypart.clone(),
            residue: self.residue.clone(),
        })
    }
}

impl From<OneDimClass> for RamifiedClass {
    fn from(c: OneDimClass) -> Self {
        RamifiedClass {
            ram: 1,
            polypart: c.polypart,
            residue: c.residue,
        }
    }
}

impl PartialEq for RamifiedClass {
    fn eq(&self, other: &Self) -> bool {
        if self.ram != other.ram || self.polypart != other.polypart {
            return false;
        }
        let diff = &self.residue - &other.residue;
        (&diff * &CycScalar::from_int(self.ram as i64)).is_integer()
    }
}

impl Eq for RamifiedClass {}

impl fmt::Display for RamifiedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(ram {}: {}, {})", self.ram, self.polypart, self.residue)
    }
}

pub fn ramified_class(lambda: &Series) -> Result<RamifiedClass, ConnError> {
    let lambda = lambda.simplified();
    let r = lambda.ram();
    require_visible_residue(&lambda)?;
    let polypart = Series::from_terms(
        r,
        lambda
            .terms()
            .filter(|(k, _)| *k > -(r as i64))
            .map(|(k, c)| (k, c.clone())),
        None,
    );
    Ok(RamifiedClass {
        ram: r,
        polypart,
        residue: lambda.coeff(-(r as i64)),
    })
}

/// Polynomial in `y` with Laurent-polynomial coefficients in `z`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BiPoly {
    coeffs: BTreeMap<u32, Series>,
}

impl BiPoly {
    /// From coefficients of `y^0, y^1, …`.
    pub fn from_y_coeffs(cs: Vec<Series>) -> Self {
        let coeffs = cs
            .into_iter()
            .enumerate()
            .filter(|(_, s)| !s.is_zero())
            .map(|(k, s)| (k as u32, s))
            .collect();
        BiPoly { coeffs }
    }

    pub fn one() -> Self {
        Self::from_y_coeffs(vec![Series::one()])
    }

    /// `y − root`.
    pub fn linear(root: &Series) -> Self {
        Self::from_y_coeffs(vec![-root, Series::one()])
    }

    pub fn y_coeff(&self, k: u32) -> Series {
        self.coeffs.get(&k).cloned().unwrap_or_else(Series::zero)
    }

    pub fn y_degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn mul(&self, other: &BiPoly) -> BiPoly {
        let mut acc: BTreeMap<u32, Series> = BTreeMap::new();
        for (a, sa) in &self.coeffs {
            for (b, sb) in &other.coeffs {
                let slot = acc.entry(a + b).or_insert_with(Series::zero);
                *slot = &*slot + &(sa * sb);
            }
        }
        acc.retain(|_, s| !s.is_zero());
        BiPoly { coeffs: acc }
    }

    /// True when every coefficient is rational.
    pub fn has_rational_coefficients(&self) -> bool {
        self.coeffs
            .values()
            .all(|s| s.terms().all(|(_, c)| c.is_rational()))
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.values().all(Series::is_exact)
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (ydeg, s) in self.coeffs.iter().rev() {
            let s = s.simplified();
            for (k, c) in s.terms() {
                let mut factors = Vec::new();
                match ydeg {
                    0 => {}
                    1 => factors.push("y".to_string()),
                    d => factors.push(format!("y^{d}")),
                }
                let zexp = Rational::new(BigInt::from(k), BigInt::from(s.ram()));
                if !zexp.is_zero() {
                    if zexp.is_one() {
                        factors.push("z".to_string());
                    } else if zexp.is_integer() {
                        factors.push(format!("z^{zexp}"));
                    } else {
                        factors.push(format!("z^({})", format_rational(&zexp)));
                    }
                }
                let (neg, coef) = match c.as_rational() {
                    Some(r) => {
                        let mag = r.abs();
                        let text = (!mag.is_one() || factors.is_empty()).then(|| format_rational(&mag));
                        (r.is_negative(), text)
                    }
                    None => (false, Some(format!("({c})"))),
                };
                let mut body: Vec<String> = coef.into_iter().collect();
                body.extend(factors);
                let body = body.join("*");
                match (first, neg) {
                    (true, true) => write!(f, "-{body}")?,
                    (true, false) => write!(f, "{body}")?,
                    (false, true) => write!(f, " - {body}")?,
                    (false, false) => write!(f, " + {body}")?,
                }
                first = false;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// `det(y·I − M₀)` of an ħ-connection `ħ∂ + M₀ + ħM₁`.
pub fn classical_limit(c: &Connection) -> Result<BiPoly, ConnError> {
    if !c.hbar {
        return Err(ConnError::NotHbar);
    }
    Ok(char_poly(&c.m))
}

/// `det(y·I − m)` by Faddeev–LeVerrier.
pub fn char_poly(m: &Matrix<Series>) -> BiPoly {
    let coeffs = m.char_poly_with(|t, k| t.scale(&CycScalar::from_frac(1, k)));
    BiPoly::from_y_coeffs(coeffs)
}

/// Serializable class data in canonical text form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassReport {
    pub polypart: String,
    pub residue: String,
}

impl From<&OneDimClass> for ClassReport {
    fn from(c: &OneDimClass) -> Self {
        ClassReport {
            polypart: c.polypart.to_string(),
            residue: c.residue.to_string(),
        }
    }
}

/// Serializable connection summary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionReport {
    pub dim: usize,
    pub factors: Vec<ClassReport>,
    pub curve: Option<String>,
}

impl ConnectionReport {
    pub fn new(classes: &[OneDimClass], curve: Option<&BiPoly>) -> Self {
        ConnectionReport {
            dim: classes.len(),
            factors: sorted_classes(classes).iter().map(ClassReport::from).collect(),
            curve: curve.map(|c| c.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Series {
        text.parse().unwrap()
    }

    fn class(poly: &str, res: (i64, i64)) -> OneDimClass {
        OneDimClass::new(s(poly), CycScalar::from_frac(res.0, res.1))
    }

    #[test]
    fn scalar_gauge() {
        let c = Connection::rank_one(s("z^2"));
        let g = Matrix::diagonal(vec![s("z")]);
        let gi = Matrix::diagonal(vec![s("z^-1")]);
        let out = gauge_transform(&c, &g, &gi).unwrap();
        assert_eq!(out.matrix().get(0, 0), &s("z^2 + z^-1"));
        let id = Matrix::<Series>::identity(1);
        assert_eq!(gauge_transform(&c, &id, &id).unwrap(), c);
        assert!(matches!(
            gauge_transform(&c, &g, &g),
            Err(ConnError::NotInverse { .. })
        ));
    }

    #[test]
    fn dft_gauge_diagonalizes_umm() {
        let z2 = s("z^2");
        let m = Matrix::from_rows(vec![vec![Series::zero(), z2.clone()], vec![z2, Series::zero()]]);
        let c = Connection::new(m).unwrap();
        let g = Matrix::from_rows(vec![vec![s("1"), s("1")], vec![s("1"), s("-1")]]);
        let gi = g.scale(&s("1/2"));
        let out = gauge_transform(&c, &g, &gi).unwrap();
        assert_eq!(out.matrix(), &Matrix::diagonal(vec![s("z^2"), s("-z^2")]));
    }

    #[test]
    fn class_examples() {
        let c = one_dim_class(&s("z + 5*z^-1")).unwrap();
        assert_eq!(c.residue(), &CycScalar::from_int(5));
        assert_eq!(c, class("z", (0, 1)));
        assert_eq!(one_dim_class(&s("z^-2")).unwrap(), class("0", (0, 1)));
        assert!(matches!(
            one_dim_class(&s("z + O(z^-1)")),
            Err(ConnError::InsufficientPrecision { .. })
        ));
        assert_eq!(class("z", (7, 3)).canonical_residue(), CycScalar::from_frac(1, 3));
    }

    #[test]
    fn multiset_examples() {
        let a = vec![class("z", (0, 1)), class("-z", (0, 1))];
        let b = vec![class("-z", (1, 1)), class("z", (0, 1))];
        assert!(class_multiset_equal(&a, &b));
        assert!(!class_multiset_equal(&[class("z", (0, 1))], &[class("z", (1, 2))]));
        let sum = direct_sum(&[Connection::rank_one(s("z")), Connection::rank_one(s("-z"))]);
        assert_eq!(sum.dim(), 2);
        assert!(class_multiset_equal(&diagonal_classes(&sum).unwrap(), &a));
    }

    #[test]
    fn ramified_class_residue_modulo() {
        let a = ramified_class(&s("z^(1/2) - 3/4*z^-1")).unwrap();
        let b = ramified_class(&s("z^(1/2) - 1/4*z^-1 + z^-2")).unwrap();
        assert_eq!(a.ram(), 2);
        assert_eq!(a, b);
        let c = ramified_class(&s("z^(1/2) - 1/2*z^-1 + z^(-1/2)")).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn classical_limit_examples() {
        let f = s("z^2 + 1");
        let c = Connection::hbar_connection(Matrix::diagonal(vec![f])).unwrap();
        assert_eq!(classical_limit(&c).unwrap().to_string(), "y - z^2 - 1");
        let z2 = s("z^2");
        let m = Matrix::from_rows(vec![vec![Series::zero(), z2.clone()], vec![z2, Series::zero()]]);
        let umm = Connection::hbar_connection(m).unwrap();
        let curve = classical_limit(&umm).unwrap();
        assert_eq!(curve.to_string(), "y^2 - z^4");
        assert!(curve.has_rational_coefficients());
        let g = Matrix::from_rows(vec![vec![s("1"), s("z")], vec![s("0"), s("1")]]);
        let gi = Matrix::from_rows(vec![vec![s("1"), s("-z")], vec![s("0"), s("1")]]);
        let moved = gauge_transform(&umm, &g, &gi).unwrap();
        assert!(moved.hbar_part().is_some());
        assert_eq!(classical_limit(&moved).unwrap(), curve);
        assert_eq!(
            classical_limit(&Connection::rank_one(s("z"))),
            Err(ConnError::NotHbar)
        );
    }
}
