//! Splitting `∂ + M` into rank-one pieces when the leading coefficient of
//! `M` has distinct eigenvalues.
//!
//! With `M = L z^m + (lower)` and `L` diagonalizable with distinct
//! eigenvalues `μ_i`, step `k` removes the off-diagonal part at `z^{m-k}`
//! with the gauge `I + G z^{-k}`, `G_ij = O_ij / (μ_j − μ_i)`. After steps
//! `1..=depth` the matrix is diagonal through `z^{m-depth}`, and the
//! diagonal is final through `z^{-1}` once `depth >= m + 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeffs::CycScalar;
use crate::connections::{gauge_transform, one_dim_class, ConnError, Connection, OneDimClass};
use crate::linalg::{Matrix, Ring};
use crate::series::Series;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SplitError {
    #[error("leading coefficient has repeated eigenvalues: {0}")]
    DegenerateLeading(String),
    #[error("cannot diagonalize the leading coefficient: {0}")]
    UnsupportedLeading(String),
    #[error("depth {depth} cannot certify z^-1 for top exponent {top}; need at least {needed}")]
    InsufficientDepth { depth: usize, top: i64, needed: usize },
    #[error("matrix entries must be exact Laurent polynomials")]
    InexactInput,
    #[error("top exponent {0} is negative; the pole is regular and outside this algorithm")]
    RegularSingular(i64),
    #[error(transparent)]
    Connection(#[from] ConnError),
}

/// How off-diagonal entries are removed at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Schedule {
    /// One gauge `I + G z^{-k}` per step.
    #[default]
    Batch,
    /// One elementary gauge `I + c E_ij z^{-k}` per entry.
    Entrywise,
}

/// Off-diagonal entries removed at one exponent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepLog {
    pub step: usize,
    pub exponent: i64,
    pub eliminated: usize,
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub classes: Vec<OneDimClass>,
    /// Leading eigenvalues, in the order of `classes`.
    pub eigenvalues: Vec<CycScalar>,
    pub top_exponent: i64,
    pub depth: usize,
    /// Composed gauge, exact for exponents above `trunc − top`.
    pub gauge: Matrix<Series>,
    pub gauge_inv: Matrix<Series>,
    /// Transformed matrix, exact for exponents above `trunc`.
    pub transformed: Matrix<Series>,
    pub trunc: i64,
    pub log: Vec<StepLog>,
}

pub const fn default_depth(top: i64) -> usize {
    (top + 2) as usize
}

/// Eigen-decomposition of the leading matrix: columns of `p` are eigenvectors.
pub struct Eigen {
    pub values: Vec<CycScalar>,
    pub p: Matrix<CycScalar>,
    pub p_inv: Matrix<CycScalar>,
}

fn distinct(values: &[CycScalar]) -> bool {
    values
        .iter()
        .enumerate()
        .all(|(i, a)| values[..i].iter().all(|b| a != b))
}

/// `L = α·P_π` for an n-cycle `π` (row `i` nonzero only in column `π(i)`).
fn as_scaled_cycle(l: &Matrix<CycScalar>) -> Result<Option<(CycScalar, Vec<usize>)>, SplitError> {
    let n = l.rows();
    let mut perm = Vec::with_capacity(n);
    let mut alpha: Option<CycScalar> = None;
    for i in 0..n {
        let nz: Vec<usize> = (0..n).filter(|&j| !Ring::is_zero(l.get(i, j))).collect();
        if nz.len() != 1 {
            return Ok(None);
        }
        let v = l.get(i, nz[0]);
        match &alpha {
            None => alpha = Some(v.clone()),
            Some(a) if a == v => {}
            Some(_) => return Ok(None),
        }
        perm.push(nz[0]);
    }
    let mut seen = vec![false; n];
    for &j in &perm {
        if seen[j] {
            return Ok(None);
        }
        seen[j] = true;
    }
    let mut len = 1;
    let mut i = perm[0];
    while i != 0 {
        i = perm[i];
        len += 1;
    }
    if len != n {
        return Err(SplitError::DegenerateLeading(format!(
            "scaled permutation {perm:?} is not a single cycle"
        )));
    }
    Ok(alpha.map(|a| (a, perm)))
}

/// Eigenvectors of the leading matrix, using the cycle structure when present.
pub fn diagonalize_leading(l: &Matrix<CycScalar>) -> Result<Eigen, SplitError> {
    let n = l.rows();
    if l.is_diagonal() {
        let values = l.diag();
        if !distinct(&values) {
            return Err(SplitError::DegenerateLeading(format!("{values:?}")));
        }
        let id = Matrix::identity(n);
        return Ok(Eigen {
            values,
            p: id.clone(),
            p_inv: id,
        });
    }
    if let Some((alpha, perm)) = as_scaled_cycle(l)? {
        // L v = α ω v  ⇔  v_{π(i)} = ω v_i.
        let mut values = Vec::with_capacity(n);
        let mut p = Matrix::zeros(n, n);
        for j in 0..n {
            let omega = CycScalar::zeta_pow(n as u32, j as i64);
            let mut v = CycScalar::from_int(1);
            let mut i = 0;
            for _ in 0..n {
                p.set(i, j, v.clone());
                v = &v * &omega;
                i = perm[i];
            }
            values.push(&alpha * &omega);
        }
        let p_inv = p.inverse().expect("cycle eigenvectors are independent");
        return Ok(Eigen { values, p, p_inv });
    }
    general_eigen(l)
}

fn general_eigen(l: &Matrix<CycScalar>) -> Result<Eigen, SplitError> {
    let n = l.rows();
    let cp = l.char_poly_with(|t, k| t * &CycScalar::from_frac(1, k));
    let eval = |x: &CycScalar| {
        let mut acc = CycScalar::from_int(0);
        for c in cp.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    };
    let mut candidates: Vec<CycScalar> = Vec::new();
    let root_order = 2 * n as u32;
    for (_, _, v) in l.entries() {
        if Ring::is_zero(v) {
            continue;
        }
        for k in 0..root_order as i64 {
            if let Ok(c) = v.checked_mul(&CycScalar::zeta_pow(root_order, k)) {
                candidates.push(c);
            }
        }
    }
    candidates.push(CycScalar::from_int(0));
    let mut values: Vec<CycScalar> = Vec::new();
    for c in candidates {
        if !values.contains(&c) && Ring::is_zero(&eval(&c)) {
            values.push(c);
        }
    }
    if values.len() < n {
        return Err(SplitError::UnsupportedLeading(format!(
            "found {} of {n} eigenvalues among entry multiples",
            values.len()
        )));
    }
    let mut p = Matrix::zeros(n, n);
    for (j, mu) in values.iter().enumerate() {
        let shifted = Matrix::from_fn(n, n, |a, b| {
            let d = if a == b { mu.clone() } else { CycScalar::from_int(0) };
            l.get(a, b) - &d
        });
        let ker = shifted.kernel();
        let v = ker.first().ok_or_else(|| {
            SplitError::UnsupportedLeading(format!("no eigenvector for {mu}"))
        })?;
        for (i, x) in v.iter().enumerate() {
            p.set(i, j, x.clone());
        }
    }
    let p_inv = p
        .inverse()
        .ok_or_else(|| SplitError::DegenerateLeading("eigenvectors are dependent".into()))?;
    Ok(Eigen { values, p, p_inv })
}

/// `Σ_{j≥0} (−X)^j` truncated at `trunc`, where `X` has only negative exponents.
fn neumann_inverse(x: &Matrix<Series>, trunc: i64) -> Matrix<Series> {
    let n = x.rows();
    let mut acc = Matrix::<Series>::identity(n).truncated_int(trunc);
    let mut term = Matrix::<Series>::identity(n);
    let neg = x.neg().truncated_int(trunc);
    loop {
        term = term.mul(&neg).truncated_int(trunc);
        if term.entries().all(|(_, _, v)| v.is_zero()) {
            break;
        }
        acc = acc.add(&term);
    }
    acc
}

/// Splits `c` with the default depth and batch schedule.
pub fn lt_split(c: &Connection, depth: Option<usize>) -> Result<SplitResult, SplitError> {
    lt_split_with(c, depth, Schedule::Batch)
}

pub fn lt_split_with(
    c: &Connection,
    depth: Option<usize>,
    schedule: Schedule,
) -> Result<SplitResult, SplitError> {
    let m0 = c.matrix();
    if !m0.is_exact_laurent() {
        return Err(SplitError::InexactInput);
    }
    let n = m0.rows();
    let top = m0
        .top_int_exponent()
        .ok_or_else(|| SplitError::DegenerateLeading("zero matrix".into()))?;
    if top < 0 {
        return Err(SplitError::RegularSingular(top));
    }
    let depth = depth.unwrap_or(default_depth(top));
    let needed = (top + 1) as usize;
    if depth < needed {
        return Err(SplitError::InsufficientDepth { depth, top, needed });
    }
    let trunc = top - depth as i64 - 1;
    let gauge_trunc = trunc - top;

    let eigen = diagonalize_leading(&m0.coeff_int(top))?;
    let p = Matrix::<Series>::from_scalars(&eigen.p);
    let p_inv = Matrix::<Series>::from_scalars(&eigen.p_inv);
    let mut m = p_inv.mul(m0).mul(&p).truncated_int(trunc);
    let mut gauge = p.clone();
    let mut gauge_inv = p_inv.clone();
    let mu = &eigen.values;
    let mut log = Vec::new();

    for k in 1..=depth {
        let exp = top - k as i64;
        let mut g_coeffs = Matrix::<CycScalar>::zeros(n, n);
        let mut count = 0;
        for (i, j, v) in m.entries() {
            if i == j {
                continue;
            }
            let o = v.coeff_int(exp);
            if Ring::is_zero(&o) {
                continue;
            }
            g_coeffs.set(i, j, &o / &(&mu[j] - &mu[i]));
            count += 1;
        }
        log.push(StepLog {
            step: k,
            exponent: exp,
            eliminated: count,
        });
        if count == 0 {
            continue;
        }
        let shift = Series::monomial(CycScalar::from_int(1), -(k as i64));
        match schedule {
            Schedule::Batch => {
                let x = Matrix::<Series>::from_scalars(&g_coeffs).scale(&shift);
                let g = Matrix::<Series>::identity(n).add(&x);
                let g_inv = neumann_inverse(&x, gauge_trunc);
                m = apply_gauge(&m, &g, &g_inv, trunc);
                gauge = gauge.mul(&g).truncated_int(gauge_trunc);
                gauge_inv = g_inv.mul(&gauge_inv).truncated_int(gauge_trunc);
            }
            Schedule::Entrywise => {
                for (i, j, v) in g_coeffs.entries() {
                    if Ring::is_zero(v) {
                        continue;
                    }
                    let mut e = Matrix::<Series>::zeros(n, n);
                    e.set(i, j, shift.scale(v));
                    let g = Matrix::<Series>::identity(n).add(&e);
                    let g_inv = Matrix::<Series>::identity(n).sub(&e);
                    m = apply_gauge(&m, &g, &g_inv, trunc);
                    gauge = gauge.mul(&g).truncated_int(gauge_trunc);
                    gauge_inv = g_inv.mul(&gauge_inv).truncated_int(gauge_trunc);
                }
            }
        }
    }

    let classes = m
        .diag()
        .iter()
        .map(one_dim_class)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SplitResult {
        classes,
        eigenvalues: eigen.values,
        top_exponent: top,
        depth,
        gauge,
        gauge_inv,
        transformed: m,
        trunc,
        log,
    })
}

fn apply_gauge(
    m: &Matrix<Series>,
    g: &Matrix<Series>,
    g_inv: &Matrix<Series>,
    trunc: i64,
) -> Matrix<Series> {
    g_inv
        .mul(m)
        .mul(g)
        .add(&g_inv.mul(&g.derivative()))
        .truncated_int(trunc)
}

/// Recomputes the gauge action and checks the split invariant: the gauge
/// pair is inverse on visible terms, the result is diagonal at every
/// exponent `>= −1`, and its diagonal classes are the reported ones.
pub fn verify_split(c: &Connection, r: &SplitResult) -> bool {
    let n = c.dim();
    if r.classes.len() != n || r.gauge.rows() != n || r.gauge_inv.rows() != n {
        return false;
    }
    let Ok(moved) = gauge_transform(c, &r.gauge, &r.gauge_inv) else {
        return false;
    };
    let m = moved.matrix();
    let off_ok = m.entries().all(|(i, j, v)| {
        i == j
            || (v.is_visible_int(-1) && v.terms().all(|(k, _)| k < -(v.ram() as i64)))
    });
    if !off_ok {
        return false;
    }
    m.diag()
        .iter()
        .zip(&r.classes)
        .all(|(lambda, cls)| one_dim_class(lambda).is_ok_and(|got| &got == cls))
}

/// Splits many connections in parallel, preserving order.
pub fn lt_split_many(
    cs: &[Connection],
    depth: Option<usize>,
) -> Vec<Result<SplitResult, SplitError>> {
    cs.par_iter().map(|c| lt_split(c, depth)).collect()
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
    fn diagonal_input_is_fixed() {
        let c = Connection::new(Matrix::diagonal(vec![s("z^2"), s("-z^2")])).unwrap();
        let r = lt_split(&c, None).unwrap();
        assert!(class_multiset_equal(&r.classes, &[cls("z^2"), cls("-z^2")]));
        assert_eq!(r.gauge, Matrix::identity(2));
        assert!(verify_split(&c, &r));
    }

    #[test]
    fn umm_antidiagonal() {
        let z2 = s("z^2");
        let b = Matrix::from_rows(vec![vec![Series::zero(), z2.clone()], vec![z2, Series::zero()]]);
        let c = Connection::new(b.neg()).unwrap();
        let r = lt_split(&c, None).unwrap();
        assert!(class_multiset_equal(&r.classes, &[cls("z^2"), cls("-z^2")]));
        assert!(verify_split(&c, &r));
    }

    #[test]
    fn off_diagonal_tail_is_removed() {
        // M = [[z, 1], [z^-1, -z]]: needs genuine elimination steps.
        let m = Matrix::from_rows(vec![vec![s("z"), s("1")], vec![s("z^-1"), s("-z")]]);
        let c = Connection::new(m).unwrap();
        let a = lt_split(&c, None).unwrap();
        let b = lt_split_with(&c, None, Schedule::Entrywise).unwrap();
        assert!(verify_split(&c, &a));
        assert!(verify_split(&c, &b));
        assert!(class_multiset_equal(&a.classes, &b.classes));
        let mut tampered = a.clone();
        tampered.classes[0] = OneDimClass::new(
            tampered.classes[0].polypart().clone(),
            tampered.classes[0].residue() + &CycScalar::from_frac(1, 2),
        );
        assert!(!verify_split(&c, &tampered));
        let mut bad_gauge = a.clone();
        let entry = bad_gauge.gauge.get(0, 1) + &s("z^-1");
        bad_gauge.gauge.set(0, 1, entry);
        assert!(!verify_split(&c, &bad_gauge));
    }

    #[test]
    fn errors() {
        let c = Connection::new(Matrix::diagonal(vec![s("z"), s("z")])).unwrap();
        assert!(matches!(lt_split(&c, None), Err(SplitError::DegenerateLeading(_))));
        let c = Connection::new(Matrix::diagonal(vec![s("z^2"), s("-z^2")])).unwrap();
        assert!(matches!(
            lt_split(&c, Some(2)),
            Err(SplitError::InsufficientDepth { .. })
        ));
        let c = Connection::new(Matrix::diagonal(vec![s("z^-1"), s("2*z^-1")])).unwrap();
        assert_eq!(lt_split(&c, None).unwrap_err(), SplitError::RegularSingular(-1));
    }

    #[test]
    fn general_leading_matrix() {
        // Leading [[1, 1], [0, 2]] is neither diagonal nor a scaled cycle.
        let m = Matrix::from_rows(vec![vec![s("z"), s("z")], vec![s("z^-1"), s("2*z")]]);
        let c = Connection::new(m).unwrap();
        let r = lt_split(&c, None).unwrap();
        assert!(verify_split(&c, &r));
        let tops: Vec<_> = r.classes.iter().map(|k| k.polypart().coeff_int(1)).collect();
        assert!(tops.contains(&CycScalar::from_int(1)) && tops.contains(&CycScalar::from_int(2)));
    }
}
