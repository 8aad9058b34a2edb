use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::companion::{companion_normal_form, CompanionNormalForm};
use super::spec::{CompanionMatrix, Permutation, QuiverKind, QuiverSpec};
use super::QuiverError;
use crate::coeffs::CycScalar;
use crate::levelt_turrittin::diagonalize_leading;
use crate::linalg::{Matrix, Ring};
use crate::series::Series;

#[derive(Clone, Debug, PartialEq)]
pub struct QuiverSolution {
    /// `φ_1, …, φ_n`, each exact above `z^{-(order+1)}`.
    pub phis: Vec<Series>,
    pub order: usize,
    pub root_twist: usize,
    /// The exponential factor of this sheet.
    pub f: Series,
}

impl QuiverSolution {
    /// The quiver this sheet solves.
    pub fn spec(&self, sigma: &Permutation) -> QuiverSpec {
        QuiverSpec::new(sigma.clone(), self.f.clone())
    }

    /// Constant terms of the `φ_i`.
    pub fn constant_vector(&self) -> Vec<CycScalar> {
        self.phis.iter().map(|p| p.coeff_int(0)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub root_twist: usize,
    pub order: usize,
    pub f: String,
    pub phis: Vec<String>,
}

impl From<&QuiverSolution> for SolutionReport {
    fn from(s: &QuiverSolution) -> Self {
        SolutionReport {
            root_twist: s.root_twist,
            order: s.order,
            f: s.f.to_string(),
            phis: s.phis.iter().map(|p| p.to_string()).collect(),
        }
    }
}

/// Affine form `c_0 + Σ c_u t_u` in the undetermined kernel coefficients.
#[derive(Clone, Debug)]
struct Affine(Vec<CycScalar>);

impl Affine {
    fn zero(len: usize) -> Self {
        Affine(vec![CycScalar::from_int(0); len])
    }

    fn constant(c: CycScalar, len: usize) -> Self {
        let mut a = Self::zero(len);
        a.0[0] = c;
        a
    }

    fn unknown(u: usize, len: usize) -> Self {
        let mut a = Self::zero(len);
        a.0[u] = CycScalar::from_int(1);
        a
    }

    fn add_scaled(&mut self, other: &Affine, c: &CycScalar) {
        if Ring::is_zero(c) {
            return;
        }
        for (x, y) in self.0.iter_mut().zip(&other.0) {
            if !Ring::is_zero(y) {
                *x += &(y * c);
            }
        }
    }

    fn scaled(&self, c: &CycScalar) -> Self {
        Affine(self.0.iter().map(|x| x * c).collect())
    }

    fn lowest_unknown(&self) -> Option<usize> {
        (1..self.0.len()).find(|&u| !Ring::is_zero(&self.0[u]))
    }

    fn is_constant(&self) -> bool {
        self.lowest_unknown().is_none()
    }

    fn substitute(&mut self, u: usize, value: &Affine) {
        let c = std::mem::replace(&mut self.0[u], CycScalar::from_int(0));
        self.add_scaled(value, &c);
    }
}

fn vacuum(n: usize) -> QuiverSolution {
    QuiverSolution {
        phis: vec![Series::one(); n],
        order: 0,
        root_twist: 0,
        f: Series::zero(),
    }
}

/// The flat section `exp(∫f)·(φ_1, …, φ_n)` of `∂ − B`, i.e. the solution of
/// `(∂ + f − B)φ = 0` with `φ = Σ_K c_K z^{-K}`, normalized so `φ_1 = 1 + O(1/z)`.
///
/// In the eigenbasis of the top coefficient matrix each stage `K` determines
/// every component of `c_K` except the one along the eigenvector of `f`'s
/// leading coefficient; that one stays a free unknown until a later stage's
/// solvability condition pins it.
pub fn solve_flat_section(
    cm: &CompanionMatrix,
    f: &Series,
    order: usize,
    root_twist: usize,
) -> Result<QuiverSolution, QuiverError> {
    let n = cm.n;
    if cm.b.entries().all(|(_, _, e)| e.is_zero() && e.is_exact()) && f.is_zero() && f.is_exact() {
        if root_twist != 0 {
            return Err(QuiverError::IncompatibleLeading(
                "the vacuum has a single sheet".into(),
            ));
        }
        return Ok(QuiverSolution {
            order,
            ..vacuum(n)
        });
    }
    let v = cm.validate();
    if !v.ok {
        return Err(QuiverError::InvalidCompanion(v.violations));
    }
    let m = cm.s as i64;
    let f = f.simplified();
    if f.ram() != 1 || !f.is_exact() || f.terms().any(|(k, _)| k < -1 || k > m) {
        return Err(QuiverError::IncompatibleLeading(format!(
            "f = {f} must be a Laurent polynomial with exponents in [-1, {m}]"
        )));
    }
    let beta = cm
        .top_coefficient()
        .ok_or_else(|| QuiverError::IncompatibleLeading("B has no top coefficient".into()))?;
    let alpha = f.coeff_int(m);
    let sheet = &beta * &CycScalar::zeta_pow(n as u32, root_twist as i64);
    if alpha != sheet {
        return Err(QuiverError::IncompatibleLeading(format!(
            "leading coefficient of f is {alpha}, sheet {root_twist} needs {sheet}"
        )));
    }

    let eig = diagonalize_leading(&cm.b.coeff_int(m))?;
    let l0 = eig
        .values
        .iter()
        .position(|mu| *mu == alpha)
        .ok_or_else(|| QuiverError::IncompatibleLeading(format!("{alpha} is not a leading eigenvalue")))?;
    // Ñ_e = P⁻¹ (B_e − f_e) P for e = −1..m−1, indexed by e + 1.
    let ntilde: Vec<Matrix<CycScalar>> = (-1..m)
        .map(|e| {
            let fe = f.coeff_int(e);
            let ne = Matrix::from_fn(n, n, |i, j| {
                let b = cm.b.get(i, j).coeff_int(e);
                if i == j {
                    &b - &fe
                } else {
                    b
                }
            });
            eig.p_inv.mul(&ne).mul(&eig.p)
        })
        .collect();
    let gaps: Vec<Option<CycScalar>> = eig
        .values
        .iter()
        .enumerate()
        .map(|(l, mu)| (l != l0).then(|| (mu - &alpha).inverse()).transpose())
        .collect::<Result<_, _>>()?;

    let stages = order + m as usize + 1;
    let len = stages + 1;
    let lead = eig.p.get(0, l0).clone();
    if Ring::is_zero(&lead) {
        return Err(QuiverError::IncompatibleLeading(
            "eigenvector vanishes at the first vertex".into(),
        ));
    }
    let mut d: Vec<Vec<Affine>> = Vec::with_capacity(len);
    d.push(
        (0..n)
            .map(|l| {
                if l == l0 {
                    Affine::constant(lead.inverse().expect("nonzero"), len)
                } else {
                    Affine::zero(len)
                }
            })
            .collect(),
    );
    for k in 1..=stages {
        let mut rhs: Vec<Affine> = vec![Affine::zero(len); n];
        for j in 1..=k.min(m as usize + 1) {
            let nt = &ntilde[(m - j as i64 + 1) as usize];
            let prev = &d[k - j];
            for (l, r) in rhs.iter_mut().enumerate() {
                for (lp, x) in prev.iter().enumerate() {
                    r.add_scaled(x, &-nt.get(l, lp));
                }
            }
        }
        if k > m as usize {
            let q = k - m as usize - 1;
            let c = CycScalar::from_int(-(q as i64));
            for (l, r) in rhs.iter_mut().enumerate() {
                r.add_scaled(&d[q][l], &c);
            }
        }
        let constraint = rhs[l0].clone();
        let dk: Vec<Affine> = (0..n)
            .map(|l| match &gaps[l] {
                Some(g) => rhs[l].scaled(g),
                None => Affine::unknown(k, len),
            })
            .collect();
        d.push(dk);
        match constraint.lowest_unknown() {
            Some(u) => {
                let cu = constraint.0[u].clone();
                let mut value = constraint;
                value.0[u] = CycScalar::from_int(0);
                let value = value.scaled(&-&cu.inverse()?);
                for stage in d.iter_mut() {
                    for x in stage.iter_mut() {
                        x.substitute(u, &value);
                    }
                }
            }
            None if !Ring::is_zero(&constraint.0[0]) => {
                return Err(QuiverError::IncompatibleLeading(format!(
                    "stage {k} is inconsistent: f does not match an eigenvalue branch of B"
                )));
            }
            None => {}
        }
    }
    for (k, stage) in d.iter().enumerate().take(order + 1) {
        if !stage.iter().all(Affine::is_constant) {
            return Err(QuiverError::Resonance { stage: k });
        }
    }
    let trunc = -(order as i64 + 1);
    let phis = (0..n)
        .map(|i| {
            let terms = (0..=order).map(|k| {
                let mut acc = CycScalar::from_int(0);
                for (l, x) in d[k].iter().enumerate() {
                    acc += &(eig.p.get(i, l) * &x.0[0]);
                }
                (-(k as i64), acc)
            });
            Series::from_terms(1, terms, Some(trunc))
        })
        .collect();
    Ok(QuiverSolution {
        phis,
        order,
        root_twist,
        f,
    })
}

/// All `n` sheets of the cover over `B`: sheet `j` uses the exponential
/// factor whose leading coefficient is `β ζ_n^j`.
pub fn moduli_cover(
    cm: &CompanionMatrix,
    f: Option<&Series>,
    order: usize,
) -> Result<Vec<QuiverSolution>, QuiverError> {
    let nf = companion_normal_form(cm, f, None)?;
    cover_from_normal_form(cm, &nf, order)
}

/// [`moduli_cover`] reusing a normal form already computed for `cm`.
pub fn cover_from_normal_form(
    cm: &CompanionMatrix,
    nf: &CompanionNormalForm,
    order: usize,
) -> Result<Vec<QuiverSolution>, QuiverError> {
    let beta = cm
        .top_coefficient()
        .ok_or_else(|| QuiverError::IncompatibleLeading("B has no top coefficient".into()))?;
    let n = cm.n;
    let sheets: Vec<QuiverSolution> = (0..n)
        .into_par_iter()
        .map(|j| {
            let alpha = &beta * &CycScalar::zeta_pow(n as u32, j as i64);
            let idx = nf
                .eigenvalues
                .iter()
                .position(|e| *e == alpha)
                .ok_or_else(|| QuiverError::IncompatibleLeading(format!("no branch for {alpha}")))?;
            solve_flat_section(cm, &nf.classes[idx].representative(), order, j)
        })
        .collect::<Result<_, _>>()?;
    for (a, x) in sheets.iter().enumerate() {
        for y in &sheets[..a] {
            if x.phis == y.phis {
                return Err(QuiverError::IncompatibleLeading(format!(
                    "sheets {} and {} coincide",
                    y.root_twist, x.root_twist
                )));
            }
        }
    }
    Ok(sheets)
}

/// Which inclusion a check tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    /// `z^p φ_i ∈ V_{i+1}`.
    Shift,
    /// `A φ_i ∈ V_{σ(i)}`.
    Operator,
    /// `z^{kn+1} A z^a φ_{i−a} ∈ V_i` (string quivers).
    Stabilization { k: u32, a: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyFailure {
    /// 1-based vertex.
    pub vertex: usize,
    pub constraint: Constraint,
    /// Highest exponent of the nonzero remainder; `None` when the
    /// remainder is not visible down to `z^{-1}`.
    pub exponent: Option<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checked: usize,
    pub passed: usize,
    /// Stabilization checks skipped for lack of precision.
    pub skipped: usize,
    pub failures: Vec<VerifyFailure>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

enum Membership {
    Member,
    Outside(i64),
    Unknown,
}

/// Greedy elimination of the nonnegative part of `g` against
/// `z^a φ_{i−a}`, whose leading terms are `z^a` times a nonzero constant.
fn membership(g: &Series, phis: &[Series], i: usize) -> Membership {
    let n = phis.len();
    // The remainder is exact only above the coarsest truncation involved.
    if let Some(top) = g.degree().filter(|&t| t >= 0) {
        let worst = phis.iter().filter_map(Series::trunc).max();
        if worst.is_some_and(|w| w + top >= -1) || !g.is_visible_int(-1) {
            return Membership::Unknown;
        }
    }
    let mut g = g.clone();
    while let Some(top) = g.degree() {
        if top < 0 {
            break;
        }
        let j = (i as i64 - top).rem_euclid(n as i64) as usize;
        let basis = phis[j].shift(top, 1);
        let lead = basis.coeff_int(top);
        let Ok(inv) = lead.inverse() else {
            return Membership::Outside(top);
        };
        g = &g - &basis.scale(&(&g.coeff_int(top) * &inv));
    }
    match g.degree() {
        Some(e) => Membership::Outside(e),
        None if g.is_visible_int(-1) => Membership::Member,
        None => Membership::Unknown,
    }
}

/// `A = (1/(p z^{p−1})) ∂ + f`.
fn apply_a(phi: &Series, f: &Series, p: u32) -> Series {
    let d = phi.derivative();
    let d = if p == 1 {
        d
    } else {
        d.shift(1 - p as i64, 1).scale(&CycScalar::from_frac(1, p as i64))
    };
    &d + &(f * phi)
}

/// Checks `z^p V_i ⊆ V_{i+1}` and `A V_i ⊆ V_{σ(i)}` on the generators
/// `φ_i`, plus the stabilization `z^{kn+1} A V_i ⊆ V_i` for string quivers.
pub fn verify_quiver_solution(sol: &QuiverSolution, spec: &QuiverSpec, _order: usize) -> VerifyReport {
    let n = sol.phis.len();
    let mut report = VerifyReport::default();
    if n != spec.n {
        report.failures.push(VerifyFailure {
            vertex: 0,
            constraint: Constraint::Shift,
            exponent: None,
        });
        return report;
    }
    let p = spec.p.max(1);
    let record = |report: &mut VerifyReport, vertex: usize, constraint, m: Membership, optional: bool| {
        report.checked += 1;
        match m {
            Membership::Member => report.passed += 1,
            Membership::Unknown if optional => report.skipped += 1,
            Membership::Unknown => report.failures.push(VerifyFailure {
                vertex: vertex + 1,
                constraint,
                exponent: None,
            }),
            Membership::Outside(e) => report.failures.push(VerifyFailure {
                vertex: vertex + 1,
                constraint,
                exponent: Some(e),
            }),
        }
    };
    for i in 0..n {
        let zphi = sol.phis[i].shift(p as i64, 1);
        let m = membership(&zphi, &sol.phis, (i + 1) % n);
        record(&mut report, i, Constraint::Shift, m, false);
        let aphi = apply_a(&sol.phis[i], &spec.f, p);
        let m = membership(&aphi, &sol.phis, spec.sigma.apply(i));
        record(&mut report, i, Constraint::Operator, m, false);
    }
    if spec.kind() == QuiverKind::String && p == 1 {
        for i in 0..n {
            for k in 0..2u32 {
                for a in 0..n {
                    let j = (i as i64 - a as i64).rem_euclid(n as i64) as usize;
                    let g = apply_a(&sol.phis[j].shift(a as i64, 1), &spec.f, 1)
                        .shift((k as usize * n + 1) as i64, 1);
                    let m = membership(&g, &sol.phis, i);
                    record(&mut report, i, Constraint::Stabilization { k, a }, m, true);
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Series {
        text.parse().unwrap()
    }

    fn umm() -> CompanionMatrix {
        let b = Matrix::from_rows(vec![vec![Series::zero(), s("z^2")], vec![s("z^2"), Series::zero()]]);
        CompanionMatrix::new(Permutation::string(2), b)
    }

    #[test]
    fn umm_constant_solution() {
        let sol = solve_flat_section(&umm(), &s("z^2"), 8, 0).unwrap();
        for phi in &sol.phis {
            assert_eq!(phi.terms().count(), 1);
            assert_eq!(phi.coeff_int(0), CycScalar::from_int(1));
        }
        let spec = QuiverSpec::string(2, s("z^2"));
        let r = verify_quiver_solution(&sol, &spec, 8);
        assert!(r.ok(), "{r:?}");
        assert_eq!(r.skipped, 0);
    }

    #[test]
    fn umm_cover() {
        let sheets = moduli_cover(&umm(), Some(&s("z^2")), 8).unwrap();
        assert_eq!(sheets.len(), 2);
        assert_eq!(sheets[0].constant_vector(), vec![CycScalar::from_int(1), CycScalar::from_int(1)]);
        assert_eq!(sheets[1].constant_vector(), vec![CycScalar::from_int(1), CycScalar::from_int(-1)]);
        assert_eq!(sheets[1].f, s("-z^2"));
        for sol in &sheets {
            let r = verify_quiver_solution(sol, &sol.spec(&Permutation::string(2)), 8);
            assert!(r.ok(), "{r:?}");
        }
    }

    #[test]
    fn wrong_sheet_is_incompatible() {
        assert!(matches!(
            solve_flat_section(&umm(), &s("z^2"), 8, 1),
            Err(QuiverError::IncompatibleLeading(_))
        ));
        assert!(matches!(
            solve_flat_section(&umm(), &s("z^2 + z"), 8, 0),
            Err(QuiverError::IncompatibleLeading(_))
        ));
    }

    #[test]
    fn vacuum_point() {
        let cm = CompanionMatrix::new(Permutation::string(3), Matrix::zeros(3, 3));
        let sol = solve_flat_section(&cm, &Series::zero(), 6, 0).unwrap();
        assert!(sol.phis.iter().all(|p| *p == Series::one()));
    }

    // top slots σ(i) − j ≡ 1 form a 3-cycle since gcd(2, 3) = 1
    fn string_three() -> CompanionMatrix {
        let b = Matrix::from_rows(vec![
            vec![Series::zero(), s("z"), s("2")],
            vec![s("3"), Series::zero(), s("z")],
            vec![s("z"), s("-1"), Series::zero()],
        ]);
        CompanionMatrix::new(Permutation::string(3), b)
    }

    #[test]
    fn string_three_cover() {
        let cm = string_three();
        assert!(cm.validate().ok, "{:?}", cm.validate().violations);
        let sheets = moduli_cover(&cm, None, 10).unwrap();
        assert_eq!(sheets.len(), 3);
        let z3 = |k| CycScalar::zeta_pow(3, k);
        let consts: Vec<Vec<CycScalar>> = sheets.iter().map(|x| x.constant_vector()).collect();
        assert_eq!(consts[0], vec![z3(0), z3(0), z3(0)]);
        for c in &consts[1..] {
            assert_eq!(c[0], z3(0));
            assert_ne!(c[1], z3(0));
            assert_eq!(&c[1] * &c[1], c[2]);
        }
        for sol in &sheets {
            let r = verify_quiver_solution(sol, &sol.spec(&Permutation::string(3)), 10);
            assert!(r.ok(), "{r:?}");
            assert!(r.passed > 6);
        }
    }

    #[test]
    fn corruption_is_reported() {
        let cm = string_three();
        let mut sol = moduli_cover(&cm, None, 8).unwrap().remove(0);
        let spec = sol.spec(&cm.sigma);
        let phi = &sol.phis[1];
        let bumped = phi + &Series::monomial(CycScalar::from_int(1), -3);
        sol.phis[1] = bumped;
        let r = verify_quiver_solution(&sol, &spec, 8);
        assert!(!r.ok());
        assert!(r.failures.iter().any(|x| x.vertex == 2 && x.exponent.is_some()));
    }
}
