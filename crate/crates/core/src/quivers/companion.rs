use serde::{Deserialize, Serialize};

use super::spec::{CompanionMatrix, Permutation};
use super::QuiverError;
use crate::coeffs::CycScalar;
use crate::connections::{class_multiset_equal, one_dim_class, ClassReport, Connection, OneDimClass};
use crate::levelt_turrittin::{lt_split, verify_split};
use crate::linalg::Ring;
use crate::series::Series;

/// `∂ − B`, stored as `M = −B`.
pub fn companion_connection(cm: &CompanionMatrix) -> Result<Connection, QuiverError> {
    let v = cm.validate();
    if !v.ok {
        return Err(QuiverError::InvalidCompanion(v.violations));
    }
    Ok(Connection::new(cm.b.neg())?)
}

/// The dual `∂ + Bᵀ` of the companion connection. Its exponential factors
/// are the eigenvalue branches of `B`, so `f` itself appears among them.
pub fn module_connection(cm: &CompanionMatrix) -> Result<Connection, QuiverError> {
    let v = cm.validate();
    if !v.ok {
        return Err(QuiverError::InvalidCompanion(v.violations));
    }
    Ok(Connection::new(cm.b.transpose())?)
}

/// `[class(ζ_n^{-ki} f(ζ_n^i z)) : i = 0..n]`.
pub fn k_shift_classes(f: &Series, n: usize, k: i64) -> Result<Vec<OneDimClass>, QuiverError> {
    (0..n as i64)
        .map(|i| {
            let lambda = f
                .scale_substitute(&CycScalar::zeta_pow(n as u32, i))?
                .scale(&CycScalar::zeta_pow(n as u32, -k * i));
            Ok(one_dim_class(&lambda)?)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct CompanionNormalForm {
    pub classes: Vec<OneDimClass>,
    /// Leading eigenvalues of `B`, in the order of `classes`.
    pub eigenvalues: Vec<CycScalar>,
    /// The exponential factor on the branch of the top coefficient, written
    /// as `polypart + residue/z`.
    pub f: Series,
    /// Residue of the recovered factor; nonzero means `f` is not a polynomial.
    pub residue: CycScalar,
    /// `k` with `σ(i) − i ≡ k`, when constant.
    pub shift: Option<i64>,
    /// Whether the classes equal the `k`-shift prediction built from `f`.
    pub shift_law: Option<bool>,
    pub depth: usize,
}

impl CompanionNormalForm {
    pub fn contains(&self, f: &Series) -> bool {
        one_dim_class(f).is_ok_and(|c| self.classes.contains(&c))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompanionReport {
    pub classes: Vec<ClassReport>,
    pub f: String,
    pub residue: String,
    pub shift: Option<i64>,
    pub shift_law: Option<bool>,
}

impl From<&CompanionNormalForm> for CompanionReport {
    fn from(nf: &CompanionNormalForm) -> Self {
        CompanionReport {
            classes: nf.classes.iter().map(ClassReport::from).collect(),
            f: nf.f.to_string(),
            residue: nf.residue.to_string(),
            shift: nf.shift,
            shift_law: nf.shift_law,
        }
    }
}

/// Levelt–Turrittin normal form of the companion connection, certified by
/// recomputing the gauge action.
///
/// When `f` is supplied its class must occur; otherwise `f` is recovered
/// from the branch whose leading eigenvalue is the top coefficient of `B`.
pub fn companion_normal_form(
    cm: &CompanionMatrix,
    f: Option<&Series>,
    depth: Option<usize>,
) -> Result<CompanionNormalForm, QuiverError> {
    if !cm.sigma.is_n_cycle() {
        return Err(QuiverError::NotNCycle(cm.sigma.to_string()));
    }
    let conn = module_connection(cm)?;
    let split = lt_split(&conn, depth)?;
    if !verify_split(&conn, &split) {
        return Err(QuiverError::SplitNotCertified);
    }
    let beta = cm
        .top_coefficient()
        .ok_or_else(|| QuiverError::IncompatibleLeading("B has no top coefficient".into()))?;
    let idx = split
        .eigenvalues
        .iter()
        .position(|e| *e == beta)
        .ok_or_else(|| {
            QuiverError::IncompatibleLeading(format!("no leading eigenvalue equals {beta}"))
        })?;
    let lambda0 = &split.classes[idx];
    if let Some(f) = f {
        let supplied = one_dim_class(f)?;
        if !split.classes.contains(&supplied) {
            return Err(QuiverError::InconsistentPotential {
                supplied: f.to_string(),
                classes: classes_text(&split.classes),
            });
        }
    }
    let recovered = lambda0.representative();
    let shift = cm.sigma.constant_shift();
    let shift_law = match shift {
        Some(k) => Some(class_multiset_equal(
            &split.classes,
            &k_shift_classes(&recovered, cm.n, k)?,
        )),
        None => None,
    };
    Ok(CompanionNormalForm {
        classes: split.classes.clone(),
        eigenvalues: split.eigenvalues.clone(),
        f: recovered,
        residue: lambda0.residue().clone(),
        shift,
        shift_law,
        depth: split.depth,
    })
}

fn classes_text(classes: &[OneDimClass]) -> String {
    let parts: Vec<String> = classes.iter().map(|c| c.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// The leading-term law: leading terms of the classes are `ζ_n^i·β·z^s`.
pub fn leading_terms_match(nf: &CompanionNormalForm, sigma: &Permutation, s: u32, beta: &CycScalar) -> bool {
    let n = sigma.n();
    let mut expected: Vec<CycScalar> = (0..n as i64)
        .map(|i| beta * &CycScalar::zeta_pow(n as u32, i))
        .collect();
    for c in &nf.classes {
        let lead = c.polypart().coeff_int(s as i64);
        if Ring::is_zero(&lead) || c.polypart().degree() != Some(s as i64) {
            return false;
        }
        match expected.iter().position(|e| *e == lead) {
            Some(p) => {
                expected.swap_remove(p);
            }
            None => return false,
        }
    }
    expected.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn s(text: &str) -> Series {
        text.parse().unwrap()
    }

    fn five_vertex_matrix() -> CompanionMatrix {
        let rows = [
            ["-3*z^3", "-6*z^2", "0", "z^5", "-5*z^4"],
            ["2*z^4", "-2*z^3", "2*z^2", "2*z", "z^5"],
            ["z^5", "-3*z^4", "-4*z^3", "-3*z^2", "-z"],
            ["-3*z", "z^5", "-3*z^4", "3*z^3", "z^2"],
            ["-5*z^2", "0", "z^5", "-5*z^4", "4*z^3"],
        ];
        let b = Matrix::from_rows(rows.iter().map(|r| r.iter().map(|e| s(e)).collect()).collect());
        let sigma = Permutation::from_cycles(5, &[vec![1, 4, 2, 5, 3]]).unwrap();
        CompanionMatrix::new(sigma, b)
    }

    fn five_vertex_f() -> Series {
        s("z^5 - 14/5*z^4 - 2/5*z^3 + 1599/125*z^2 + 26836/625*z")
    }

    #[test]
    fn paper_example_is_valid() {
        let cm = five_vertex_matrix();
        assert_eq!(cm.s, 5);
        let v = cm.validate();
        assert!(v.ok, "{:?}", v.violations);
        assert_eq!(companion_connection(&cm).unwrap().dim(), 5);
    }

    #[test]
    fn paper_example_normal_form() {
        let cm = five_vertex_matrix();
        let nf = companion_normal_form(&cm, None, None).unwrap();
        // Constant and residue frozen from a 300-digit numerical eigenvalue
        // expansion of B(z) at z = 10^12 and 10^13.
        let constant = s("-2477841/15625");
        let residue = CycScalar::from_frac(-107885958, 78125);
        assert_eq!(nf.f.part_from(1), five_vertex_f());
        assert_eq!(nf.f.part_from(0), &five_vertex_f() + &constant);
        assert_eq!(nf.residue, residue);
        assert_eq!(nf.shift, Some(3));
        assert_eq!(nf.shift_law, Some(true));
        // ζ^{-3i} = ζ^{2i}
        let twisted: Vec<OneDimClass> = (0..5)
            .map(|i| {
                let l = nf
                    .f
                    .scale_substitute(&CycScalar::zeta_pow(5, i))
                    .unwrap()
                    .scale(&CycScalar::zeta_pow(5, 2 * i));
                one_dim_class(&l).unwrap()
            })
            .collect();
        assert!(class_multiset_equal(&nf.classes, &twisted));
        assert!(leading_terms_match(&nf, &cm.sigma, 5, &CycScalar::from_int(1)));
        // The displayed polynomial alone is not an exponential factor.
        assert!(!nf.contains(&five_vertex_f()));
        assert!(matches!(
            companion_normal_form(&cm, Some(&five_vertex_f()), None),
            Err(QuiverError::InconsistentPotential { .. })
        ));
    }

    #[test]
    fn wrong_potential_is_rejected() {
        let cm = five_vertex_matrix();
        let bad = s("z^5 + z");
        assert!(matches!(
            companion_normal_form(&cm, Some(&bad), None),
            Err(QuiverError::InconsistentPotential { .. })
        ));
    }

    #[test]
    fn umm_antidiagonal() {
        let sigma = Permutation::string(2);
        let b = Matrix::from_rows(vec![vec![Series::zero(), s("z^2")], vec![s("z^2"), Series::zero()]]);
        let cm = CompanionMatrix::new(sigma, b);
        assert_eq!(companion_connection(&cm).unwrap().dim(), 2);
        let nf = companion_normal_form(&cm, None, None).unwrap();
        assert_eq!(nf.f, s("z^2"));
        assert_eq!(nf.shift_law, Some(true));
        assert!(class_multiset_equal(
            &nf.classes,
            &[
                OneDimClass::new(s("z^2"), CycScalar::from_int(0)),
                OneDimClass::new(s("-z^2"), CycScalar::from_int(0)),
            ]
        ));
    }

    #[test]
    fn rank_one() {
        let cm = CompanionMatrix::new(Permutation::identity(1), Matrix::from_rows(vec![vec![s("z^2 + 3*z")]]));
        let conn = companion_connection(&cm).unwrap();
        assert_eq!(conn.matrix().get(0, 0), &s("-z^2 - 3*z"));
        let nf = companion_normal_form(&cm, None, None).unwrap();
        assert_eq!(nf.classes, vec![OneDimClass::new(s("z^2 + 3*z"), CycScalar::from_int(0))]);
    }

    #[test]
    fn dual_sign_negates_classes() {
        let cm = five_vertex_matrix();
        let nf = companion_normal_form(&cm, None, None).unwrap();
        let comp = companion_connection(&cm).unwrap();
        let minus = lt_split(&comp, None).unwrap();
        let negated: Vec<OneDimClass> = nf
            .classes
            .iter()
            .map(|c| OneDimClass::new(-c.polypart(), -c.residue()))
            .collect();
        assert!(class_multiset_equal(&minus.classes, &negated));
    }

    #[test]
    fn not_n_cycle() {
        let sigma = Permutation::from_cycles(4, &[vec![1, 2], vec![3, 4]]).unwrap();
        let cm = CompanionMatrix::new(sigma, Matrix::identity(4));
        assert!(matches!(
            companion_normal_form(&cm, None, None),
            Err(QuiverError::NotNCycle(_))
        ));
    }
}
