//! The quiver spec file: a TOML document with keys `n`, `sigma` (cycle
//! list), `p`, `f` (list of `[exponent, coefficient]`) and an optional
//! row-major `B` of polynomial strings.
//!
//! ```toml
//! n = 2
//! sigma = [[1, 2]]
//! f = [[2, "1"]]
//! B = [["0", "z^2"], ["z^2", "0"]]
//! ```

use std::ops::Range;

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use super::spec::{CompanionMatrix, Permutation, QuiverSpec};
use crate::coeffs::CycScalar;
use crate::linalg::Matrix;
use crate::series::Series;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct SpecFileError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuiverFile {
    pub spec: QuiverSpec,
    pub companion: Option<CompanionMatrix>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Coeff {
    Int(i64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    n: Spanned<usize>,
    sigma: Spanned<Vec<Vec<usize>>>,
    p: Option<Spanned<u32>>,
    f: Spanned<Vec<(i64, Spanned<Coeff>)>>,
    #[serde(rename = "B")]
    b: Option<Spanned<Vec<SpannedRow>>>,
}

type SpannedRow = Spanned<Vec<Spanned<String>>>;

fn locate(text: &str, span: Option<Range<usize>>, message: impl Into<String>) -> SpecFileError {
    let offset = span.map_or(0, |r| r.start).min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    SpecFileError {
        line,
        column,
        message: message.into(),
    }
}

pub fn parse_quiver_file(text: &str) -> Result<QuiverFile, SpecFileError> {
    let raw: Raw = toml::from_str(text).map_err(|e| locate(text, e.span(), e.message()))?;
    let n = *raw.n.get_ref();
    if n == 0 {
        return Err(locate(text, Some(raw.n.span()), "n must be positive"));
    }
    let sigma = Permutation::from_cycles(n, raw.sigma.get_ref())
        .map_err(|e| locate(text, Some(raw.sigma.span()), e.to_string()))?;
    let p = match &raw.p {
        Some(p) if *p.get_ref() == 0 => return Err(locate(text, Some(p.span()), "p must be positive")),
        Some(p) => *p.get_ref(),
        None => 1,
    };
    let mut terms = Vec::new();
    for (k, c) in raw.f.get_ref() {
        let value = match c.get_ref() {
            Coeff::Int(v) => CycScalar::from_int(*v),
            Coeff::Text(t) => t
                .parse::<CycScalar>()
                .map_err(|e| locate(text, Some(c.span()), format!("coefficient {t:?}: {e}")))?,
        };
        terms.push((*k, value));
    }
    let f = Series::polynomial(&terms);
    let companion = match &raw.b {
        None => None,
        Some(rows) => {
            if rows.get_ref().len() != n {
                return Err(locate(
                    text,
                    Some(rows.span()),
                    format!("B has {} rows, expected {n}", rows.get_ref().len()),
                ));
            }
            let mut parsed = Vec::with_capacity(n);
            for row in rows.get_ref() {
                if row.get_ref().len() != n {
                    return Err(locate(
                        text,
                        Some(row.span()),
                        format!("row has {} entries, expected {n}", row.get_ref().len()),
                    ));
                }
                let mut out = Vec::with_capacity(n);
                for e in row.get_ref() {
                    let s: Series = e
                        .get_ref()
                        .parse()
                        .map_err(|err| locate(text, Some(e.span()), format!("entry {:?}: {err}", e.get_ref())))?;
                    if !s.is_polynomial() {
                        return Err(locate(
                            text,
                            Some(e.span()),
                            format!("entry {:?} is not a polynomial", e.get_ref()),
                        ));
                    }
                    out.push(s);
                }
                parsed.push(out);
            }
            Some(CompanionMatrix::new(sigma.clone(), Matrix::from_rows(parsed)))
        }
    };
    Ok(QuiverFile {
        spec: QuiverSpec { n, sigma, f, p },
        companion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixtures_parse_and_validate() {
        for text in [
            include_str!("../../fixtures/paper-example.quiver"),
            include_str!("../../fixtures/umm-z2.quiver"),
            include_str!("../../fixtures/string-n3.quiver"),
        ] {
            let q = parse_quiver_file(text).unwrap();
            let cm = q.companion.expect("fixture carries B");
            assert_eq!(cm.n, q.spec.n);
            assert!(cm.validate().ok);
        }
    }

    #[test]
    fn parses_umm() {
        let q = parse_quiver_file(
            "n = 2\nsigma = [[1, 2]]\nf = [[2, \"1\"]]\nB = [[\"0\", \"z^2\"], [\"z^2\", \"0\"]]\n",
        )
        .unwrap();
        assert_eq!(q.spec.n, 2);
        assert!(q.spec.sigma.is_string());
        assert_eq!(q.spec.f, "z^2".parse().unwrap());
        assert_eq!(q.spec.p, 1);
        let cm = q.companion.unwrap();
        assert_eq!(cm.s, 2);
        assert!(cm.validate().ok);
    }

    #[test]
    fn integer_and_rational_coefficients() {
        let q = parse_quiver_file("n = 1\nsigma = []\np = 2\nf = [[1, \"26836/625\"], [0, -3]]\n").unwrap();
        assert_eq!(q.spec.f, "26836/625*z - 3".parse().unwrap());
        assert_eq!(q.spec.p, 2);
        assert!(q.companion.is_none());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_quiver_file("n = 2\nsigma = [[1, 3]]\nf = [[1, \"1\"]]\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_quiver_file("n = 2\nsigma = [[1, 2]]\nf = [[1, \"1/\"]]\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 10));
        let e = parse_quiver_file("n = 2\nsigma = [[1, 2]]\nf = [[1, \"1\"]]\nB = [[\"z\", \"1\"]]\n")
            .unwrap_err();
        assert_eq!(e.line, 4);
        let e = parse_quiver_file("n = 2\nsigma = [[1, 2]]\nf = [[1, \"1\"]]\nq = 3\n").unwrap_err();
        assert_eq!(e.line, 4);
        assert!(parse_quiver_file("n = 2\nsigma = [[1, 2]]\n").is_err());
    }
}
