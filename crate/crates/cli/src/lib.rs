//! Commands behind the `quiverdm` binary. Each command returns a [`Report`]
//! whose verdict drives the exit code; rendering is separate so the JSON
//! form mirrors the report field for field.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use quiver_dmod::coeffs::CycScalar;
use quiver_dmod::connections::{class_multiset_equal, one_dim_class, ClassReport, OneDimClass};
use quiver_dmod::diffops::{ks_commutator_identity, string_equation, DiffOp};
use quiver_dmod::fourier::{gh_consistency, lft_infty_infty, LftInput, LftReport};
use quiver_dmod::quivers::{
    classical_limit_curve, companion_normal_form, congruence_pattern, cover_from_normal_form,
    ks_normal_form, parse_quiver_file, random_instance, verify_quiver_solution, CompanionMatrix,
    CompanionNormalForm, CompanionReport, QuiverError, QuiverFile, QuiverKind, QuiverSpec,
    SolutionReport, VerifyReport,
};
use quiver_dmod::series::Series;
use quiver_dmod::virasoro::{string_identity_check, witt_report, IdentityReport, VirasoroError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Spec files shipped with the binary, addressed as `builtin:<name>`.
pub const FIXTURES: [(&str, &str); 3] = [
    ("paper-example", include_str!("../../core/fixtures/paper-example.quiver")),
    ("umm-z2", include_str!("../../core/fixtures/umm-z2.quiver")),
    ("string-n3", include_str!("../../core/fixtures/string-n3.quiver")),
];

pub const MIN_ORDER: usize = 4;
pub const DEFAULT_ORDER: usize = 12;

/// Input problems map to exit code 2; failed checks map to 1.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

impl From<QuiverError> for InputError {
    fn from(e: QuiverError) -> Self {
        InputError(e.to_string())
    }
}

impl From<VirasoroError> for InputError {
    fn from(e: VirasoroError) -> Self {
        InputError(e.to_string())
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub order: usize,
    pub depth: Option<usize>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(order: usize, depth: Option<usize>, seed: u64) -> Result<Self, InputError> {
        if order < MIN_ORDER {
            return Err(InputError(format!("--order must be at least {MIN_ORDER}, got {order}")));
        }
        Ok(RunConfig { order, depth, seed })
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            order: DEFAULT_ORDER,
            depth: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    pub body: Body,
}

impl Report {
    fn new(command: &str, checks: Vec<Check>, body: Body) -> Self {
        let verdict = if checks.iter().all(|c| c.pass) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Report {
            command: command.into(),
            verdict,
            checks,
            body,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Body {
    NormalForm(NormalFormReport),
    Solve(SolveReport),
    Curve(CurveReport),
    Fourier(FourierReport),
    Virasoro(VirasoroReport),
    PaperExample(PaperExampleReport),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuiverSummary {
    pub n: usize,
    pub sigma: String,
    pub kind: String,
    pub p: u32,
    pub f: String,
}

impl From<&QuiverSpec> for QuiverSummary {
    fn from(s: &QuiverSpec) -> Self {
        QuiverSummary {
            n: s.n,
            sigma: s.sigma.to_string(),
            kind: match s.kind() {
                QuiverKind::String => "string".into(),
                QuiverKind::Permutation => "permutation".into(),
            },
            p: s.p,
            f: s.f.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalFormReport {
    pub quiver: QuiverSummary,
    /// Where `B` came from: `file`, `random (seed S)`, or absent.
    pub b_source: Option<String>,
    pub b: Option<Vec<Vec<String>>>,
    pub ks_classes: Option<Vec<ClassReport>>,
    pub companion: Option<CompanionReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub quiver: QuiverSummary,
    pub b_source: String,
    pub order: usize,
    pub sheets: Vec<SolutionReport>,
    pub verification: Vec<VerifyReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveReport {
    pub quiver: QuiverSummary,
    pub curve: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourierReport {
    pub quiver: QuiverSummary,
    pub transforms: Vec<LftReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirasoroReport {
    pub identities: Vec<IdentityReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperExampleReport {
    pub congruence: Vec<Vec<usize>>,
    pub normal_form: NormalFormReport,
    pub curves: BTreeMap<String, String>,
    pub sheets_verified: BTreeMap<String, usize>,
}

/// Loads a spec file from disk, or a bundled one via `builtin:<name>`.
pub fn load_spec(source: &str) -> Result<(String, QuiverFile), InputError> {
    let text = match source.strip_prefix("builtin:") {
        Some(name) => FIXTURES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| t.to_string())
            .ok_or_else(|| {
                let names: Vec<&str> = FIXTURES.iter().map(|(n, _)| *n).collect();
                InputError(format!("unknown bundled spec `{name}` (have {})", names.join(", ")))
            })?,
        None => std::fs::read_to_string(source).map_err(|e| InputError(format!("{source}: {e}")))?,
    };
    let file = parse_quiver_file(&text).map_err(|e| InputError(format!("{source}: {e}")))?;
    if !file.spec.sigma.is_n_cycle() {
        return Err(InputError(format!(
            "{source}: sigma = {} is not an n-cycle for n = {}",
            file.spec.sigma, file.spec.n
        )));
    }
    Ok((source.to_string(), file))
}

fn bundled(name: &str) -> QuiverFile {
    load_spec(&format!("builtin:{name}")).expect("bundled spec parses").1
}

fn b_text(cm: &CompanionMatrix) -> Vec<Vec<String>> {
    (0..cm.n)
        .map(|i| (0..cm.n).map(|j| cm.b.get(i, j).to_string()).collect())
        .collect()
}

/// The companion matrix from the file, or a seeded random one.
fn companion_for(file: &QuiverFile, random_b: bool, cfg: &RunConfig) -> Result<Option<(CompanionMatrix, String)>, InputError> {
    if random_b {
        let cm = random_instance(&file.spec.sigma, cfg.seed)?;
        return Ok(Some((cm, format!("random (seed {})", cfg.seed))));
    }
    let Some(cm) = file.companion.clone() else {
        return Ok(None);
    };
    let v = cm.validate();
    if !v.ok {
        let parts: Vec<String> = v.violations.iter().map(|x| x.to_string()).collect();
        return Err(InputError(format!("B violates the companion conditions: {}", parts.join("; "))));
    }
    Ok(Some((cm, "file".into())))
}

fn ks_applies(spec: &QuiverSpec) -> bool {
    spec.kind() == QuiverKind::String && spec.p == 1
}

fn classes_report(classes: &[OneDimClass]) -> Vec<ClassReport> {
    quiver_dmod::connections::sorted_classes(classes)
        .iter()
        .map(ClassReport::from)
        .collect()
}

type NormalFormParts = (Vec<Check>, NormalFormReport, Option<(CompanionMatrix, CompanionNormalForm)>);

fn normal_form_parts(
    file: &QuiverFile,
    random_b: bool,
    cfg: &RunConfig,
) -> Result<NormalFormParts, InputError> {
    let spec = &file.spec;
    let mut checks = Vec::new();
    let ks = if ks_applies(spec) {
        Some(ks_normal_form(spec)?)
    } else {
        None
    };
    let companion = companion_for(file, random_b, cfg)?;
    if ks.is_none() && companion.is_none() {
        return Err(InputError(
            "a permutation quiver needs B in the spec file or --random-b".into(),
        ));
    }
    let mut report = NormalFormReport {
        quiver: spec.into(),
        b_source: None,
        b: None,
        ks_classes: ks.as_deref().map(classes_report),
        companion: None,
    };
    let mut computed = None;
    if let Some((cm, source)) = companion {
        let nf = companion_normal_form(&cm, None, cfg.depth)?;
        checks.push(Check::new("split-certified", true, format!("depth {}", nf.depth)));
        // With a generated B the file's f plays no role; the recovered one does.
        let f = if random_b { nf.f.part_from(0) } else { spec.f.clone() };
        let supplied = one_dim_class(&f).map_err(|e| InputError(e.to_string()))?;
        let found = nf.classes.contains(&supplied);
        checks.push(Check::new(
            "f-is-exponential-factor",
            found,
            if found {
                format!("class of {f} occurs")
            } else {
                format!("class of {f} is absent; the factor on the top branch is {}", nf.f)
            },
        ));
        if let Some(law) = nf.shift_law {
            checks.push(Check::new(
                "k-shift-law",
                law,
                format!("k = {}", nf.shift.unwrap_or_default()),
            ));
        }
        if ks_applies(spec) {
            let ks_f = ks_normal_form(&QuiverSpec::new(spec.sigma.clone(), f.clone()))?;
            let equal = class_multiset_equal(&nf.classes, &ks_f);
            checks.push(Check::new("companion-equals-ks", equal, format!("f = {f}")));
        }
        if random_b && ks_applies(spec) {
            report.quiver.f = f.to_string();
            report.ks_classes = Some(classes_report(&ks_normal_form(&QuiverSpec::new(spec.sigma.clone(), f.clone()))?));
        }
        report.b_source = Some(source);
        report.b = Some(b_text(&cm));
        report.companion = Some(CompanionReport::from(&nf));
        computed = Some((cm, nf));
    } else {
        checks.push(Check::new("ks-normal-form", true, format!("{} classes", spec.n)));
    }
    Ok((checks, report, computed))
}

pub fn cmd_normal_form(source: &str, random_b: bool, cfg: &RunConfig) -> Result<Report, InputError> {
    let (_, file) = load_spec(source)?;
    let (checks, report, _) = normal_form_parts(&file, random_b, cfg)?;
    Ok(Report::new("normal-form", checks, Body::NormalForm(report)))
}

pub fn cmd_solve(source: &str, random_b: bool, cfg: &RunConfig) -> Result<Report, InputError> {
    let (_, file) = load_spec(source)?;
    let (cm, b_source) = companion_for(&file, random_b, cfg)?
        .ok_or_else(|| InputError("solve needs B in the spec file or --random-b".into()))?;
    let nf = companion_normal_form(&cm, None, cfg.depth)?;
    let sheets = cover_from_normal_form(&cm, &nf, cfg.order)?;
    let verification: Vec<VerifyReport> = sheets
        .par_iter()
        .map(|s| verify_quiver_solution(s, &s.spec(&cm.sigma), cfg.order))
        .collect();
    let mut checks = vec![Check::new(
        "sheet-count",
        sheets.len() == cm.n,
        format!("{} sheets for n = {}", sheets.len(), cm.n),
    )];
    for (s, v) in sheets.iter().zip(&verification) {
        checks.push(Check::new(
            &format!("sheet-{}", s.root_twist),
            v.ok(),
            format!(
                "{} checks, {} passed, {} skipped, {} failed",
                v.checked,
                v.passed,
                v.skipped,
                v.failures.len()
            ),
        ));
    }
    let report = SolveReport {
        quiver: (&file.spec).into(),
        b_source,
        order: cfg.order,
        sheets: sheets.iter().map(SolutionReport::from).collect(),
        verification,
    };
    Ok(Report::new("solve", checks, Body::Solve(report)))
}

pub fn cmd_curve(source: &str) -> Result<Report, InputError> {
    let (_, file) = load_spec(source)?;
    let curve = classical_limit_curve(&file.spec)?;
    let checks = vec![Check::new("rational-coefficients", true, curve.to_string())];
    let report = CurveReport {
        quiver: (&file.spec).into(),
        curve: curve.to_string(),
    };
    Ok(Report::new("curve", checks, Body::Curve(report)))
}

pub fn cmd_fourier(source: &str, cfg: &RunConfig) -> Result<Report, InputError> {
    let (_, file) = load_spec(source)?;
    let spec = &file.spec;
    let f = spec.f.clone();
    let n = spec.n as u32;
    let mut transforms = Vec::new();
    let mut checks = Vec::new();
    for i in 0..n as i64 {
        let input = LftInput::new(f.clone(), i, n).map_err(|e| InputError(e.to_string()))?;
        let out = lft_infty_infty(&input, cfg.order).map_err(|e| InputError(e.to_string()))?;
        transforms.push(LftReport::new(&input, &out));
        let ok = gh_consistency(&input, cfg.order).map_err(|e| InputError(e.to_string()))?;
        checks.push(Check::new(&format!("gh-consistency-{i}"), ok, out.class.to_string()));
    }
    let report = FourierReport {
        quiver: spec.into(),
        transforms,
    };
    Ok(Report::new("fourier", checks, Body::Fourier(report)))
}

#[derive(Clone, Debug)]
pub struct VirasoroParams {
    pub m: i64,
    pub n: i64,
    pub cutoff: u32,
    pub guard: u32,
    pub degree: u32,
    /// `(n_quiver, k)` for the `L_{nk} = [L_{nk}, L_0]/nk` check.
    pub string: Option<(u32, u32)>,
}

pub fn cmd_virasoro(p: &VirasoroParams) -> Result<Report, InputError> {
    let mut identities = vec![witt_report(p.m, p.n, p.cutoff, p.degree, p.guard)?];
    let mut checks = Vec::new();
    if p.m + p.n == 0 {
        checks.push(Check::new(
            "witt",
            true,
            format!(
                "central case m + n = 0 is not asserted; residual {}",
                identities[0].residual.clone().unwrap_or_default()
            ),
        ));
    } else {
        checks.push(Check::new(
            "witt",
            identities[0].pass,
            format!("[L_{}, L_{}] = {} L_{}", p.m, p.n, p.m - p.n, p.m + p.n),
        ));
    }
    if let Some((nq, k)) = p.string {
        let pass = string_identity_check(nq, k, p.cutoff, p.degree, p.guard)?;
        identities.push(IdentityReport {
            identity: "L_{nk} = [L_{nk}, L_0]/nk".into(),
            params: BTreeMap::from([("n".to_string(), nq as i64), ("k".to_string(), k as i64)]),
            cutoff: p.cutoff,
            degree: p.degree,
            guard: p.guard,
            pass,
            residual: None,
            discrepancy: None,
        });
        checks.push(Check::new("string-identity", pass, format!("n = {nq}, k = {k}")));
    }
    Ok(Report::new("virasoro", checks, Body::Virasoro(VirasoroReport { identities })))
}

fn string_sweep() -> Check {
    let mut count = 0;
    for p in 1..=4u32 {
        for q in (p as i64 + 1)..=(p as i64 + 4) {
            match string_equation(p, q) {
                Ok(op) if op == DiffOp::one() => count += 1,
                Ok(op) => return Check::new("string-equation", false, format!("[A^({p},{q}), z^{p}] = {op}")),
                Err(e) => return Check::new("string-equation", false, e.to_string()),
            }
        }
    }
    for p in 1..=3u32 {
        for q in (p as i64 + 1)..=5 {
            for i in 0..=3 {
                match ks_commutator_identity(p, q, i) {
                    Ok(op) if op.is_zero() => count += 1,
                    Ok(op) => return Check::new("string-equation", false, format!("p={p} q={q} i={i}: {op}")),
                    Err(e) => return Check::new("string-equation", false, e.to_string()),
                }
            }
        }
    }
    Check::new("string-equation", true, format!("{count} identities exact"))
}

/// The bundled examples end to end.
pub fn cmd_verify_paper_example(cfg: &RunConfig) -> Result<Report, InputError> {
    let mut checks = Vec::new();
    let five = bundled("paper-example");
    let congruence = congruence_pattern(five.spec.n, &five.spec.sigma);
    let expected = vec![
        vec![3, 2, 1, 5, 4],
        vec![4, 3, 2, 1, 5],
        vec![5, 4, 3, 2, 1],
        vec![1, 5, 4, 3, 2],
        vec![2, 1, 5, 4, 3],
    ];
    checks.push(Check::new("congruence-matrix", congruence == expected, format!("{congruence:?}")));

    let (nf_checks, normal_form, computed) = normal_form_parts(&five, false, cfg)?;
    let (cm, nf) = computed.expect("five-vertex spec carries B");
    let twisted: Vec<OneDimClass> = (0..5)
        .map(|i| {
            let l = five
                .spec
                .f
                .scale_substitute(&CycScalar::zeta_pow(5, i))
                .map(|l| l.scale(&CycScalar::zeta_pow(5, 2 * i)))
                .map_err(|e| InputError(e.to_string()))?;
            one_dim_class(&l).map_err(|e| InputError(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let equal = class_multiset_equal(&nf.classes, &twisted);
    checks.push(Check::new(
        "five-vertex-normal-form",
        equal,
        if equal {
            "classes are zeta^(2i) f(zeta^i z)".to_string()
        } else {
            format!(
                "classes are zeta^(2i) g(zeta^i z) with g = {} (residue {}), not the displayed f",
                nf.f, nf.residue
            )
        },
    ));
    checks.extend(nf_checks.into_iter().map(|mut c| {
        c.name = format!("five-vertex-{}", c.name);
        c
    }));
    checks.push(string_sweep());

    let mut curves = BTreeMap::new();
    for name in ["umm-z2", "string-n3"] {
        let q = bundled(name);
        match classical_limit_curve(&q.spec) {
            Ok(c) => {
                curves.insert(name.to_string(), c.to_string());
                checks.push(Check::new(&format!("curve-{name}"), true, c.to_string()));
            }
            Err(e) => checks.push(Check::new(&format!("curve-{name}"), false, e.to_string())),
        }
    }

    let mut sheets_verified = BTreeMap::new();
    let mut covers = vec![("paper-example".to_string(), cm, nf)];
    for name in ["umm-z2", "string-n3"] {
        let q = bundled(name);
        let cm = q.companion.expect("bundled spec carries B");
        let nf = companion_normal_form(&cm, None, cfg.depth)?;
        covers.push((name.to_string(), cm, nf));
    }
    for (name, cm, nf) in &covers {
        let outcome = cover_from_normal_form(cm, nf, 10).map(|sheets| {
            let good = sheets
                .iter()
                .filter(|s| verify_quiver_solution(s, &s.spec(&cm.sigma), 10).ok())
                .count();
            (sheets.len(), good)
        });
        match outcome {
            Ok((total, good)) => {
                sheets_verified.insert(name.clone(), good);
                checks.push(Check::new(
                    &format!("sheets-{name}"),
                    total == cm.n && good == total,
                    format!("{good} of {total} sheets verified at order 10"),
                ));
            }
            Err(e) => checks.push(Check::new(&format!("sheets-{name}"), false, e.to_string())),
        }
    }
    let report = PaperExampleReport {
        congruence,
        normal_form,
        curves,
        sheets_verified,
    };
    Ok(Report::new("verify-paper-example", checks, Body::PaperExample(report)))
}

fn render_classes(out: &mut String, title: &str, classes: &[ClassReport]) {
    let _ = writeln!(out, "{title}:");
    for c in classes {
        let _ = writeln!(out, "  {}  (residue {})", c.polypart, c.residue);
    }
}

fn render_normal_form(out: &mut String, r: &NormalFormReport) {
    let q = &r.quiver;
    let _ = writeln!(out, "quiver: n = {}, sigma = {} ({}), p = {}, f = {}", q.n, q.sigma, q.kind, q.p, q.f);
    if let Some(ks) = &r.ks_classes {
        render_classes(out, "KS classes", ks);
    }
    if let (Some(src), Some(c)) = (&r.b_source, &r.companion) {
        let _ = writeln!(out, "B ({src}):");
        for row in r.b.iter().flatten() {
            let _ = writeln!(out, "  [{}]", row.join(", "));
        }
        render_classes(out, "companion classes", &c.classes);
        let _ = writeln!(out, "exponential factor on the top branch: {} (residue {})", c.f, c.residue);
    }
}

/// Human-readable form of a report.
pub fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", r.command);
    match &r.body {
        Body::NormalForm(nf) => render_normal_form(&mut out, nf),
        Body::Solve(s) => {
            let q = &s.quiver;
            let _ = writeln!(out, "quiver: n = {}, sigma = {}, B from {}", q.n, q.sigma, s.b_source);
            for sheet in &s.sheets {
                let _ = writeln!(out, "sheet {} (f = {}):", sheet.root_twist, sheet.f);
                for (i, phi) in sheet.phis.iter().enumerate() {
                    let _ = writeln!(out, "  phi_{} = {}", i + 1, phi);
                }
            }
        }
        Body::Curve(c) => {
            let _ = writeln!(out, "quiver: n = {}, f = {}", c.quiver.n, c.quiver.f);
            let _ = writeln!(out, "curve: {}", c.curve);
        }
        Body::Fourier(fr) => {
            let _ = writeln!(out, "f = {}, n = {}", fr.quiver.f, fr.quiver.n);
            for t in &fr.transforms {
                let _ = writeln!(
                    out,
                    "  twist {}: ram {}, polypart {}, residue {}",
                    t.twist, t.output.ram, t.output.polypart, t.output.residue
                );
            }
        }
        Body::Virasoro(v) => {
            for id in &v.identities {
                let params: Vec<String> = id.params.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                let _ = writeln!(
                    out,
                    "  {} ({}; T = {}, d = {}, G = {}): {}",
                    id.identity,
                    params.join(", "),
                    id.cutoff,
                    id.degree,
                    id.guard,
                    if id.pass { "equal" } else { "differ" }
                );
                if let Some(res) = &id.residual {
                    let _ = writeln!(out, "    residual on the guarded domain: {res}");
                }
            }
        }
        Body::PaperExample(p) => {
            let _ = writeln!(out, "congruence matrix:");
            for row in &p.congruence {
                let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(out, "  {}", cells.join(" "));
            }
            render_normal_form(&mut out, &p.normal_form);
            for (name, curve) in &p.curves {
                let _ = writeln!(out, "curve {name}: {curve}");
            }
        }
    }
    for c in &r.checks {
        let _ = writeln!(out, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let _ = writeln!(
        out,
        "verdict: {}",
        match r.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        }
    );
    out
}

pub fn render_json(r: &Report) -> String {
    serde_json::to_string_pretty(r).expect("reports serialize")
}

/// Parses a series argument such as `z^2 - 3`.
pub fn parse_series(text: &str) -> Result<Series, InputError> {
    text.parse().map_err(|e: quiver_dmod::series::SeriesError| InputError(e.to_string()))
}
