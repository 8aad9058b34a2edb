//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criterion 1 is expected to fail: the bundled five-vertex example's
//! displayed potential misses the constant term and the nonintegral residue
//! of the exponential factor. The run still succeeds when that failure is
//! exactly the known one (values frozen from an independent 300-digit
//! numerical eigenvalue expansion), and fails on any other outcome.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::Zero;
use quiver_dmod::coeffs::{rat, CycScalar, Rational};
use quiver_dmod::connections::{class_multiset_equal, classical_limit, one_dim_class, Connection, OneDimClass};
use quiver_dmod::diffops::{ks_commutator_identity, string_equation, DiffOp};
use quiver_dmod::fourier::{gh_consistency, lft_infty_infty, LftInput};
use quiver_dmod::linalg::Matrix;
use quiver_dmod::quivers::{
    classical_limit_curve, companion_normal_form, congruence_pattern, cover_from_normal_form,
    k_shift_classes, ks_hbar_connection, ks_normal_form, parse_quiver_file, random_instance,
    umm_ks_from_potential, verify_quiver_solution, CompanionMatrix, CompanionNormalForm,
    Permutation, QuiverSpec,
};
use quiver_dmod::series::Series;
use quiver_dmod::virasoro::{string_identity_check, witt_relation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIVE_VERTEX: &str = include_str!("../fixtures/paper-example.quiver");

enum Outcome {
    Pass(String),
    Fail(String),
}

struct Instance {
    sigma: Permutation,
    seed: u64,
    cm: CompanionMatrix,
    nf: CompanionNormalForm,
}

fn report(id: u32, title: &str, elapsed: Duration, outcome: &Outcome) {
    let (word, detail) = match outcome {
        Outcome::Pass(d) => ("PASS", d),
        Outcome::Fail(d) => ("FAIL", d),
    };
    println!("criterion {id:>2}: {word} {title} [{:.2} s] {detail}", elapsed.as_secs_f64());
}

fn within(limit: f64, start: Instant, outcome: Outcome) -> Outcome {
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Outcome::Pass(d) if secs > limit => Outcome::Fail(format!("{d}; runtime {secs:.1} s over the {limit} s budget")),
        o => o,
    }
}

fn s(text: &str) -> Series {
    text.parse().unwrap()
}

/// Outcome of criterion 1 and whether it is the documented discrepancy.
fn criterion_1() -> (Outcome, bool) {
    let file = parse_quiver_file(FIVE_VERTEX).expect("bundled fixture parses");
    let cm = file.companion.expect("fixture carries B");
    let f = file.spec.f.clone();
    let nf = match companion_normal_form(&cm, None, None) {
        Ok(nf) => nf,
        Err(e) => return (Outcome::Fail(format!("normal form failed: {e}")), false),
    };
    let predicted: Vec<OneDimClass> = (0..5)
        .map(|i| {
            let l = f
                .scale_substitute(&CycScalar::zeta_pow(5, i))
                .unwrap()
                .scale(&CycScalar::zeta_pow(5, 2 * i));
            one_dim_class(&l).unwrap()
        })
        .collect();
    if class_multiset_equal(&nf.classes, &predicted) && nf.residue.is_integer() {
        return (Outcome::Pass("classes match the displayed f".into()), false);
    }
    let constant = nf.f.coeff_int(0);
    let high_part_matches = nf.f.part_from(1) == f;
    let shift_law = nf.shift_law == Some(true);
    let known = high_part_matches
        && shift_law
        && constant == CycScalar::from_frac(-2477841, 15625)
        && nf.residue == CycScalar::from_frac(-107885958, 78125);
    let detail = format!(
        "exponents >= 1 of the exponential factor {} the displayed f; it also has constant term {} and residue {} (not integral); k = 3 shift law with the full factor: {}",
        if high_part_matches { "match" } else { "differ from" },
        constant,
        nf.residue,
        if shift_law { "holds" } else { "fails" },
    );
    (Outcome::Fail(detail), known)
}

fn criterion_2() -> Outcome {
    let sigma = Permutation::from_cycles(5, &[vec![1, 4, 2, 5, 3]]).unwrap();
    let expected = vec![
        vec![3, 2, 1, 5, 4],
        vec![4, 3, 2, 1, 5],
        vec![5, 4, 3, 2, 1],
        vec![1, 5, 4, 3, 2],
        vec![2, 1, 5, 4, 3],
    ];
    let got = congruence_pattern(5, &sigma);
    if got == expected {
        Outcome::Pass("5x5 residue matrix matches entry for entry".into())
    } else {
        Outcome::Fail(format!("got {got:?}"))
    }
}

fn criterion_3() -> Outcome {
    let mut checked = 0;
    for p in 1..=4u32 {
        for q in (p as i64 + 1)..=(p as i64 + 4) {
            match string_equation(p, q) {
                Ok(op) if op == DiffOp::one() => checked += 1,
                Ok(op) => return Outcome::Fail(format!("[A^({p},{q}), z^{p}] = {op}")),
                Err(e) => return Outcome::Fail(e.to_string()),
            }
        }
    }
    for p in 1..=3u32 {
        for q in (p as i64 + 1)..=5 {
            for i in 0..=3u32 {
                match ks_commutator_identity(p, q, i) {
                    Ok(op) if op.is_zero() => checked += 1,
                    Ok(op) => return Outcome::Fail(format!("p={p} q={q} i={i}: residual {op}")),
                    Err(e) => return Outcome::Fail(e.to_string()),
                }
            }
        }
    }
    Outcome::Pass(format!("{checked} identities exact"))
}

fn build_instance(sigma: &Permutation, seed: u64) -> Result<Instance, String> {
    let cm = random_instance(sigma, seed).map_err(|e| e.to_string())?;
    if !cm.validate().ok {
        return Err(format!("generated B invalid for {sigma}, seed {seed}"));
    }
    let nf = companion_normal_form(&cm, None, None).map_err(|e| format!("{sigma} seed {seed}: {e}"))?;
    Ok(Instance {
        sigma: sigma.clone(),
        seed,
        cm,
        nf,
    })
}

fn criterion_4(pool: &mut BTreeMap<(Vec<usize>, u64), Instance>) -> Outcome {
    let mut count = 0;
    for n in 2..=6usize {
        let sigma = Permutation::string(n);
        for seed in 0..50u64 {
            let inst = match build_instance(&sigma, seed) {
                Ok(i) => i,
                Err(e) => return Outcome::Fail(e),
            };
            let f = inst.nf.f.part_from(0);
            if !inst.nf.residue.is_zero() {
                return Outcome::Fail(format!("n={n} seed={seed}: residue {}", inst.nf.residue));
            }
            let ks = match ks_normal_form(&QuiverSpec::string(n, f)) {
                Ok(k) => k,
                Err(e) => return Outcome::Fail(format!("n={n} seed={seed}: {e}")),
            };
            if !class_multiset_equal(&inst.nf.classes, &ks) {
                return Outcome::Fail(format!("n={n} seed={seed}: companion and KS classes differ"));
            }
            count += 1;
            pool.insert((sigma.one_line().to_vec(), seed), inst);
        }
    }
    Outcome::Pass(format!("{count} string-quiver instances"))
}

fn criterion_5(pool: &mut BTreeMap<(Vec<usize>, u64), Instance>) -> Outcome {
    let mut count = 0;
    for n in 2..=6usize {
        for sigma in Permutation::constant_shift_cycles(n) {
            let k = sigma.constant_shift().expect("constant shift");
            for seed in 0..20u64 {
                let key = (sigma.one_line().to_vec(), seed);
                if !pool.contains_key(&key) {
                    match build_instance(&sigma, seed) {
                        Ok(i) => {
                            pool.insert(key.clone(), i);
                        }
                        Err(e) => return Outcome::Fail(e),
                    }
                }
                let inst = &pool[&key];
                let predicted = match k_shift_classes(&inst.nf.f, n, k) {
                    Ok(p) => p,
                    Err(e) => return Outcome::Fail(e.to_string()),
                };
                if !class_multiset_equal(&inst.nf.classes, &predicted) {
                    return Outcome::Fail(format!("{sigma} seed {seed}: k-shift law fails"));
                }
                count += 1;
            }
        }
    }
    Outcome::Pass(format!("{count} constant-shift instances"))
}

fn criterion_6(pool: &BTreeMap<(Vec<usize>, u64), Instance>) -> Outcome {
    let mut sheets_total = 0;
    let mut skipped = 0;
    for inst in pool.values() {
        let n = inst.cm.n;
        let sheets = match cover_from_normal_form(&inst.cm, &inst.nf, 10) {
            Ok(s) => s,
            Err(e) => return Outcome::Fail(format!("{} seed {}: {e}", inst.sigma, inst.seed)),
        };
        if sheets.len() != n {
            return Outcome::Fail(format!("{} seed {}: {} sheets", inst.sigma, inst.seed, sheets.len()));
        }
        let distinct: BTreeSet<String> = sheets.iter().map(|s| format!("{:?}", s.phis)).collect();
        if distinct.len() != n {
            return Outcome::Fail(format!("{} seed {}: sheets coincide", inst.sigma, inst.seed));
        }
        for sol in &sheets {
            let r = verify_quiver_solution(sol, &sol.spec(&inst.sigma), 10);
            if !r.ok() {
                return Outcome::Fail(format!(
                    "{} seed {} sheet {}: {:?}",
                    inst.sigma, inst.seed, sol.root_twist, r.failures
                ));
            }
            skipped += r.skipped;
        }
        sheets_total += n;
    }
    Outcome::Pass(format!(
        "{} instances, {sheets_total} verified sheets ({skipped} stabilization checks beyond order 10 skipped)",
        pool.len()
    ))
}

fn criterion_7() -> Outcome {
    let spec = match umm_ks_from_potential(&BTreeMap::from([(3, rat(1, 1))])) {
        Ok(s) => s,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let classes = ks_normal_form(&spec).unwrap();
    let expected = vec![
        OneDimClass::new(s("-3*z^2"), CycScalar::zero()),
        OneDimClass::new(s("3*z^2"), CycScalar::zero()),
    ];
    if !class_multiset_equal(&classes, &expected) {
        return Outcome::Fail(format!("classes {classes:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for round in 0..20 {
        let t: BTreeMap<u32, Rational> = (0..=4u32)
            .map(|i| (2 * i + 1, rat(rng.gen_range(-9..=9), rng.gen_range(1..=6))))
            .collect();
        if t.values().all(|v| v.is_zero()) {
            continue;
        }
        let spec = umm_ks_from_potential(&t).unwrap();
        for i in 0..=4u32 {
            let a = spec.f.coeff_int(2 * i as i64);
            let want = CycScalar::from_rational(-(Rational::from_integer((2 * i + 1).into()) * &t[&(2 * i + 1)]));
            if a != want {
                return Outcome::Fail(format!("round {round}: a_{} = {a}, expected {want}", 2 * i));
            }
        }
    }
    Outcome::Pass("classes {-3z^2, 3z^2}; a_2i = -(2i+1) t_2i+1 for i <= 4".into())
}

/// `Σ a_k z^k P^{k+1}` for the cyclic shift `P`: the ħ-form before the DFT.
fn pre_dft_hbar(f: &Series, n: usize) -> Connection {
    let mut m: Matrix<Series> = Matrix::zeros(n, n);
    for (k, c) in f.terms() {
        for row in 0..n {
            let col = (row + k as usize + 1) % n;
            let entry = m.get(row, col) + &Series::monomial(c.clone(), k);
            m.set(row, col, entry);
        }
    }
    Connection::hbar_connection(m).unwrap()
}

fn criterion_8(pool: &BTreeMap<(Vec<usize>, u64), Instance>) -> Outcome {
    let mut count = 0;
    for inst in pool.values().filter(|i| i.sigma.is_string()) {
        let spec = QuiverSpec::string(inst.cm.n, inst.nf.f.part_from(0));
        let curve = match classical_limit_curve(&spec) {
            Ok(c) => c,
            Err(e) => return Outcome::Fail(format!("{} seed {}: {e}", inst.sigma, inst.seed)),
        };
        let det = classical_limit(&ks_hbar_connection(&spec).unwrap()).unwrap();
        let oracle = classical_limit(&pre_dft_hbar(&spec.f, spec.n)).unwrap();
        if curve != det || curve != oracle {
            return Outcome::Fail(format!("{} seed {}: curve routes disagree", inst.sigma, inst.seed));
        }
        count += 1;
    }
    let umm = classical_limit_curve(&QuiverSpec::string(2, s("z^2"))).unwrap().to_string();
    if umm != "y^2 - z^4" {
        return Outcome::Fail(format!("n=2, f=z^2 curve is {umm}"));
    }
    Outcome::Pass(format!("{count} curves rational and equal to the determinant route; n=2, f=z^2 gives {umm}"))
}

fn criterion_9(pool: &BTreeMap<(Vec<usize>, u64), Instance>) -> Outcome {
    let mut checked = 0;
    for inst in pool.values().filter(|i| i.sigma.is_string()) {
        let f = inst.nf.f.part_from(0);
        if f.degree().unwrap_or(0) > 4 {
            continue;
        }
        let n = inst.cm.n as u32;
        for i in 0..n as i64 {
            let input = LftInput::new(f.clone(), i, n).unwrap();
            match gh_consistency(&input, 10) {
                Ok(true) => checked += 1,
                Ok(false) => return Outcome::Fail(format!("f = {f}, n = {n}, i = {i}: routes disagree")),
                Err(e) => return Outcome::Fail(format!("f = {f}: {e}")),
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let mut a = rat(rng.gen_range(-9..=9), rng.gen_range(1..=5));
        if a.is_zero() {
            a = rat(1, 1);
        }
        let b = rat(rng.gen_range(-9..=9), rng.gen_range(1..=5));
        let n: u32 = rng.gen_range(1..=6);
        let i: i64 = rng.gen_range(0..n as i64);
        let f = Series::polynomial(&[(1, CycScalar::from_rational(a.clone())), (0, CycScalar::from_rational(b.clone()))]);
        let out = match lft_infty_infty(&LftInput::new(f.clone(), i, n).unwrap(), 10) {
            Ok(o) => o,
            Err(e) => return Outcome::Fail(format!("f = {f}: {e}")),
        };
        // ζ^i f^{-1}(ζ^i z) = ζ^{2i} z/a − ζ^i b/a, residue −1
        let inv_a = CycScalar::from_rational(Rational::from_integer(1.into()) / &a);
        let zi = CycScalar::zeta_pow(n, i);
        let polypart = Series::polynomial(&[
            (1, &(&zi * &zi) * &inv_a),
            (0, -(&(&zi * &CycScalar::from_rational(b.clone())) * &inv_a)),
        ]);
        let closed = OneDimClass::new(polypart, CycScalar::from_int(-1));
        match out.class.as_one_dim() {
            Some(c) if c == closed && c.residue() == &CycScalar::from_int(-1) => {}
            other => return Outcome::Fail(format!("f = {f}, n = {n}, i = {i}: got {other:?}, closed form {closed}")),
        }
    }
    Outcome::Pass(format!("{checked} twisted classes consistent across routes; 50 linear closed forms"))
}

fn criterion_10() -> Outcome {
    let mut checked = 0;
    for m in -4..=4i64 {
        for n in -4..=4i64 {
            if m + n == 0 {
                continue;
            }
            match witt_relation(m, n, 14, 3, 6) {
                Ok(true) => checked += 1,
                Ok(false) => return Outcome::Fail(format!("[L_{m}, L_{n}] relation fails")),
                Err(e) => return Outcome::Fail(e.to_string()),
            }
        }
    }
    for nq in [2u32, 3] {
        for k in [1u32, 2] {
            match string_identity_check(nq, k, 14, 3, 6) {
                Ok(true) => checked += 1,
                Ok(false) => return Outcome::Fail(format!("L_{} identity fails", nq * k)),
                Err(e) => return Outcome::Fail(e.to_string()),
            }
        }
    }
    Outcome::Pass(format!("{checked} operator identities on the guarded domain"))
}

fn main() -> ExitCode {
    let mut ok = true;
    let mut tally = (0, 0);
    let mut record = |id: u32, title: &str, start: Instant, outcome: Outcome, expected_failure: bool| {
        report(id, title, start.elapsed(), &outcome);
        match outcome {
            Outcome::Pass(_) => tally.0 += 1,
            Outcome::Fail(_) => {
                tally.1 += 1;
                if !expected_failure {
                    ok = false;
                }
            }
        }
    };

    let t = Instant::now();
    let (o, known) = criterion_1();
    let o = within(10.0, t, o);
    if matches!(o, Outcome::Pass(_)) || !known {
        // A pass or an unexplained failure both contradict the recorded analysis.
        record(1, "five-vertex normal form", t, o, false);
    } else {
        record(1, "five-vertex normal form", t, o, true);
        println!("             known discrepancy reproduced exactly");
    }

    let t = Instant::now();
    record(2, "congruence matrix", t, criterion_2(), false);
    let t = Instant::now();
    let o = within(5.0, t, criterion_3());
    record(3, "string equation sweep", t, o, false);

    let mut pool = BTreeMap::new();
    let t = Instant::now();
    let o = within(120.0, t, criterion_4(&mut pool));
    record(4, "companion vs KS fuzz", t, o, false);
    let t = Instant::now();
    let o = within(120.0, t, criterion_5(&mut pool));
    record(5, "k-shift law fuzz", t, o, false);
    let t = Instant::now();
    record(6, "moduli cover", t, criterion_6(&pool), false);
    let t = Instant::now();
    record(7, "UMM dictionary", t, criterion_7(), false);
    let t = Instant::now();
    record(8, "classical limit", t, criterion_8(&pool), false);
    let t = Instant::now();
    record(9, "Fourier routes", t, criterion_9(&pool), false);
    let t = Instant::now();
    record(10, "Virasoro identities", t, criterion_10(), false);

    println!("acceptance: {} PASS, {} FAIL", tally.0, tally.1);
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
