//! Acceptance criteria. Each prints one PASS/FAIL line; the run exits
//! nonzero if any criterion fails. Built without the test harness so the
//! lines always show.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tanbun::bundle::{declared_laws, BundleMorphism, BundleSpec};
use tanbun::corpus::{self, run_entry, Entry, Subject};
use tanbun::expr::{parse_map, scaled_residual, EqVerdict, Expr, SamplerConfig, SmoothMap};
use tanbun::jet::axioms::{check_all, AXIOMS};
use tanbun::jet::{self, JetPoint};
use tanbun::numeric;
use tanbun::report::{Check, Verdict};
use tanbun::runner::{run_suites, RunOptions, Suite};
use tanbun::splitting::{non_idempotent_demo, splitting_checks};
use tanbun::submersion::{is_submersion_on, jacobian};
use tanbun::universal::cross_check;
use tanbun::vb::{morphism_transport_check, roundtrip_check};

const AXIOM_BUDGET: Duration = Duration::from_secs(10);
const AD_MAPS: usize = 50;
const AD_POINTS: usize = 100;
const AD_TOL: f64 = 1e-5;
/// Step of the coarser central difference; Richardson extrapolation with
/// the half step cancels the h² error term.
const FD_STEP: f64 = 1e-5;
const LAW_TOL: f64 = 1e-9;
const WITNESS_DISTANCE: f64 = 1e-3;
const DEGENERATE_NORM: f64 = 1e-10;
const CORPUS_BUDGET: Duration = Duration::from_secs(120);

type Outcome = Result<String, String>;

fn cfg() -> SamplerConfig {
    SamplerConfig::default()
}

fn positives() -> Vec<BundleSpec> {
    vec![
        corpus::trivial(1, 1),
        corpus::trivial(2, 3),
        corpus::tangent_bundle(1),
        corpus::tangent_bundle(2),
        corpus::conjugated_1_1(),
    ]
}

fn residual(v: &Verdict) -> f64 {
    match v {
        Verdict::PassNumeric { max_residual } => *max_residual,
        Verdict::PassExact => 0.0,
        _ => f64::INFINITY,
    }
}

/// Every check passes with residual at most `tol`.
fn all_within(checks: &[Check], tol: f64) -> Result<(), String> {
    match checks.iter().find(|c| residual(&c.verdict) > tol) {
        Some(c) => Err(format!("{} {}: {:?}", c.id, c.description, c.verdict)),
        None => Ok(()),
    }
}

fn axioms_exact() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for k in 1..=3 {
        for r in check_all(k, 2, &cfg()).map_err(|e| e.to_string())? {
            if r.verdict != EqVerdict::EqualExact {
                return Err(format!("{} at k = {k}, instance {}, functor {}: {:?}", r.id, r.instance, r.functor, r.verdict));
            }
            count += 1;
        }
    }
    let t = start.elapsed();
    if t > AXIOM_BUDGET {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("{} identities, {count} instances exact in {:.2} s", AXIOMS.len(), t.as_secs_f64()))
}

fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    let leaf = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.6) {
            Expr::var(rng.gen_range(0..3))
        } else {
            Expr::rational(rng.gen_range(-6..=6), rng.gen_range(1..=3))
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    let sub = |rng: &mut ChaCha8Rng| random_expr(rng, depth - 1);
    match rng.gen_range(0..8) {
        0 | 1 => Expr::sum(vec![sub(rng), sub(rng), sub(rng)]),
        2 | 3 => Expr::product(vec![sub(rng), sub(rng)]),
        4 => Expr::pow(sub(rng), rng.gen_range(2..=3)),
        5 => Expr::sin(sub(rng)),
        6 => Expr::exp(Expr::cos(sub(rng))),
        _ => Expr::quotient(sub(rng), Expr::one() + Expr::pow(sub(rng), 2)),
    }
}

fn ad_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for m in 0..AD_MAPS {
        let comps = (0..2).map(|_| random_expr(&mut rng, 3)).collect();
        let f = SmoothMap::new(3, comps).map_err(|e| e.to_string())?;
        let jac = f.jacobian();
        for _ in 0..AD_POINTS {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let pushed = jet::smooth(f.clone())
                .eval_jet(&JetPoint::new(1, 3, [x.clone(), v.clone()].concat()).unwrap())
                .map_err(|e| e.to_string())?;
            let symbolic: Vec<f64> = jac
                .iter()
                .map(|row| row.iter().zip(&v).map(|(d, vj)| d.eval(&x).unwrap() * vj).sum())
                .collect();
            let at = |s: f64| f.eval(&x.iter().zip(&v).map(|(a, b)| a + s * b).collect::<Vec<_>>()).unwrap();
            let central = |h: f64| -> Vec<f64> { at(h).iter().zip(at(-h)).map(|(a, b)| (a - b) / (2.0 * h)).collect() };
            let (coarse, fine) = (central(FD_STEP), central(FD_STEP / 2.0));
            let fd: Vec<f64> = fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect();
            let r = scaled_residual(pushed.block(1), &symbolic).max(scaled_residual(pushed.block(1), &fd));
            if r > AD_TOL {
                return Err(format!("map {m} ({f}) at {x:?}: jets {:?}, symbolic {symbolic:?}, differences {fd:?}", pushed.block(1)));
            }
            worst = worst.max(r);
        }
    }
    Ok(format!("{AD_MAPS} maps × {AD_POINTS} points, worst relative gap {worst:.1e}"))
}

fn positive_corpus() -> Outcome {
    let opts = RunOptions::default();
    for spec in positives() {
        let reports = run_suites(&spec, &Suite::ALL, &opts);
        for r in &reports {
            let tol = if r.suite == Suite::Pre { 0.0 } else { LAW_TOL };
            all_within(&r.checks, tol).map_err(|e| format!("{} [{}] {e}", spec.name, r.suite.name()))?;
            if r.checks.is_empty() {
                return Err(format!("{} [{}] did not run", spec.name, r.suite.name()));
            }
        }
        let split = reports.iter().find(|r| r.suite == Suite::Split).unwrap();
        if let Some(c) = split.checks.iter().find(|c| c.id.starts_with("B-") && c.verdict != Verdict::PassExact) {
            return Err(format!("{} {} not exact: {:?}", spec.name, c.id, c.verdict));
        }
    }
    Ok(format!("{} bundles pass every suite; pre-differential and biproduct laws exact", positives().len()))
}

fn bump_end_to_end() -> Outcome {
    let b = corpus::bump_counterexample();
    let laws = declared_laws(&b, &cfg());
    all_within(&laws[..4], LAW_TOL).map_err(|e| format!("law {e}"))?;
    let witness = match is_submersion_on(&b.q, &b.total_box, &cfg()) {
        Verdict::Fail { witness } => witness.point,
        other => return Err(format!("q judged a submersion: {other:?}")),
    };
    let dist = ((witness[0] - 0.0).powi(2) + (witness[1] - 1.0).powi(2)).sqrt();
    let norm = jacobian(&b.q, &witness).map_err(|e| e.to_string())?.norm();
    if dist > WITNESS_DISTANCE || norm > DEGENERATE_NORM {
        return Err(format!("witness {witness:?} at distance {dist:.1e}, Jacobian norm {norm:.1e}"));
    }
    let eq = cross_check(&b, 2, &cfg());
    if !eq.all().iter().all(|v| v.is_fail()) {
        let labels: Vec<String> = eq.all().iter().map(|v| format!("{} {}", v.square, v.aggregate.label())).collect();
        return Err(labels.join(", "));
    }
    Ok(format!("laws hold, witness {witness:?} (|J| = {norm:.0e}), all four squares fail"))
}

fn corpus_bundles() -> Vec<BundleSpec> {
    corpus::entries()
        .into_iter()
        .filter(|e| e.failing_laws.is_empty())
        .filter_map(|e| match e.subject {
            Subject::Bundle(b) => Some(b),
            Subject::Demo(_) => None,
        })
        .collect()
}

fn squares_agree() -> Outcome {
    let bundles = corpus_bundles();
    let mut disagreements = Vec::new();
    for b in &bundles {
        let eq = cross_check(b, 2, &cfg());
        if !eq.consistent() {
            let labels: Vec<String> = eq.all().iter().map(|v| format!("{} {}", v.square, v.aggregate.label())).collect();
            disagreements.push(format!("{}: {}", b.name, labels.join(", ")));
        }
    }
    if disagreements.is_empty() {
        Ok(format!("{} bundles, 0 disagreements", bundles.len()))
    } else {
        Err(disagreements.join("; "))
    }
}

fn retract() -> Outcome {
    for spec in positives() {
        let checks: Vec<Check> = splitting_checks(&spec, &cfg())
            .into_iter()
            .filter(|c| c.id == "S-retract" || c.id == "S-idem")
            .collect();
        if checks.len() != 2 {
            return Err(format!("{}: splitting not formed", spec.name));
        }
        all_within(&checks, LAW_TOL).map_err(|e| format!("{} {e}", spec.name))?;
    }
    Ok(format!("K∘s = id and s∘K = χ on {} bundles", positives().len()))
}

fn morphisms() -> Vec<(BundleMorphism, bool)> {
    let line = corpus::trivial(1, 1);
    let plane = corpus::trivial(1, 2);
    let conj = corpus::conjugated_1_1();
    let m = |s: &BundleSpec, t: &BundleSpec, f: &str, linear: bool| {
        let f = parse_map(f, s.total_dim).unwrap();
        (BundleMorphism::new(s.clone(), t.clone(), f).unwrap(), linear)
    };
    vec![
        m(&line, &line, "x0, 2*x1", true),
        m(&line, &line, "x0, x1*(1 + x0^2)", true),
        m(&line, &line, "x0^3 + x0, sin(x0)*x1", true),
        m(&line, &line, "x0, x1 + x1^2", false),
        m(&line, &line, "x0, x1^3", false),
        m(&line, &line, "x0, exp(x1) - 1", false),
        m(&plane, &plane, "x0, x1 - x2, x0*x1 + x2", true),
        m(&plane, &plane, "x0, x1*x2, x2", false),
        m(&conj, &line, "x0, x1/(1 + x0^2)", true),
        m(&line, &conj, "x0, x1 + x1^2*(1 + x0^2)", false),
    ]
}

fn isomorphism() -> Outcome {
    for spec in positives() {
        all_within(&roundtrip_check(&spec, &cfg()), LAW_TOL).map_err(|e| format!("{} {e}", spec.name))?;
    }
    let mut disagreements = 0;
    let mut wrong = Vec::new();
    let list = morphisms();
    for (i, (m, linear)) in list.iter().enumerate() {
        let checks = morphism_transport_check(m, &cfg());
        if !checks[2].verdict.is_pass() {
            disagreements += 1;
        }
        if checks[0].verdict.is_pass() != *linear {
            wrong.push(format!("morphism {i} ({}): lift square {}", m.f, checks[0].verdict.label()));
        }
    }
    if disagreements > 0 || !wrong.is_empty() {
        return Err(format!("{disagreements} disagreements; {}", wrong.join("; ")));
    }
    let n_lin = list.iter().filter(|m| m.1).count();
    Ok(format!(
        "round trips on {} bundles; {} morphisms ({n_lin} linear), 0 disagreements",
        positives().len(),
        list.len()
    ))
}

fn non_idempotent() -> Outcome {
    let checks = non_idempotent_demo(&cfg());
    let get = |id: &str| checks.iter().find(|c| c.id == id).map(|c| c.verdict.clone());
    match get("N-idem") {
        Some(Verdict::Fail { witness }) if !witness.point.is_empty() => {}
        other => return Err(format!("N-idem: {other:?}")),
    }
    if !matches!(get("N-rank"), Some(Verdict::Fail { .. })) {
        return Err(format!("splitting not refused: {:?}", get("N-rank")));
    }
    if let Some(c) = checks.iter().find(|c| c.id == "N-H-lift" && !c.verdict.is_pass()) {
        return Err(format!("φ should be linear: {:?}", c.verdict));
    }
    let phi = parse_map("x0, x1*x0", 2).unwrap();
    let fibre_rank = |x: f64| {
        let j = numeric::jacobian(&phi, &[x, 0.0]).unwrap();
        numeric::rank(&j.view((1, 1), (1, 1)).clone_owned())
    };
    let (r1, r0) = (fibre_rank(1.0), fibre_rank(0.0));
    if (r1, r0) != (1, 0) {
        return Err(format!("fibre ranks {r1} at x = 1 and {r0} at x = 0"));
    }
    Ok("φ∘φ ≠ φ with witness, fibre rank 1 at x = 1 and 0 at x = 0, splitting refused".into())
}

fn mutants() -> Outcome {
    let list: Vec<Entry> = corpus::entries().into_iter().filter(|e| !e.failing_laws.is_empty()).collect();
    let opts = RunOptions::default();
    let mut bad = Vec::new();
    for e in &list {
        let o = run_entry(e, &opts);
        if !o.met {
            bad.push(format!("{}: {}", e.name, o.note.unwrap_or_default()));
        }
    }
    if bad.is_empty() {
        Ok(format!("{} mutants, each caught by exactly its intended law", list.len()))
    } else {
        Err(bad.join("; "))
    }
}

fn full_corpus() -> Outcome {
    let start = Instant::now();
    let entries = corpus::entries();
    let opts = RunOptions::default();
    let missed: Vec<String> = entries.iter().map(|e| run_entry(e, &opts)).filter(|o| !o.met).map(|o| o.name).collect();
    let t = start.elapsed();
    if !missed.is_empty() {
        return Err(format!("expectations not met: {}", missed.join(", ")));
    }
    if t > CORPUS_BUDGET {
        return Err(format!("took {:.1} s", t.as_secs_f64()));
    }
    Ok(format!("{} entries in {:.1} s", entries.len(), t.as_secs_f64()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("tangent axioms exact at dims 1-3", axioms_exact),
        ("jets, symbolic and finite differences agree", ad_agreement),
        ("positive corpus passes every suite", positive_corpus),
        ("bump counterexample end to end", bump_end_to_end),
        ("universality squares agree across the corpus", squares_agree),
        ("retraction K splits χ", retract),
        ("vector bundle round trips and morphism transport", isomorphism),
        ("non-idempotent linear morphism", non_idempotent),
        ("mutants caught by their law", mutants),
        ("full corpus within budget", full_corpus),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
