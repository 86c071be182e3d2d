//! Built-in example bundles with their expected verdicts.

mod bundles;
pub mod mutants;

use serde::Serialize;

pub use bundles::{bump_counterexample, conjugated_1_1, conjugated_random, quadratic_lift, tangent_bundle, trivial};

use crate::bundle::BundleSpec;
use crate::expr::SamplerConfig;
use crate::report::{Check, Verdict};
use crate::runner::{render_checks, render_text, run_check, run_suites, RunOptions, RunReport, Suite};
use crate::splitting::non_idempotent_demo;
use crate::submersion::closure_harness;

/// Dimensions and seeds of the randomized conjugations.
pub const RANDOM_CONJUGATIONS: [(usize, usize, u64); 10] = [
    (1, 1, 1),
    (1, 2, 2),
    (2, 1, 3),
    (1, 1, 4),
    (1, 2, 5),
    (2, 1, 6),
    (1, 1, 7),
    (1, 2, 8),
    (2, 1, 9),
    (1, 1, 10),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expected {
    Pass,
    Fail,
}

impl Expected {
    pub fn matches(self, v: &Verdict) -> bool {
        match self {
            Expected::Pass => v.is_pass(),
            Expected::Fail => v.is_fail(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Subject {
    Bundle(BundleSpec),
    /// A fixed list of checks that is not about one bundle.
    Demo(fn(&SamplerConfig) -> Vec<Check>),
}

#[derive(Clone, Debug)]
pub struct Entry {
    pub name: String,
    pub description: String,
    pub expected: Expected,
    /// For entries expected to fail: exactly these checks must fail, and
    /// only in the pre-differential suite.
    pub failing_laws: Vec<&'static str>,
    pub subject: Subject,
}

fn bundle(spec: BundleSpec, description: &str, expected: Expected) -> Entry {
    Entry {
        name: spec.name.clone(),
        description: description.into(),
        expected,
        failing_laws: Vec::new(),
        subject: Subject::Bundle(spec),
    }
}

fn mutant(spec: BundleSpec, description: &str, laws: &[&'static str]) -> Entry {
    Entry {
        failing_laws: laws.to_vec(),
        ..bundle(spec, description, Expected::Fail)
    }
}

fn demo(name: &str, description: &str, expected: Expected, run: fn(&SamplerConfig) -> Vec<Check>) -> Entry {
    Entry {
        name: name.into(),
        description: description.into(),
        expected,
        failing_laws: Vec::new(),
        subject: Subject::Demo(run),
    }
}

/// Every corpus entry, in listing order.
pub fn entries() -> Vec<Entry> {
    use Expected::{Fail, Pass};
    let mut out = vec![
        bundle(trivial(1, 1), "ℝ × ℝ → ℝ with the linear fibre structure", Pass),
        bundle(trivial(2, 3), "ℝ² × ℝ³ → ℝ²", Pass),
        bundle(tangent_bundle(1), "Tℝ with p, 0 and ℓ", Pass),
        bundle(tangent_bundle(2), "Tℝ² with p, 0 and ℓ", Pass),
        bundle(conjugated_1_1(), "the trivial line bundle moved by (x, a) ↦ (x, a(1 + x²))", Pass),
    ];
    for (k, n, seed) in RANDOM_CONJUGATIONS {
        out.push(bundle(
            conjugated_random(k, n, seed),
            "the trivial bundle moved by a random polynomial diffeomorphism",
            Pass,
        ));
    }
    out.extend([
        bundle(bump_counterexample(), "pre-differential, but q has a critical point at (0, 1)", Fail),
        bundle(quadratic_lift(), "pre-differential, but λ folds the fibre", Fail),
        demo(
            "scaling_morphism_nonidempotent",
            "φ(x, r) = (x, rx): linear, not idempotent, fibre rank jumps at x = 0",
            Fail,
            non_idempotent_demo,
        ),
        demo("submersion_closure", "composites, retracts, pullbacks and T of submersions", Pass, closure_harness),
        mutant(mutants::xi_shift(), "ξ = (x, 1)", &["L3", "L4"]),
        mutant(mutants::xi_collapse(), "ξ = (0, 0)", &["L1"]),
        mutant(mutants::lift_doubled(), "λ = (x, 0, 0, 2a)", &["L2"]),
        mutant(mutants::lift_vertical(), "λ = (x, a, 0, 0)", &["L3"]),
        mutant(mutants::add_noncommutative(), "a + b = (a₁ + b₁, a₂ + b₂, a₃ + b₃ + a₁b₂)", &["A-comm"]),
        mutant(mutants::add_nonassociative(), "a + b = a + b + a²b²", &["A-assoc"]),
        mutant(mutants::add_shifted_unit(), "a + b = a + b + 1", &["A-unit"]),
        mutant(mutants::negate_identity(), "-a = a", &["A-inverse"]),
        mutant(mutants::scalar_drops_coordinate(), "r • a = (ra₁, 0)", &["M1"]),
        mutant(mutants::scalar_cubed(), "r • a = r³a", &["M5"]),
    ]);
    out
}

pub fn find(name: &str) -> Option<Entry> {
    entries().into_iter().find(|e| e.name == name)
}

/// What running one entry produced.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub name: String,
    pub expected: Expected,
    pub observed: Verdict,
    /// Whether the observed verdict is the expected one (and, for mutants,
    /// the failing laws are exactly the intended ones).
    pub met: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<RunReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// The checks that failed in a pre-differential run.
pub fn failing_pre_laws(spec: &BundleSpec, opts: &RunOptions) -> Vec<String> {
    run_suites(spec, &[Suite::Pre], opts)[0]
        .checks
        .iter()
        .filter(|c| c.verdict.is_fail())
        .map(|c| c.id.clone())
        .collect()
}

/// Run an entry and compare with its expectation.
pub fn run_entry(entry: &Entry, opts: &RunOptions) -> Outcome {
    match &entry.subject {
        Subject::Bundle(spec) => {
            let bytes = serde_json::to_vec(spec).expect("bundle serializes");
            let report = run_check(spec, &format!("corpus:{}", entry.name), &bytes, &Suite::ALL, opts);
            let observed = report.aggregate.clone();
            let mut met = entry.expected.matches(&observed);
            let mut note = None;
            if !entry.failing_laws.is_empty() {
                let failed: Vec<String> = report.suites[0].checks.iter().filter(|c| c.verdict.is_fail()).map(|c| c.id.clone()).collect();
                if failed != entry.failing_laws {
                    met = false;
                }
                note = Some(format!("intended {:?}, failed {:?}", entry.failing_laws, failed));
            }
            Outcome {
                name: entry.name.clone(),
                expected: entry.expected,
                observed,
                met,
                report: Some(report),
                checks: Vec::new(),
                note,
            }
        }
        Subject::Demo(run) => {
            let checks = run(&opts.cfg);
            let observed = Verdict::aggregate(checks.iter().map(|c| &c.verdict));
            Outcome {
                name: entry.name.clone(),
                expected: entry.expected,
                met: entry.expected.matches(&observed),
                observed,
                report: None,
                checks,
                note: None,
            }
        }
    }
}

/// Human-readable form of an outcome.
pub fn render_outcome(o: &Outcome) -> String {
    let mut out = match &o.report {
        Some(r) => render_text(r),
        None => {
            let mut s = format!("demo {}\n", o.name);
            render_checks(&mut s, &o.checks);
            s
        }
    };
    if let Some(n) = &o.note {
        out.push_str(&format!("{n}\n"));
    }
    out.push_str(&format!(
        "expected {:?}, observed {}: {}\n",
        o.expected,
        o.observed.label(),
        if o.met { "expectation met" } else { "EXPECTATION NOT MET" }
    ));
    out
}
