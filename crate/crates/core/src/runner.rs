//! Running the check suites on a bundle in dependency order, and the
//! reports they produce.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bundle::{coalgebra, declared_laws, induced_laws, overall, BundleSpec, LiftOps};
use crate::expr::SamplerConfig;
use crate::report::{Check, Verdict};
use crate::splitting::{biproduct_check, splitting_checks};
use crate::submersion::is_submersion_on;
use crate::universal::{check_pullback, cockett_square, combined_square, rosicky_square, square_check, strong_square};
use crate::vb::roundtrip_check;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Pre,
    Rosicky,
    Addition,
    Cockett,
    Strong,
    Combined,
    Split,
    Vb,
}

impl Suite {
    /// Every suite, in the order they run.
    pub const ALL: [Suite; 8] = [
        Suite::Pre,
        Suite::Rosicky,
        Suite::Addition,
        Suite::Cockett,
        Suite::Strong,
        Suite::Combined,
        Suite::Split,
        Suite::Vb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Pre => "pre",
            Suite::Rosicky => "rosicky",
            Suite::Addition => "addition",
            Suite::Cockett => "cockett",
            Suite::Strong => "strong",
            Suite::Combined => "combined",
            Suite::Split => "split",
            Suite::Vb => "vb",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Suites whose pass this one relies on.
    pub fn prerequisites(self) -> &'static [Suite] {
        match self {
            Suite::Pre => &[],
            Suite::Rosicky | Suite::Strong | Suite::Combined => &[Suite::Pre],
            Suite::Addition => &[Suite::Rosicky],
            Suite::Cockett | Suite::Vb => &[Suite::Addition],
            Suite::Split => &[Suite::Rosicky, Suite::Strong],
        }
    }

    /// This suite and everything it depends on, in run order.
    pub fn closure(self) -> Vec<Suite> {
        let mut need = vec![self];
        let mut i = 0;
        while i < need.len() {
            for &p in need[i].prerequisites() {
                if !need.contains(&p) {
                    need.push(p);
                }
            }
            i += 1;
        }
        need.sort();
        need
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RunOptions {
    pub cfg: SamplerConfig,
    /// Tangent depth for the universality squares.
    pub depth: usize,
    /// Run suites even when their prerequisites did not pass.
    pub force: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            cfg: SamplerConfig::default(),
            depth: 2,
            force: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    /// False when the suite ran although a prerequisite did not pass.
    pub trusted: bool,
    pub checks: Vec<Check>,
    pub aggregate: Verdict,
}

fn suite_checks(suite: Suite, spec: &BundleSpec, opts: &RunOptions) -> Vec<Check> {
    let cfg = &opts.cfg;
    let square = |sq, depth| square_check(&check_pullback(&sq, depth, cfg));
    match suite {
        Suite::Pre => declared_laws(spec, cfg),
        Suite::Rosicky => vec![
            square(rosicky_square(spec), opts.depth),
            Check::new("SUB-q", "q is a submersion", is_submersion_on(&spec.q, &spec.total_box, cfg)),
        ],
        Suite::Addition => induced_laws(spec, &LiftOps::from_spec(spec), cfg),
        Suite::Cockett => vec![square(cockett_square(spec, &LiftOps::from_spec(spec)), opts.depth)],
        Suite::Strong => vec![square(strong_square(spec), opts.depth)],
        Suite::Combined => vec![square(combined_square(spec), 0)],
        Suite::Split => {
            let mut out = coalgebra(spec, cfg);
            out.extend(splitting_checks(spec, cfg));
            out.extend(biproduct_check(spec, cfg));
            out
        }
        Suite::Vb => roundtrip_check(spec, cfg),
    }
}

/// Run `suites` (with their prerequisites) in order. A suite whose
/// prerequisite did not pass is skipped, or run untrusted under `force`.
pub fn run_suites(spec: &BundleSpec, suites: &[Suite], opts: &RunOptions) -> Vec<SuiteReport> {
    let mut wanted: Vec<Suite> = suites.iter().flat_map(|s| s.closure()).collect();
    wanted.sort();
    wanted.dedup();
    let mut done: Vec<SuiteReport> = Vec::new();
    for suite in wanted {
        let blocked: Vec<&SuiteReport> = done
            .iter()
            .filter(|r| suite.prerequisites().contains(&r.suite) && (!r.aggregate.is_pass() || !r.trusted))
            .collect();
        if !blocked.is_empty() && !opts.force {
            let names: Vec<&str> = blocked.iter().map(|r| r.suite.name()).collect();
            done.push(SuiteReport {
                suite,
                trusted: true,
                checks: Vec::new(),
                aggregate: Verdict::Skipped {
                    reason: format!("prerequisite {} did not pass", names.join(", ")),
                },
            });
            continue;
        }
        let checks = suite_checks(suite, spec, opts);
        let aggregate = overall(&checks);
        done.push(SuiteReport {
            suite,
            trusted: blocked.is_empty(),
            checks,
            aggregate,
        });
    }
    done
}

/// The result of one `check` run.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub input: String,
    pub input_sha256: String,
    pub bundle: String,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub depth: usize,
    pub forced: bool,
    pub suites: Vec<SuiteReport>,
    pub aggregate: Verdict,
    pub wall_clock_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Run the suites and assemble the report. `input` names where the bundle
/// came from and `bytes` are hashed into the report.
pub fn run_check(spec: &BundleSpec, input: &str, bytes: &[u8], suites: &[Suite], opts: &RunOptions) -> RunReport {
    let start = Instant::now();
    let reports = run_suites(spec, suites, opts);
    // Skipped suites count as not passing, so a blocked run never reports
    // a pass.
    let mut verdicts: Vec<Verdict> = reports.iter().map(|r| r.aggregate.clone()).collect();
    if let Some(skip) = reports.iter().find(|r| matches!(r.aggregate, Verdict::Skipped { .. })) {
        if !verdicts.iter().any(Verdict::is_fail) {
            verdicts.push(Verdict::Unknown {
                reason: format!("suite {} was skipped", skip.suite.name()),
            });
        }
    }
    let aggregate = Verdict::aggregate(&verdicts);
    RunReport {
        schema: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        input: input.into(),
        input_sha256: sha256_hex(bytes),
        bundle: spec.name.clone(),
        seed: opts.cfg.seed,
        samples: opts.cfg.samples,
        tol: opts.cfg.tol,
        depth: opts.depth,
        forced: opts.force,
        suites: reports,
        aggregate,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Process exit code for an aggregate verdict: 0 pass, 1 fail, 2 otherwise.
pub fn exit_code(v: &Verdict) -> i32 {
    match v {
        Verdict::PassExact | Verdict::PassNumeric { .. } => 0,
        Verdict::Fail { .. } => 1,
        Verdict::Unknown { .. } | Verdict::Skipped { .. } => 2,
    }
}

fn verdict_detail(v: &Verdict) -> String {
    match v {
        Verdict::PassExact => String::new(),
        Verdict::PassNumeric { max_residual } => format!("residual {max_residual:.1e}"),
        Verdict::Fail { witness } => format!("at {:?}: {}", witness.point, witness.detail),
        Verdict::Unknown { reason } | Verdict::Skipped { reason } => reason.clone(),
    }
}

/// Aligned human-readable form of a check list.
pub fn render_checks(out: &mut String, checks: &[Check]) {
    let id_w = checks.iter().map(|c| c.id.chars().count()).max().unwrap_or(0);
    for c in checks {
        let pad = id_w - c.id.chars().count();
        let _ = write!(out, "  {}{}  {:<15} {}", c.id, " ".repeat(pad), c.verdict.label(), c.description);
        let detail = verdict_detail(&c.verdict);
        if !detail.is_empty() {
            let _ = write!(out, "  [{detail}]");
        }
        out.push('\n');
    }
}

pub fn render_text(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {}  bundle {}  ({})\nseed {}  samples {}  tol {:e}  depth {}{}",
        r.tool,
        r.version,
        r.bundle,
        r.input,
        r.seed,
        r.samples,
        r.tol,
        r.depth,
        if r.forced { "  forced" } else { "" }
    );
    for s in &r.suites {
        let trust = if s.trusted { "" } else { "  (untrusted)" };
        let _ = writeln!(out, "\n[{}] {}{}", s.suite.name(), s.aggregate.label(), trust);
        if let Verdict::Skipped { reason } = &s.aggregate {
            let _ = writeln!(out, "  {reason}");
        }
        render_checks(&mut out, &s.checks);
    }
    let _ = writeln!(out, "\naggregate: {}  {}", r.aggregate.label(), verdict_detail(&r.aggregate));
    let _ = writeln!(out, "wall clock: {:.2} s", r.wall_clock_seconds);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn closure_orders_prerequisites() {
        assert_eq!(Suite::Cockett.closure(), vec![Suite::Pre, Suite::Rosicky, Suite::Addition, Suite::Cockett]);
        assert_eq!(Suite::Split.closure(), vec![Suite::Pre, Suite::Rosicky, Suite::Strong, Suite::Split]);
    }

    #[test]
    fn failed_prerequisites_skip_later_suites() {
        let opts = RunOptions { depth: 0, ..RunOptions::default() };
        let reports = run_suites(&corpus::bump_counterexample(), &[Suite::Cockett], &opts);
        assert!(reports[0].aggregate.is_pass());
        assert!(reports[1].aggregate.is_fail());
        assert!(matches!(reports[2].aggregate, Verdict::Skipped { .. }));
        let forced = run_suites(&corpus::bump_counterexample(), &[Suite::Addition], &RunOptions { force: true, ..opts });
        assert!(!forced[2].trusted);
    }
}
