//! The idempotent `χ` on `T_M(E)`, the tangent space of `E` along the
//! section, and the retraction `K: T_M(E) → E` that exhibits a
//! differential bundle as a linear retract of a pulled-back tangent bundle.
//! Also the biproduct identities on `E ×_M TM`.

use rand::Rng;

use crate::bundle::{check_equal, check_morphism, BundleMorphism, BundleSpec, Domain, Fibred};
use crate::corpus;
use crate::error::Result;
use crate::expr::{parse_map, sample_points, scaled_residual, Expr, SampleBox, SamplerConfig, SmoothMap};
use crate::jet::{base_struct, compose, select, smooth, tangent_map, MapRef, StructKind};
use crate::numeric::{self, solve_base};
use crate::report::{Check, Verdict};
use crate::universal::induce_operations;

/// Samples used for the uniqueness check on `K`.
const UNIQUENESS_SAMPLES: usize = 16;
/// Solutions closer than this count as one point.
const SAME_POINT: f64 = 1e-7;

fn comp(f: &MapRef, g: &MapRef) -> MapRef {
    compose(f, g).expect("splitting maps are well typed")
}

fn range(a: usize, b: usize) -> Vec<usize> {
    (a..b).collect()
}

/// `T_M(E)`: tangent vectors to `E` at points of the section, in
/// coordinates `(m, w)` with `m ∈ ℝᵏ` and `w ∈ ℝᵈ`.
#[derive(Clone, Debug)]
pub struct PulledBackTangent {
    pub base_dim: usize,
    pub total_dim: usize,
    /// `ι(m, w) = (ξ(m), w)`, into `TE`.
    pub iota: SmoothMap,
    /// `π(m, w) = m`.
    pub pi: SmoothMap,
    pub chart_box: SampleBox,
}

impl PulledBackTangent {
    pub fn new(spec: &BundleSpec) -> PulledBackTangent {
        let (k, d) = (spec.base_dim, spec.total_dim);
        let mut comps: Vec<Expr> = spec.xi.components().to_vec();
        comps.extend((k..k + d).map(Expr::var));
        PulledBackTangent {
            base_dim: k,
            total_dim: d,
            iota: SmoothMap::new(k + d, comps).expect("within arity"),
            pi: SmoothMap::select(k + d, &range(0, k)),
            chart_box: spec.base_box.product(&SampleBox::cube(d, -1.0, 1.0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.base_dim + self.total_dim
    }

    pub fn domain(&self) -> Domain {
        Domain::Box(self.chart_box.clone())
    }

    /// `(m, w) ↦ (m, 0, 0, w)`, the lift of `T_M(E)` restricted from `ℓ`.
    pub fn lift(&self) -> SmoothMap {
        let (k, d) = (self.base_dim, self.total_dim);
        let mut comps: Vec<Expr> = (0..k).map(Expr::var).collect();
        comps.extend(vec![Expr::zero(); d + k]);
        comps.extend((k..k + d).map(Expr::var));
        SmoothMap::new(k + d, comps).expect("within arity")
    }
}

/// `χ(m, w) = (m, w - T(ξq)(ξ(m), w))`, the tangent part being taken.
pub fn chi(spec: &BundleSpec) -> SmoothMap {
    let chart = PulledBackTangent::new(spec);
    let (k, d) = (spec.base_dim, spec.total_dim);
    let t_xiq = tangent_map(&spec.xi_q(), 1).compose(&chart.iota).expect("shapes");
    let mut comps: Vec<Expr> = (0..k).map(Expr::var).collect();
    for j in 0..d {
        comps.push((Expr::var(k + j) - t_xiq.component(d + j).clone()).normalize());
    }
    SmoothMap::new(k + d, comps).expect("within arity")
}

/// `E → T_M(E)` and back.
#[derive(Clone, Debug)]
pub struct SplittingPair {
    pub chart: PulledBackTangent,
    pub chi: SmoothMap,
    /// `e ↦ (q(e), vertical part of λ(e))`.
    pub section: SmoothMap,
    /// `K = λ⁻¹∘ι∘χ`.
    pub retraction: MapRef,
    pub closed_form: bool,
}

/// The section and retraction, refused unless the lift is universal.
pub fn splitting_pair(spec: &BundleSpec, cfg: &SamplerConfig) -> Result<SplittingPair> {
    let ops = induce_operations(spec, cfg)?;
    let (k, d) = (spec.base_dim, spec.total_dim);
    let chart = PulledBackTangent::new(spec);
    let chi = chi(spec);
    let mut comps: Vec<Expr> = spec.q.components().to_vec();
    comps.extend(spec.lambda.components()[d..2 * d].iter().cloned());
    let section = SmoothMap::new(d, comps).expect("within arity");
    let retraction = comp(&ops.lambda_inv, &comp(&smooth(chart.iota.clone()), &smooth(chi.clone())));
    debug_assert_eq!(retraction.arity(), k + d);
    Ok(SplittingPair {
        chart,
        chi,
        section,
        retraction,
        closed_form: ops.closed_form,
    })
}

/// Every sampled `ι(χ(m, w))` has one preimage under `λ`: Newton from three
/// starts lands on the same point.
fn uniqueness(spec: &BundleSpec, pair: &SplittingPair, cfg: &SamplerConfig) -> Verdict {
    let k = spec.base_dim;
    let target_map = smooth(pair.chart.iota.clone());
    let mut rng = cfg.rng(11);
    let mut worst: f64 = 0.0;
    for p in sample_points(&pair.chart.chart_box, UNIQUENESS_SAMPLES, cfg.seed) {
        let target = match pair.chi.eval(&p).map_err(Into::into).and_then(|c| target_map.eval(&c)) {
            Ok(t) => t,
            Err(e) => return Verdict::Unknown { reason: e.to_string() },
        };
        let Ok(base) = spec.xi.eval(&p[..k]) else {
            return Verdict::Unknown { reason: format!("ξ undefined at {:?}", &p[..k]) };
        };
        let mut sols: Vec<Vec<f64>> = Vec::new();
        for s in 0..3 {
            let start: Vec<f64> = base.iter().map(|b| if s == 0 { *b } else { b + rng.gen_range(-0.1..=0.1) }).collect();
            match solve_base(&spec.lambda, &target, &start) {
                Ok(x) => sols.push(x),
                Err(e) => return Verdict::Unknown { reason: format!("no preimage found from {start:?}: {e}") },
            }
        }
        for s in &sols[1..] {
            let gap = scaled_residual(s, &sols[0]);
            if gap > SAME_POINT {
                return Verdict::fail(p, format!("λ has two preimages {:?} and {s:?}", sols[0]));
            }
            worst = worst.max(gap);
        }
    }
    Verdict::PassNumeric { max_residual: worst }
}

/// `|trace - rank| ≤ 1e-7` for the fibre part of `χ` at sampled base points,
/// and the rank is the fibre dimension.
fn trace_rank(spec: &BundleSpec, pair: &SplittingPair, cfg: &SamplerConfig) -> Verdict {
    let (k, d) = (spec.base_dim, spec.total_dim);
    let mut worst: f64 = 0.0;
    for m in sample_points(&spec.base_box, cfg.samples.min(64), cfg.seed) {
        let x: Vec<f64> = m.iter().copied().chain(std::iter::repeat_n(0.0, d)).collect();
        let j = match numeric::jacobian(&pair.chi, &x) {
            Ok(j) => j,
            Err(e) => return Verdict::Unknown { reason: e.to_string() },
        };
        let block = j.view((k, k), (d, d)).clone_owned();
        let rank = numeric::rank(&block);
        let trace = block.trace();
        let gap = (trace - rank as f64).abs();
        if gap > 1e-7 || rank != spec.fibre_dim() {
            return Verdict::fail(m, format!("χ has rank {rank}, trace {trace:.9}, fibre dimension {}", spec.fibre_dim()));
        }
        worst = worst.max(gap);
    }
    Verdict::PassNumeric { max_residual: worst }
}

/// Identities of the splitting: `χ` idempotent, linear and compatible with
/// the lift; `K` retracts the section onto `E` over `M`, and the section
/// splits `χ`.
pub fn splitting_checks(spec: &BundleSpec, cfg: &SamplerConfig) -> Vec<Check> {
    let pair = match splitting_pair(spec, cfg) {
        Ok(p) => p,
        Err(e) => {
            return vec![Check::new(
                "S-pair",
                "section and retraction exist",
                Verdict::Fail {
                    witness: crate::report::Witness::at(Vec::new(), e.to_string()),
                },
            )]
        }
    };
    let (k, d) = (spec.base_dim, spec.total_dim);
    let n = k + d;
    let chart = &pair.chart;
    let on_chart = chart.domain();
    let on_e = Domain::Box(spec.total_box.clone());
    let chi = smooth(pair.chi.clone());
    let section = smooth(pair.section.clone());
    let k_map = pair.retraction.clone();
    let id_e = smooth(SmoothMap::identity(d));

    let mut out = Vec::new();
    out.push(Check::new(
        "S-chart",
        "p∘ι = ξ∘π",
        check_equal(
            &comp(&smooth(base_struct(StructKind::Projection, d)), &smooth(chart.iota.clone())),
            &comp(&spec.xi_ref(), &smooth(chart.pi.clone())),
            &on_chart,
            cfg,
        ),
    ));
    out.push(Check::new("S-chi-idem", "χ∘χ = χ", check_equal(&comp(&chi, &chi), &chi, &on_chart, cfg)));

    // (α, β, m, w, w') ↦ χ(m, αw + βw') against αχ(m, w) + βχ(m, w')
    let lin_arity = 2 + k + 2 * d;
    let lin_box = SampleBox::cube(2, -2.0, 2.0).product(&chart.chart_box).product(&SampleBox::cube(d, -1.0, 1.0));
    let v = |i: usize| Expr::var(i);
    let mix: Vec<Expr> = (2..2 + k)
        .map(v)
        .chain((0..d).map(|j| v(0) * v(2 + k + j) + v(1) * v(2 + k + d + j)))
        .collect();
    let at = |w0: usize| -> Vec<Expr> { (2..2 + k).map(v).chain((w0..w0 + d).map(v)).collect() };
    let lhs = pair.chi.compose(&SmoothMap::new(lin_arity, mix).expect("arity")).expect("shapes");
    let c1 = pair.chi.compose(&SmoothMap::new(lin_arity, at(2 + k)).expect("arity")).expect("shapes");
    let c2 = pair.chi.compose(&SmoothMap::new(lin_arity, at(2 + k + d)).expect("arity")).expect("shapes");
    let rhs: Vec<Expr> = (0..k)
        .map(|i| c1.component(i).clone())
        .chain((k..n).map(|i| v(0) * c1.component(i).clone() + v(1) * c2.component(i).clone()))
        .collect();
    out.push(Check::new(
        "S-chi-linear",
        "χ(m, αw + βw') = αχ(m, w) + βχ(m, w')",
        check_equal(&smooth(lhs), &smooth(SmoothMap::new(lin_arity, rhs).expect("arity")), &Domain::Box(lin_box), cfg),
    ));

    let lift = smooth(chart.lift());
    out.push(Check::new(
        "S-chi-lift",
        "T(χ)∘λ_M = λ_M∘χ",
        check_equal(&comp(&smooth(tangent_map(&pair.chi, 1)), &lift), &comp(&lift, &chi), &on_chart, cfg),
    ));
    out.push(Check::new("S-equaliser", "χ∘s = s", check_equal(&comp(&chi, &section), &section, &on_e, cfg)));
    out.push(Check::new("S-retract", "K∘s = id", check_equal(&comp(&k_map, &section), &id_e, &on_e, cfg)));
    out.push(Check::new("S-idem", "s∘K = χ", check_equal(&comp(&section, &k_map), &chi, &on_chart, cfg)));
    out.push(Check::new(
        "S-base",
        "q∘K = π",
        check_equal(&comp(&spec.q_ref(), &k_map), &smooth(chart.pi.clone()), &on_chart, cfg),
    ));
    out.push(Check::new(
        "S-base-section",
        "π∘s = q",
        check_equal(&comp(&smooth(chart.pi.clone()), &section), &spec.q_ref(), &on_e, cfg),
    ));
    out.push(Check::new("S-unique", "λ(e) = ι(χ(m, w)) has one solution", uniqueness(spec, &pair, cfg)));
    out.push(Check::new("S-trace", "the fibre part of χ has trace = rank = fibre dimension", trace_rank(spec, &pair, cfg)));
    out
}

/// The biproduct `E ×_M TM` in coordinates `(e, m, v)` with `q(e) = m`.
#[derive(Clone, Debug)]
pub struct BiproductChart {
    pub total_dim: usize,
    pub base_dim: usize,
    /// `e ↦ (e, q(e), 0)`.
    pub iota0: SmoothMap,
    /// `(m, v) ↦ (ξ(m), m, v)`.
    pub iota1: SmoothMap,
    pub pi0: SmoothMap,
    pub pi1: SmoothMap,
    /// `(e, v) ↦ (e, q(e), v)`, covering the constrained chart.
    pub param: SmoothMap,
}

impl BiproductChart {
    pub fn new(spec: &BundleSpec) -> BiproductChart {
        let (k, d) = (spec.base_dim, spec.total_dim);
        let n = d + 2 * k;
        let mut c0: Vec<Expr> = (0..d).map(Expr::var).collect();
        c0.extend(spec.q.components().iter().cloned());
        c0.extend(vec![Expr::zero(); k]);
        let mut c1: Vec<Expr> = spec.xi.components().to_vec();
        c1.extend((0..2 * k).map(Expr::var));
        let mut param: Vec<Expr> = (0..d).map(Expr::var).collect();
        param.extend(spec.q.components().iter().cloned());
        param.extend((d..d + k).map(Expr::var));
        BiproductChart {
            total_dim: d,
            base_dim: k,
            iota0: SmoothMap::new(d, c0).expect("within arity"),
            iota1: SmoothMap::new(2 * k, c1).expect("within arity"),
            pi0: SmoothMap::select(n, &range(0, d)),
            pi1: SmoothMap::select(n, &range(d, n)),
            param: SmoothMap::new(d + k, param).expect("within arity"),
        }
    }
}

/// The four biproduct identities, the chart constraint on the injections,
/// and idempotence of `ι₀π₀`.
pub fn biproduct_check(spec: &BundleSpec, cfg: &SamplerConfig) -> Vec<Check> {
    let (k, d) = (spec.base_dim, spec.total_dim);
    let b = BiproductChart::new(spec);
    let on_e = Domain::Box(spec.total_box.clone());
    let on_tm = Domain::Box(spec.base_box.product(&SampleBox::cube(k, -2.0, 2.0)));
    let on_chart = Domain::Param {
        param: b.param.clone(),
        params: spec.total_box.product(&SampleBox::cube(k, -2.0, 2.0)),
    };
    let s = |m: &SmoothMap| smooth(m.clone());
    let (i0, i1, p0, p1) = (s(&b.iota0), s(&b.iota1), s(&b.pi0), s(&b.pi1));
    let zero_q = comp(&s(&base_struct(StructKind::Zero, k)), &spec.q_ref());
    let xi_p = comp(&spec.xi_ref(), &s(&base_struct(StructKind::Projection, k)));
    // q(e) = m on the chart
    let n = d + 2 * k;
    let lhs_c = comp(&spec.q_ref(), &select(n, &range(0, d)));
    let rhs_c = select(n, &range(d, d + k));
    vec![
        Check::new("B-pi0-iota0", "π₀ι₀ = id", check_equal(&comp(&p0, &i0), &s(&SmoothMap::identity(d)), &on_e, cfg)),
        Check::new("B-pi1-iota0", "π₁ι₀ = 0q", check_equal(&comp(&p1, &i0), &zero_q, &on_e, cfg)),
        Check::new("B-pi0-iota1", "π₀ι₁ = ξp", check_equal(&comp(&p0, &i1), &xi_p, &on_tm, cfg)),
        Check::new("B-pi1-iota1", "π₁ι₁ = id", check_equal(&comp(&p1, &i1), &s(&SmoothMap::identity(2 * k)), &on_tm, cfg)),
        Check::new(
            "B-chart",
            "ι₀ and ι₁ land where q(e) = m",
            Verdict::aggregate([
                &check_equal(&comp(&lhs_c, &i0), &comp(&rhs_c, &i0), &on_e, cfg),
                &check_equal(&comp(&lhs_c, &i1), &comp(&rhs_c, &i1), &on_tm, cfg),
            ]),
        ),
        Check::new(
            "B-idem",
            "ι₀π₀ is idempotent",
            check_equal(&comp(&comp(&i0, &p0), &comp(&i0, &p0)), &comp(&i0, &p0), &on_chart, cfg),
        ),
    ]
}

/// `φ(x, r) = (x, rx)` on the trivial line bundle: a linear morphism over
/// the identity that is not idempotent and whose fibre rank jumps at
/// `x = 0`, so its image does not split as a bundle.
pub fn non_idempotent_demo(cfg: &SamplerConfig) -> Vec<Check> {
    let line = corpus::trivial(1, 1);
    let phi = parse_map("x0, x1*x0", 2).expect("fixed map");
    let m = BundleMorphism::new(line.clone(), line.clone(), phi.clone()).expect("shapes");
    let mut out: Vec<Check> = check_morphism(&m, cfg)
        .into_iter()
        .map(|c| Check::new(format!("N-{}", c.id), c.description, c.verdict))
        .collect();
    out.push(Check::new(
        "N-over-id",
        "the base map of φ is the identity",
        check_equal(&smooth(m.base_map()), &smooth(SmoothMap::identity(1)), &Domain::Box(line.base_box.clone()), cfg),
    ));
    let f = smooth(phi.clone());
    out.push(Check::new(
        "N-idem",
        "φ∘φ = φ",
        check_equal(&comp(&f, &f), &f, &Domain::Box(line.total_box.clone()), cfg),
    ));
    out.push(Check::new("N-rank", "the fibre rank of φ is locally constant", fibre_rank_jump(&phi, &line, cfg)));
    out
}

/// Compare the rank of `∂φ/∂r` across sampled base points, reporting the
/// first base point whose rank differs from that at the center.
fn fibre_rank_jump(phi: &SmoothMap, line: &BundleSpec, cfg: &SamplerConfig) -> Verdict {
    let fibre_rank = |x: f64| -> Result<usize> {
        let j = numeric::jacobian(phi, &[x, 0.0])?;
        Ok(numeric::rank(&j.view((1, 1), (1, 1)).clone_owned()))
    };
    let mut pts: Vec<f64> = sample_points(&line.base_box, cfg.samples.min(64), cfg.seed).into_iter().map(|p| p[0]).collect();
    pts.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let mut ranks = Vec::new();
    for &x in &pts {
        match fibre_rank(x) {
            Ok(r) => ranks.push((x, r)),
            Err(e) => return Verdict::Unknown { reason: e.to_string() },
        }
    }
    let typical = ranks.iter().map(|r| r.1).max().unwrap_or(0);
    match ranks.iter().find(|(_, r)| *r != typical) {
        Some(&(x, r)) => Verdict::fail(vec![x, 0.0], format!("fibre rank {r} here, {typical} elsewhere; no splitting")),
        None => Verdict::PassNumeric { max_residual: 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SamplerConfig {
        SamplerConfig::default()
    }

    #[test]
    fn chi_on_the_trivial_bundle_kills_the_base_direction() {
        let c = chi(&corpus::trivial(1, 1));
        assert_eq!(c.eval(&[0.3, 0.7, -1.5]).unwrap(), vec![0.3, 0.0, -1.5]);
        assert_eq!(c.eval(&[0.3, 0.0, 0.0]).unwrap(), vec![0.3, 0.0, 0.0]);
    }

    #[test]
    fn trivial_section_and_retraction() {
        let pair = splitting_pair(&corpus::trivial(1, 1), &cfg()).unwrap();
        assert_eq!(pair.section.eval(&[0.5, 2.0]).unwrap(), vec![0.5, 0.0, 2.0]);
        assert_eq!(pair.retraction.eval(&[0.5, 9.0, 2.0]).unwrap(), vec![0.5, 2.0]);
    }

    #[test]
    fn splitting_holds_on_positive_bundles() {
        for spec in [corpus::trivial(2, 3), corpus::tangent_bundle(1), corpus::conjugated_1_1()] {
            for c in splitting_checks(&spec, &cfg()) {
                assert!(c.verdict.is_pass(), "{}: {c:?}", spec.name);
            }
            for c in biproduct_check(&spec, &cfg()) {
                assert!(c.verdict.is_pass(), "{}: {c:?}", spec.name);
            }
        }
    }

    #[test]
    fn counterexample_is_refused() {
        let err = splitting_pair(&corpus::bump_counterexample(), &cfg()).unwrap_err();
        assert!(matches!(err, crate::Error::Refused(_)));
    }

    #[test]
    fn scaling_by_the_base_is_not_idempotent() {
        let checks = non_idempotent_demo(&cfg());
        let get = |id: &str| checks.iter().find(|c| c.id == id).unwrap().verdict.clone();
        assert!(get("N-H-base").is_pass() && get("N-H-lift").is_pass() && get("N-over-id").is_pass());
        assert!(get("N-idem").is_fail());
        let Verdict::Fail { witness } = get("N-rank") else { panic!() };
        assert_eq!(witness.point, vec![0.0, 0.0]);
        let phi = parse_map("x0, x1*x0", 2).unwrap();
        let twice = phi.compose(&phi).unwrap();
        assert_eq!(twice.eval(&[2.0, 1.0]).unwrap(), vec![2.0, 4.0]);
        assert_eq!(phi.eval(&[2.0, 1.0]).unwrap(), vec![2.0, 2.0]);
        assert_eq!(phi.eval(&[1.0, 3.0]).unwrap(), vec![1.0, 3.0]);
    }
}
