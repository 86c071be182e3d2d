//! Commuting squares and the numeric test for being a pullback preserved by
//! `T^n` up to a fixed depth.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::bundle::{check_equal, Domain};
use crate::expr::{sample_points, scaled_residual, SamplerConfig, SmoothMap};
use crate::jet::{compose, smooth, tangent, tuple, JetPoint, MapRef};
use crate::numeric::{jacobian, null_space, rank, singular_values, solve_base};
use crate::report::{Verdict, Witness};

/// A square
///
/// ```text
///   A --top--> B
///   |          |
///  left      right
///   v          v
///   C -bottom-> D
/// ```
/// with `A` given as a sampled domain in ambient coordinates.
#[derive(Clone, Debug)]
pub struct CommutingSquare {
    pub name: String,
    pub apex: Domain,
    pub top: MapRef,
    pub left: MapRef,
    pub right: MapRef,
    pub bottom: MapRef,
}

/// Results at one `T`-depth.
#[derive(Clone, Debug, Serialize)]
pub struct DepthReport {
    pub depth: usize,
    pub samples: usize,
    /// Samples where the cospan's fibre product had an unusual dimension.
    pub discarded: usize,
    pub rank: Verdict,
    pub injectivity: Verdict,
    pub surjectivity: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct PullbackVerdict {
    pub square: String,
    pub commutation: Verdict,
    pub depths: Vec<DepthReport>,
    /// Deepest level fully checked.
    pub depth_checked: Option<usize>,
    pub aggregate: Verdict,
}

impl PullbackVerdict {
    pub fn is_pass(&self) -> bool {
        self.aggregate.is_pass()
    }

    pub fn is_fail(&self) -> bool {
        self.aggregate.is_fail()
    }
}

/// Newton preimage searches per depth.
const NEWTON_SAMPLES: usize = 16;
/// Relative size of the perturbation applied to images.
const PERTURBATION: f64 = 0.05;
/// Preimages closer than this (relative) count as the same point.
const SAME_POINT: f64 = 1e-7;

/// `(b, c) ↦ right(b) - bottom(c)`, whose zero set is the fibre product.
fn cospan_constraint(sq: &CommutingSquare) -> MapRef {
    let (nb, nc, nd) = (sq.right.arity(), sq.bottom.arity(), sq.right.coarity());
    let pick = |off: usize, len: usize| crate::jet::select(nb + nc, &(off..off + len).collect::<Vec<_>>());
    let both = tuple(&[
        compose(&sq.right, &pick(0, nb)).expect("right on B"),
        compose(&sq.bottom, &pick(nb, nc)).expect("bottom on C"),
    ])
    .expect("same domain");
    let diff: Vec<_> = (0..nd)
        .map(|i| crate::expr::Expr::var(i) - crate::expr::Expr::var(nd + i))
        .collect();
    compose(&smooth(SmoothMap::new(2 * nd, diff).expect("within arity")), &both).expect("difference shapes")
}

/// A sampled apex point at some depth.
struct Sample {
    /// Coordinates the Newton solves work in.
    free: Vec<f64>,
    /// The point in ambient coordinates.
    point: Vec<f64>,
    /// Columns spanning the apex tangent space, in ambient coordinates.
    basis: DMatrix<f64>,
}

/// The apex at depth `t`, with the cone expressed in free coordinates.
struct Chart {
    /// Free coordinates to ambient coordinates, if not the identity.
    param: Option<MapRef>,
    /// Constraint on ambient coordinates, if any.
    constraint: Option<MapRef>,
}

impl Chart {
    fn new(apex: &Domain, t: usize) -> Chart {
        match apex {
            Domain::Box(_) => Chart {
                param: None,
                constraint: None,
            },
            Domain::Param { param, .. } => Chart {
                param: Some(tangent(&smooth(param.clone()), t)),
                constraint: None,
            },
            Domain::Constrained { constraint, .. } => Chart {
                param: None,
                constraint: Some(tangent(constraint, t)),
            },
        }
    }

    fn ambient(&self, free: &[f64]) -> crate::Result<Vec<f64>> {
        match &self.param {
            Some(p) => p.eval(free),
            None => Ok(free.to_vec()),
        }
    }

    /// The map Newton inverts: the cone in free coordinates, followed by
    /// the constraint when there is one.
    fn solve_map(&self, cone: &MapRef) -> MapRef {
        let on_free = match &self.param {
            Some(p) => compose(cone, p).expect("cone after parametrization"),
            None => cone.clone(),
        };
        match &self.constraint {
            Some(c) => tuple(&[on_free, c.clone()]).expect("same domain"),
            None => on_free,
        }
    }
}

fn sample_apex(apex: &Domain, chart: &Chart, t: usize, n: usize, cfg: &SamplerConfig) -> (Vec<Sample>, usize) {
    let mut rng = cfg.rng(100 + t as u64);
    let (bx, dim) = match apex {
        Domain::Box(b) => (b, b.dim()),
        Domain::Param { params, .. } => (params, params.dim()),
        Domain::Constrained { ambient, .. } => (ambient, ambient.dim()),
    };
    let mut out = Vec::with_capacity(n);
    let mut lost = 0;
    for base in sample_points(bx, n, cfg.seed.wrapping_add(t as u64)) {
        let start = JetPoint::random(t, &base, &mut rng).into_flat();
        let s = match (&chart.param, &chart.constraint) {
            (Some(p), _) => match (p.eval(&start), jacobian(p.as_ref(), &start)) {
                (Ok(point), Ok(basis)) => Some(Sample {
                    free: start,
                    point,
                    basis,
                }),
                _ => None,
            },
            (None, Some(c)) => {
                let zero = vec![0.0; c.coarity()];
                solve_base(c.as_ref(), &zero, &start).ok().and_then(|point| {
                    let basis = null_space(&jacobian(c.as_ref(), &point).ok()?);
                    Some(Sample {
                        free: point.clone(),
                        point,
                        basis,
                    })
                })
            }
            (None, None) => Some(Sample {
                free: start.clone(),
                point: start,
                basis: DMatrix::identity(dim << t, dim << t),
            }),
        };
        match s {
            Some(s) => out.push(s),
            None => lost += 1,
        }
    }
    (out, lost)
}

/// The cone map `A → B × C`.
pub fn cone(sq: &CommutingSquare) -> MapRef {
    tuple(&[sq.top.clone(), sq.left.clone()]).expect("cone legs share the apex")
}

/// Check that `sq` is a pullback and stays one under `T^n` for
/// `n = 0..=depth`: the induced map into the fibre product must be
/// injective, have full-rank derivative onto the fibre product's tangent
/// space, and reach perturbed points of the fibre product.
pub fn check_pullback(sq: &CommutingSquare, depth: usize, cfg: &SamplerConfig) -> PullbackVerdict {
    let commutation = check_equal(
        &compose(&sq.right, &sq.top).expect("right after top"),
        &compose(&sq.bottom, &sq.left).expect("bottom after left"),
        &sq.apex,
        cfg,
    );
    let mut depths = Vec::new();
    let mut depth_checked = None;
    if !commutation.is_fail() {
        for t in 0..=depth {
            let rep = check_depth(sq, t, cfg);
            let stop = !Verdict::aggregate([&rep.rank, &rep.injectivity, &rep.surjectivity]).is_pass();
            if !stop {
                depth_checked = Some(t);
            }
            depths.push(rep);
            if stop {
                break;
            }
        }
    }
    let mut parts = vec![&commutation];
    for d in &depths {
        parts.extend([&d.rank, &d.injectivity, &d.surjectivity]);
    }
    let aggregate = Verdict::aggregate(parts);
    PullbackVerdict {
        square: sq.name.clone(),
        commutation,
        depths,
        depth_checked,
        aggregate,
    }
}

struct RankRow {
    rank: usize,
    apex_dim: usize,
    fibre_dim: usize,
    /// Smallest over largest singular value of the restricted derivative.
    ratio: f64,
}

fn rank_row(cone_t: &MapRef, g_t: &MapRef, s: &Sample) -> Option<RankRow> {
    let ju = jacobian(cone_t.as_ref(), &s.point).ok()?;
    let y = cone_t.eval(&s.point).ok()?;
    let jg = jacobian(g_t.as_ref(), &y).ok()?;
    let m = &ju * &s.basis;
    let sv = singular_values(&m);
    let ratio = match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    };
    Some(RankRow {
        rank: rank(&m),
        apex_dim: rank(&s.basis),
        fibre_dim: jg.ncols() - rank(&jg),
        ratio,
    })
}

/// Where to measure distance to the center for tie-breaking witnesses.
fn reference_box(apex: &Domain) -> crate::expr::SampleBox {
    match apex {
        Domain::Box(b) => b.clone(),
        Domain::Param { param, params } => {
            let lo = param.eval(&params.lo).unwrap_or_default();
            let hi = param.eval(&params.hi).unwrap_or_default();
            let (lo, hi) = lo.iter().zip(&hi).map(|(a, b)| (a.min(*b), a.max(*b))).unzip();
            crate::expr::SampleBox::new(lo, hi)
        }
        Domain::Constrained { ambient, .. } => ambient.clone(),
    }
}

fn check_depth(sq: &CommutingSquare, t: usize, cfg: &SamplerConfig) -> DepthReport {
    let n = (cfg.samples >> (2 * t)).max(8);
    let chart = Chart::new(&sq.apex, t);
    let cone_t = tangent(&cone(sq), t);
    let g_t = tangent(&cospan_constraint(sq), t);
    let (samples, lost) = sample_apex(&sq.apex, &chart, t, n, cfg);
    let rows: Vec<Option<RankRow>> = samples.iter().map(|s| rank_row(&cone_t, &g_t, s)).collect();
    let failed = rows.iter().filter(|r| r.is_none()).count();

    // the fibre product's usual dimension; samples off it are discarded
    let mut counts = std::collections::BTreeMap::new();
    for r in rows.iter().flatten() {
        *counts.entry(r.fibre_dim).or_insert(0usize) += 1;
    }
    let mode = counts.into_iter().max_by_key(|&(dim, c)| (c, std::cmp::Reverse(dim))).map(|(d, _)| d);

    let refbox = reference_box(&sq.apex);
    let mut discarded = lost;
    let mut usable = Vec::new();
    let mut defect: Option<(f64, f64, usize)> = None;
    for (idx, row) in rows.iter().enumerate() {
        let Some(row) = row else { continue };
        if Some(row.fibre_dim) != mode {
            discarded += 1;
            continue;
        }
        if row.rank < row.apex_dim || row.rank < row.fibre_dim {
            let p = &samples[idx].point;
            let dist = refbox.scaled_distance_to_center(&p[..refbox.dim().min(p.len())]);
            let better = match defect {
                None => true,
                Some((br, bd, _)) => row.ratio < br || (row.ratio == br && dist < bd),
            };
            if better {
                defect = Some((row.ratio, dist, idx));
            }
        } else {
            usable.push(idx);
        }
    }
    let rank_v = match defect {
        Some((_, _, idx)) => {
            let row = rows[idx].as_ref().expect("defects come from evaluated rows");
            Verdict::fail(
                samples[idx].point.clone(),
                format!(
                    "depth {t}: the induced map's derivative has rank {} but the apex has dimension {} and the fibre product {} (singular value ratio {:.3e})",
                    row.rank, row.apex_dim, row.fibre_dim, row.ratio
                ),
            )
        }
        None if usable.is_empty() => Verdict::Unknown {
            reason: format!("depth {t}: no usable samples ({failed} failed to evaluate, {discarded} discarded)"),
        },
        None => Verdict::PassNumeric { max_residual: 0.0 },
    };

    let (injectivity, surjectivity) = if rank_v.is_pass() {
        newton_checks(&chart, &cone_t, &g_t, &samples, &usable, t, cfg)
    } else {
        let skip = Verdict::Skipped {
            reason: "rank check did not pass".into(),
        };
        (skip.clone(), skip)
    };
    DepthReport {
        depth: t,
        samples: samples.len(),
        discarded,
        rank: rank_v,
        injectivity,
        surjectivity,
    }
}

/// Perturb images of sampled apex points inside the fibre product and solve
/// for preimages from three nearby starts and one distant start. Distinct
/// preimages refute injectivity; failure to find any leaves the check
/// inconclusive.
fn newton_checks(
    chart: &Chart,
    cone_t: &MapRef,
    g_t: &MapRef,
    samples: &[Sample],
    usable: &[usize],
    t: usize,
    cfg: &SamplerConfig,
) -> (Verdict, Verdict) {
    let mut rng = cfg.rng(200 + t as u64);
    let f = chart.solve_map(cone_t);
    let extra = chart.constraint.as_ref().map_or(0, |c| c.coarity());
    let picked: Vec<usize> = usable.iter().copied().take(NEWTON_SAMPLES).collect();
    let mut stalls: Vec<Vec<f64>> = Vec::new();
    let mut spread: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for (j, &idx) in picked.iter().enumerate() {
        let s = &samples[idx];
        let Ok(y) = cone_t.eval(&s.point) else { continue };
        let Ok(jg) = jacobian(g_t.as_ref(), &y) else { continue };
        let ker = null_space(&jg);
        let coeffs: Vec<f64> = (0..ker.ncols()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mut dir = &ker * nalgebra::DVector::from_vec(coeffs);
        let norm = dir.norm();
        if norm > 0.0 {
            dir /= norm;
        }
        let scale = PERTURBATION * (1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let y0: Vec<f64> = y.iter().zip(dir.iter()).map(|(a, b)| a + scale * b).collect();
        let Ok(y1) = solve_base(g_t.as_ref(), &vec![0.0; g_t.coarity()], &y0) else { continue };
        let mut target = y1;
        target.extend(std::iter::repeat_n(0.0, extra));

        let eta = 0.01 * (1.0 + s.free.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let mut starts = vec![s.free.clone()];
        for _ in 0..2 {
            starts.push(s.free.iter().map(|v| v + eta * rng.gen_range(-1.0..=1.0)).collect());
        }
        let found: Vec<(Vec<f64>, Vec<f64>)> = starts
            .iter()
            .filter_map(|st| solve_base(f.as_ref(), &target, st).ok())
            .filter_map(|z| chart.ambient(&z).ok().map(|a| (z, a)))
            .collect();
        let sols: Vec<Vec<f64>> = found.iter().map(|(_, a)| a.clone()).collect();
        if sols.is_empty() {
            stalls.push(s.point.clone());
            continue;
        }
        for a in &sols {
            for b in &sols {
                spread = spread.max(scaled_residual(a, b));
            }
        }
        if spread > SAME_POINT {
            return (
                Verdict::fail(sols[0].clone(), format!("depth {t}: nearby starts reach different preimages (spread {spread:.3e})")),
                Verdict::Skipped {
                    reason: "injectivity failed".into(),
                },
            );
        }
        if let Ok(img) = f.eval(&found[0].0) {
            worst_res = worst_res.max(scaled_residual(&img, &target));
        }
        let far = &samples[picked[(j + 1) % picked.len()]].free;
        if let Some(other) = solve_base(f.as_ref(), &target, far).ok().and_then(|z| chart.ambient(&z).ok()) {
            if scaled_residual(&other, &sols[0]) > 1e-6 {
                return (
                    Verdict::Fail {
                        witness: Witness {
                            point: sols[0].clone(),
                            detail: format!("depth {t}: two apex points have the same image"),
                            lhs: Some(sols[0].clone()),
                            rhs: Some(other),
                            residual: None,
                        },
                    },
                    Verdict::Skipped {
                        reason: "injectivity failed".into(),
                    },
                );
            }
        }
    }
    let injectivity = Verdict::PassNumeric { max_residual: spread };
    let surjectivity = match stalls.first() {
        Some(p) => Verdict::Unknown {
            reason: format!(
                "depth {t}: no preimage found for perturbed images of {} of {} samples, first near {:?}",
                stalls.len(),
                picked.len(),
                p
            ),
        },
        None => Verdict::PassNumeric { max_residual: worst_res },
    };
    (injectivity, surjectivity)
}
