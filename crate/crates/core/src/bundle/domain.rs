//! Sampled domains for law checks, including fibre products `E ×_M E`.

use crate::expr::{equal_maps, sample_points, scaled_residual, worse, Expr, SampleBox, SamplerConfig, SmoothMap};
use crate::jet::{JetMap, MapRef};
use crate::numeric::solve_base;
use crate::report::{Verdict, Witness};

/// Where a law is checked.
#[derive(Clone, Debug)]
pub enum Domain {
    Box(SampleBox),
    /// Image of a box under an explicit parametrization.
    Param { param: SmoothMap, params: SampleBox },
    /// Zero set of `constraint` near sampled points of `ambient`.
    Constrained { ambient: SampleBox, constraint: MapRef },
}

impl Domain {
    pub fn ambient_dim(&self) -> usize {
        match self {
            Domain::Box(b) => b.dim(),
            Domain::Param { param, .. } => param.coarity(),
            Domain::Constrained { ambient, .. } => ambient.dim(),
        }
    }

    /// `n` points of the domain (fewer if projection onto a constraint fails
    /// for some starting points).
    pub fn points(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        match self {
            Domain::Box(b) => sample_points(b, n, seed),
            Domain::Param { param, params } => sample_points(params, n, seed)
                .into_iter()
                .filter_map(|p| param.eval(&p).ok())
                .collect(),
            Domain::Constrained { ambient, constraint } => {
                let zero = vec![0.0; constraint.coarity()];
                sample_points(ambient, n, seed)
                    .into_iter()
                    .filter_map(|p| solve_base(constraint.as_ref(), &zero, &p).ok())
                    .collect()
            }
        }
    }

    /// The defining constraint, if any.
    pub fn constraint(&self) -> Option<&MapRef> {
        match self {
            Domain::Constrained { constraint, .. } => Some(constraint),
            _ => None,
        }
    }
}

/// `m` points of `E` with a common image under `q` (a coordinate projection
/// onto the first `k` of `d` coordinates), parametrized by the shared base
/// point followed by each fibre part.
pub fn fibre_param(k: usize, d: usize, m: usize) -> SmoothMap {
    let f = d - k;
    let mut comps = Vec::with_capacity(m * d);
    for i in 0..m {
        comps.extend((0..k).map(Expr::var));
        comps.extend((0..f).map(|j| Expr::var(k + i * f + j)));
    }
    SmoothMap::new(k + m * f, comps).expect("within arity")
}

/// `(a_1, ..., a_m) ↦ (q(a_2) - q(a_1), ..., q(a_m) - q(a_1))`.
pub fn fibre_constraint(q: &SmoothMap, m: usize) -> SmoothMap {
    let d = q.arity();
    let pick = |i: usize| SmoothMap::select(m * d, &(i * d..(i + 1) * d).collect::<Vec<_>>());
    let q0 = q.compose(&pick(0)).expect("q on a copy");
    let mut comps = Vec::new();
    for i in 1..m {
        let qi = q.compose(&pick(i)).expect("q on a copy");
        for (a, b) in qi.components().iter().zip(q0.components()) {
            comps.push(a.clone() - b.clone());
        }
    }
    SmoothMap::new(m * d, comps).expect("within arity")
}

/// Compare two maps on a domain. Symbolic maps on boxes and parametrized
/// domains go through [`equal_maps`] (exact when polynomial); otherwise the
/// maps are evaluated on sampled points.
pub fn check_equal(lhs: &MapRef, rhs: &MapRef, domain: &Domain, cfg: &SamplerConfig) -> Verdict {
    if let (Some(l), Some(r)) = (lhs.as_smooth(), rhs.as_smooth()) {
        let composed = match domain {
            Domain::Box(b) => Some((l.clone(), r.clone(), b.clone())),
            Domain::Param { param, params } => match (l.compose(param), r.compose(param)) {
                (Ok(a), Ok(b)) => Some((a, b, params.clone())),
                _ => None,
            },
            Domain::Constrained { .. } => None,
        };
        if let Some((a, b, bx)) = composed {
            return match equal_maps(&a, &b, &bx, cfg) {
                Ok(v) => {
                    let mut v: Verdict = v.into();
                    // report witnesses in ambient coordinates
                    if let (Verdict::Fail { witness }, Domain::Param { param, .. }) = (&mut v, domain) {
                        if let Ok(p) = param.eval(&witness.point) {
                            witness.point = p;
                        }
                    }
                    v
                }
                Err(e) => Verdict::Unknown { reason: e.to_string() },
            };
        }
    }
    let pts = domain.points(cfg.samples, cfg.seed);
    compare_on_points(lhs.as_ref(), rhs.as_ref(), &pts, cfg.tol)
}

/// Evaluate both maps on `pts` and compare with the scaled residual.
pub fn compare_on_points(lhs: &dyn JetMap, rhs: &dyn JetMap, pts: &[Vec<f64>], tol: f64) -> Verdict {
    let mut worst: Option<Witness> = None;
    let mut worst_r = 0.0;
    let mut failed = 0usize;
    let mut last_error = String::new();
    for p in pts {
        let (l, r) = match (lhs.eval(p), rhs.eval(p)) {
            (Ok(l), Ok(r)) => (l, r),
            (Err(e), _) | (_, Err(e)) => {
                failed += 1;
                last_error = e.to_string();
                continue;
            }
        };
        let res = scaled_residual(&l, &r);
        if worse(res, p, worst_r, worst.as_ref().map(|w| w.point.as_slice())) {
            worst_r = res;
            worst = Some(Witness {
                point: p.clone(),
                detail: format!("sides differ by {res:.3e} (scaled)"),
                lhs: Some(l),
                rhs: Some(r),
                residual: Some(res),
            });
        }
    }
    match worst {
        None => Verdict::Unknown {
            reason: if pts.is_empty() {
                "no sample points on the domain".into()
            } else {
                format!("evaluation failed at all {failed} points: {last_error}")
            },
        },
        Some(w) if worst_r > tol => Verdict::Fail { witness: w },
        Some(_) => Verdict::PassNumeric { max_residual: worst_r },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_map;
    use crate::jet::smooth;

    #[test]
    fn constrained_points_satisfy_the_constraint() {
        let q = parse_map("x0 + x1^2", 2).unwrap();
        let g = fibre_constraint(&q, 2);
        let dom = Domain::Constrained {
            ambient: SampleBox::cube(4, -1.0, 1.0),
            constraint: smooth(g.clone()),
        };
        let pts = dom.points(40, 3);
        assert!(pts.len() > 30);
        for p in pts {
            assert!(g.eval(&p).unwrap()[0].abs() < 1e-10);
        }
    }

    #[test]
    fn fibre_param_shape() {
        let p = fibre_param(1, 2, 2);
        assert_eq!(p.eval(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 1.0, 3.0]);
    }
}
