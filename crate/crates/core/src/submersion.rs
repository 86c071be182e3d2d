//! Submersions: maps with surjective derivative, their horizontal lifts,
//! and the closure properties of the class.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::bundle::{check_equal, conjugate, Domain};
use crate::corpus;
use crate::error::{Error, Result};
use crate::expr::{parse_map, sample_points, scaled_residual, SampleBox, SamplerConfig, SmoothMap};
use crate::jet::{base_struct, smooth, tangent_map, JetMap, StructKind};
use crate::numeric::{self, lstsq, singular_values, ABS_RANK_TOL, REL_RANK_TOL};
use crate::report::{Check, Verdict};

/// Pushforward and symbolic Jacobians must agree this closely (scaled).
pub const JACOBIAN_AGREEMENT: f64 = 1e-7;

/// The derivative of a map at a point.
#[derive(Clone, Debug, Serialize)]
pub struct JacobianSample {
    pub point: Vec<f64>,
    /// Row-major, `coarity × arity`.
    pub matrix: Vec<Vec<f64>>,
    /// Decreasing.
    pub singular_values: Vec<f64>,
}

impl JacobianSample {
    pub fn norm(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn rank(&self) -> usize {
        let thr = (REL_RANK_TOL * self.norm()).max(ABS_RANK_TOL);
        self.singular_values.iter().filter(|&&s| s > thr).count()
    }

    /// The `rows`-th singular value, zero when there are fewer.
    fn smallest(&self, rows: usize) -> f64 {
        if rows == 0 {
            return f64::INFINITY;
        }
        self.singular_values.get(rows - 1).copied().unwrap_or(0.0)
    }

    fn to_matrix(&self) -> DMatrix<f64> {
        let rows = self.matrix.len();
        let cols = self.matrix.first().map_or(0, Vec::len);
        DMatrix::from_fn(rows, cols, |i, j| self.matrix[i][j])
    }
}

/// Partial derivatives as one flat map, row-major.
fn symbolic_partials(f: &SmoothMap) -> SmoothMap {
    let comps = f.jacobian().into_iter().flatten().collect();
    SmoothMap::new(f.arity(), comps).expect("derivatives keep the arity")
}

fn sample_with(f: &SmoothMap, partials: &SmoothMap, x: &[f64]) -> Result<JacobianSample> {
    let m = numeric::jacobian(f, x)?;
    let sym = partials.eval(x)?;
    let pushed: Vec<f64> = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect();
    let res = scaled_residual(&pushed, &sym);
    if res > JACOBIAN_AGREEMENT {
        return Err(Error::Invalid(format!(
            "pushforward and symbolic derivatives disagree by {res:.3e} at {x:?}"
        )));
    }
    Ok(JacobianSample {
        point: x.to_vec(),
        matrix: (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect(),
        singular_values: singular_values(&m),
    })
}

/// `Df` at `x`, computed by pushing the basis vectors forward and checked
/// against the symbolic partial derivatives.
pub fn jacobian(f: &SmoothMap, x: &[f64]) -> Result<JacobianSample> {
    sample_with(f, &symbolic_partials(f), x)
}

/// Full row rank at every sample of `b`. Among rank-deficient samples the
/// witness is the one with the smallest singular value, ties going to the
/// sample nearest the center of the box.
pub fn is_submersion_on(f: &SmoothMap, b: &SampleBox, cfg: &SamplerConfig) -> Verdict {
    let partials = symbolic_partials(f);
    let rows = f.coarity();
    let mut worst: Option<(f64, f64, JacobianSample)> = None;
    for p in sample_points(b, cfg.samples, cfg.seed) {
        let j = match sample_with(f, &partials, &p) {
            Ok(j) => j,
            Err(e) => {
                return Verdict::Unknown {
                    reason: format!("derivative at {p:?}: {e}"),
                }
            }
        };
        if j.rank() >= rows {
            continue;
        }
        let s = j.smallest(rows);
        let dist = b.scaled_distance_to_center(&p);
        let replace = match &worst {
            None => true,
            Some((ws, wd, _)) => s < *ws || (s == *ws && dist < *wd),
        };
        if replace {
            worst = Some((s, dist, j));
        }
    }
    match worst {
        None => Verdict::PassNumeric { max_residual: 0.0 },
        Some((s, _, j)) => Verdict::fail(
            j.point.clone(),
            format!(
                "derivative has rank {} < {rows} (smallest singular value {s:.3e}, norm {:.3e})",
                j.rank(),
                j.norm()
            ),
        ),
    }
}

/// The minimum-norm `w` with `Df|_a · w = v`.
pub fn horizontal_lift(f: &SmoothMap, a: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != f.coarity() {
        return Err(Error::DimensionMismatch(format!(
            "tangent vector has {} components, the codomain has dimension {}",
            v.len(),
            f.coarity()
        )));
    }
    let j = jacobian(f, a)?;
    if j.rank() < f.coarity() {
        return Err(Error::Invalid(format!("derivative is rank deficient at {a:?}")));
    }
    Ok(lstsq(&j.to_matrix(), v))
}

/// `T(f)(a, h(a, v)) = (f(a), v)` at every sample, for random `v`.
pub fn check_horizontal_lifts(f: &SmoothMap, b: &SampleBox, cfg: &SamplerConfig) -> Verdict {
    let tf = tangent_map(f, 1);
    let n = f.coarity();
    let mut rng = cfg.rng(7);
    let mut worst: f64 = 0.0;
    for p in sample_points(b, cfg.samples, cfg.seed) {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let w = match horizontal_lift(f, &p, &v) {
            Ok(w) => w,
            Err(e) => return Verdict::fail(p, e.to_string()),
        };
        let x: Vec<f64> = p.iter().chain(&w).copied().collect();
        let y = match JetMap::eval(&tf, &x) {
            Ok(y) => y,
            Err(e) => return Verdict::Unknown { reason: e.to_string() },
        };
        let res = scaled_residual(&y[n..], &v);
        if res > cfg.tol {
            return Verdict::fail(p, format!("T(f) misses the tangent vector by {res:.3e}"));
        }
        worst = worst.max(res);
    }
    Verdict::PassNumeric { max_residual: worst }
}

fn map(text: &str, arity: usize) -> SmoothMap {
    parse_map(text, arity).unwrap_or_else(|e| panic!("built-in map {text:?}: {e}"))
}

fn both(id: &str, description: &str, f: &SmoothMap, b: &SampleBox, cfg: &SamplerConfig) -> Check {
    let v = is_submersion_on(f, b, cfg);
    let v = if v.is_pass() {
        Verdict::aggregate([&v, &check_horizontal_lifts(f, b, cfg)])
    } else {
        v
    };
    Check::new(id, description, v)
}

/// Instances of the closure properties of submersions: composition,
/// retracts over the identity, pullback along a map, the tangent functor,
/// and the projections `p`.
pub fn closure_harness(cfg: &SamplerConfig) -> Vec<Check> {
    let mut out = Vec::new();

    let outer = map("x0", 2);
    let inner = map("x0, x1", 3);
    let composite = outer.compose(&inner).expect("shapes");
    out.push(both("SUB-compose", "π₀∘π₀ : ℝ³ → ℝ", &composite, &SampleBox::cube(3, -2.0, 2.0), cfg));

    // q' = qφ⁻¹ is a retract of q in the arrow category, via (φ, id) and
    // (φ⁻¹, id).
    let conj = corpus::conjugated_1_1();
    out.push(both("SUB-retract", "q∘φ⁻¹ for the diffeo φ(x, a) = (x, a(1 + x²))", &conj.q, &conj.total_box, cfg));
    let shear = map("x0 + x1^2, x1", 2);
    let unshear = map("x0 - x1^2, x1", 2);
    let sheared = conjugate(&corpus::trivial(1, 1), "sheared", &shear, &unshear).expect("conjugation");
    out.push(both("SUB-retract-shear", "q∘φ⁻¹ for the diffeo φ(x, a) = (x + a², a)", &sheared.q, &sheared.total_box, cfg));

    // The pullback of π₀ : ℝ² → ℝ along y ↦ y² has the chart
    // (y, a) ↦ (y, (y², a)); in that chart its projection is (y, a) ↦ y.
    let lands = check_equal(
        &smooth(map("x1", 3).compose(&map("x0, x0^2, x1", 2)).expect("shapes")),
        &smooth(map("x0^2", 3).compose(&map("x0, x0^2, x1", 2)).expect("shapes")),
        &Domain::Box(SampleBox::cube(2, -2.0, 2.0)),
        cfg,
    );
    out.push(Check::new("SUB-pullback-chart", "the chart lands in {(y, x, a) : y² = x}", lands));
    out.push(both("SUB-pullback", "(y, (x, a)) ↦ y in the fibre product chart", &map("x0", 2), &SampleBox::cube(2, -2.0, 2.0), cfg));

    for k in 1..=2 {
        out.push(both(
            &format!("SUB-p{k}"),
            &format!("p : Tℝ^{k} → ℝ^{k}"),
            &base_struct(StructKind::Projection, k),
            &SampleBox::cube(2 * k, -2.0, 2.0),
            cfg,
        ));
    }

    let t_proj = tangent_map(&map("x0", 2), 1);
    out.push(both("SUB-tangent", "T(π₀) : Tℝ² → Tℝ", &t_proj, &SampleBox::cube(4, -2.0, 2.0), cfg));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SamplerConfig {
        SamplerConfig::default()
    }

    #[test]
    fn projection_jacobian() {
        let j = jacobian(&map("x0", 2), &[0.3, -1.2]).unwrap();
        assert_eq!(j.matrix, vec![vec![1.0, 0.0]]);
    }

    #[test]
    fn bump_jacobian_vanishes_at_the_witness() {
        let q = corpus::bump_counterexample().q;
        let j = jacobian(&q, &[0.0, 1.0]).unwrap();
        assert!(j.norm() <= 1e-10);
        // δ and δ' vanish for y <= 0, so q = x there
        let j = jacobian(&q, &[0.7, -1.0]).unwrap();
        assert_eq!(j.matrix, vec![vec![1.0, 0.0]]);
    }

    #[test]
    fn bump_is_not_a_submersion() {
        let q = corpus::bump_counterexample().q;
        let v = is_submersion_on(&q, &SampleBox::cube(2, -2.0, 2.0), &cfg());
        let Verdict::Fail { witness } = v else { panic!("{v:?}") };
        assert!((witness.point[0]).abs() < 1e-3 && (witness.point[1] - 1.0).abs() < 1e-3, "{witness:?}");
        let safe = SampleBox::new(vec![-2.0, -2.0], vec![2.0, -0.5]);
        assert!(is_submersion_on(&q, &safe, &cfg()).is_pass());
    }

    #[test]
    fn minimum_norm_lifts() {
        let w = horizontal_lift(&map("x0", 3), &[1.0, 2.0, 3.0], &[0.5]).unwrap();
        assert!(scaled_residual(&w, &[0.5, 0.0, 0.0]) < 1e-12);
        let w = horizontal_lift(&map("x0", 2), &[1.0, 2.0], &[0.0]).unwrap();
        assert_eq!(w, vec![0.0, 0.0]);
        let w = horizontal_lift(&map("x0 + x1", 2), &[0.4, -3.0], &[1.0]).unwrap();
        assert!(scaled_residual(&w, &[0.5, 0.5]) < 1e-12);
        assert!(horizontal_lift(&map("x0^2", 1), &[0.0], &[1.0]).is_err());
    }

    #[test]
    fn closure_instances_pass() {
        for c in closure_harness(&cfg()) {
            assert!(c.verdict.is_pass(), "{c:?}");
        }
    }
}
