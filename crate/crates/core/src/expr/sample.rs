//! Sampling boxes and the exact-or-numeric map equality oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::poly::Fraction;
use super::{ExprError, SmoothMap};

/// Axis-aligned box `[lo_0, hi_0] × ... × [lo_{n-1}, hi_{n-1}]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> SampleBox {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(a, b)| a <= b), "empty interval");
        SampleBox { lo, hi }
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> SampleBox {
        SampleBox::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn product(&self, other: &SampleBox) -> SampleBox {
        let mut lo = self.lo.clone();
        lo.extend_from_slice(&other.lo);
        let mut hi = self.hi.clone();
        hi.extend_from_slice(&other.hi);
        SampleBox { lo, hi }
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().enumerate().all(|(i, v)| self.lo[i] <= *v && *v <= self.hi[i])
    }

    /// Distance from the center, each axis scaled to unit half-width.
    pub fn scaled_distance_to_center(&self, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(i, v)| {
                let half = 0.5 * (self.hi[i] - self.lo[i]);
                let c = 0.5 * (self.hi[i] + self.lo[i]);
                if half > 0.0 {
                    ((v - c) / half).powi(2)
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Sampling parameters shared by all numeric checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplerConfig {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            samples: 200,
            tol: 1e-9,
            seed: 42,
        }
    }
}

impl SamplerConfig {
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

// Points per axis for the lattice part; each size hits the quarter points.
const LATTICE_SIZES: [usize; 12] = [3, 5, 9, 13, 17, 25, 33, 49, 65, 97, 129, 193];

/// `n` points of the box: a lattice including the corners, center and
/// quarter points (as large as fits in `n`), followed by uniform random
/// points from a ChaCha stream seeded by `seed`.
pub fn sample_points(b: &SampleBox, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = b.dim();
    if d == 0 {
        return vec![Vec::new()];
    }
    let mut pts = Vec::with_capacity(n);
    let fits = |g: usize| (g as f64).powi(d as i32) <= n as f64;
    match LATTICE_SIZES.iter().rev().find(|&&g| fits(g)) {
        Some(&g) => {
            let total = g.pow(d as u32);
            for idx in 0..total {
                let mut rest = idx;
                let mut p = Vec::with_capacity(d);
                for i in 0..d {
                    let k = rest % g;
                    rest /= g;
                    let t = k as f64 / (g - 1) as f64;
                    p.push(b.lo[i] + (b.hi[i] - b.lo[i]) * t);
                }
                pts.push(p);
            }
        }
        None => pts.push(b.center()),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while pts.len() < n.max(1) {
        pts.push((0..d).map(|i| rng.gen_range(b.lo[i]..=b.hi[i])).collect());
    }
    pts
}

/// A point where two maps disagree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapWitness {
    pub point: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub residual: f64,
}

/// Outcome of [`equal_maps`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum EqVerdict {
    /// Both maps are rational and agree after cross-multiplying their
    /// canonical forms.
    EqualExact,
    /// Every sample agreed within tolerance.
    Numeric { max_residual: f64, samples: usize },
    NotEqual(MapWitness),
    Unknown(String),
}

impl EqVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, EqVerdict::EqualExact | EqVerdict::Numeric { .. })
    }
}

/// Componentwise difference scaled by `max(1, |l|, |r|)`.
pub fn scaled_residual(l: &[f64], r: &[f64]) -> f64 {
    l.iter()
        .zip(r)
        .map(|(a, b)| {
            let d = (a - b).abs() / 1f64.max(a.abs()).max(b.abs());
            if d.is_nan() {
                f64::INFINITY
            } else {
                d
            }
        })
        .fold(0.0, f64::max)
}

/// Keep the larger residual; ties go to the lexicographically larger point.
pub(crate) fn worse(r: f64, p: &[f64], best_r: f64, best_p: Option<&[f64]>) -> bool {
    match best_p {
        None => true,
        Some(bp) => r > best_r || (r == best_r && lex_greater(p, bp)),
    }
}

fn lex_greater(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return true;
        }
        if x < y {
            return false;
        }
    }
    false
}

/// Rational maps whose numerator and denominator degrees add up to more
/// than this are compared by sampling only; their canonical forms get too
/// large to build quickly.
pub const EXACT_DEGREE_LIMIT: u32 = 24;

/// Decide `f == g` on `domain`.
///
/// Rational maps within [`EXACT_DEGREE_LIMIT`] are compared exactly by
/// cross-multiplying canonical polynomial forms; otherwise the
/// maps are sampled and compared with [`scaled_residual`] against `cfg.tol`.
/// A witness is always the worst sampled point.
pub fn equal_maps(f: &SmoothMap, g: &SmoothMap, domain: &SampleBox, cfg: &SamplerConfig) -> Result<EqVerdict, ExprError> {
    if f.arity() != g.arity() || f.coarity() != g.coarity() || f.arity() != domain.dim() {
        return Err(ExprError::DimensionMismatch(format!(
            "comparing maps {}→{} and {}→{} on a box of dimension {}",
            f.arity(),
            f.coarity(),
            g.arity(),
            g.coarity(),
            domain.dim()
        )));
    }
    let exact = exact_equal(f, g);
    if exact == Some(true) {
        return Ok(EqVerdict::EqualExact);
    }
    Ok(compare_sampled(f, g, domain, cfg, exact == Some(false)))
}

/// Compare rational maps through cross-multiplied numerators; `None` when
/// either side is not rational or too large.
fn exact_equal(f: &SmoothMap, g: &SmoothMap) -> Option<bool> {
    let n = f.arity();
    let mut all = true;
    for (a, b) in f.components().iter().zip(g.components()) {
        let a = Fraction::from_expr(a, n, EXACT_DEGREE_LIMIT).ok()?;
        let b = Fraction::from_expr(b, n, EXACT_DEGREE_LIMIT).ok()?;
        all &= a.same_as(&b);
    }
    Some(all)
}

/// Worst sampled point; `known_unequal` forces `NotEqual` even when the
/// samples agree within tolerance.
fn compare_sampled(f: &SmoothMap, g: &SmoothMap, domain: &SampleBox, cfg: &SamplerConfig, known_unequal: bool) -> EqVerdict {
    let mut best: Option<MapWitness> = None;
    let mut evaluated = 0;
    let mut failures = 0;
    for p in sample_points(domain, cfg.samples, cfg.seed) {
        let (l, r) = match (f.eval(&p), g.eval(&p)) {
            (Ok(l), Ok(r)) => (l, r),
            _ => {
                failures += 1;
                continue;
            }
        };
        evaluated += 1;
        let res = scaled_residual(&l, &r);
        let (best_r, best_p) = match &best {
            Some(w) => (w.residual, Some(w.point.as_slice())),
            None => (0.0, None),
        };
        if worse(res, &p, best_r, best_p) {
            best = Some(MapWitness {
                point: p,
                lhs: l,
                rhs: r,
                residual: res,
            });
        }
    }
    let Some(worst) = best else {
        return EqVerdict::Unknown(format!("evaluation failed at all {failures} sample points"));
    };
    if known_unequal || worst.residual > cfg.tol {
        return EqVerdict::NotEqual(worst);
    }
    EqVerdict::Numeric {
        max_residual: worst.residual,
        samples: evaluated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_map;

    #[test]
    fn lattice_hits_integer_points() {
        let b = SampleBox::cube(2, -2.0, 2.0);
        let pts = sample_points(&b, 200, 1);
        assert_eq!(pts.len(), 200);
        assert!(pts.contains(&vec![0.0, 1.0]));
        assert!(pts.contains(&vec![2.0, -2.0]));
        assert!(pts.iter().all(|p| b.contains(p)));
    }

    #[test]
    fn sampling_is_deterministic() {
        let b = SampleBox::cube(3, -1.0, 1.0);
        assert_eq!(sample_points(&b, 50, 9), sample_points(&b, 50, 9));
        assert_ne!(sample_points(&b, 50, 9), sample_points(&b, 50, 10));
    }

    #[test]
    fn cube_versus_identity_witness() {
        let f = parse_map("x0", 1).unwrap();
        let g = parse_map("x0^3", 1).unwrap();
        let v = equal_maps(&f, &g, &SampleBox::cube(1, -2.0, 2.0), &SamplerConfig::default()).unwrap();
        match v {
            EqVerdict::NotEqual(w) => assert_eq!(w.point, vec![2.0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exact_and_numeric_passes() {
        let cfg = SamplerConfig::default();
        let b = SampleBox::cube(1, -2.0, 2.0);
        let f = parse_map("(x0 + 1)^2", 1).unwrap();
        let g = parse_map("x0^2 + 2*x0 + 1", 1).unwrap();
        assert_eq!(equal_maps(&f, &g, &b, &cfg).unwrap(), EqVerdict::EqualExact);
        let f = parse_map("sin(x0)^2 + cos(x0)^2", 1).unwrap();
        let g = parse_map("1", 1).unwrap();
        assert!(matches!(equal_maps(&f, &g, &b, &cfg).unwrap(), EqVerdict::Numeric { .. }));
    }
}
