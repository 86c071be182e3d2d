//! Maps that can be pushed forward along jets, and combinators on them.

use std::fmt;
use std::sync::Arc;

use super::number::Jet;
use super::point::JetPoint;
use crate::error::{Error, Result};
use crate::expr::{ExprError, SmoothMap};

/// A smooth map `ℝ^arity → ℝ^coarity` that can be evaluated on points of
/// `T^n(ℝ^arity)` for any supported `n`, producing `T^n` of the map.
pub trait JetMap: Send + Sync + fmt::Debug {
    fn arity(&self) -> usize;
    fn coarity(&self) -> usize;
    /// Evaluate `T^n(self)` where `n = x.order()`.
    fn eval_jet(&self, x: &JetPoint) -> Result<JetPoint>;

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval_jet(&JetPoint::from_base(0, x))?.into_flat())
    }

    /// The symbolic form, when there is one.
    fn as_smooth(&self) -> Option<&SmoothMap> {
        None
    }
}

pub type MapRef = Arc<dyn JetMap>;

pub(crate) fn check_arity(name: &str, expected: usize, x: &JetPoint) -> Result<()> {
    if x.dim() != expected {
        return Err(Error::DimensionMismatch(format!(
            "{name} expects points of dimension {expected}, got {}",
            x.dim()
        )));
    }
    Ok(())
}

impl JetMap for SmoothMap {
    fn arity(&self) -> usize {
        SmoothMap::arity(self)
    }

    fn coarity(&self) -> usize {
        SmoothMap::coarity(self)
    }

    fn eval_jet(&self, x: &JetPoint) -> Result<JetPoint> {
        check_arity("map", SmoothMap::arity(self), x)?;
        let jets = x.to_jets()?;
        let template = Jet::constant(x.order(), 0.0);
        let out = self.eval_scalar(&jets, &template)?;
        if out.iter().any(|j| j.coeffs().iter().any(|v| !v.is_finite())) {
            return Err(ExprError::NonFinite.into());
        }
        Ok(JetPoint::from_jets(x.order(), &out))
    }

    fn as_smooth(&self) -> Option<&SmoothMap> {
        Some(self)
    }
}

pub fn smooth(f: SmoothMap) -> MapRef {
    Arc::new(f)
}

/// `T^times(inner)`.
#[derive(Debug)]
pub struct Tangent {
    inner: MapRef,
    times: usize,
}

impl JetMap for Tangent {
    fn arity(&self) -> usize {
        self.inner.arity() << self.times
    }

    fn coarity(&self) -> usize {
        self.inner.coarity() << self.times
    }

    fn eval_jet(&self, x: &JetPoint) -> Result<JetPoint> {
        check_arity("tangent map", self.arity(), x)?;
        let lifted = x.reinterpret(x.order() + self.times, self.inner.arity())?;
        let y = self.inner.eval_jet(&lifted)?;
        y.reinterpret(x.order(), self.coarity())
    }
}

pub fn tangent(f: &MapRef, times: usize) -> MapRef {
    if times == 0 {
        return f.clone();
    }
    Arc::new(Tangent {
        inner: f.clone(),
        times,
    })
}

#[derive(Debug)]
struct Composed {
    outer: MapRef,
    inner: MapRef,
}

impl JetMap for Composed {
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    fn coarity(&self) -> usize {
        self.outer.coarity()
    }

    fn eval_jet(&self, x: &JetPoint) -> Result<JetPoint> {
        self.outer.eval_jet(&self.inner.eval_jet(x)?)
    }
}

/// `outer ∘ inner`. Symbolic maps compose symbolically.
pub fn compose(outer: &MapRef, inner: &MapRef) -> Result<MapRef> {
    if outer.arity() != inner.coarity() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose a map on R^{} after a map into R^{}",
            outer.arity(),
            inner.coarity()
        )));
    }
    if let (Some(f), Some(g)) = (outer.as_smooth(), inner.as_smooth()) {
        return Ok(smooth(f.compose(g)?));
    }
    Ok(Arc::new(Composed {
        outer: outer.clone(),
        inner: inner.clone(),
    }))
}

/// Compose a chain, applied right to left: `chain(&[f, g, h]) = f ∘ g ∘ h`.
pub fn chain(maps: &[&MapRef]) -> Result<MapRef> {
    let mut acc = (*maps.last().expect("empty chain")).clone();
    for m in maps.iter().rev().skip(1) {
        acc = compose(m, &acc)?;
    }
    Ok(acc)
}

#[derive(Debug)]
struct Tupled {
    parts: Vec<MapRef>,
}

impl JetMap for Tupled {
    fn arity(&self) -> usize {
        self.parts[0].arity()
    }

    fn coarity(&self) -> usize {
        self.parts.iter().map(|p| p.coarity()).sum()
    }

    fn eval_jet(&self, x: &JetPoint) -> Result<JetPoint> {
        let outs = self.parts.iter().map(|p| p.eval_jet(x)).collect::<Result<Vec<_>>>()?;
        JetPoint::concat(&outs)
    }
}

/// `x ↦ (f_1(x), f_2(x), ...)`.
pub fn tuple(parts: &[MapRef]) -> Result<MapRef> {
    let a = parts.first().ok_or_else(|| Error::Invalid("empty tuple".into()))?.arity();
    if parts.iter().any(|p| p.arity() != a) {
        return Err(Error::DimensionMismatch("tuple of maps on different domains".into()));
    }
    let symbolic: Option<Vec<&SmoothMap>> = parts.iter().map(|p| p.as_smooth()).collect();
    if let Some(maps) = symbolic {
        return Ok(smooth(SmoothMap::tuple(&maps)?));
    }
    Ok(Arc::new(Tupled { parts: parts.to_vec() }))
}

#[derive(Debug)]
struct Product {
    parts: Vec<MapRef>,
}

impl JetMap for Product {
    fn arity(&self) -> usize {
        self.parts.iter().map(|p| p.arity()).sum()
    }

    fn coarity(&self) -> usize {
        self.parts.iter().map(|p| p.coarity()).sum()
    }

    fn eval_jet(&self, x: &JetPoint) -> Result<JetPoint> {
        check_arity("product map", self.arity(), x)?;
        let dims: Vec<usize> = self.parts.iter().map(|p| p.arity()).collect();
        let ins = x.split(&dims)?;
        let outs = self
            .parts
            .iter()
            .zip(&ins)
            .map(|(p, xi)| p.eval_jet(xi))
            .collect::<Result<Vec<_>>>()?;
        JetPoint::concat(&outs)
    }
}

/// `(x_1, x_2, ...) ↦ (f_1(x_1), f_2(x_2), ...)`.
pub fn product(parts: &[MapRef]) -> MapRef {
    let symbolic: Option<Vec<&SmoothMap>> = parts.iter().map(|p| p.as_smooth()).collect();
    if let Some(maps) = symbolic {
        if let Some((first, rest)) = maps.split_first() {
            let joined = rest.iter().fold((*first).clone(), |acc, m| SmoothMap::product(&acc, m));
            return smooth(joined);
        }
    }
    Arc::new(Product { parts: parts.to_vec() })
}

#[derive(Debug)]
struct Selected {
    arity: usize,
    indices: Vec<usize>,
}

impl JetMap for Selected {
    fn arity(&self) -> usize {
        self.arity
    }

    fn coarity(&self) -> usize {
        self.indices.len()
    }

    fn eval_jet(&self, x: &JetPoint) -> Result<JetPoint> {
        check_arity("coordinate selection", self.arity, x)?;
        Ok(x.select(&self.indices))
    }
}

/// `x ↦ (x[indices[0]], x[indices[1]], ...)`.
pub fn select(arity: usize, indices: &[usize]) -> MapRef {
    smooth(SmoothMap::select(arity, indices))
}

/// Coordinate selection evaluated blockwise without going through
/// expressions.
pub fn select_fast(arity: usize, indices: &[usize]) -> MapRef {
    assert!(indices.iter().all(|&i| i < arity));
    Arc::new(Selected {
        arity,
        indices: indices.to_vec(),
    })
}

pub fn identity(n: usize) -> MapRef {
    select(n, &(0..n).collect::<Vec<_>>())
}

type JetFn = dyn Fn(&JetPoint) -> Result<JetPoint> + Send + Sync;

/// A map given by a closure; used for procedures such as Newton inverses.
pub struct FnMap {
    name: String,
    arity: usize,
    coarity: usize,
    f: Box<JetFn>,
}

impl fmt::Debug for FnMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: R^{} -> R^{}", self.name, self.arity, self.coarity)
    }
}

impl JetMap for FnMap {
    fn arity(&self) -> usize {
        self.arity
    }

    fn coarity(&self) -> usize {
        self.coarity
    }

    fn eval_jet(&self, x: &JetPoint) -> Result<JetPoint> {
        check_arity(&self.name, self.arity, x)?;
        let y = (self.f)(x)?;
        if y.dim() != self.coarity || y.order() != x.order() {
            return Err(Error::DimensionMismatch(format!("{} produced a point of the wrong shape", self.name)));
        }
        Ok(y)
    }
}

pub fn from_fn<F>(name: &str, arity: usize, coarity: usize, f: F) -> MapRef
where
    F: Fn(&JetPoint) -> Result<JetPoint> + Send + Sync + 'static,
{
    Arc::new(FnMap {
        name: name.to_string(),
        arity,
        coarity,
        f: Box::new(f),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_map;

    #[test]
    fn pushforward_is_derivative() {
        let f = parse_map("x0^2*x1, sin(x0)", 2).unwrap();
        let x = JetPoint::new(1, 2, vec![1.5, -0.5, 1.0, 0.0]).unwrap();
        let y = JetMap::eval_jet(&f, &x).unwrap();
        assert_eq!(y.block(0), &[1.5 * 1.5 * -0.5, 1.5f64.sin()]);
        assert!((y.block(1)[0] - 2.0 * 1.5 * -0.5).abs() < 1e-15);
        assert!((y.block(1)[1] - 1.5f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn tangent_wrapper_matches_higher_order() {
        let f = smooth(parse_map("x0*x1, exp(x1)", 2).unwrap());
        let tf = tangent(&f, 1);
        let x = JetPoint::new(1, 4, (1..=8).map(|v| v as f64 / 8.0).collect()).unwrap();
        let direct = f.eval_jet(&x.reinterpret(2, 2).unwrap()).unwrap();
        assert_eq!(tf.eval_jet(&x).unwrap().flat(), direct.flat());
    }

    #[test]
    fn composition_checks_dimensions() {
        let f = smooth(parse_map("x0, x1", 2).unwrap());
        let g = smooth(parse_map("x0", 1).unwrap());
        assert!(compose(&f, &g).is_err());
        assert!(compose(&g, &select(2, &[1])).is_ok());
    }
}
