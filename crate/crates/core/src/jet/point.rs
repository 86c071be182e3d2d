use rand::Rng;

use super::number::{Jet, MAX_ORDER};
use crate::error::{Error, Result};
use crate::expr::SampleBox;

/// A point of `T^n(ℝ^k)`, stored as `2^n` blocks of `k` coordinates.
///
/// Block `S` (a bitmask over indices `1..=n`, bit `i - 1` for index `i`)
/// sits at `data[S*k .. S*k + k]`. Index 1 is the innermost tangent
/// direction and index `n` the outermost, so the flat vector is also the
/// coordinate vector of `T(T^{n-1} ℝ^k)` as (base half, tangent half).
#[derive(Clone, Debug, PartialEq)]
pub struct JetPoint {
    order: usize,
    dim: usize,
    data: Vec<f64>,
}

impl JetPoint {
    pub fn new(order: usize, dim: usize, data: Vec<f64>) -> Result<JetPoint> {
        if data.len() != (1 << order) * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} values cannot form a point of T^{order}(R^{dim})",
                data.len()
            )));
        }
        Ok(JetPoint { order, dim, data })
    }

    /// The point `x` with all tangent blocks zero.
    pub fn from_base(order: usize, x: &[f64]) -> JetPoint {
        let mut data = vec![0.0; (1 << order) * x.len()];
        data[..x.len()].copy_from_slice(x);
        JetPoint {
            order,
            dim: x.len(),
            data,
        }
    }

    /// Base point from `base` and every tangent block uniform in `[-1, 1]`.
    pub fn random<R: Rng>(order: usize, base: &[f64], rng: &mut R) -> JetPoint {
        let mut p = JetPoint::from_base(order, base);
        for v in p.data[base.len()..].iter_mut() {
            *v = rng.gen_range(-1.0..=1.0);
        }
        p
    }

    /// Random point with base drawn from `b`.
    pub fn random_in<R: Rng>(order: usize, b: &SampleBox, rng: &mut R) -> JetPoint {
        let base: Vec<f64> = (0..b.dim()).map(|i| rng.gen_range(b.lo[i]..=b.hi[i])).collect();
        JetPoint::random(order, &base, rng)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flat(&self) -> &[f64] {
        &self.data
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.data
    }

    pub fn base(&self) -> &[f64] {
        &self.data[..self.dim]
    }

    pub fn block(&self, s: usize) -> &[f64] {
        &self.data[s * self.dim..(s + 1) * self.dim]
    }

    pub fn block_mut(&mut self, s: usize) -> &mut [f64] {
        &mut self.data[s * self.dim..(s + 1) * self.dim]
    }

    pub fn blocks(&self) -> usize {
        1 << self.order
    }

    /// Same data viewed as a point of `T^order(ℝ^dim)`; the total size must
    /// match. Moving tangent indices from the space into the order is free in
    /// this layout.
    pub fn reinterpret(&self, order: usize, dim: usize) -> Result<JetPoint> {
        JetPoint::new(order, dim, self.data.clone())
    }

    /// Coordinate `c` as a jet.
    pub fn coordinate(&self, c: usize) -> Result<Jet> {
        if self.order > MAX_ORDER {
            return Err(Error::OrderTooHigh(self.order));
        }
        let mut j = Jet::constant(self.order, 0.0);
        for s in 0..self.blocks() {
            j.set_coeff(s, self.data[s * self.dim + c]);
        }
        Ok(j)
    }

    pub fn to_jets(&self) -> Result<Vec<Jet>> {
        (0..self.dim).map(|c| self.coordinate(c)).collect()
    }

    pub fn from_jets(order: usize, jets: &[Jet]) -> JetPoint {
        let dim = jets.len();
        let mut data = vec![0.0; (1 << order) * dim];
        for (c, j) in jets.iter().enumerate() {
            for s in 0..(1 << order) {
                data[s * dim + c] = j.coeff(s);
            }
        }
        JetPoint { order, dim, data }
    }

    /// Blockwise concatenation: the point of `T^n(ℝ^{k_1} × ℝ^{k_2} × ...)`.
    pub fn concat(parts: &[JetPoint]) -> Result<JetPoint> {
        let order = parts.first().map(|p| p.order).unwrap_or(0);
        if parts.iter().any(|p| p.order != order) {
            return Err(Error::DimensionMismatch("concatenating jets of different orders".into()));
        }
        let dim: usize = parts.iter().map(|p| p.dim).sum();
        let mut data = Vec::with_capacity((1 << order) * dim);
        for s in 0..(1 << order) {
            for p in parts {
                data.extend_from_slice(p.block(s));
            }
        }
        Ok(JetPoint { order, dim, data })
    }

    /// Inverse of [`JetPoint::concat`].
    pub fn split(&self, dims: &[usize]) -> Result<Vec<JetPoint>> {
        if dims.iter().sum::<usize>() != self.dim {
            return Err(Error::DimensionMismatch(format!("cannot split dimension {} as {dims:?}", self.dim)));
        }
        let mut out: Vec<JetPoint> = dims
            .iter()
            .map(|&d| JetPoint {
                order: self.order,
                dim: d,
                data: Vec::with_capacity((1 << self.order) * d),
            })
            .collect();
        for s in 0..self.blocks() {
            let mut off = 0;
            for (p, &d) in out.iter_mut().zip(dims) {
                p.data.extend_from_slice(&self.block(s)[off..off + d]);
                off += d;
            }
        }
        Ok(out)
    }

    /// Coordinates `indices` of every block.
    pub fn select(&self, indices: &[usize]) -> JetPoint {
        let mut data = Vec::with_capacity(self.blocks() * indices.len());
        for s in 0..self.blocks() {
            let b = self.block(s);
            data.extend(indices.iter().map(|&i| b[i]));
        }
        JetPoint {
            order: self.order,
            dim: indices.len(),
            data,
        }
    }

    /// Largest absolute coordinate.
    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concat_split_round_trip() {
        let a = JetPoint::new(1, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = JetPoint::new(1, 1, vec![5.0, 6.0]).unwrap();
        let c = JetPoint::concat(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(c.flat(), &[1.0, 2.0, 5.0, 3.0, 4.0, 6.0]);
        assert_eq!(c.split(&[2, 1]).unwrap(), vec![a, b]);
    }

    #[test]
    fn jets_round_trip() {
        let p = JetPoint::new(2, 2, (0..8).map(f64::from).collect()).unwrap();
        let q = JetPoint::from_jets(2, &p.to_jets().unwrap());
        assert_eq!(p, q);
    }
}
