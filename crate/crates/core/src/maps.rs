//! Smooth maps between ambient spaces whose Jacobians are themselves
//! jet-evaluable. Constraint functions and bundle projections are instances.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::jet::{self, Jet1};

pub trait SmoothMap: Send + Sync {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;

    fn eval_jet(&self, x: &[Jet1]) -> Vec<Jet1>;

    /// Jacobian rows evaluated in jet arithmetic, so that projections built
    /// from it can be differentiated once more.
    fn jacobian_jet(&self, x: &[Jet1]) -> Vec<Vec<Jet1>>;

    fn eval(&self, x: &[f64]) -> DVector<f64> {
        jet::values(&self.eval_jet(&jet::constants(x)))
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        jet::jacobian(&self.eval_jet(&jet::seed(x)), self.in_dim())
    }
}

/// One quadratic component `xᵀ Q x + lᵀ x + c`, stored sparsely.
#[derive(Clone, Debug, Default)]
pub struct Quadric {
    /// `(i, j, q)` contributes `q · x_i · x_j`.
    pub quad: Vec<(usize, usize, f64)>,
    pub linear: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Quadric {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn q(mut self, i: usize, j: usize, c: f64) -> Self {
        self.quad.push((i, j, c));
        self
    }

    pub fn l(mut self, i: usize, c: f64) -> Self {
        self.linear.push((i, c));
        self
    }

    pub fn c(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    /// `Σ w_k |z_k|²` over complex coordinates starting at real offset `offset`.
    pub fn weighted_norm_sq(offset: usize, weights: &[f64]) -> Self {
        let mut q = Quadric::new();
        for (k, &w) in weights.iter().enumerate() {
            let i = offset + 2 * k;
            q = q.q(i, i, w).q(i + 1, i + 1, w);
        }
        q
    }

    pub fn shifted(&self, by: usize) -> Self {
        Quadric {
            quad: self.quad.iter().map(|&(i, j, c)| (i + by, j + by, c)).collect(),
            linear: self.linear.iter().map(|&(i, c)| (i + by, c)).collect(),
            constant: self.constant,
        }
    }

    fn eval_jet(&self, x: &[Jet1]) -> Jet1 {
        let mut acc = Jet1::constant(self.constant);
        for &(i, j, c) in &self.quad {
            acc += (&x[i] * &x[j]).scale(c);
        }
        for &(i, c) in &self.linear {
            acc += x[i].scale(c);
        }
        acc
    }

    fn gradient_jet(&self, x: &[Jet1], n: usize) -> Vec<Jet1> {
        let mut g = vec![Jet1::zero(); n];
        for &(i, j, c) in &self.quad {
            g[i] += x[j].scale(c);
            g[j] += x[i].scale(c);
        }
        for &(i, c) in &self.linear {
            g[i] += Jet1::constant(c);
        }
        g
    }
}

/// A map whose components are all quadratic polynomials. Covers every shipped
/// constraint (spheres, ellipsoids, fiber products) and projection (Hopf maps,
/// coordinate projections).
#[derive(Clone, Debug)]
pub struct QuadraticMap {
    in_dim: usize,
    components: Vec<Quadric>,
}

impl QuadraticMap {
    pub fn new(in_dim: usize, components: Vec<Quadric>) -> Self {
        for q in &components {
            let max_idx = q
                .quad
                .iter()
                .flat_map(|&(i, j, _)| [i, j])
                .chain(q.linear.iter().map(|&(i, _)| i))
                .max();
            if let Some(m) = max_idx {
                assert!(m < in_dim, "quadric index {m} out of range for dimension {in_dim}");
            }
        }
        QuadraticMap { in_dim, components }
    }

    /// The map with no components (constraint of an open subset of ℝⁿ).
    pub fn empty(in_dim: usize) -> Self {
        QuadraticMap::new(in_dim, Vec::new())
    }

    /// Coordinate projection onto `[offset, offset + len)`.
    pub fn coordinate_projection(in_dim: usize, offset: usize, len: usize) -> Self {
        QuadraticMap::new(
            in_dim,
            (0..len).map(|k| Quadric::new().l(offset + k, 1.0)).collect(),
        )
    }

    pub fn components(&self) -> &[Quadric] {
        &self.components
    }

    /// Components of `self` on the first block and `other` on the second.
    pub fn product(&self, other: &QuadraticMap) -> Self {
        let mut comps = self.components.clone();
        comps.extend(other.components.iter().map(|q| q.shifted(self.in_dim)));
        QuadraticMap::new(self.in_dim + other.in_dim, comps)
    }

    /// Re-embeds the map as acting on the block at `offset` of a larger space.
    pub fn embedded(&self, offset: usize, in_dim: usize) -> Self {
        QuadraticMap::new(
            in_dim,
            self.components.iter().map(|q| q.shifted(offset)).collect(),
        )
    }
}

impl SmoothMap for QuadraticMap {
    fn in_dim(&self) -> usize {
        self.in_dim
    }

    fn out_dim(&self) -> usize {
        self.components.len()
    }

    fn eval_jet(&self, x: &[Jet1]) -> Vec<Jet1> {
        self.components.iter().map(|q| q.eval_jet(x)).collect()
    }

    fn jacobian_jet(&self, x: &[Jet1]) -> Vec<Vec<Jet1>> {
        self.components
            .iter()
            .map(|q| q.gradient_jet(x, self.in_dim))
            .collect()
    }
}

pub type SharedMap = Arc<dyn SmoothMap>;

/// Standard Hopf map `ℂ² → ℝ³` on the complex coordinates at real offset
/// `offset`: `(2 Re(u₁ū₂), 2 Im(u₁ū₂), |u₁|² − |u₂|²)`.
pub fn hopf_components(offset: usize) -> Vec<Quadric> {
    let (x1, y1, x2, y2) = (offset, offset + 1, offset + 2, offset + 3);
    vec![
        Quadric::new().q(x1, x2, 2.0).q(y1, y2, 2.0),
        Quadric::new().q(y1, x2, 2.0).q(x1, y2, -2.0),
        Quadric::new()
            .q(x1, x1, 1.0)
            .q(y1, y1, 1.0)
            .q(x2, x2, -1.0)
            .q(y2, y2, -1.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobian_jet_matches_seeded_jacobian() {
        let m = QuadraticMap::new(4, hopf_components(0));
        let x = [0.3, -0.2, 0.5, 0.7];
        let j = m.jacobian(&x);
        let jj = m.jacobian_jet(&jet::constants(&x));
        for r in 0..3 {
            for c in 0..4 {
                assert!((j[(r, c)] - jj[r][c].value).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn hopf_lands_on_unit_sphere() {
        let m = QuadraticMap::new(4, hopf_components(0));
        let u = DVector::from_vec(vec![0.5, 0.5, -0.5, 0.5]);
        let b = m.eval(u.as_slice());
        assert!((b.norm() - 1.0).abs() < 1e-15);
    }
}
