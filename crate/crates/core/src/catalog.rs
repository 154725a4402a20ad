//! Standard manifolds, forms and vector fields.
//!
//! Complex coordinates `z_k = x_k + i y_k` are stored as consecutive real
//! pairs `(x_k, y_k)`.

use crate::forms::{OneFormField, VectorFieldEntity};
use crate::jet::Jet1;
use crate::manifold::EmbeddedManifold;
use crate::maps::{QuadraticMap, Quadric};

/// Unit sphere `S^{n−1} ⊂ ℝⁿ`.
pub fn sphere_real(n: usize) -> EmbeddedManifold {
    let mut q = Quadric::new().c(-1.0);
    for i in 0..n {
        q = q.q(i, i, 1.0);
    }
    EmbeddedManifold::from_quadrics(format!("S{}", n - 1), QuadraticMap::new(n, vec![q]))
}

/// Unit sphere `S^{2n−1} ⊂ ℂⁿ`.
pub fn sphere(n: usize) -> EmbeddedManifold {
    let m = ellipsoid(&vec![1.0; n]);
    EmbeddedManifold::new(format!("S{}", 2 * n - 1), m.constraint().clone())
}

/// `E_a = {Σ a_j |z_j|² = 1} ⊂ ℂⁿ`.
pub fn ellipsoid(a: &[f64]) -> EmbeddedManifold {
    assert!(a.iter().all(|&w| w > 0.0), "ellipsoid weights must be positive");
    let q = Quadric::weighted_norm_sq(0, a).c(-1.0);
    EmbeddedManifold::from_quadrics(format!("E{a:?}"), QuadraticMap::new(2 * a.len(), vec![q]))
}

/// `dz − Σ yₖ dxₖ` on `ℝ^{2n+1}` with coordinates `(x₁, y₁, …, xₙ, yₙ, z)`.
pub fn standard_contact_form_euclidean(n: usize) -> OneFormField {
    let dim = 2 * n + 1;
    OneFormField::new(format!("dz-ydx[{dim}]"), dim, move |x| {
        let mut c = vec![Jet1::zero(); dim];
        for k in 0..n {
            c[2 * k] = -&x[2 * k + 1];
        }
        c[dim - 1] = Jet1::constant(1.0);
        c
    })
}

/// `√−1 Σ (z_j dz̄_j − z̄_j dz_j) = 2 Σ (x_j dy_j − y_j dx_j)` on `ℂⁿ`.
///
/// Restricts to the standard contact form on spheres and to `α_a` on
/// ellipsoids.
pub fn standard_contact_form(n: usize) -> OneFormField {
    rotation_form(n, 2.0).renamed("alpha_std")
}

/// `c · Σ (x_j dy_j − y_j dx_j)` on `ℂⁿ`.
pub fn rotation_form(n: usize, c: f64) -> OneFormField {
    OneFormField::new(format!("{c}*(xdy-ydx)"), 2 * n, move |x| {
        let mut out = Vec::with_capacity(2 * n);
        for k in 0..n {
            out.push(x[2 * k + 1].scale(-c));
            out.push(x[2 * k].scale(c));
        }
        out
    })
}

/// Rotation field `i z_k` of the `k`-th complex coordinate in `ℂⁿ`.
pub fn coordinate_rotation(n: usize, k: usize) -> VectorFieldEntity {
    weighted_rotation(&(0..n).map(|j| if j == k { 1.0 } else { 0.0 }).collect::<Vec<_>>())
}

/// `Σ w_j · i z_j`.
pub fn weighted_rotation(w: &[f64]) -> VectorFieldEntity {
    let w = w.to_vec();
    let n = w.len();
    VectorFieldEntity::new(format!("rot{w:?}"), 2 * n, move |x| {
        let mut out = Vec::with_capacity(2 * n);
        for k in 0..n {
            out.push(x[2 * k + 1].scale(-w[k]));
            out.push(x[2 * k].scale(w[k]));
        }
        out
    })
}

/// Closed-form Reeb field of [`standard_contact_form`] on `E_a`:
/// `½ Σ a_j · i z_j`.
pub fn ellipsoid_reeb(a: &[f64]) -> VectorFieldEntity {
    weighted_rotation(&a.iter().map(|w| 0.5 * w).collect::<Vec<_>>())
}

impl OneFormField {
    pub fn renamed(mut self, name: &str) -> Self {
        self.set_name(name);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn standard_form_on_rotation_field() {
        let a = standard_contact_form(2);
        let r = coordinate_rotation(2, 0).at(&DVector::from_vec(vec![0.6, 0.0, 0.0, 0.8]));
        // 2|z₁|² at (0.6, 0, 0, 0.8)
        let p = DVector::from_vec(vec![0.6, 0.0, 0.0, 0.8]);
        assert!((a.apply(&p, &r) - 0.72).abs() < 1e-15);
    }

    #[test]
    fn ellipsoid_reeb_has_unit_alpha() {
        let e = ellipsoid(&[1.0, 2.0, 3.0]);
        let a = standard_contact_form(3);
        let r = ellipsoid_reeb(&[1.0, 2.0, 3.0]);
        for p in e.sample(20, 5).unwrap().iter() {
            assert!((a.apply(p, &r.at(p)) - 1.0).abs() < 1e-10);
        }
    }
}
