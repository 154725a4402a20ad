//! Compatible metrics, the Killing test for the Reeb field, and the metric on
//! associated bundles assembled from a fat connection and a fiber metric.
//!
//! A compatible metric is built from a contact form and a background metric
//! by the polar construction on `ξ`: with `S = B_ξ^{1/2}` and
//! `K = S⁻¹ dα S⁻¹`, put `Q = (−K²)^{1/2}`, `g_ξ = S Q S` and
//! `J = S⁻¹ K Q⁻¹ S`. Then `g(u, Jv) = dα(u, v)`, `J² = −1` on `ξ`, and
//! `g = α ⊗ α + g_ξ(π_ξ ·, π_ξ ·)` where `π_ξ` projects along the Reeb field.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::bundles::{self, AssociatedContactBundle};
use crate::catalog;
use crate::error::{GeomError, Result};
use crate::forms::{self, FnField, LieDerivativeConfig, OneFormField, ReebField, TensorField, TensorValue, DEFAULT_PF_TOL};
use crate::liealg::LinearAction;
use crate::linalg;
use crate::manifold::EmbeddedManifold;

/// An ambient Riemannian metric given by its Gram matrix.
pub trait BackgroundMetric: Send + Sync {
    fn name(&self) -> String;
    fn matrix(&self, p: &DVector<f64>) -> DMatrix<f64>;
}

#[derive(Clone, Copy, Debug)]
pub struct EuclideanBackground;

impl BackgroundMetric for EuclideanBackground {
    fn name(&self) -> String {
        "euclidean".into()
    }

    fn matrix(&self, p: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(p.len(), p.len())
    }
}

/// `I + κ uuᵀ` for a fixed ambient direction `u`.
#[derive(Clone, Debug)]
pub struct RankOneBackground {
    pub kappa: f64,
    pub direction: DVector<f64>,
}

impl RankOneBackground {
    /// `I + κ e_k e_kᵀ` in dimension `n`.
    pub fn coordinate(n: usize, k: usize, kappa: f64) -> Self {
        let mut direction = DVector::zeros(n);
        direction[k] = 1.0;
        RankOneBackground { kappa, direction }
    }
}

impl BackgroundMetric for RankOneBackground {
    fn name(&self) -> String {
        format!("identity+{}uu^T", self.kappa)
    }

    fn matrix(&self, _p: &DVector<f64>) -> DMatrix<f64> {
        let n = self.direction.len();
        DMatrix::identity(n, n) + &self.direction * self.direction.transpose() * self.kappa
    }
}

/// `(g, J)` from a positive definite `b` and a nondegenerate skew `ω`, with
/// `g(u, Jv) = ω(u, v)` and `J² = −1`.
pub fn polar(b: &DMatrix<f64>, omega: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (s_inv, s) = linalg::spd_sqrt_pair(b).ok_or(GeomError::PolarBreakdown)?;
    let k = &s_inv * omega * &s_inv;
    let k = (&k - k.transpose()) * 0.5;
    let (q_inv, q) = linalg::spd_sqrt_pair(&(k.transpose() * &k)).ok_or(GeomError::PolarBreakdown)?;
    let g = &s * &q * &s;
    let g = (&g + g.transpose()) * 0.5;
    let j = s_inv * k * q_inv * s;
    Ok((g, j))
}

/// A compatible metric at one point, in the coordinates of a tangent frame.
#[derive(Clone, Debug)]
pub struct CompatibleMetric {
    /// Orthonormal ambient columns spanning `T_pM`.
    pub frame: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub reeb: DVector<f64>,
    alpha: DVector<f64>,
    d_alpha: DMatrix<f64>,
}

impl CompatibleMetric {
    pub fn build(alpha: &OneFormField, p: &DVector<f64>, frame: &DMatrix<f64>, background: &DMatrix<f64>) -> Result<Self> {
        let (a_amb, d) = alpha.jet_at(p);
        let a = frame.transpose() * a_amb;
        let w = frame.transpose() * (d.transpose() - &d) * frame;
        let b = frame.transpose() * background * frame;
        let r = frame.transpose() * forms::reeb_on_frame(alpha, p, frame, DEFAULT_PF_TOL)?;
        let k = frame.ncols();
        let (x, _) = linalg::null_space(&DMatrix::from_row_slice(1, k, a.as_slice()), 1e-12);
        let (g_xi, j_xi) = polar(&(x.transpose() * &b * &x), &(x.transpose() * &w * &x))?;
        let proj = DMatrix::identity(k, k) - &r * a.transpose();
        let xp = x.transpose() * &proj;
        let g = &a * a.transpose() + xp.transpose() * g_xi * &xp;
        let j = &x * j_xi * xp;
        Ok(CompatibleMetric {
            frame: frame.clone(),
            g: (&g + g.transpose()) * 0.5,
            j,
            reeb: r,
            alpha: a,
            d_alpha: w,
        })
    }

    /// Frame coordinates of ambient vectors (tangential part only).
    pub fn coords(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        self.frame.transpose() * v
    }

    pub fn on(&self, vectors: &DMatrix<f64>) -> DMatrix<f64> {
        let c = self.coords(vectors);
        c.transpose() * &self.g * c
    }

    /// `max |g(u, Jv) − dα(u, v)|` over the frame.
    pub fn compatibility_residual(&self) -> f64 {
        (&self.g * &self.j - &self.d_alpha).amax()
    }

    /// `max |J² + π_ξ|`.
    pub fn complex_structure_residual(&self) -> f64 {
        let k = self.g.nrows();
        let proj = DMatrix::identity(k, k) - &self.reeb * self.alpha.transpose();
        (&self.j * &self.j + proj).amax()
    }

    /// `max |g(R, ·) − α|`.
    pub fn reeb_dual_residual(&self) -> f64 {
        (&self.g * &self.reeb - &self.alpha).amax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_symmetric_eigenvalue(&self.g)
    }
}

/// The compatible metric of `(M, α)` relative to a background metric.
#[derive(Clone)]
pub struct CompatibleMetricField {
    pub manifold: EmbeddedManifold,
    pub alpha: OneFormField,
    pub background: Arc<dyn BackgroundMetric>,
}

impl std::fmt::Debug for CompatibleMetricField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CompatibleMetricField({}, {})", self.alpha.name(), self.background.name())
    }
}

impl CompatibleMetricField {
    pub fn new(manifold: EmbeddedManifold, alpha: OneFormField, background: Arc<dyn BackgroundMetric>) -> Self {
        CompatibleMetricField {
            manifold,
            alpha,
            background,
        }
    }

    pub fn at(&self, p: &DVector<f64>) -> Result<CompatibleMetric> {
        let frame = self.manifold.tangent_frame(p)?.columns;
        CompatibleMetric::build(&self.alpha, p, &frame, &self.background.matrix(p))
    }
}

impl TensorField for CompatibleMetricField {
    fn rank(&self) -> usize {
        2
    }

    fn eval_on(&self, p: &DVector<f64>, vectors: &DMatrix<f64>) -> Result<TensorValue> {
        Ok(TensorValue::Bilinear(self.at(p)?.on(vectors)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KillingReport {
    pub max_residual: f64,
    pub witness: Vec<f64>,
}

fn worst_of(points: &[DVector<f64>], vals: Vec<f64>) -> KillingReport {
    let (i, v) = vals
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) });
    KillingReport {
        max_residual: v,
        witness: points.get(i).map(|p| p.iter().copied().collect()).unwrap_or_default(),
    }
}

/// `max |L_R g|` on tangent frames at `points`.
pub fn killing_residual(metric: &CompatibleMetricField, points: &[DVector<f64>], cfg: LieDerivativeConfig) -> Result<KillingReport> {
    let field = ReebField {
        alpha: &metric.alpha,
        manifold: &metric.manifold,
    };
    let vals = points
        .par_iter()
        .map(|p| {
            let frame = metric.manifold.tangent_frame(p)?.columns;
            Ok(forms::lie_derivative_tensor(metric, &field, p, &frame, Some(&metric.manifold), cfg)?.max_abs())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(worst_of(points, vals))
}

/// The metric on `P ×_G F` built from the connection and a compatible fiber
/// metric, represented as a basic tensor on `P × F`.
///
/// A vector `(y_P, y_F)` splits as `h = y_P − (A y_P)_P` and
/// `w = y_F + (A y_P)_F`; then `g(y, y') = g_H(h, h') + g_F(w, w')`. The
/// horizontal part `g_H` is the polar metric of `⟨Ψ(f), dA⟩` relative to the
/// pulled-back base metric, so it depends on the fiber point.
#[derive(Clone, Debug)]
pub struct AssociatedMetric {
    pub assoc: AssociatedContactBundle,
    pub fiber_metric: CompatibleMetricField,
}

impl AssociatedMetric {
    pub fn new(assoc: AssociatedContactBundle, background: Arc<dyn BackgroundMetric>) -> Self {
        let fiber_metric = CompatibleMetricField::new(assoc.fiber.clone(), assoc.alpha_fiber.clone(), background);
        AssociatedMetric { assoc, fiber_metric }
    }

    /// `(H, g_H)` with `H` an orthonormal horizontal frame at `p`.
    pub fn horizontal_block(&self, p: &DVector<f64>, f: &DVector<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let bundle = &self.assoc.bundle;
        let h = bundle.horizontal_frame(p)?;
        let dh = bundle.projection_jacobian(p) * &h;
        let psi = self.assoc.fiber_moment(f);
        let n = bundle.total_dim();
        let curv = bundle
            .connection
            .iter()
            .zip(psi.coeffs.iter())
            .fold(DMatrix::zeros(n, n), |acc, (a, &s)| acc + a.d_matrix(p) * s);
        let (g, _) = polar(&(dh.transpose() * dh), &(h.transpose() * curv * &h))?;
        Ok((h, g))
    }

    /// `(h, w)` for each column of `vectors`.
    pub fn split_vectors(&self, x: &DVector<f64>, vectors: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let (p, f) = self.assoc.split(x);
        let np = self.assoc.np();
        let nf = f.len();
        let bundle = &self.assoc.bundle;
        let conn = bundle.connection_matrix(&p);
        let orbit_p = bundle.right_action.orbit_matrix(&p);
        let orbit_f = self.assoc.fiber_action.orbit_matrix(&f);
        let yp = vectors.rows(0, np);
        let yf = vectors.rows(np, nf);
        let c = &conn * yp;
        (yp - &orbit_p * &c, yf + &orbit_f * &c)
    }

    pub fn matrix_on(&self, x: &DVector<f64>, vectors: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let (p, f) = self.assoc.split(x);
        let (h, w) = self.split_vectors(x, vectors);
        let (hf, gh) = self.horizontal_block(&p, &f)?;
        let ch = hf.transpose() * h;
        Ok(ch.transpose() * gh * ch + self.fiber_metric.at(&f)?.on(&w))
    }

    /// `max |g(R, ·) − α_tot|` on the quotient frame.
    pub fn reeb_dual_residual(&self, x: &DVector<f64>) -> Result<f64> {
        let q = self.assoc.quotient_frame(x)?;
        let r = self.assoc.reeb(x)?;
        let mut cols = DMatrix::zeros(x.len(), q.ncols() + 1);
        cols.set_column(0, &r);
        cols.view_mut((0, 1), (x.len(), q.ncols())).copy_from(&q);
        let g = self.matrix_on(x, &cols)?;
        let a = q.transpose() * self.assoc.alpha_tot.at(x);
        Ok((g.row(0).columns(1, q.ncols()).transpose() - a).amax().max((g[(0, 0)] - 1.0).abs()))
    }

    /// `max |g(X_diag, ·)|` over orbit directions against the tangent frame.
    pub fn basic_residual(&self, x: &DVector<f64>) -> Result<f64> {
        let orbit = self.assoc.diagonal_orbit(x);
        let t = self.assoc.total.tangent_frame(x)?.columns;
        let mut cols = DMatrix::zeros(x.len(), orbit.ncols() + t.ncols());
        cols.view_mut((0, 0), (x.len(), orbit.ncols())).copy_from(&orbit);
        cols.view_mut((0, orbit.ncols()), (x.len(), t.ncols())).copy_from(&t);
        Ok(self.matrix_on(x, &cols)?.rows(0, orbit.ncols()).amax())
    }

    /// Smallest eigenvalue on the quotient frame.
    pub fn min_eigenvalue(&self, x: &DVector<f64>) -> Result<f64> {
        let q = self.assoc.quotient_frame(x)?;
        Ok(linalg::min_symmetric_eigenvalue(&self.matrix_on(x, &q)?))
    }
}

impl TensorField for AssociatedMetric {
    fn rank(&self) -> usize {
        2
    }

    fn eval_on(&self, p: &DVector<f64>, vectors: &DMatrix<f64>) -> Result<TensorValue> {
        Ok(TensorValue::Bilinear(self.matrix_on(p, vectors)?))
    }
}

/// `max |L_R g|` on quotient frames for the associated metric, where `R` is
/// the Reeb representative orthogonal to the diagonal orbits.
pub fn killing_residual_associated(metric: &AssociatedMetric, points: &[DVector<f64>], cfg: LieDerivativeConfig) -> Result<KillingReport> {
    let assoc = &metric.assoc;
    let field = FnField(|x: &DVector<f64>| assoc.reeb(x));
    let vals = points
        .par_iter()
        .map(|x| {
            let q = assoc.quotient_frame(x)?;
            Ok(forms::lie_derivative_tensor(metric, &field, x, &q, Some(&assoc.total), cfg)?.max_abs())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(worst_of(points, vals))
}

/// `min_f ⟨Ψ(f), X⟩` over fiber points, with the minimizing point.
pub fn positivity_floor(assoc: &AssociatedContactBundle, x: &DVector<f64>, fiber_points: &[DVector<f64>]) -> (f64, Vec<f64>) {
    fiber_points
        .iter()
        .map(|f| (assoc.fiber_moment(f).coeffs.dot(x), f))
        .fold((f64::INFINITY, Vec::new()), |(m, w), (v, f)| {
            if v < m {
                (v, f.iter().copied().collect())
            } else {
                (m, w)
            }
        })
}

/// `max |g_H(p, f_i) − g_H(p, f_0)|` over fiber points, for a fixed `p`.
pub fn horizontal_block_variation(metric: &AssociatedMetric, p: &DVector<f64>, fiber_points: &[DVector<f64>]) -> Result<f64> {
    let Some(f0) = fiber_points.first() else {
        return Ok(0.0);
    };
    let (_, g0) = metric.horizontal_block(p, f0)?;
    let mut worst: f64 = 0.0;
    for f in &fiber_points[1..] {
        worst = worst.max((metric.horizontal_block(p, f)?.1 - &g0).amax());
    }
    Ok(worst)
}

/// An associated contact bundle with its metric and a positive algebra
/// element `X` (`⟨Ψ(f), X⟩ > 0` for all `f`).
#[derive(Clone, Debug)]
pub struct AssociatedScenario {
    pub name: String,
    pub metric: AssociatedMetric,
    pub positive_element: DVector<f64>,
}

impl AssociatedScenario {
    pub fn assoc(&self) -> &AssociatedContactBundle {
        &self.metric.assoc
    }
}

/// Hopf bundle with fiber `(S³, α_std)` under the diagonal circle (`n = 1`),
/// or the `T²` fiber product over `S²` with fiber `(E_(1,2), α_std)` under
/// the coordinatewise torus (`n = 2`).
pub fn associated_scenario(n: usize, seed: u64) -> Result<AssociatedScenario> {
    let (name, bundle, weights, action) = match n {
        1 => ("yamazaki_n1", bundles::hopf_bundle(), vec![1.0, 1.0], LinearAction::circle_diagonal(2)),
        2 => (
            "yamazaki_n2",
            bundles::fiber_product_bundle(),
            vec![1.0, 2.0],
            LinearAction::torus_coordinatewise(2),
        ),
        _ => return Err(GeomError::InvalidInput(format!("no associated scenario for n = {n}"))),
    };
    let fiber = catalog::ellipsoid(&weights);
    let alpha_f = catalog::standard_contact_form(2);
    let fs = fiber.sample(16, seed)?;
    let assoc = bundles::assemble_alpha_tot(&bundle, &fiber, &alpha_f, &action, &fs, seed)?;
    let positive_element = if n == 1 {
        DVector::from_element(1, 0.5)
    } else {
        DVector::from_iterator(2, weights.iter().map(|a| a / 2.0))
    };
    Ok(AssociatedScenario {
        name: name.into(),
        metric: AssociatedMetric::new(assoc, Arc::new(EuclideanBackground)),
        positive_element,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::sample_pairs;

    #[test]
    fn polar_on_standard_symplectic_plane() {
        let b = DMatrix::identity(2, 2);
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, -3.0, 0.0]);
        let (g, j) = polar(&b, &w).unwrap();
        assert!((g.clone() - DMatrix::identity(2, 2) * 3.0).amax() < 1e-14);
        assert!((&g * &j - &w).amax() < 1e-14);
        assert!((&j * &j + DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn polar_breaks_on_degenerate_form() {
        let w = DMatrix::zeros(2, 2);
        assert_eq!(polar(&DMatrix::identity(2, 2), &w).unwrap_err(), GeomError::PolarBreakdown);
    }

    #[test]
    fn sphere_metric_is_compatible() {
        let m = catalog::sphere(2);
        let field = CompatibleMetricField::new(m.clone(), catalog::standard_contact_form(2), Arc::new(EuclideanBackground));
        for p in m.sample(20, 4).unwrap().iter() {
            let c = field.at(p).unwrap();
            assert!(c.compatibility_residual() < 1e-12);
            assert!(c.complex_structure_residual() < 1e-12);
            assert!(c.reeb_dual_residual() < 1e-12);
            assert!(c.min_eigenvalue() > 0.0);
        }
    }

    #[test]
    fn hopf_associated_metric_is_basic_and_dual_to_alpha() {
        let sc = associated_scenario(1, 3).unwrap();
        for x in sample_pairs(sc.assoc(), 8, 5).unwrap() {
            assert!(sc.metric.basic_residual(&x).unwrap() < 1e-12);
            assert!(sc.metric.reeb_dual_residual(&x).unwrap() < 1e-10);
            assert!(sc.metric.min_eigenvalue(&x).unwrap() > 0.0);
        }
    }
}
