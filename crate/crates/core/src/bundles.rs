//! Principal bundles with connections, curvature, fatness, associated contact
//! bundles, the contact connection and parallel transport.
//!
//! Structure groups act on total spaces linearly. The right action `p ↦ p·g`
//! is stored as a [`LinearAction`]; every shipped bundle has an abelian
//! structure group, where right and left actions coincide. The associated
//! bundle `P ×_G F` is represented by `P × F` with the basic form `α_tot`,
//! evaluated on frames orthogonal to the diagonal orbits.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::contact;
use crate::error::{GeomError, Result};
use crate::forms::{self, OneFormField, PfaffianEval, DEFAULT_PF_TOL};
use crate::jet::{self, Jet1};
use crate::liealg::{CoadjointElement, LinearAction, MatrixLieGroup};
use crate::linalg;
use crate::manifold::{EmbeddedManifold, SampleSet};
use crate::maps::{self, QuadraticMap, Quadric, SharedMap};

/// Tolerance for `|A(u#)|` when curvature inputs must be horizontal.
pub const HORIZONTAL_TOL: f64 = 1e-8;
/// Default relative threshold of the fatness determinant test.
pub const DEFAULT_FAT_TOL: f64 = 1e-6;

#[derive(Clone)]
pub struct PrincipalBundle {
    pub name: String,
    pub total: EmbeddedManifold,
    pub group: Arc<MatrixLieGroup>,
    /// `p ↦ p·g`.
    pub right_action: LinearAction,
    pub base: EmbeddedManifold,
    pub projection: SharedMap,
    /// Components `A_k` of the connection in the algebra basis.
    pub connection: Vec<OneFormField>,
}

impl std::fmt::Debug for PrincipalBundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PrincipalBundle({})", self.name)
    }
}

/// `u − Jᵀ(JJᵀ)⁻¹J u`: projection onto the tangent space of a level set, in
/// jet arithmetic so the projected field can be differentiated.
fn tangent_projection_jet(constraint: &SharedMap, b: &[Jet1], u: &[Jet1]) -> Option<Vec<Jet1>> {
    if constraint.out_dim() == 0 {
        return Some(u.to_vec());
    }
    let j = constraint.jacobian_jet(b);
    let ju: Vec<Jet1> = j.iter().map(|row| jet::dot(row, u)).collect();
    let gram: Vec<Vec<Jet1>> = j.iter().map(|r| j.iter().map(|s| jet::dot(r, s)).collect()).collect();
    let y = jet::solve(gram, ju, 1e-12)?;
    Some(
        (0..u.len())
            .map(|c| {
                let mut acc = u[c].clone();
                for (row, yk) in j.iter().zip(&y) {
                    acc -= &(&row[c] * yk);
                }
                acc
            })
            .collect(),
    )
}

impl PrincipalBundle {
    pub fn total_dim(&self) -> usize {
        self.total.ambient_dim()
    }

    pub fn fundamental(&self, i: usize, p: &DVector<f64>) -> DVector<f64> {
        self.right_action.induced_vector_field(&self.group.basis_vector(i), p)
    }

    /// Rows `A_k(p)` as ambient covectors.
    pub fn connection_matrix(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let n = self.total_dim();
        let mut m = DMatrix::zeros(self.connection.len(), n);
        for (k, a) in self.connection.iter().enumerate() {
            m.set_row(k, &a.at(p).transpose());
        }
        m
    }

    pub fn connection_value(&self, p: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.connection_matrix(p) * v
    }

    pub fn project(&self, p: &DVector<f64>) -> DVector<f64> {
        self.projection.eval(p.as_slice())
    }

    pub fn projection_jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
        self.projection.jacobian(p.as_slice())
    }

    /// Orthonormal basis of `ℋ^A_p = T_pP ∩ ker A_p`.
    pub fn horizontal_frame(&self, p: &DVector<f64>) -> Result<DMatrix<f64>> {
        let t = self.total.tangent_frame(p)?.columns;
        let at = self.connection_matrix(p) * &t;
        let (ns, _) = linalg::null_space(&at, 1e-10);
        Ok(&t * ns)
    }

    /// The horizontal lift of a base vector `u ∈ T_{π(p)}B`.
    pub fn horizontal_lift(&self, p: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.total_dim();
        let dc = self.total.jacobian(p.as_slice());
        let a = self.connection_matrix(p);
        let dpi = self.projection_jacobian(p);
        let rows = dc.nrows() + a.nrows() + dpi.nrows();
        let mut sys = DMatrix::zeros(rows, n);
        sys.view_mut((0, 0), (dc.nrows(), n)).copy_from(&dc);
        sys.view_mut((dc.nrows(), 0), (a.nrows(), n)).copy_from(&a);
        sys.view_mut((dc.nrows() + a.nrows(), 0), (dpi.nrows(), n)).copy_from(&dpi);
        let mut rhs = DVector::zeros(rows);
        rhs.rows_mut(dc.nrows() + a.nrows(), dpi.nrows()).copy_from(u);
        linalg::lstsq(&sys, &rhs, 1e-12).ok_or(GeomError::FrameExtensionFailure)
    }

    /// Horizontal lift of the base field `b ↦ proj_{T_bB}(u0)` evaluated in
    /// jet arithmetic at `x`.
    fn lift_field_jet(&self, x: &[Jet1], u0: &[f64]) -> Option<Vec<Jet1>> {
        let b = self.projection.eval_jet(x);
        let u = tangent_projection_jet(self.base.constraint(), &b, &jet::constants(u0))?;
        let mut rows: Vec<Vec<Jet1>> = self.total.constraint().jacobian_jet(x);
        let mut rhs = vec![Jet1::zero(); rows.len()];
        for a in &self.connection {
            rows.push(a.eval_jet(x));
            rhs.push(Jet1::zero());
        }
        for (r, ui) in self.projection.jacobian_jet(x).into_iter().zip(u) {
            rows.push(r);
            rhs.push(ui);
        }
        jet::solve_least_squares(&rows, &rhs, 1e-13)
    }

    /// `max |A(X_P) − X|` over basis elements and samples.
    pub fn reproduction_residual(&self, samples: &SampleSet) -> f64 {
        let d = self.group.dim();
        samples
            .points
            .par_iter()
            .map(|p| {
                let mut worst: f64 = 0.0;
                for i in 0..d {
                    let v = self.connection_value(p, &self.fundamental(i, p));
                    worst = worst.max((v - self.group.basis_vector(i)).amax());
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `max |A_{p·g}(dR_g v) − Ad(g⁻¹)A_p(v)|` over tangent frames.
    pub fn equivariance_residual(&self, samples: &SampleSet, per_point: usize, seed: u64) -> Result<f64> {
        let rows = samples
            .points
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let t = self.total.tangent_frame(p)?.columns;
                let ap = self.connection_matrix(p) * &t;
                let mut worst: f64 = 0.0;
                for _ in 0..per_point {
                    let g = self.group.random_element(&mut rng);
                    let rho = self.right_action.matrix(&g);
                    let lhs = self.connection_matrix(&(&rho * p)) * &rho * &t;
                    let ginv = self.group.inverse(&g);
                    for c in 0..t.ncols() {
                        let rhs = self.group.adjoint(&ginv, &ap.column(c).into_owned());
                        worst = worst.max((lhs.column(c) - rhs).amax());
                    }
                }
                Ok(worst)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(rows.into_iter().fold(0.0, f64::max))
    }

    /// `max |π(p·g) − π(p)|` and the minimal rank of `dπ` on `T_pP`.
    pub fn projection_checks(&self, samples: &SampleSet, seed: u64) -> Result<(f64, usize)> {
        let rows = samples
            .points
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let g = self.group.random_element(&mut rng);
                let r = (self.project(&self.right_action.act(&g, p)) - self.project(p)).amax();
                let t = self.total.tangent_frame(p)?.columns;
                let rank = linalg::rank(&(self.projection_jacobian(p) * t), 1e-8, 1e-12);
                Ok((r, rank))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(rows
            .into_iter()
            .fold((0.0, usize::MAX), |(r, k), (r2, k2)| (r.max(r2), k.min(k2))))
    }

    /// `Ω(u#, v#) = dA(u#, v#) + [A(u#), A(v#)]` on horizontal inputs.
    pub fn curvature_structure_eq(&self, p: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        let au = self.connection_value(p, u);
        let av = self.connection_value(p, v);
        let scale = u.norm().max(v.norm()).max(1.0);
        let res = au.amax().max(av.amax());
        if self.group.dim() > 0 && res > HORIZONTAL_TOL * scale {
            return Err(GeomError::NotHorizontal { residual: res });
        }
        let d = DVector::from_iterator(
            self.connection.len(),
            self.connection.iter().map(|a| forms::eval_d(a, p, u, v)),
        );
        Ok(d + self.group.bracket(&au, &av))
    }

    /// `[u#, v#] − [u, v]#` at `p`, extending `u, v` to base fields by
    /// constant ambient coefficients projected onto `TB`.
    pub fn curvature_bracket_def(&self, p: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        let x = jet::seed(p.as_slice());
        let n = self.total_dim();
        let uh = self.lift_field_jet(&x, u.as_slice()).ok_or(GeomError::FrameExtensionFailure)?;
        let vh = self.lift_field_jet(&x, v.as_slice()).ok_or(GeomError::FrameExtensionFailure)?;
        let (uval, du) = (jet::values(&uh), jet::jacobian(&uh, n));
        let (vval, dv) = (jet::values(&vh), jet::jacobian(&vh, n));
        let lifted_bracket = &dv * &uval - &du * &vval;

        let b = self.project(p);
        let bj = jet::seed(b.as_slice());
        let m = b.len();
        let ub = tangent_projection_jet(self.base.constraint(), &bj, &jet::constants(u.as_slice()))
            .ok_or(GeomError::FrameExtensionFailure)?;
        let vb = tangent_projection_jet(self.base.constraint(), &bj, &jet::constants(v.as_slice()))
            .ok_or(GeomError::FrameExtensionFailure)?;
        let base_bracket = jet::jacobian(&vb, m) * jet::values(&ub) - jet::jacobian(&ub, m) * jet::values(&vb);
        let lift = self.horizontal_lift(p, &base_bracket)?;
        Ok(lifted_bracket - lift)
    }

    /// Coefficients `c` with `V = Σ c_k (X_k)_P^left`, where the left action
    /// is `g·p = p·g⁻¹`, so `(X)_P^left = −(X)_P^right`.
    pub fn vertical_to_algebra_left(&self, p: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let orbit = self.right_action.orbit_matrix(p);
        let c = linalg::lstsq(&orbit, v, 1e-12).expect("svd solve");
        -c
    }

    /// Skew matrix `⟨μ, Ω(hᵢ, hⱼ)⟩` over an orthonormal horizontal frame.
    pub fn fatness_matrix(&self, p: &DVector<f64>, mu: &CoadjointElement) -> Result<DMatrix<f64>> {
        let h = self.horizontal_frame(p)?;
        let k = h.ncols();
        let mut w = DMatrix::zeros(k, k);
        let pairing = self
            .connection
            .iter()
            .zip(mu.coeffs.iter())
            .fold(DMatrix::zeros(self.total_dim(), self.total_dim()), |acc, (a, &m)| acc + a.d_matrix(p) * m);
        let hw = h.transpose() * pairing * &h;
        for i in 0..k {
            for j in i + 1..k {
                let s = 0.5 * (hw[(i, j)] - hw[(j, i)]);
                w[(i, j)] = s;
                w[(j, i)] = -s;
            }
        }
        Ok(w)
    }
}

/// Scale-free nondegeneracy measure `|det W| / ‖W‖_F^n` (0 when `W ≈ 0`).
pub fn fatness_ratio(w: &DMatrix<f64>) -> (f64, f64) {
    let n = w.nrows();
    let det = if n == 0 { 1.0 } else { w.clone().determinant() };
    let fro = w.norm();
    if n == 0 {
        return (det, 1.0);
    }
    if fro <= 1e-12 {
        return (det, 0.0);
    }
    (det, det.abs() / fro.powi(n as i32))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FatnessReport {
    pub min_abs_det: f64,
    pub min_ratio: f64,
    pub witness_point: Vec<f64>,
    pub witness_mu: Vec<f64>,
    pub evaluations: usize,
    pub pass: bool,
}

/// Weinstein fatness at every `(p, μ)` of `samples × mu_set`.
pub fn fatness_check(
    bundle: &PrincipalBundle,
    mu_set: &[CoadjointElement],
    samples: &SampleSet,
    fat_tol: f64,
) -> Result<FatnessReport> {
    fatness_on_pairs(
        bundle,
        &samples
            .points
            .iter()
            .flat_map(|p| mu_set.iter().map(move |m| (p.clone(), m.clone())))
            .collect::<Vec<_>>(),
        fat_tol,
    )
}

/// Fatness at explicit `(p, μ)` pairs.
pub fn fatness_on_pairs(
    bundle: &PrincipalBundle,
    pairs: &[(DVector<f64>, CoadjointElement)],
    fat_tol: f64,
) -> Result<FatnessReport> {
    let hdim = bundle.total.dim() - bundle.group.dim();
    if hdim % 2 == 1 {
        return Err(GeomError::OddHorizontalDimension { dim: hdim });
    }
    let vals = pairs
        .par_iter()
        .map(|(p, mu)| Ok(fatness_ratio(&bundle.fatness_matrix(p, mu)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut rep = FatnessReport {
        min_abs_det: f64::INFINITY,
        min_ratio: f64::INFINITY,
        witness_point: Vec::new(),
        witness_mu: Vec::new(),
        evaluations: vals.len(),
        pass: true,
    };
    for (i, (det, ratio)) in vals.into_iter().enumerate() {
        rep.min_abs_det = rep.min_abs_det.min(det.abs());
        if ratio < rep.min_ratio {
            rep.min_ratio = ratio;
            rep.witness_point = pairs[i].0.iter().copied().collect();
            rep.witness_mu = pairs[i].1.coeffs.iter().copied().collect();
        }
    }
    rep.pass = rep.evaluations > 0 && rep.min_ratio > fat_tol;
    Ok(rep)
}

/// `P ×_G F` represented on `P × F` by the basic form `α_tot`.
#[derive(Clone, Debug)]
pub struct AssociatedContactBundle {
    pub bundle: PrincipalBundle,
    pub fiber: EmbeddedManifold,
    pub alpha_fiber: OneFormField,
    /// Left action of `G` on `F`.
    pub fiber_action: LinearAction,
    /// `P × F`.
    pub total: EmbeddedManifold,
    /// `g·(p, f) = (p·g⁻¹, g·f)`.
    pub diagonal_action: LinearAction,
    pub alpha_tot: OneFormField,
}

/// Builds `α_tot(p, f) = ⟨Ψ_{α_F}(f), A_p⟩ + (α_F)_f`. The fiber form must
/// be strictly invariant on `fiber_samples`.
pub fn assemble_alpha_tot(
    bundle: &PrincipalBundle,
    fiber: &EmbeddedManifold,
    alpha_fiber: &OneFormField,
    fiber_action: &LinearAction,
    fiber_samples: &SampleSet,
    seed: u64,
) -> Result<AssociatedContactBundle> {
    let inv = contact::invariance_residual(fiber, alpha_fiber, fiber_action, fiber_samples, 20, seed)?;
    if inv.max_residual > contact::INVARIANCE_TOL {
        return Err(GeomError::NotInvariantFiberForm { residual: inv.max_residual });
    }
    Ok(assemble_unchecked(bundle, fiber, alpha_fiber, fiber_action))
}

/// [`assemble_alpha_tot`] without the invariance check.
pub fn assemble_unchecked(
    bundle: &PrincipalBundle,
    fiber: &EmbeddedManifold,
    alpha_fiber: &OneFormField,
    fiber_action: &LinearAction,
) -> AssociatedContactBundle {
    let np = bundle.total_dim();
    let nf = fiber.ambient_dim();
    let n = np + nf;
    let gens = contact::generator_matrices(fiber_action);
    let conn = bundle.connection.clone();
    let af = alpha_fiber.clone();
    let alpha_tot = OneFormField::new(format!("alpha_tot[{}]", bundle.name), n, move |x| {
        let (xp, xf) = x.split_at(np);
        let psi = contact::moment_jet(&af, &gens, xf);
        let mut out = vec![Jet1::zero(); n];
        for (a, s) in conn.iter().zip(&psi) {
            for (o, c) in out.iter_mut().zip(a.eval_jet(xp)) {
                *o += &(&c * s);
            }
        }
        for (k, c) in af.eval_jet(xf).into_iter().enumerate() {
            out[np + k] = c;
        }
        out
    });
    let diagonal_action = bundle
        .right_action
        .inverted()
        .embedded(0, n)
        .combined(&fiber_action.embedded(np, n));
    AssociatedContactBundle {
        bundle: bundle.clone(),
        fiber: fiber.clone(),
        alpha_fiber: alpha_fiber.clone(),
        fiber_action: fiber_action.clone(),
        total: bundle.total.product(fiber),
        diagonal_action,
        alpha_tot,
    }
}

/// Frame in ambient coordinates for the contact connection computation.
fn frame_coords(e: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    e.transpose() * v
}

/// `ℋ_m`: the `dα`-orthogonal complement of `ξ^ν = V ∩ ker α` inside
/// `ξ = ker α`, computed within the span of the orthonormal columns of
/// `frame`. `vertical` spans the vertical space (inside the same span).
pub fn contact_connection(
    alpha: &OneFormField,
    m: &DVector<f64>,
    frame: &DMatrix<f64>,
    vertical: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let (a_amb, d) = alpha.jet_at(m);
    let w_amb = d.transpose() - &d;
    let a = frame.transpose() * a_amb;
    let w = frame.transpose() * w_amb * frame;
    let n = frame.ncols();
    let xi = linalg::null_space(&DMatrix::from_row_slice(1, n, a.as_slice()), 1e-12).0;
    let vc = frame_coords(frame, vertical);
    let av = vc.transpose() * &a;
    let nu = &vc * linalg::null_space(&DMatrix::from_row_slice(1, vc.ncols(), av.as_slice()), 1e-12).0;
    let nu = linalg::orthonormalize(&nu, 1e-10).0;
    let restricted = nu.transpose() * &w * &nu;
    let smin = linalg::min_singular_value(&restricted);
    let scale = linalg::max_abs(&w).max(1e-300);
    if nu.ncols() % 2 == 1 || smin <= 1e-8 * scale {
        return Err(GeomError::DegenerateFiberRestriction { min_singular: smin });
    }
    let cond = nu.transpose() * w.transpose() * &xi;
    let (c, _) = linalg::null_space(&cond, 1e-10);
    let h = frame * (&xi * c);
    Ok(linalg::orthonormalize(&h, 1e-10).0)
}

/// Base path `γ: [0, 1] → B` with its velocity.
pub trait BasePath: Sync {
    fn point(&self, t: f64) -> DVector<f64>;
    fn velocity(&self, t: f64) -> DVector<f64>;
}

/// `γ(t) = cos(θt)a + sin(θt)b` for orthonormal `a, b`.
#[derive(Clone, Debug)]
pub struct GreatCircleArc {
    pub a: DVector<f64>,
    pub b: DVector<f64>,
    pub angle: f64,
}

impl GreatCircleArc {
    /// The equator of `S² ⊂ ℝ³` traversed once.
    pub fn equator() -> Self {
        GreatCircleArc {
            a: DVector::from_vec(vec![1.0, 0.0, 0.0]),
            b: DVector::from_vec(vec![0.0, 1.0, 0.0]),
            angle: 2.0 * std::f64::consts::PI,
        }
    }
}

impl BasePath for GreatCircleArc {
    fn point(&self, t: f64) -> DVector<f64> {
        &self.a * (self.angle * t).cos() + &self.b * (self.angle * t).sin()
    }

    fn velocity(&self, t: f64) -> DVector<f64> {
        (&self.b * (self.angle * t).cos() - &self.a * (self.angle * t).sin()) * self.angle
    }
}

/// The path that stays at one base point.
#[derive(Clone, Debug)]
pub struct ConstantPath(pub DVector<f64>);

impl BasePath for ConstantPath {
    fn point(&self, _t: f64) -> DVector<f64> {
        self.0.clone()
    }

    fn velocity(&self, _t: f64) -> DVector<f64> {
        DVector::zeros(self.0.len())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssociatedContactReport {
    pub min_abs_pfaffian: f64,
    pub witness_point: Vec<f64>,
    pub degenerate_count: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportCheck {
    pub end_point: DVector<f64>,
    /// `|π(end) − γ(1)|`.
    pub base_error: f64,
    /// Largest angle between a transported vector of `ξ^F` and `ker α_tot`.
    pub hyperplane_angle: f64,
    /// `α_tot` of the transported positive vertical vector.
    pub coorientation: f64,
}

impl AssociatedContactBundle {
    pub fn np(&self) -> usize {
        self.bundle.total_dim()
    }

    pub fn split(&self, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let np = self.np();
        (x.rows(0, np).into_owned(), x.rows(np, x.len() - np).into_owned())
    }

    pub fn join(&self, p: &DVector<f64>, f: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(p.len() + f.len(), p.iter().chain(f.iter()).copied())
    }

    pub fn dim(&self) -> usize {
        self.total.dim() - self.bundle.group.dim()
    }

    /// Fiber moment `Ψ_{α_F}(f)`.
    pub fn fiber_moment(&self, f: &DVector<f64>) -> CoadjointElement {
        contact::moment_alpha(&self.alpha_fiber, &self.fiber_action, f)
    }

    /// Columns `(−X_P(p), X_F(f))` for the basis elements.
    pub fn diagonal_orbit(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.diagonal_action.orbit_matrix(x)
    }

    /// `max_k |α_tot(X_k, diag)|`.
    pub fn basic_residual(&self, x: &DVector<f64>) -> f64 {
        let orbit = self.diagonal_orbit(x);
        if orbit.ncols() == 0 {
            return 0.0;
        }
        (orbit.transpose() * self.alpha_tot.at(x)).amax()
    }

    /// `|α_tot(0 ⊕ w) − α_F(w)|` maximized over a tangent frame of `F`.
    pub fn fiber_restriction_residual(&self, x: &DVector<f64>) -> Result<f64> {
        let (_, f) = self.split(x);
        let tf = self.fiber.tangent_frame(&f)?.columns;
        let np = self.np();
        let at = self.alpha_tot.at(x);
        let af = self.alpha_fiber.at(&f);
        let mut worst: f64 = 0.0;
        for c in 0..tf.ncols() {
            let w = tf.column(c);
            let mut full = DVector::zeros(x.len());
            full.rows_mut(np, w.len()).copy_from(&w);
            worst = worst.max((at.dot(&full) - af.dot(&w)).abs());
        }
        Ok(worst)
    }

    /// Orthonormal frame of `T(P × F)` orthogonal to the diagonal orbit.
    pub fn quotient_frame(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let t = self.total.tangent_frame(x)?.columns;
        let orbit = self.diagonal_orbit(x);
        let d = orbit.ncols();
        if d == 0 {
            return Ok(t);
        }
        let rank = linalg::rank(&orbit, 1e-8, 1e-12);
        if rank < d {
            return Err(GeomError::NonFreePoint { rank, expected: d });
        }
        let (ns, _) = linalg::null_space(&(orbit.transpose() * &t), 1e-10);
        let q = &t * ns;
        if q.ncols() != t.ncols() - d {
            return Err(GeomError::NonFreePoint { rank, expected: d });
        }
        Ok(q)
    }

    fn dpi_on(&self, x: &DVector<f64>, frame: &DMatrix<f64>) -> DMatrix<f64> {
        let (p, _) = self.split(x);
        let np = self.np();
        self.bundle.projection_jacobian(&p) * frame.rows(0, np)
    }

    /// Vertical space of `P ×_G F → B` inside the span of `q`.
    pub fn vertical_basis(&self, x: &DVector<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
        let (ns, _) = linalg::null_space(&self.dpi_on(x, q), 1e-10);
        q * ns
    }

    pub fn pfaffian_at(&self, x: &DVector<f64>) -> Result<PfaffianEval> {
        self.pfaffian_of(&self.alpha_tot, x)
    }

    pub fn pfaffian_of(&self, alpha: &OneFormField, x: &DVector<f64>) -> Result<PfaffianEval> {
        let q = self.quotient_frame(x)?;
        forms::contact_pfaffian_on_frame(alpha, x, &q)
    }

    /// Bordered Pfaffian of `α_tot` on quotient frames at every sample.
    pub fn contact_report(&self, samples: &[DVector<f64>]) -> Result<AssociatedContactReport> {
        let evals = samples
            .par_iter()
            .map(|x| self.pfaffian_at(x))
            .collect::<Result<Vec<_>>>()?;
        let mut rep = AssociatedContactReport {
            min_abs_pfaffian: f64::INFINITY,
            witness_point: Vec::new(),
            degenerate_count: 0,
            pass: true,
        };
        for (i, e) in evals.iter().enumerate() {
            if e.pfaffian.abs() < rep.min_abs_pfaffian {
                rep.min_abs_pfaffian = e.pfaffian.abs();
                rep.witness_point = samples[i].iter().copied().collect();
            }
            if e.is_degenerate(DEFAULT_PF_TOL) {
                rep.degenerate_count += 1;
            }
        }
        rep.pass = rep.degenerate_count == 0 && !evals.is_empty();
        Ok(rep)
    }

    /// `ℋ(ξ)` of `alpha` (a basic form) at `x`.
    pub fn contact_connection_of(&self, alpha: &OneFormField, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let q = self.quotient_frame(x)?;
        let v = self.vertical_basis(x, &q);
        contact_connection(alpha, x, &q, &v)
    }

    /// `{(h, 0) : h ∈ ℋ^A_p}` projected onto the quotient frame.
    pub fn connection_horizontal(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (p, _) = self.split(x);
        let h = self.bundle.horizontal_frame(&p)?;
        let mut full = DMatrix::zeros(x.len(), h.ncols());
        full.view_mut((0, 0), (self.np(), h.ncols())).copy_from(&h);
        let q = self.quotient_frame(x)?;
        Ok(linalg::orthonormalize(&(&q * (q.transpose() * full)), 1e-10).0)
    }

    /// Lift of a base vector into `ℋ(α_tot)`.
    pub fn contact_lift(&self, x: &DVector<f64>, h: &DMatrix<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        let dpi = self.dpi_on(x, h);
        let c = linalg::lstsq(&dpi, u, 1e-12).ok_or(GeomError::FrameExtensionFailure)?;
        Ok(h * c)
    }

    /// `(σ_ℋ(u, v), ⟨sΨ(f), Ω(u#_P, v#_P)⟩)` with
    /// `σ_ℋ(u, v) = s · dα_tot(x#, y#)` on lifts into `ℋ(α_tot)`.
    pub fn sigma_identity(&self, x: &DVector<f64>, s: f64, u: &DVector<f64>, v: &DVector<f64>) -> Result<(f64, f64)> {
        let h = self.contact_connection_of(&self.alpha_tot, x)?;
        let xu = self.contact_lift(x, &h, u)?;
        let xv = self.contact_lift(x, &h, v)?;
        let lhs = s * forms::eval_d(&self.alpha_tot, x, &xu, &xv);
        let (p, f) = self.split(x);
        let uh = self.bundle.horizontal_lift(&p, u)?;
        let vh = self.bundle.horizontal_lift(&p, v)?;
        let omega = self.bundle.curvature_structure_eq(&p, &uh, &vh)?;
        let rhs = self.fiber_moment(&f).scaled(s).pair(&omega);
        Ok((lhs, rhs))
    }

    /// Reeb field of `α_tot` within the quotient frame.
    pub fn reeb(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let q = self.quotient_frame(x)?;
        forms::reeb_on_frame(&self.alpha_tot, x, &q, DEFAULT_PF_TOL)
    }

    /// `|dπ(R)|`.
    pub fn reeb_verticality(&self, x: &DVector<f64>) -> Result<f64> {
        let r = self.reeb(x)?;
        let (p, _) = self.split(x);
        Ok((self.bundle.projection_jacobian(&p) * r.rows(0, self.np())).amax())
    }

    /// Velocity of the `ℋ(α_tot)`-horizontal lift of `γ'(t)` at `x`.
    fn transport_velocity(&self, path: &dyn BasePath, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        let v = path.velocity(t);
        if v.amax() == 0.0 {
            return Ok(DVector::zeros(x.len()));
        }
        let h = self.contact_connection_of(&self.alpha_tot, x)?;
        self.contact_lift(x, &h, &v)
    }

    /// Parallel transport of `x0` along `path` with `steps` RK4 steps and a
    /// retraction after each step.
    pub fn parallel_transport(&self, path: &dyn BasePath, x0: &DVector<f64>, steps: usize) -> Result<DVector<f64>> {
        let dt = 1.0 / steps as f64;
        let mut x = x0.clone();
        for k in 0..steps {
            let t = k as f64 * dt;
            let k1 = self.transport_velocity(path, t, &x)?;
            let k2 = self.transport_velocity(path, t + 0.5 * dt, &(&x + &k1 * (0.5 * dt)))?;
            let k3 = self.transport_velocity(path, t + 0.5 * dt, &(&x + &k2 * (0.5 * dt)))?;
            let k4 = self.transport_velocity(path, t + dt, &(&x + &k3 * dt))?;
            let next = &x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            let drift = self.total.residual_norm(next.as_slice());
            if drift > forms::FLOW_ESCAPE_DRIFT {
                return Err(GeomError::FlowEscape { drift });
            }
            x = self.total.retract(&next)?;
        }
        Ok(x)
    }

    /// Transports `x0` and nearby points along the fiber contact plane and
    /// the Reeb direction, and measures how the transported vectors sit
    /// relative to `ker α_tot` at the endpoint.
    pub fn transport_contact_check(
        &self,
        path: &dyn BasePath,
        x0: &DVector<f64>,
        steps: usize,
        eps: f64,
    ) -> Result<TransportCheck> {
        let end = self.parallel_transport(path, x0, steps)?;
        let (pe, _) = self.split(&end);
        let base_error = (self.bundle.project(&pe) - path.point(1.0)).amax();

        let q0 = self.quotient_frame(x0)?;
        let v0 = self.vertical_basis(x0, &q0);
        let a0 = self.alpha_tot.at(x0);
        let av = v0.transpose() * &a0;
        let xi_nu = &v0 * linalg::null_space(&DMatrix::from_row_slice(1, av.len(), av.as_slice()), 1e-12).0;
        let reeb0 = self.reeb(x0)?;

        let push = |w: &DVector<f64>| -> Result<DVector<f64>> {
            let xp = self.total.retract(&(x0 + w * eps))?;
            let xm = self.total.retract(&(x0 - w * eps))?;
            let ep = self.parallel_transport(path, &xp, steps)?;
            let em = self.parallel_transport(path, &xm, steps)?;
            Ok((ep - em) / (2.0 * eps))
        };
        let q1 = self.quotient_frame(&end)?;
        let a1 = q1.transpose() * self.alpha_tot.at(&end);
        let a1n = a1.norm();
        let mut angle: f64 = 0.0;
        for c in 0..xi_nu.ncols() {
            let w1 = push(&xi_nu.column(c).into_owned())?;
            let w1q = q1.transpose() * &w1;
            angle = angle.max(a1.dot(&w1q).abs() / (a1n * w1q.norm()));
        }
        let r1 = push(&reeb0)?;
        let coorientation = self.alpha_tot.at(&end).dot(&r1);
        Ok(TransportCheck {
            end_point: end,
            base_error,
            hyperplane_angle: angle,
            coorientation,
        })
    }
}

/// Samples `(p, f)` pairs with independent streams for `P` and `F`.
pub fn sample_pairs(assoc: &AssociatedContactBundle, count: usize, seed: u64) -> Result<Vec<DVector<f64>>> {
    let ps = assoc.bundle.total.sample(count, seed)?;
    let fs = assoc.fiber.sample(count, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    Ok(ps.iter().zip(fs.iter()).map(|(p, f)| assoc.join(p, f)).collect())
}

/// Log-uniform grid on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![(lo * hi).sqrt()];
    }
    (0..count)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Moment-image covectors `s · Ψ_{α_F}(f)` for fiber samples and scales.
pub fn moment_image(assoc: &AssociatedContactBundle, fiber_points: &[DVector<f64>], scales: &[f64]) -> Vec<CoadjointElement> {
    fiber_points
        .iter()
        .flat_map(|f| {
            let psi = assoc.fiber_moment(f);
            scales.iter().map(move |&s| psi.scaled(s))
        })
        .collect()
}

/// Hopf bundle `S¹ → S³ → S²` with `A = Σ (x dy − y dx)`, so `A(iz) = 1`.
pub fn hopf_bundle() -> PrincipalBundle {
    let group = Arc::new(MatrixLieGroup::torus(1));
    let total = crate::catalog::sphere(2);
    PrincipalBundle {
        name: "hopf".into(),
        total,
        group,
        right_action: LinearAction::circle_diagonal(2),
        base: crate::catalog::sphere_real(3),
        projection: Arc::new(QuadraticMap::new(4, maps::hopf_components(0))),
        connection: vec![crate::catalog::rotation_form(2, 1.0).renamed("A_hopf")],
    }
}

/// `{(u, v) ∈ S³ × S³ : hopf(u) = hopf(v)}` as a `T²`-bundle over `S²`, with
/// the Hopf connection on each factor.
pub fn fiber_product_bundle() -> PrincipalBundle {
    let mut comps = vec![
        Quadric::weighted_norm_sq(0, &[1.0, 1.0]).c(-1.0),
        Quadric::weighted_norm_sq(4, &[1.0, 1.0]).c(-1.0),
    ];
    // Re and Im of u₁v₂ − u₂v₁
    comps.push(Quadric::new().q(0, 6, 1.0).q(1, 7, -1.0).q(2, 4, -1.0).q(3, 5, 1.0));
    comps.push(Quadric::new().q(0, 7, 1.0).q(1, 6, 1.0).q(2, 5, -1.0).q(3, 4, -1.0));
    let total = EmbeddedManifold::from_quadrics("S3xS2S3", QuadraticMap::new(8, comps));
    let group = Arc::new(MatrixLieGroup::torus(2));
    let right_action = LinearAction::new(
        "T2",
        group.clone(),
        8,
        vec![
            crate::liealg::ActionBlock::diagonal(vec![0, 2], vec![0, 0]),
            crate::liealg::ActionBlock::diagonal(vec![4, 6], vec![1, 1]),
        ],
    );
    let a_u = crate::catalog::rotation_form(2, 1.0).embedded(0, 8);
    let a_v = crate::catalog::rotation_form(2, 1.0).embedded(4, 8);
    PrincipalBundle {
        name: "fiber_product".into(),
        total,
        group,
        right_action,
        base: crate::catalog::sphere_real(3),
        projection: Arc::new(QuadraticMap::new(8, maps::hopf_components(0))),
        connection: vec![a_u, a_v],
    }
}

/// Product bundle `S² × S¹ ⊂ ℝ⁵` with the flat connection `x dy − y dx` on
/// the circle factor.
pub fn flat_bundle() -> PrincipalBundle {
    let total = crate::catalog::sphere_real(3).product(&crate::catalog::sphere_real(2));
    PrincipalBundle {
        name: "flat".into(),
        total,
        group: Arc::new(MatrixLieGroup::torus(1)),
        right_action: LinearAction::circle_on(5, vec![3]),
        base: crate::catalog::sphere_real(3),
        projection: Arc::new(QuadraticMap::coordinate_projection(5, 0, 3)),
        connection: vec![crate::catalog::rotation_form(1, 1.0).embedded(3, 5)],
    }
}

/// `S³ × S¹ → S²` as a `T²`-bundle, Hopf connection on the first factor and
/// the flat connection on the second.
pub fn partially_flat_bundle() -> PrincipalBundle {
    let total = crate::catalog::sphere(2).product(&crate::catalog::sphere_real(2));
    let group = Arc::new(MatrixLieGroup::torus(2));
    let right_action = LinearAction::new(
        "T2",
        group.clone(),
        6,
        vec![
            crate::liealg::ActionBlock::diagonal(vec![0, 2], vec![0, 0]),
            crate::liealg::ActionBlock::diagonal(vec![4], vec![1]),
        ],
    );
    PrincipalBundle {
        name: "partially_flat".into(),
        total,
        group,
        right_action,
        base: crate::catalog::sphere_real(3),
        projection: Arc::new(QuadraticMap::new(6, maps::hopf_components(0))),
        connection: vec![
            crate::catalog::rotation_form(2, 1.0).embedded(0, 6),
            crate::catalog::rotation_form(1, 1.0).embedded(4, 6),
        ],
    }
}

/// `B → B` with the trivial group.
pub fn trivial_bundle(base: &EmbeddedManifold) -> PrincipalBundle {
    let n = base.ambient_dim();
    let group = Arc::new(MatrixLieGroup::trivial());
    PrincipalBundle {
        name: format!("trivial[{}]", base.name()),
        total: base.clone(),
        group: group.clone(),
        right_action: LinearAction::new("T0", group, n, Vec::new()),
        base: base.clone(),
        projection: Arc::new(QuadraticMap::coordinate_projection(n, 0, n)),
        connection: Vec::new(),
    }
}

/// A single point `{0} ⊂ ℝ`.
pub fn point_manifold() -> EmbeddedManifold {
    EmbeddedManifold::from_quadrics("pt", QuadraticMap::new(1, vec![Quadric::new().l(0, 1.0)]))
}
