//! Contact cross-sections `R = Ψ_α⁻¹(S)` for a slice `S ⊂ m°` at `μ`.
//!
//! The slice is the open cone of covectors in `m°` within angle
//! `arccos(1 − ε)` of the ray through `μ`, where `m = g_μ^⊥`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::catalog;
use crate::contact;
use crate::error::{GeomError, Result};
use crate::forms::{self, OneFormField, ScalarFn, DEFAULT_PF_TOL};
use crate::jet::{self, Jet1};
use crate::liealg::{CoadjointElement, LinearAction, MatrixLieGroup};
use crate::linalg;
use crate::manifold::EmbeddedManifold;

pub const DEFAULT_CONE_EPS: f64 = 0.1;
/// `|⟨Ψ(x), m_i⟩|` allowed for cross-section points.
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// Manifold samples tried per requested cross-section point.
pub const SEED_BUDGET: usize = 200;

#[derive(Clone, Debug)]
pub struct SliceData {
    pub group: Arc<MatrixLieGroup>,
    pub mu: CoadjointElement,
    /// Columns span `g_μ`.
    pub isotropy: DMatrix<f64>,
    /// Columns span `m`.
    pub complement: DMatrix<f64>,
    pub cone_eps: f64,
}

/// `g_μ`, its orthogonal complement `m` under the invariant inner product,
/// and the cone slice around `μ`.
pub fn build_slice(group: Arc<MatrixLieGroup>, mu: CoadjointElement, cone_eps: f64) -> SliceData {
    let d = group.dim();
    let isotropy = group.isotropy_algebra(&mu, 1e-10);
    let complement = if isotropy.ncols() == d {
        DMatrix::zeros(d, 0)
    } else {
        let ip = group.inner_product();
        let constraint = (ip * &isotropy).transpose();
        linalg::null_space(&constraint, 1e-10).0
    };
    SliceData {
        group,
        mu,
        isotropy,
        complement,
        cone_eps,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairingReport {
    pub matrix: DMatrix<f64>,
    /// `+∞` when `m = 0`.
    pub min_singular: f64,
    pub pass: bool,
}

impl SliceData {
    pub fn dim_m(&self) -> usize {
        self.complement.ncols()
    }

    /// `max_i |⟨η, m_i⟩|`.
    pub fn annihilator_residual(&self, eta: &CoadjointElement) -> f64 {
        if self.dim_m() == 0 {
            return 0.0;
        }
        (self.complement.transpose() * &eta.coeffs).amax()
    }

    /// Cosine of the angle between `η` and `μ` in the dual inner product.
    pub fn cone_cosine(&self, eta: &CoadjointElement) -> f64 {
        let n = self.group.dual_norm(eta) * self.group.dual_norm(&self.mu);
        if n == 0.0 {
            return 0.0;
        }
        self.group.dual_inner(eta, &self.mu) / n
    }

    pub fn contains(&self, eta: &CoadjointElement) -> bool {
        let scale = self.group.dual_norm(eta).max(1.0);
        self.annihilator_residual(eta) <= MEMBERSHIP_TOL * scale && self.cone_cosine(eta) > 1.0 - self.cone_eps
    }

    /// The same slice with `m` replaced by an arbitrary basis.
    pub fn with_complement(&self, complement: DMatrix<f64>) -> SliceData {
        SliceData {
            complement,
            ..self.clone()
        }
    }

    /// `⟨η, [m_i, m_j]⟩`.
    pub fn pairing_matrix(&self, eta: &CoadjointElement) -> DMatrix<f64> {
        let k = self.dim_m();
        DMatrix::from_fn(k, k, |i, j| {
            let b = self
                .group
                .bracket(&self.complement.column(i).into_owned(), &self.complement.column(j).into_owned());
            eta.pair(&b)
        })
    }
}

/// Nondegeneracy of `(X, Y) ↦ ⟨η, [X, Y]⟩` on `m` for `η ∈ S`.
pub fn slice_pairing_check(slice: &SliceData, eta: &CoadjointElement) -> Result<PairingReport> {
    if !slice.contains(eta) {
        return Err(GeomError::EtaOutsideSlice);
    }
    let matrix = slice.pairing_matrix(eta);
    if matrix.nrows() == 0 {
        return Ok(PairingReport {
            matrix,
            min_singular: f64::INFINITY,
            pass: true,
        });
    }
    let min_singular = linalg::min_singular_value(&matrix);
    let scale = slice.group.dual_norm(eta).max(1e-300);
    Ok(PairingReport {
        pass: min_singular > 1e-8 * scale,
        matrix,
        min_singular,
    })
}

/// A contact manifold with a group action and a slice.
#[derive(Clone, Debug)]
pub struct CrossSectionProblem {
    pub manifold: EmbeddedManifold,
    pub alpha: OneFormField,
    pub action: LinearAction,
    pub slice: SliceData,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossSectionSample {
    pub point: DVector<f64>,
    /// `max_i |⟨Ψ(x), m_i⟩|`.
    pub membership_residual: f64,
    pub constraint_residual: f64,
}

impl CrossSectionProblem {
    pub fn moment(&self, x: &DVector<f64>) -> CoadjointElement {
        contact::moment_alpha(&self.alpha, &self.action, x)
    }

    /// Stacked residual `[constraint; mᵀΨ]` and its Jacobian.
    fn system(&self, alpha: &OneFormField, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = x.len();
        let c = self.manifold.residual(x.as_slice());
        let dc = self.manifold.jacobian(x.as_slice());
        let gens = contact::generator_matrices(&self.action);
        let psi = contact::moment_jet(alpha, &gens, &jet::seed(x.as_slice()));
        let m = &self.slice.complement;
        let k = m.ncols();
        let mut res = DVector::zeros(c.len() + k);
        let mut jac = DMatrix::zeros(c.len() + k, n);
        res.rows_mut(0, c.len()).copy_from(&c);
        jac.view_mut((0, 0), (c.len(), n)).copy_from(&dc);
        for i in 0..k {
            let mut comp = Jet1::zero();
            for (j, p) in psi.iter().enumerate() {
                comp += &p.scale(m[(j, i)]);
            }
            res[c.len() + i] = comp.value;
            for col in 0..n {
                jac[(c.len() + i, col)] = comp.d(col);
            }
        }
        (res, jac)
    }

    /// Orthonormal frame of `T_xR`.
    pub fn section_frame(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (_, jac) = self.system(&self.alpha, x);
        linalg::null_space(&jac, 1e-8).0
    }

    pub fn expected_dim(&self) -> usize {
        self.manifold.dim() - self.slice.dim_m()
    }

    fn newton(&self, x0: DVector<f64>) -> Option<DVector<f64>> {
        let mut x = x0;
        for _ in 0..60 {
            let (res, jac) = self.system(&self.alpha, &x);
            if res.amax() <= 1e-14 {
                break;
            }
            let step = linalg::lstsq(&jac, &res, 1e-12)?;
            x -= &step;
            if !x.iter().all(|v| v.is_finite()) {
                return None;
            }
            if step.amax() <= 1e-16 * (1.0 + x.amax()) {
                break;
            }
        }
        Some(x)
    }

    pub fn sample_at(&self, x: DVector<f64>) -> CrossSectionSample {
        let membership_residual = self.slice.annihilator_residual(&self.moment(&x));
        let constraint_residual = self.manifold.residual_norm(x.as_slice());
        CrossSectionSample {
            point: x,
            membership_residual,
            constraint_residual,
        }
    }

    /// Whether `x` lies on `M` with `Ψ(x) ∈ S`.
    pub fn is_member(&self, x: &DVector<f64>, alpha: &OneFormField) -> (bool, f64) {
        let psi = contact::moment_alpha(alpha, &self.action, x);
        let r = self.slice.annihilator_residual(&psi);
        let scale = self.slice.group.dual_norm(&psi).max(1.0);
        let ok = self.manifold.contains(x.as_slice())
            && r <= MEMBERSHIP_TOL * scale
            && self.slice.cone_cosine(&psi) > 1.0 - self.slice.cone_eps;
        (ok, r)
    }
}

/// `count` points of `R`, each found by Gauss–Newton from up to
/// [`SEED_BUDGET`] manifold samples.
pub fn find_cross_section(problem: &CrossSectionProblem, count: usize, seed: u64) -> Result<Vec<CrossSectionSample>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            for k in 0..SEED_BUDGET {
                let Ok(x0) = problem.manifold.sample_one(seed, (i * SEED_BUDGET + k) as u64) else {
                    continue;
                };
                let Some(x) = problem.newton(x0) else {
                    continue;
                };
                if problem.is_member(&x, &problem.alpha).0 {
                    return Ok(problem.sample_at(x));
                }
            }
            Err(GeomError::NoSolutions { attempts: SEED_BUDGET })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplittingReport {
    /// `max |α(X_M)|` over the `m` basis.
    pub a: f64,
    pub dim_m_orbit: usize,
    pub dim_xi_r: usize,
    pub dim_xi: usize,
    pub joint_rank: usize,
    /// `max |dα(X_M, w)|` for `w ∈ ξ ∩ TR`.
    pub c: f64,
}

impl SplittingReport {
    pub fn a_pass(&self) -> bool {
        self.a <= MEMBERSHIP_TOL
    }

    pub fn b_pass(&self) -> bool {
        self.dim_m_orbit + self.dim_xi_r == self.dim_xi && self.joint_rank == self.dim_xi
    }

    pub fn c_pass(&self) -> bool {
        self.c <= 1e-7
    }

    pub fn check(&self) -> Result<()> {
        if !self.a_pass() {
            return Err(GeomError::SplittingFailure { condition: 'a', residual: self.a });
        }
        if !self.b_pass() {
            let gap = (self.dim_xi as f64 - (self.dim_m_orbit + self.dim_xi_r) as f64).abs();
            return Err(GeomError::SplittingFailure { condition: 'b', residual: gap });
        }
        if !self.c_pass() {
            return Err(GeomError::SplittingFailure { condition: 'c', residual: self.c });
        }
        Ok(())
    }
}

/// `ξ_x = m_M(x) ⊕ (ξ_x ∩ T_xR)` and the `dα`-orthogonality of the summands.
/// `section_frame` spans `T_xR`; the `m` used for the orbit directions is
/// `slice.complement`.
pub fn verify_splitting(
    problem: &CrossSectionProblem,
    slice: &SliceData,
    x: &DVector<f64>,
    section_frame: &DMatrix<f64>,
) -> Result<SplittingReport> {
    let alpha_x = problem.alpha.at(x);
    let t = problem.manifold.tangent_frame(x)?.columns;
    let at = t.transpose() * &alpha_x;
    let xi = &t * linalg::null_space(&DMatrix::from_row_slice(1, at.len(), at.as_slice()), 1e-12).0;
    let m = &slice.complement;
    let orbit = DMatrix::from_columns(
        &(0..m.ncols())
            .map(|i| problem.action.induced_vector_field(&m.column(i).into_owned(), x))
            .collect::<Vec<_>>(),
    );
    let orbit = if m.ncols() == 0 { DMatrix::zeros(x.len(), 0) } else { orbit };
    let a = if orbit.ncols() == 0 { 0.0 } else { (orbit.transpose() * &alpha_x).amax() };
    let ar = section_frame.transpose() * &alpha_x;
    let xi_r = section_frame * linalg::null_space(&DMatrix::from_row_slice(1, ar.len(), ar.as_slice()), 1e-10).0;
    let dim_m_orbit = linalg::rank(&orbit, 1e-8, 1e-12);
    let mut joint = DMatrix::zeros(x.len(), orbit.ncols() + xi_r.ncols());
    joint.view_mut((0, 0), (x.len(), orbit.ncols())).copy_from(&orbit);
    joint.view_mut((0, orbit.ncols()), (x.len(), xi_r.ncols())).copy_from(&xi_r);
    let w = problem.alpha.d_matrix(x);
    let c = if orbit.ncols() == 0 || xi_r.ncols() == 0 {
        0.0
    } else {
        (orbit.transpose() * w * &xi_r).amax()
    };
    Ok(SplittingReport {
        a,
        dim_m_orbit,
        dim_xi_r: xi_r.ncols(),
        dim_xi: xi.ncols(),
        joint_rank: linalg::rank(&joint, 1e-8, 1e-12),
        c,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossSectionContactReport {
    pub expected_dim: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    pub pfaffian_floor: f64,
    pub pfaffian_witness: Vec<f64>,
    pub degenerate_count: usize,
    /// Largest membership residual of the same points for `e^f α`.
    pub conformal_membership: f64,
    pub conformal_members: bool,
    /// Largest membership residual after random `G_μ` elements.
    pub isotropy_membership: f64,
    pub isotropy_members: bool,
    /// `max |⟨Ψ(x), [m_i, m_j]⟩ + dα(m_i,M, m_j,M)|`.
    pub bracket_identity: f64,
    /// Smallest singular value of `⟨Ψ(x), [m_i, m_j]⟩` over samples.
    pub pairing_min_singular: f64,
    pub pairing_pass: bool,
}

impl CrossSectionContactReport {
    pub fn dims_pass(&self) -> bool {
        self.min_dim == self.expected_dim && self.max_dim == self.expected_dim
    }

    pub fn contact_pass(&self) -> bool {
        self.degenerate_count == 0 && self.pfaffian_floor > 0.0
    }
}

/// Positive function `e^f` with `f(x) = Σ c_k x_k` for the conformal check.
pub fn random_conformal_exponent(n: usize, seed: u64) -> ScalarFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    Arc::new(move |x: &[Jet1]| jet::dot_const(x, &c))
}

/// Contactness of `R`, its dimension, conformal independence, `G_μ`-invariance
/// and the bracket identity on `m`.
pub fn verify_cross_section_contact(
    problem: &CrossSectionProblem,
    samples: &[CrossSectionSample],
    seed: u64,
) -> Result<CrossSectionContactReport> {
    let conformal = problem.alpha.conformal(random_conformal_exponent(problem.manifold.ambient_dim(), seed));
    let slice = &problem.slice;
    let group = slice.group.clone();
    let rows = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let x = &s.point;
            let frame = problem.section_frame(x);
            let pf = forms::contact_pfaffian_on_frame(&problem.alpha, x, &frame)?;
            let (conf_ok, conf_r) = problem.is_member(x, &conformal);

            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut iso_ok = true;
            let mut iso_r: f64 = 0.0;
            for _ in 0..5 {
                let coeffs = DVector::from_fn(slice.isotropy.ncols(), |_, _| {
                    let z: f64 = rng.sample(StandardNormal);
                    2.0 * std::f64::consts::PI * z
                });
                let g = group.exp(&(&slice.isotropy * coeffs), 1.0);
                let y = problem.action.act(&g, x);
                let (ok, r) = problem.is_member(&y, &problem.alpha);
                iso_ok &= ok;
                iso_r = iso_r.max(r);
            }

            let psi = problem.moment(x);
            let m = &slice.complement;
            let w = problem.alpha.d_matrix(x);
            let orbit: Vec<DVector<f64>> = (0..m.ncols())
                .map(|k| problem.action.induced_vector_field(&m.column(k).into_owned(), x))
                .collect();
            let lhs = slice.pairing_matrix(&psi);
            let mut bracket: f64 = 0.0;
            for a in 0..m.ncols() {
                for b in 0..m.ncols() {
                    let dalpha = orbit[a].dot(&(&w * &orbit[b]));
                    bracket = bracket.max((lhs[(a, b)] + dalpha).abs());
                }
            }
            let pairing = slice_pairing_check(slice, &psi)?;
            Ok((frame.ncols(), pf, conf_ok, conf_r, iso_ok, iso_r, bracket, pairing))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rep = CrossSectionContactReport {
        expected_dim: problem.expected_dim(),
        min_dim: usize::MAX,
        max_dim: 0,
        pfaffian_floor: f64::INFINITY,
        pfaffian_witness: Vec::new(),
        degenerate_count: 0,
        conformal_membership: 0.0,
        conformal_members: true,
        isotropy_membership: 0.0,
        isotropy_members: true,
        bracket_identity: 0.0,
        pairing_min_singular: f64::INFINITY,
        pairing_pass: true,
    };
    for (i, (dim, pf, conf_ok, conf_r, iso_ok, iso_r, bracket, pairing)) in rows.into_iter().enumerate() {
        rep.min_dim = rep.min_dim.min(dim);
        rep.max_dim = rep.max_dim.max(dim);
        if pf.pfaffian.abs() < rep.pfaffian_floor {
            rep.pfaffian_floor = pf.pfaffian.abs();
            rep.pfaffian_witness = samples[i].point.iter().copied().collect();
        }
        if pf.is_degenerate(DEFAULT_PF_TOL) {
            rep.degenerate_count += 1;
        }
        rep.conformal_members &= conf_ok;
        rep.conformal_membership = rep.conformal_membership.max(conf_r);
        rep.isotropy_members &= iso_ok;
        rep.isotropy_membership = rep.isotropy_membership.max(iso_r);
        rep.bracket_identity = rep.bracket_identity.max(bracket);
        rep.pairing_min_singular = rep.pairing_min_singular.min(pairing.min_singular);
        rep.pairing_pass &= pairing.pass;
    }
    Ok(rep)
}

/// `SU(2)` acting on the first two coordinates of `S^{2n−1} ⊂ ℂⁿ` with
/// `α_std` and `μ = e₃*`.
pub fn su2_problem(n: usize) -> CrossSectionProblem {
    let action = LinearAction::su2_on(n);
    let slice = build_slice(action.group().clone(), CoadjointElement::from_slice(&[0.0, 0.0, 1.0]), DEFAULT_CONE_EPS);
    CrossSectionProblem {
        manifold: catalog::sphere(n),
        alpha: catalog::standard_contact_form(n),
        action,
        slice,
    }
}
