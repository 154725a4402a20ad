//! Contact structures on level sets, invariance under linear actions and the
//! contact moment maps.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::forms::{self, OneFormField, DEFAULT_PF_TOL};
use crate::jet::{self, Jet1};
use crate::liealg::{CMatrix, CoadjointElement, LinearAction};
use crate::manifold::{EmbeddedManifold, SampleSet};

/// Smallest `|Pf|` over a sample set together with the index where it occurs.
#[derive(Clone, Debug, PartialEq)]
pub struct PfaffianFloor {
    pub min_abs: f64,
    pub witness_index: usize,
    /// Sign of the Pfaffian at the first sample (frame dependent).
    pub first_sign: f64,
    /// Number of samples that fail the relative degeneracy test.
    pub degenerate_count: usize,
}

/// Bordered-Pfaffian sweep over samples. Never fails on degenerate points;
/// see [`verify_contact`] for the checking variant.
pub fn pfaffian_floor(
    m: &EmbeddedManifold,
    alpha: &OneFormField,
    samples: &SampleSet,
    pf_tol: f64,
) -> Result<PfaffianFloor> {
    if m.dim().is_multiple_of(2) {
        return Err(GeomError::EvenDimension { dim: m.dim() });
    }
    let evals = samples
        .points
        .par_iter()
        .map(|p| {
            let frame = m.tangent_frame(p)?;
            forms::contact_pfaffian_on_frame(alpha, p, &frame.columns)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut floor = PfaffianFloor {
        min_abs: f64::INFINITY,
        witness_index: 0,
        first_sign: evals.first().map_or(0.0, |e| e.pfaffian.signum()),
        degenerate_count: 0,
    };
    for (i, e) in evals.iter().enumerate() {
        if e.pfaffian.abs() < floor.min_abs {
            floor.min_abs = e.pfaffian.abs();
            floor.witness_index = i;
        }
        if e.is_degenerate(pf_tol) {
            floor.degenerate_count += 1;
        }
    }
    Ok(floor)
}

#[derive(Clone, Debug)]
pub struct ContactStructure {
    pub manifold: EmbeddedManifold,
    pub alpha: OneFormField,
    pub verified_samples: SampleSet,
    pub min_abs_pfaffian: f64,
    pub pfaffian_sign: f64,
}

/// Checks the bordered Pfaffian at every sample; fails at the first
/// degenerate one.
pub fn verify_contact(m: &EmbeddedManifold, alpha: &OneFormField, samples: &SampleSet) -> Result<ContactStructure> {
    let floor = pfaffian_floor(m, alpha, samples, DEFAULT_PF_TOL)?;
    if floor.degenerate_count > 0 {
        let idx = samples
            .points
            .iter()
            .position(|p| {
                let frame = m.tangent_frame(p).expect("frame computed above");
                forms::contact_pfaffian_on_frame(alpha, p, &frame.columns)
                    .map(|e| e.is_degenerate(DEFAULT_PF_TOL))
                    .unwrap_or(true)
            })
            .unwrap_or(floor.witness_index);
        let p = &samples.points[idx];
        let pf = forms::contact_pfaffian(alpha, m, p)?;
        return Err(GeomError::NotContact {
            point: p.iter().copied().collect(),
            abs_pfaffian: pf.abs(),
        });
    }
    Ok(ContactStructure {
        manifold: m.clone(),
        alpha: alpha.clone(),
        verified_samples: samples.clone(),
        min_abs_pfaffian: floor.min_abs,
        pfaffian_sign: floor.first_sign,
    })
}

/// A covector `s · α_m` in the positive annihilator `ξ°₊`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoorientedAnnihilatorPoint {
    pub point: DVector<f64>,
    pub scale: f64,
}

impl CoorientedAnnihilatorPoint {
    pub fn new(point: DVector<f64>, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(GeomError::InvalidInput(format!("annihilator scale must be positive, got {scale}")));
        }
        Ok(CoorientedAnnihilatorPoint { point, scale })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    pub max_residual: f64,
    /// Real and imaginary parts of the worst group element, row-major.
    pub witness_group: Vec<f64>,
    pub witness_point: Vec<f64>,
}

fn flatten(g: &CMatrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * g.len());
    for r in 0..g.nrows() {
        for c in 0..g.ncols() {
            out.push(g[(r, c)].re);
            out.push(g[(r, c)].im);
        }
    }
    out
}

/// `max ‖(a(g)^*α − α)_p‖` over tangent vectors, samples and
/// `per_point` random group elements per sample.
pub fn invariance_residual(
    m: &EmbeddedManifold,
    alpha: &OneFormField,
    action: &LinearAction,
    samples: &SampleSet,
    per_point: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    let group = action.group().clone();
    let rows = samples
        .points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let frame = m.tangent_frame(p)?;
            let a_p = frame.columns.transpose() * alpha.at(p);
            let mut worst = (0.0, group.identity());
            for _ in 0..per_point {
                let g = group.random_element(&mut rng);
                let rho = action.matrix(&g);
                let pulled = frame.columns.transpose() * (rho.transpose() * alpha.at(&(&rho * p)));
                let r = (pulled - &a_p).amax();
                if r > worst.0 {
                    worst = (r, g);
                }
            }
            Ok((worst.0, worst.1, i))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = InvarianceReport {
        max_residual: 0.0,
        witness_group: flatten(&group.identity()),
        witness_point: samples.points.first().map(|p| p.iter().copied().collect()).unwrap_or_default(),
    };
    for (r, g, i) in rows {
        if r > report.max_residual {
            report.max_residual = r;
            report.witness_group = flatten(&g);
            report.witness_point = samples.points[i].iter().copied().collect();
        }
    }
    Ok(report)
}

pub const INVARIANCE_TOL: f64 = 1e-8;

/// Strict invariance `a(g)^*α = α`, 20 random group elements per sample.
pub fn verify_invariance(
    c: &ContactStructure,
    action: &LinearAction,
    samples: &SampleSet,
    seed: u64,
) -> Result<InvarianceReport> {
    let report = invariance_residual(&c.manifold, &c.alpha, action, samples, 20, seed)?;
    if report.max_residual > INVARIANCE_TOL {
        return Err(GeomError::NotInvariant {
            group_element: report.witness_group.clone(),
            point: report.witness_point.clone(),
            residual: report.max_residual,
        });
    }
    Ok(report)
}

/// `Ψ_α(x)` with `⟨Ψ_α(x), Xᵢ⟩ = α_x((Xᵢ)_M(x))`.
pub fn moment_alpha(alpha: &OneFormField, action: &LinearAction, x: &DVector<f64>) -> CoadjointElement {
    let orbit = action.orbit_matrix(x);
    CoadjointElement::new(orbit.transpose() * alpha.at(x))
}

/// Generator matrices `L_i` with `(Xᵢ)_M(x) = L_i x`.
pub fn generator_matrices(action: &LinearAction) -> Vec<DMatrix<f64>> {
    let g = action.group();
    (0..g.dim()).map(|i| action.generator_matrix(&g.basis_vector(i))).collect()
}

/// `Ψ_α` in jet arithmetic, given precomputed [`generator_matrices`].
pub fn moment_jet(alpha: &OneFormField, gens: &[DMatrix<f64>], x: &[Jet1]) -> Vec<Jet1> {
    let a = alpha.eval_jet(x);
    gens.iter()
        .map(|l| {
            let mut acc = Jet1::zero();
            for r in 0..l.nrows() {
                let row: Vec<f64> = l.row(r).iter().copied().collect();
                if row.iter().any(|&v| v != 0.0) {
                    acc += &a[r] * &jet::dot_const(x, &row);
                }
            }
            acc
        })
        .collect()
}

/// `Ψ(m, s·α_m) = s · Ψ_α(m)`.
pub fn moment_universal(alpha: &OneFormField, action: &LinearAction, pt: &CoorientedAnnihilatorPoint) -> CoadjointElement {
    moment_alpha(alpha, action, &pt.point).scaled(pt.scale)
}

/// `(dα(X_M, Y_M)(x), −⟨Ψ_α(x), [X, Y]⟩)`.
pub fn orbit_two_form_identity(
    alpha: &OneFormField,
    action: &LinearAction,
    x: &DVector<f64>,
    xa: &DVector<f64>,
    ya: &DVector<f64>,
) -> (f64, f64) {
    let u = action.induced_vector_field(xa, x);
    let v = action.induced_vector_field(ya, x);
    let lhs = forms::eval_d(alpha, x, &u, &v);
    let rhs = -moment_alpha(alpha, action, x).pair(&action.group().bracket(xa, ya));
    (lhs, rhs)
}

/// `max ‖Ψ_α(g·x) − Ad†(g)Ψ_α(x)‖∞` over samples and random `g`.
pub fn moment_equivariance_residual(
    alpha: &OneFormField,
    action: &LinearAction,
    samples: &SampleSet,
    per_point: usize,
    seed: u64,
) -> f64 {
    let group = action.group().clone();
    samples
        .points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let psi = moment_alpha(alpha, action, x);
            let mut worst: f64 = 0.0;
            for _ in 0..per_point {
                let g = group.random_element(&mut rng);
                let lhs = moment_alpha(alpha, action, &action.act(&g, x));
                let rhs = group.coadjoint(&g, &psi);
                worst = worst.max((lhs.coeffs - rhs.coeffs).amax());
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

impl ContactStructure {
    pub fn moment(&self, action: &LinearAction, x: &DVector<f64>) -> CoadjointElement {
        moment_alpha(&self.alpha, action, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn r3_standard_form_has_unit_floor() {
        let r3 = EmbeddedManifold::euclidean(3);
        let s = r3.sample(20, 1).unwrap();
        let c = verify_contact(&r3, &catalog::standard_contact_form_euclidean(1), &s).unwrap();
        assert!((c.min_abs_pfaffian - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dz_fails_with_witness() {
        let r3 = EmbeddedManifold::euclidean(3);
        let s = r3.sample(5, 1).unwrap();
        let dz = OneFormField::new("dz", 3, |_| vec![Jet1::zero(), Jet1::zero(), Jet1::constant(1.0)]);
        match verify_contact(&r3, &dz, &s) {
            Err(GeomError::NotContact { point, abs_pfaffian }) => {
                assert_eq!(point.len(), 3);
                assert_eq!(abs_pfaffian, 0.0);
            }
            other => panic!("expected NotContact, got {other:?}"),
        }
    }

    #[test]
    fn circle_moment_on_s3_is_constant() {
        let s3 = catalog::sphere(2);
        let a = catalog::standard_contact_form(2);
        let act = LinearAction::circle_diagonal(2);
        for p in s3.sample(30, 2).unwrap().iter() {
            assert!((moment_alpha(&a, &act, p).coeffs[0] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn moment_jet_matches_moment() {
        let a = catalog::standard_contact_form(3);
        let act = LinearAction::su2_on(3);
        let gens = generator_matrices(&act);
        let x = DVector::from_vec(vec![0.1, 0.5, -0.3, 0.2, 0.6, -0.4]);
        let j = moment_jet(&a, &gens, &jet::seed(x.as_slice()));
        let m = moment_alpha(&a, &act, &x);
        for k in 0..3 {
            assert!((j[k].value - m.coeffs[k]).abs() < 1e-15);
        }
        // gradient against central differences
        let h = 1e-6;
        for i in 0..6 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (moment_alpha(&a, &act, &xp).coeffs - moment_alpha(&a, &act, &xm).coeffs) / (2.0 * h);
            for k in 0..3 {
                assert!((j[k].d(i) - fd[k]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn su2_moment_is_minus_hermitian_form() {
        let a = catalog::standard_contact_form(2);
        let act = LinearAction::su2_on(2);
        let (x1, y1, x2, y2) = (0.3, -0.4, 0.5, 0.1);
        let p = DVector::from_vec(vec![x1, y1, x2, y2]);
        let psi = moment_alpha(&a, &act, &p).coeffs;
        // −z†σ_k z
        let s1 = 2.0 * (x1 * x2 + y1 * y2);
        let s2 = 2.0 * (x1 * y2 - y1 * x2);
        let s3 = x1 * x1 + y1 * y1 - x2 * x2 - y2 * y2;
        assert!((psi[0] + s1).abs() < 1e-15);
        assert!((psi[1] + s2).abs() < 1e-15);
        assert!((psi[2] + s3).abs() < 1e-15);
    }

    #[test]
    fn annihilator_scale_must_be_positive() {
        assert!(CoorientedAnnihilatorPoint::new(DVector::zeros(2), 0.0).is_err());
        assert!(CoorientedAnnihilatorPoint::new(DVector::zeros(2), -1.0).is_err());
    }
}
