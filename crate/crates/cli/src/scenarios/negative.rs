//! Deliberately broken inputs. Every check in this scenario is expected to
//! FAIL; each input breaks exactly one hypothesis.

use std::sync::Arc;

use contact_bundles::bundles::{self, AssociatedContactBundle};
use contact_bundles::catalog;
use contact_bundles::contact;
use contact_bundles::crosssection;
use contact_bundles::forms::{LieDerivativeConfig, OneFormField};
use contact_bundles::jet::Jet1;
use contact_bundles::kcontact::{self, CompatibleMetricField, RankOneBackground};
use contact_bundles::liealg::{CoadjointElement, LinearAction};
use contact_bundles::{EmbeddedManifold, GeomError};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::bundles::{associated_contact_check, fatness_record};
use super::cross::splitting_checks;
use super::{argmin, contact_check, guarded, v};
use crate::config::ScenarioConfig;
use crate::report::CheckRecord;

pub const NONINVARIANT_EPS: f64 = 0.1;

/// `α_std + ε x₁ dx₂` on `ℂ²`, not invariant under the coordinatewise torus.
pub fn noninvariant_form(eps: f64) -> OneFormField {
    let perturb = OneFormField::new("eps x1 dx2", 4, move |x| {
        vec![Jet1::zero(), Jet1::zero(), x[0].scale(eps), Jet1::zero()]
    });
    catalog::standard_contact_form(2).plus(&perturb)
}

/// Fiber points of `E_(1,2)` led by one point with `z₁ = 0`.
pub fn partially_flat_fiber_points(count: usize, seed: u64) -> Result<Vec<DVector<f64>>, GeomError> {
    let fiber = catalog::ellipsoid(&[1.0, 2.0]);
    let mut pts = vec![fiber.retract(&DVector::from_vec(vec![0.0, 0.0, 0.6, 0.3]))?];
    pts.extend(fiber.sample(count.saturating_sub(1).max(1), seed)?.points);
    pts.truncate(count.max(1));
    Ok(pts)
}

/// `S³ × S¹ → S²` with the Hopf connection on the first factor and the flat
/// one on the second, fiber `E_(1,2)` under the coordinatewise torus, with
/// sample pairs whose first fiber point has `z₁ = 0`.
pub fn partially_flat_scenario(count: usize, seed: u64) -> Result<(AssociatedContactBundle, Vec<DVector<f64>>), GeomError> {
    let fiber = catalog::ellipsoid(&[1.0, 2.0]);
    let fs = fiber.sample(16, seed)?;
    let assoc = bundles::assemble_alpha_tot(
        &bundles::partially_flat_bundle(),
        &fiber,
        &catalog::standard_contact_form(2),
        &LinearAction::torus_coordinatewise(2),
        &fs,
        seed,
    )?;
    let ps = assoc.bundle.total.sample(count, seed ^ 0x99)?;
    let fpts = partially_flat_fiber_points(count, seed ^ 0x98)?;
    let pairs = ps.iter().zip(&fpts).map(|(p, f)| assoc.join(p, f)).collect();
    Ok((assoc, pairs))
}

fn dz_form() -> OneFormField {
    OneFormField::new("dz", 3, |_| vec![Jet1::zero(), Jet1::zero(), Jet1::constant(1.0)])
}

pub(crate) fn negative_controls(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    let n_pts = cfg.count(20);
    let tol = &cfg.tolerances;
    let seed = cfg.seed;
    let mut checks = Vec::new();

    let r3 = EmbeddedManifold::euclidean(3);
    checks.push(match r3.sample(n_pts, seed) {
        Ok(s) => contact_check("dz_contact", &r3, &dz_form(), &s.points, tol.pf),
        Err(e) => CheckRecord::error("dz_contact", e),
    });

    let flat = bundles::flat_bundle();
    checks.push(match flat.total.sample(n_pts, seed) {
        Ok(s) => fatness_record("flat_fatness", &flat, &s.points, &[CoadjointElement::from_slice(&[1.0])], tol.fat),
        Err(e) => CheckRecord::error("flat_fatness", e),
    });
    checks.push(guarded("flat_associated_contact", || {
        let fiber = catalog::sphere(2);
        let fs = fiber.sample(16, seed)?;
        let assoc = bundles::assemble_alpha_tot(
            &flat,
            &fiber,
            &catalog::standard_contact_form(2),
            &LinearAction::circle_diagonal(2),
            &fs,
            seed,
        )?;
        let pts = bundles::sample_pairs(&assoc, n_pts, seed)?;
        Ok(associated_contact_check("flat_associated_contact", &assoc, &pts, tol.pf))
    }));

    checks.push(guarded("noninvariant_form_invariance", || {
        let s3 = catalog::sphere(2);
        let pts = s3.sample(n_pts, seed)?;
        let rep = contact::invariance_residual(
            &s3,
            &noninvariant_form(NONINVARIANT_EPS),
            &LinearAction::torus_coordinatewise(2),
            &pts,
            20,
            seed,
        )?;
        Ok(CheckRecord::at_most(
            "noninvariant_form_invariance",
            rep.max_residual,
            tol.invariance,
            Some(rep.witness_point),
            format!("max |a(g)^*α - α| for α_std + {NONINVARIANT_EPS} x1 dx2 under T^2"),
        ))
    }));

    let hopf = bundles::hopf_bundle();
    checks.push(match hopf.total.sample(n_pts, seed) {
        Ok(s) => fatness_record("zero_mu_fatness", &hopf, &s.points, &[CoadjointElement::from_slice(&[0.0])], tol.fat),
        Err(e) => CheckRecord::error("zero_mu_fatness", e),
    });

    checks.push(guarded("reeb_breaking_killing", || {
        let s3 = catalog::sphere(2);
        let pts = s3.sample(n_pts.min(10), seed)?;
        let g = CompatibleMetricField::new(
            s3,
            catalog::standard_contact_form(2),
            Arc::new(RankOneBackground::coordinate(4, 0, 1.0)),
        );
        let rep = kcontact::killing_residual(&g, &pts.points, LieDerivativeConfig::default())?;
        Ok(CheckRecord::at_most(
            "reeb_breaking_killing",
            rep.max_residual,
            tol.killing,
            Some(rep.witness),
            "max |L_R g| for the polar metric of the background I + e1 e1^T",
        ))
    }));

    checks.push(guarded("wrong_complement_splitting_a", || {
        let problem = crosssection::su2_problem(2);
        let pts: Vec<_> = crosssection::find_cross_section(&problem, n_pts.min(10), seed)?
            .into_iter()
            .map(|s| s.point)
            .collect();
        let wrong = problem.slice.with_complement(wrong_complement());
        let mut rec = splitting_checks(&problem, &wrong, &pts, cfg).swap_remove(0);
        rec.name = "wrong_complement_splitting_a".into();
        Ok(rec)
    }));

    match partially_flat_scenario(n_pts, seed) {
        Ok((assoc, pairs)) => {
            checks.push(guarded("partially_flat_fatness", || {
                let ratios = pairs
                    .par_iter()
                    .map(|x| {
                        let (p, f) = assoc.split(x);
                        Ok(bundles::fatness_ratio(&assoc.bundle.fatness_matrix(&p, &assoc.fiber_moment(&f))?).1)
                    })
                    .collect::<Result<Vec<_>, GeomError>>()?;
                let (i, r) = argmin(&ratios);
                Ok(CheckRecord::above(
                    "partially_flat_fatness",
                    r,
                    tol.fat,
                    Some(v(&pairs[i])),
                    "min fatness ratio at (p_i, Ψ(f_i)); witness is (p, f)",
                ))
            }));
            checks.push(associated_contact_check("partially_flat_contact", &assoc, &pairs, tol.pf));
        }
        Err(e) => checks.push(CheckRecord::error("partially_flat_fatness", e)),
    }
    checks
}

/// `{X₁ + X₃, X₂}`: spans a complement of `g_μ` for `μ = e₃*` that is not
/// orthogonal to it.
pub fn wrong_complement() -> DMatrix<f64> {
    DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0])
}
