//! Scenario registry. Each scenario returns its check records in a fixed
//! order; sample sweeps run on the ambient rayon pool and aggregate by index.

use contact_bundles::forms::{self, OneFormField};
use contact_bundles::{EmbeddedManifold, GeomError};
use nalgebra::DVector;
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::report::CheckRecord;

mod bundles;
mod contact;
mod cross;
mod kcontact;
mod negative;

pub use negative::{noninvariant_form, partially_flat_fiber_points, partially_flat_scenario, wrong_complement, NONINVARIANT_EPS};

pub fn run(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    match cfg.scenario.as_str() {
        "std_contact" => contact::std_contact(cfg),
        "kcontact_killing" => contact::kcontact_killing(cfg),
        "hopf_fatness" => bundles::hopf_fatness(cfg),
        "assoc_contact" => bundles::assoc_contact(cfg),
        "parallel_transport" => bundles::parallel_transport(cfg),
        "yamazaki_n1" => kcontact::yamazaki(cfg, 1),
        "yamazaki_n2" => kcontact::yamazaki(cfg, 2),
        "cross_section_su2_s3" => cross::su2(cfg, 2),
        "cross_section_su2_s5" => cross::su2(cfg, 3),
        "negative_controls" => negative::negative_controls(cfg),
        other => unreachable!("scenario `{other}` passed validation"),
    }
}

pub(crate) fn v(p: &DVector<f64>) -> Vec<f64> {
    p.iter().copied().collect()
}

/// Runs a check, turning a geometry error into a failed record.
pub(crate) fn guarded(name: &str, f: impl FnOnce() -> Result<CheckRecord, GeomError>) -> CheckRecord {
    f().unwrap_or_else(|e| CheckRecord::error(name, e))
}

/// Index and value of the largest entry (first on ties).
pub(crate) fn argmax(vals: &[f64]) -> (usize, f64) {
    vals.iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, x)| if x > bv || x.is_nan() && !bv.is_nan() { (i, x) } else { (bi, bv) })
}

/// Index and value of the smallest entry (first on ties).
pub(crate) fn argmin(vals: &[f64]) -> (usize, f64) {
    let neg: Vec<f64> = vals.iter().map(|x| -x).collect();
    let (i, x) = argmax(&neg);
    (i, -x)
}

/// Relative Pfaffian margin `min |Pf| / scale` of `α` on tangent frames,
/// PASS iff above `pf_tol`.
pub(crate) fn contact_check(
    name: &str,
    m: &EmbeddedManifold,
    alpha: &OneFormField,
    points: &[DVector<f64>],
    pf_tol: f64,
) -> CheckRecord {
    guarded(name, || {
        let evals = points
            .par_iter()
            .map(|p| {
                let frame = m.tangent_frame(p)?.columns;
                forms::contact_pfaffian_on_frame(alpha, p, &frame)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let rel: Vec<f64> = evals.iter().map(|e| e.pfaffian.abs() / e.scale.max(f64::MIN_POSITIVE)).collect();
        let (i, r) = argmin(&rel);
        let floor = evals.iter().map(|e| e.pfaffian.abs()).fold(f64::INFINITY, f64::min);
        Ok(CheckRecord::above(
            name,
            r,
            pf_tol,
            Some(v(&points[i])),
            format!("min |Pf| = {floor:.6e} over {} points", points.len()),
        ))
    })
}

/// Maximum of a per-point residual, with the maximizing point as witness.
pub(crate) fn max_residual_check(
    name: &str,
    points: &[DVector<f64>],
    threshold: f64,
    detail: &str,
    f: impl Fn(&DVector<f64>) -> Result<f64, GeomError> + Sync,
) -> CheckRecord {
    guarded(name, || {
        let vals = points.par_iter().map(&f).collect::<Result<Vec<_>, _>>()?;
        let (i, r) = argmax(&vals);
        Ok(CheckRecord::at_most(
            name,
            r,
            threshold,
            Some(v(&points[i])),
            format!("{detail} over {} points", points.len()),
        ))
    })
}
