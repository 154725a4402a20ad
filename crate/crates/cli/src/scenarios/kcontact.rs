use contact_bundles::bundles;
use contact_bundles::forms::LieDerivativeConfig;
use contact_bundles::kcontact;
use nalgebra::DVector;

use super::bundles::{associated_contact_check, fatness_record, moment_mu_set};
use super::{guarded, max_residual_check, v};
use crate::config::ScenarioConfig;
use crate::report::CheckRecord;

pub(crate) fn yamazaki(cfg: &ScenarioConfig, n: usize) -> Vec<CheckRecord> {
    let n_pts = cfg.count(16);
    let tol = &cfg.tolerances;
    let sc = match kcontact::associated_scenario(n, cfg.seed) {
        Ok(s) => s,
        Err(e) => return vec![CheckRecord::error("associated_contact", e)],
    };
    let assoc = sc.assoc();
    let pts = match bundles::sample_pairs(assoc, n_pts, cfg.seed) {
        Ok(p) => p,
        Err(e) => return vec![CheckRecord::error("associated_contact", e)],
    };
    let fibers = match assoc.fiber.sample(200, cfg.seed ^ 0x5a) {
        Ok(s) => s.points,
        Err(e) => return vec![CheckRecord::error("positivity", e)],
    };
    let ps: Vec<DVector<f64>> = pts.iter().map(|x| assoc.split(x).0).collect();
    let mut checks = vec![
        max_residual_check("basic_form", &pts, tol.basic, "max |α_tot(X_diag)|", |x| Ok(assoc.basic_residual(x))),
        associated_contact_check("associated_contact", assoc, &pts, tol.pf),
        fatness_record("fatness", &assoc.bundle, &ps, &moment_mu_set(assoc, &fibers[..10]), tol.fat),
        {
            let (floor, w) = kcontact::positivity_floor(assoc, &sc.positive_element, &fibers);
            CheckRecord::above(
                "positivity",
                floor,
                0.0,
                Some(w),
                format!("min <Ψ(f), X> over {} fiber points, X = {:?}", fibers.len(), sc.positive_element.as_slice()),
            )
        },
        max_residual_check("reeb_verticality", &pts, tol.verticality, "max |dπ(R)|", |x| assoc.reeb_verticality(x)),
        max_residual_check("metric_basic", &pts, tol.basic, "max |g(X_diag, ·)|", |x| sc.metric.basic_residual(x)),
        max_residual_check("metric_reeb_dual", &pts, tol.compatibility, "max |g(R, ·) - α_tot| and |g(R,R) - 1|", |x| {
            sc.metric.reeb_dual_residual(x)
        }),
        guarded("killing", || {
            let rep = kcontact::killing_residual_associated(&sc.metric, &pts, LieDerivativeConfig::default())?;
            Ok(CheckRecord::at_most(
                "killing",
                rep.max_residual,
                tol.killing,
                Some(rep.witness),
                format!("max |L_R g| at h = 1e-3 over {} points", pts.len()),
            ))
        }),
    ];
    if n >= 2 {
        checks.push(guarded("horizontal_fiber_dependence", || {
            let p = &ps[0];
            let var = kcontact::horizontal_block_variation(&sc.metric, p, &fibers[..20])?;
            Ok(CheckRecord::above(
                "horizontal_fiber_dependence",
                var,
                tol.block_variation,
                Some(v(p)),
                "max entry difference of the horizontal metric block between fiber points over one p",
            ))
        }));
    }
    checks
}
