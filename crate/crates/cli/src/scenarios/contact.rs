use std::sync::Arc;

use contact_bundles::catalog;
use contact_bundles::forms::{self, LieDerivativeConfig, OneFormField};
use contact_bundles::kcontact::{self, BackgroundMetric, CompatibleMetricField, EuclideanBackground};
use contact_bundles::EmbeddedManifold;
use nalgebra::DVector;

use super::{contact_check, guarded, max_residual_check};
use crate::config::ScenarioConfig;
use crate::report::CheckRecord;

pub(crate) fn std_contact(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    let n_pts = cfg.count(500);
    let tol = &cfg.tolerances;
    let mut checks = Vec::new();
    let mut cases: Vec<(String, EmbeddedManifold, OneFormField)> = Vec::new();
    for n in 1..=3 {
        cases.push((
            format!("contact_r{}", 2 * n + 1),
            EmbeddedManifold::euclidean(2 * n + 1),
            catalog::standard_contact_form_euclidean(n),
        ));
    }
    for n in 1..=3 {
        cases.push((format!("contact_s{}", 2 * n - 1), catalog::sphere(n), catalog::standard_contact_form(n)));
    }
    for a in [vec![1.0, 2.0], vec![1.0, 2.0, 3.0]] {
        let label: Vec<String> = a.iter().map(|x| format!("{x}")).collect();
        cases.push((
            format!("contact_ellipsoid_{}", label.join("_")),
            catalog::ellipsoid(&a),
            catalog::standard_contact_form(a.len()),
        ));
    }
    for (k, (name, m, alpha)) in cases.iter().enumerate() {
        match m.sample(n_pts, cfg.seed.wrapping_add(k as u64)) {
            Ok(s) => checks.push(contact_check(name, m, alpha, &s.points, tol.pf)),
            Err(e) => checks.push(CheckRecord::error(name, e)),
        }
    }

    let r3 = EmbeddedManifold::euclidean(3);
    let alpha_r3 = catalog::standard_contact_form_euclidean(1);
    checks.push(guarded("reeb_r3_exact", || {
        let pts = r3.sample(n_pts, cfg.seed ^ 0x31)?;
        let ez = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        Ok(max_residual_check("reeb_r3_exact", &pts.points, tol.reeb_exact, "max |R - e_z|", |p| {
            Ok((forms::reeb(&alpha_r3, &r3, p)? - &ez).amax())
        }))
    }));
    let reeb_cases = [
        ("reeb_s3", catalog::sphere(2), catalog::standard_contact_form(2)),
        ("reeb_s5", catalog::sphere(3), catalog::standard_contact_form(3)),
        ("reeb_ellipsoid_1_2", catalog::ellipsoid(&[1.0, 2.0]), catalog::standard_contact_form(2)),
    ];
    for (k, (name, m, alpha)) in reeb_cases.iter().enumerate() {
        checks.push(guarded(name, || {
            let pts = m.sample(n_pts, cfg.seed ^ (0x40 + k as u64))?;
            Ok(max_residual_check(name, &pts.points, tol.reeb, "max Reeb system residual", |p| {
                let frame = m.tangent_frame(p)?.columns;
                let r = forms::reeb_on_frame(alpha, p, &frame, tol.pf)?;
                let (a, b) = forms::reeb_residuals(alpha, p, &frame, &r);
                Ok(a.max(b))
            }))
        }));
    }
    checks
}

/// Compatibility residuals of the polar metric and the Killing residual of
/// its Reeb field.
pub(crate) fn metric_checks(
    prefix: &str,
    m: &EmbeddedManifold,
    alpha: &OneFormField,
    background: Arc<dyn BackgroundMetric>,
    points: &[DVector<f64>],
    cfg: &ScenarioConfig,
) -> Vec<CheckRecord> {
    let field = CompatibleMetricField::new(m.clone(), alpha.clone(), background);
    let compat = format!("{prefix}_compatibility");
    let killing = format!("{prefix}_killing");
    vec![
        max_residual_check(
            &compat,
            points,
            cfg.tolerances.compatibility,
            "max of |g(u,Jv) - dα(u,v)|, |J² + π_ξ|, |g(R,·) - α|",
            |p| {
                let c = field.at(p)?;
                Ok(c.compatibility_residual()
                    .max(c.complex_structure_residual())
                    .max(c.reeb_dual_residual()))
            },
        ),
        guarded(&killing, || {
            let rep = kcontact::killing_residual(&field, points, LieDerivativeConfig::default())?;
            Ok(CheckRecord::at_most(
                &killing,
                rep.max_residual,
                cfg.tolerances.killing,
                Some(rep.witness),
                format!("max |L_R g| at h = 1e-3 over {} points", points.len()),
            ))
        }),
    ]
}

pub(crate) fn kcontact_killing(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    let n_pts = cfg.count(20);
    let cases = [
        ("s3", catalog::sphere(2), catalog::standard_contact_form(2)),
        ("s5", catalog::sphere(3), catalog::standard_contact_form(3)),
        ("ellipsoid_1_2", catalog::ellipsoid(&[1.0, 2.0]), catalog::standard_contact_form(2)),
    ];
    let mut checks = Vec::new();
    for (k, (name, m, alpha)) in cases.iter().enumerate() {
        match m.sample(n_pts, cfg.seed.wrapping_add(k as u64)) {
            Ok(s) => checks.extend(metric_checks(name, m, alpha, Arc::new(EuclideanBackground), &s.points, cfg)),
            Err(e) => checks.push(CheckRecord::error(name, e)),
        }
    }
    checks
}
