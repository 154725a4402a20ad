use contact_bundles::crosssection::{self, CrossSectionProblem, SliceData};
use nalgebra::DVector;

use super::{argmax, guarded, v};
use crate::config::ScenarioConfig;
use crate::report::CheckRecord;

pub(crate) fn su2(cfg: &ScenarioConfig, n: usize) -> Vec<CheckRecord> {
    let n_pts = cfg.count(50);
    let tol = &cfg.tolerances;
    let problem = crosssection::su2_problem(n);
    let slice = &problem.slice;
    let mut checks = vec![
        CheckRecord::at_most(
            "slice_complement",
            slice.annihilator_residual(&slice.mu),
            tol.membership,
            None,
            format!("max |<μ, m_i>|; dim g_μ = {}, dim m = {}", slice.isotropy.ncols(), slice.dim_m()),
        ),
        guarded("slice_pairing", || {
            let r = crosssection::slice_pairing_check(slice, &slice.mu)?;
            Ok(CheckRecord::holds(
                "slice_pairing",
                r.pass,
                None,
                format!("min singular value of <μ, [m_i, m_j]> = {:.6e}", r.min_singular),
            ))
        }),
    ];
    let samples = match crosssection::find_cross_section(&problem, n_pts, cfg.seed) {
        Ok(s) => s,
        Err(e) => {
            checks.push(CheckRecord::error("cross_section_found", e));
            return checks;
        }
    };
    checks.push(CheckRecord::equals(
        "cross_section_found",
        samples.len() as f64,
        n_pts as f64,
        None,
        format!("points of R found with at most {} seeds each", crosssection::SEED_BUDGET),
    ));
    let pts: Vec<_> = samples.iter().map(|s| s.point.clone()).collect();
    checks.extend(splitting_checks(&problem, slice, &pts, cfg));

    let rep = match crosssection::verify_cross_section_contact(&problem, &samples, cfg.seed) {
        Ok(r) => r,
        Err(e) => {
            checks.push(CheckRecord::error("section_contact", e));
            return checks;
        }
    };
    checks.extend([
        CheckRecord::equals(
            "section_dimension",
            if rep.dims_pass() { rep.expected_dim as f64 } else { rep.min_dim as f64 },
            rep.expected_dim as f64,
            None,
            format!("frame rank of T_xR, range [{}, {}]", rep.min_dim, rep.max_dim),
        ),
        CheckRecord::above(
            "section_contact",
            if rep.degenerate_count == 0 { rep.pfaffian_floor } else { 0.0 },
            0.0,
            Some(rep.pfaffian_witness.clone()),
            format!("min |Pf| of α on T_xR; {} degenerate points", rep.degenerate_count),
        ),
        CheckRecord::at_most(
            "conformal_membership",
            if rep.conformal_members { rep.conformal_membership } else { f64::INFINITY },
            tol.membership,
            None,
            "max |<Ψ_{e^f α}(x), m_i>| at the same points",
        ),
        CheckRecord::at_most(
            "isotropy_invariance",
            if rep.isotropy_members { rep.isotropy_membership } else { f64::INFINITY },
            tol.membership,
            None,
            "max membership residual after 5 random elements of G_μ per point",
        ),
        CheckRecord::at_most(
            "bracket_identity",
            rep.bracket_identity,
            tol.bracket,
            None,
            "max |<Ψ, [m_i, m_j]> + dα(m_i,M, m_j,M)|",
        ),
        CheckRecord::holds(
            "pairing_nondegenerate",
            rep.pairing_pass,
            None,
            format!("min singular value of <Ψ(x), [m_i, m_j]> = {:.6e}", rep.pairing_min_singular),
        ),
    ]);
    checks
}

/// Splitting conditions (a), (b), (c) at every point, using the `m` basis of
/// `slice`.
pub(crate) fn splitting_checks(
    problem: &CrossSectionProblem,
    slice: &SliceData,
    pts: &[DVector<f64>],
    cfg: &ScenarioConfig,
) -> Vec<CheckRecord> {
    let tol = &cfg.tolerances;
    let reports = match pts
        .iter()
        .map(|x| crosssection::verify_splitting(problem, slice, x, &problem.section_frame(x)))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(r) => r,
        Err(e) => return vec![CheckRecord::error("splitting_a", e)],
    };
    let (ia, a) = argmax(&reports.iter().map(|r| r.a).collect::<Vec<_>>());
    let (ic, c) = argmax(&reports.iter().map(|r| r.c).collect::<Vec<_>>());
    let bad_b = reports.iter().position(|r| !r.b_pass());
    let r0 = &reports[0];
    vec![
        CheckRecord::at_most("splitting_a", a, tol.splitting_a, Some(v(&pts[ia])), "max |α(X_M)| over the m basis"),
        CheckRecord::holds(
            "splitting_b",
            bad_b.is_none(),
            bad_b.map(|i| v(&pts[i])),
            format!(
                "dim m_M + dim(ξ ∩ TR) = dim ξ with full joint rank; first point: {} + {} vs {}",
                r0.dim_m_orbit, r0.dim_xi_r, r0.dim_xi
            ),
        ),
        CheckRecord::at_most("splitting_c", c, tol.splitting_c, Some(v(&pts[ic])), "max |dα(X_M, w)| for w ∈ ξ ∩ TR"),
    ]
}
