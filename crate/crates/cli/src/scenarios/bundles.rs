use std::sync::Arc;

use contact_bundles::bundles::{self, AssociatedContactBundle, GreatCircleArc, PrincipalBundle};
use contact_bundles::catalog;
use contact_bundles::forms::{OneFormField, ScalarFn};
use contact_bundles::jet::Jet1;
use contact_bundles::liealg::{CoadjointElement, LinearAction};
use contact_bundles::{linalg, GeomError};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{argmax, argmin, guarded, max_residual_check, v};
use crate::config::ScenarioConfig;
use crate::report::CheckRecord;

pub(crate) const SCALE_GRID: (f64, f64, usize) = (1e-2, 1e2, 5);

/// Hopf bundle with fiber `(E_a, α_std)` under the diagonal circle.
pub(crate) fn hopf_with_fiber(weights: &[f64], seed: u64) -> Result<AssociatedContactBundle, GeomError> {
    let fiber = catalog::ellipsoid(weights);
    let fs = fiber.sample(16, seed)?;
    bundles::assemble_alpha_tot(
        &bundles::hopf_bundle(),
        &fiber,
        &catalog::standard_contact_form(weights.len()),
        &LinearAction::circle_diagonal(weights.len()),
        &fs,
        seed,
    )
}

/// Relative Pfaffian margin of `α_tot` on quotient frames.
pub(crate) fn associated_contact_check(name: &str, assoc: &AssociatedContactBundle, points: &[DVector<f64>], pf_tol: f64) -> CheckRecord {
    guarded(name, || {
        let evals = points.par_iter().map(|x| assoc.pfaffian_at(x)).collect::<Result<Vec<_>, _>>()?;
        let rel: Vec<f64> = evals.iter().map(|e| e.pfaffian.abs() / e.scale.max(f64::MIN_POSITIVE)).collect();
        let (i, r) = argmin(&rel);
        let floor = evals.iter().map(|e| e.pfaffian.abs()).fold(f64::INFINITY, f64::min);
        Ok(CheckRecord::above(
            name,
            r,
            pf_tol,
            Some(v(&points[i])),
            format!("min |Pf| of alpha_tot = {floor:.6e} over {} points", points.len()),
        ))
    })
}

/// Fatness over all `(p, μ)` with `μ` in `mu_set`.
pub(crate) fn fatness_record(name: &str, bundle: &PrincipalBundle, points: &[DVector<f64>], mu_set: &[CoadjointElement], fat_tol: f64) -> CheckRecord {
    guarded(name, || {
        let pairs: Vec<_> = points
            .iter()
            .flat_map(|p| mu_set.iter().map(move |m| (p.clone(), m.clone())))
            .collect();
        let rep = bundles::fatness_on_pairs(bundle, &pairs, fat_tol)?;
        let mut witness = rep.witness_point.clone();
        witness.extend(&rep.witness_mu);
        Ok(CheckRecord::above(
            name,
            rep.min_ratio,
            fat_tol,
            Some(witness),
            format!(
                "min |det W|/|W|_F^n over {} (point, covector) pairs; min |det W| = {:.6e}; witness is point then covector",
                rep.evaluations, rep.min_abs_det
            ),
        ))
    })
}

/// Fatness at `(p_i, Ψ(f_i))` against contactness at `(p_i, f_i)`, pair by
/// pair; the value is the number of disagreements.
pub(crate) fn fat_matches_contact(name: &str, assoc: &AssociatedContactBundle, points: &[DVector<f64>], fat_tol: f64, pf_tol: f64) -> CheckRecord {
    guarded(name, || {
        let rows = points
            .par_iter()
            .map(|x| {
                let (p, f) = assoc.split(x);
                let w = assoc.bundle.fatness_matrix(&p, &assoc.fiber_moment(&f))?;
                let fat = bundles::fatness_ratio(&w).1 > fat_tol;
                let contact = !assoc.pfaffian_at(x)?.is_degenerate(pf_tol);
                Ok((fat, contact))
            })
            .collect::<Result<Vec<_>, GeomError>>()?;
        let mismatch = rows.iter().position(|(a, b)| a != b);
        let n_mis = rows.iter().filter(|(a, b)| a != b).count();
        let n_fat = rows.iter().filter(|r| r.0).count();
        let n_con = rows.iter().filter(|r| r.1).count();
        Ok(CheckRecord::equals(
            name,
            n_mis as f64,
            0.0,
            mismatch.map(|i| v(&points[i])),
            format!("fat at {n_fat}/{0}, contact at {n_con}/{0}", rows.len()),
        ))
    })
}

pub(crate) fn moment_mu_set(assoc: &AssociatedContactBundle, fiber_points: &[DVector<f64>]) -> Vec<CoadjointElement> {
    let (lo, hi, n) = SCALE_GRID;
    bundles::moment_image(assoc, fiber_points, &bundles::log_grid(lo, hi, n))
}

fn structure_checks(bundle: &PrincipalBundle, cfg: &ScenarioConfig, n_pts: usize) -> Vec<CheckRecord> {
    let tol = &cfg.tolerances;
    let pts = match bundle.total.sample(n_pts, cfg.seed) {
        Ok(s) => s,
        Err(e) => return vec![CheckRecord::error("connection_reproduction", e)],
    };
    vec![
        CheckRecord::at_most(
            "connection_reproduction",
            bundle.reproduction_residual(&pts),
            tol.reproduction,
            None,
            format!("max |A(X_P) - X| over {n_pts} points"),
        ),
        guarded("connection_equivariance", || {
            Ok(CheckRecord::at_most(
                "connection_equivariance",
                bundle.equivariance_residual(&pts, 5, cfg.seed)?,
                tol.equivariance,
                None,
                "max |R_g^*A - Ad(g^-1)A| over 5 group elements per point",
            ))
        }),
        guarded("projection_invariance", || {
            let (r, rank) = bundle.projection_checks(&pts, cfg.seed)?;
            Ok(CheckRecord::at_most(
                "projection_invariance",
                r,
                tol.equivariance,
                None,
                format!("max |π(p·g) - π(p)|; min rank of dπ = {rank}"),
            ))
        }),
        max_residual_check(
            "curvature_cross_validation",
            &pts.points,
            tol.curvature,
            "max |Ω(u#,v#) - bracket curvature| on orthonormal horizontal pairs",
            |p| {
                let h = bundle.horizontal_frame(p)?;
                let dpi = bundle.projection_jacobian(p);
                let mut worst: f64 = 0.0;
                for (a, b) in [(0, 1), (1, 0)] {
                    let u = &dpi * h.column(a);
                    let w = &dpi * h.column(b);
                    let omega = bundle.curvature_structure_eq(p, &bundle.horizontal_lift(p, &u)?, &bundle.horizontal_lift(p, &w)?)?;
                    let c = bundle.vertical_to_algebra_left(p, &bundle.curvature_bracket_def(p, &u, &w)?);
                    worst = worst.max((omega - c).amax());
                }
                Ok(worst)
            },
        ),
    ]
}

pub(crate) fn hopf_fatness(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    let n_pts = cfg.count(100);
    let tol = &cfg.tolerances;
    let bundle = bundles::hopf_bundle();
    let mut checks = structure_checks(&bundle, cfg, n_pts);
    let assoc = match hopf_with_fiber(&[1.0, 1.0], cfg.seed) {
        Ok(a) => a,
        Err(e) => {
            checks.push(CheckRecord::error("associated_contact", e));
            return checks;
        }
    };
    match (bundle.total.sample(n_pts, cfg.seed ^ 0x11), bundles::sample_pairs(&assoc, n_pts, cfg.seed ^ 0x12)) {
        (Ok(ps), Ok(pairs)) => {
            let fs: Vec<_> = pairs.iter().map(|x| assoc.split(x).1).collect();
            checks.push(fatness_record("fatness", &bundle, &ps.points, &moment_mu_set(&assoc, &fs[..fs.len().min(10)]), tol.fat));
            checks.push(associated_contact_check("associated_contact", &assoc, &pairs, tol.pf));
            checks.push(fat_matches_contact("fatness_matches_contact", &assoc, &pairs, tol.fat, tol.pf));
        }
        (Err(e), _) | (_, Err(e)) => checks.push(CheckRecord::error("fatness", e)),
    }
    checks
}

/// `f(p, z) = c₁ b₁(p) + c₂ |z₁|²`, invariant under the diagonal action.
pub(crate) fn invariant_exponent(c1: f64, c2: f64) -> ScalarFn {
    Arc::new(move |x: &[Jet1]| {
        let b1 = (&x[0] * &x[2] + &x[1] * &x[3]).scale(2.0);
        let z1 = &x[4] * &x[4] + &x[5] * &x[5];
        b1.scale(c1) + z1.scale(c2)
    })
}

fn connection_angle(assoc: &AssociatedContactBundle, alpha: &OneFormField, x: &DVector<f64>) -> Result<f64, GeomError> {
    let h = assoc.contact_connection_of(alpha, x)?;
    let ha = assoc.connection_horizontal(x)?;
    if h.ncols() != ha.ncols() {
        return Ok(1.0);
    }
    Ok(linalg::max_principal_angle_sin(&h, &ha))
}

pub(crate) fn assoc_contact(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    let n_pts = cfg.count(500);
    let tol = &cfg.tolerances;
    let assoc = match hopf_with_fiber(&[1.0, 2.0], cfg.seed) {
        Ok(a) => a,
        Err(e) => return vec![CheckRecord::error("associated_contact", e)],
    };
    let pts = match bundles::sample_pairs(&assoc, n_pts, cfg.seed) {
        Ok(p) => p,
        Err(e) => return vec![CheckRecord::error("associated_contact", e)],
    };
    let fs: Vec<_> = pts.iter().take(10).map(|x| assoc.split(x).1).collect();
    let ps: Vec<_> = pts.iter().map(|x| assoc.split(x).0).collect();
    let n_sigma = pts.len().min(200);
    let grid = bundles::log_grid(SCALE_GRID.0, SCALE_GRID.1, SCALE_GRID.2);
    let conformal = assoc.alpha_tot.conformal(invariant_exponent(0.7, -0.4));
    let n_conn = pts.len().min(100);
    vec![
        max_residual_check("basic_form", &pts, tol.basic, "max |α_tot(X_diag)|", |x| Ok(assoc.basic_residual(x))),
        max_residual_check("fiber_restriction", &pts, tol.fiber_restriction, "max |α_tot(0 ⊕ w) - α_F(w)|", |x| {
            assoc.fiber_restriction_residual(x)
        }),
        associated_contact_check("associated_contact", &assoc, &pts, tol.pf),
        fatness_record("fatness", &assoc.bundle, &ps[..ps.len().min(100)], &moment_mu_set(&assoc, &fs), tol.fat),
        fat_matches_contact("fatness_matches_contact", &assoc, &pts, tol.fat, tol.pf),
        guarded("sigma_identity", || {
            let idx: Vec<usize> = (0..n_sigma).collect();
            let vals = idx
                .par_iter()
                .map(|&i| {
                    let x = &pts[i];
                    let (p, _) = assoc.split(x);
                    let h = assoc.bundle.horizontal_frame(&p)?;
                    let dpi = assoc.bundle.projection_jacobian(&p);
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(i as u64);
                    let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                    let u = &dpi * (h.column(0) * c[0] + h.column(1) * c[1]);
                    let w = &dpi * (h.column(0) * c[2] + h.column(1) * c[3]);
                    let (lhs, rhs) = assoc.sigma_identity(x, grid[i % grid.len()], &u, &w)?;
                    Ok((lhs - rhs).abs() / rhs.abs().max(1.0))
                })
                .collect::<Result<Vec<_>, GeomError>>()?;
            let (i, r) = argmax(&vals);
            Ok(CheckRecord::at_most(
                "sigma_identity",
                r,
                tol.sigma,
                Some(v(&pts[i])),
                format!("max |σ_H - <sΨ, Ω>| / max(1, |<sΨ, Ω>|) over {n_sigma} triples, s on a log grid in [1e-2, 1e2]"),
            ))
        }),
        max_residual_check(
            "contact_connection_angle",
            &pts[..n_conn],
            tol.connection_angle,
            "max principal-angle sine between H(ξ) and the A-horizontal space",
            |x| connection_angle(&assoc, &assoc.alpha_tot, x),
        ),
        max_residual_check(
            "contact_connection_conformal",
            &pts[..n_conn],
            tol.connection_angle,
            "same angle for exp(f)·α_tot with f = 0.7 b1 - 0.4 |z1|^2",
            |x| connection_angle(&assoc, &conformal, x),
        ),
    ]
}

pub(crate) fn parallel_transport(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    let n_pts = cfg.count(2);
    let tol = &cfg.tolerances;
    let assoc = match hopf_with_fiber(&[1.0, 2.0], cfg.seed) {
        Ok(a) => a,
        Err(e) => return vec![CheckRecord::error("transport_hyperplane_angle", e)],
    };
    let fs = match assoc.fiber.sample(n_pts, cfg.seed ^ 0x77) {
        Ok(s) => s,
        Err(e) => return vec![CheckRecord::error("transport_hyperplane_angle", e)],
    };
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let starts: Vec<DVector<f64>> = fs
        .points
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let p = DVector::from_vec(vec![r * t.cos(), r * t.sin(), r * t.cos(), r * t.sin()]);
            assoc.join(&p, f)
        })
        .collect();
    let path = GreatCircleArc::equator();
    let res = starts
        .par_iter()
        .map(|x| assoc.transport_contact_check(&path, x, 1000, 1e-5))
        .collect::<Result<Vec<_>, _>>();
    let res = match res {
        Ok(r) => r,
        Err(e) => return vec![CheckRecord::error("transport_hyperplane_angle", e)],
    };
    let base: Vec<f64> = res.iter().map(|c| c.base_error).collect();
    let angle: Vec<f64> = res.iter().map(|c| c.hyperplane_angle).collect();
    let co: Vec<f64> = res.iter().map(|c| c.coorientation).collect();
    let (ib, b) = argmax(&base);
    let (ia, a) = argmax(&angle);
    let (ic, c) = argmin(&co);
    vec![
        CheckRecord::at_most(
            "transport_base_error",
            b,
            tol.transport_base,
            Some(v(&starts[ib])),
            "max |π(end) - γ(1)| after 1000 RK4 steps around the equator",
        ),
        CheckRecord::at_most(
            "transport_hyperplane_angle",
            a,
            tol.transport_angle,
            Some(v(&starts[ia])),
            "max angle between transported fiber contact vectors and ker α_tot",
        ),
        CheckRecord::above(
            "transport_coorientation",
            c,
            0.0,
            Some(v(&starts[ic])),
            "min α_tot of the transported Reeb vector",
        ),
    ]
}
