use std::sync::Arc;

use contact_bundles::bundles;
use contact_bundles::catalog;
use contact_bundles::contact;
use contact_bundles::forms::{self, ScalarFn};
use contact_bundles::jet::{self, Jet1};
use contact_bundles::liealg::LinearAction;
use contact_bundles::{EmbeddedManifold, SampleSet};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn on(m: &EmbeddedManifold, raw: &[f64]) -> Option<DVector<f64>> {
    let v = DVector::from_column_slice(raw);
    (v.norm() > 0.2).then(|| m.retract(&v).ok()).flatten()
}

fn raw(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // R = ½ Σ a_j i z_j on E_a, with i(x, y) = (−y, x).
    #[test]
    fn ellipsoid_reeb_closed_form(a1 in 0.5f64..3.0, a2 in 0.5f64..3.0, x in raw(4)) {
        let m = catalog::ellipsoid(&[a1, a2]);
        let Some(p) = on(&m, &x) else { return Ok(()) };
        let r = forms::reeb(&catalog::standard_contact_form(2), &m, &p).unwrap();
        let a = [a1, a2];
        let expect = DVector::from_fn(4, |k, _| {
            let j = k / 2;
            if k % 2 == 0 { -0.5 * a[j] * p[k + 1] } else { 0.5 * a[j] * p[k - 1] }
        });
        prop_assert!((r - expect).amax() < 1e-10);
    }

    // t_j = 2|z_j|², hence Σ a_j t_j = 2 on E_a.
    #[test]
    fn torus_moment_on_ellipsoid(a in prop::collection::vec(0.5f64..3.0, 3), x in raw(6)) {
        let m = catalog::ellipsoid(&a);
        let Some(p) = on(&m, &x) else { return Ok(()) };
        let t = contact::moment_alpha(&catalog::standard_contact_form(3), &LinearAction::torus_coordinatewise(3), &p);
        for j in 0..3 {
            prop_assert!((t.coeffs[j] - 2.0 * (p[2 * j].powi(2) + p[2 * j + 1].powi(2))).abs() < 1e-12);
        }
        let s: f64 = (0..3).map(|j| a[j] * t.coeffs[j]).sum();
        prop_assert!((s - 2.0).abs() < 1e-10);
    }

    // Bordered Pfaffian of e^f α on a 3-manifold scales by e^{2f}.
    #[test]
    fn conformal_pfaffian_scaling(c in prop::collection::vec(-1.0f64..1.0, 4), x in raw(4)) {
        let m = catalog::sphere(2);
        let Some(p) = on(&m, &x) else { return Ok(()) };
        let coeffs = c.clone();
        let f: ScalarFn = Arc::new(move |y: &[Jet1]| jet::dot_const(y, &coeffs));
        let alpha = catalog::standard_contact_form(2);
        let frame = m.tangent_frame(&p).unwrap().columns;
        let base = forms::contact_pfaffian_on_frame(&alpha, &p, &frame).unwrap().pfaffian;
        let scaled = forms::contact_pfaffian_on_frame(&alpha.conformal(f), &p, &frame).unwrap().pfaffian;
        let fp: f64 = c.iter().zip(p.iter()).map(|(a, b)| a * b).sum();
        prop_assert!((scaled - (2.0 * fp).exp() * base).abs() <= 1e-10 * scaled.abs().max(1.0));
        prop_assert!((base.abs() - 8.0).abs() < 1e-10);
    }

    #[test]
    fn fatness_ratio_is_scale_invariant(e in prop::collection::vec(-1.0f64..1.0, 6), s in -2.0f64..2.0) {
        let mut w = DMatrix::zeros(4, 4);
        let mut k = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                w[(i, j)] = e[k];
                w[(j, i)] = -e[k];
                k += 1;
            }
        }
        let (d, r) = bundles::fatness_ratio(&w);
        let (ds, rs) = bundles::fatness_ratio(&(&w * 10f64.powf(s)));
        prop_assert!((rs - r).abs() <= 1e-12 * r.max(1e-300) + 1e-15);
        prop_assert!((ds - d * 10f64.powf(4.0 * s)).abs() <= 1e-9 * ds.abs().max(1e-12));
        // det of a 4×4 skew matrix is Pf²
        let pf = e[0] * e[5] - e[1] * e[4] + e[2] * e[3];
        prop_assert!((d - pf * pf).abs() < 1e-12);
    }

    // dα(X_M, Y_M) = −⟨Ψ_α, [X, Y]⟩ for SU(2) on S⁵.
    #[test]
    fn su2_orbit_two_form(x in raw(6), xa in raw(3), ya in raw(3)) {
        let m = catalog::sphere(3);
        let Some(p) = on(&m, &x) else { return Ok(()) };
        let (l, r) = contact::orbit_two_form_identity(
            &catalog::standard_contact_form(3),
            &LinearAction::su2_on(3),
            &p,
            &DVector::from_vec(xa),
            &DVector::from_vec(ya),
        );
        prop_assert!((l - r).abs() < 1e-12);
    }

    #[test]
    fn su2_moment_is_equivariant(x in raw(6), seed in any::<u64>()) {
        let m = catalog::sphere(3);
        let Some(p) = on(&m, &x) else { return Ok(()) };
        let samples = SampleSet { seed, points: vec![p] };
        let r = contact::moment_equivariance_residual(
            &catalog::standard_contact_form(3),
            &LinearAction::su2_on(3),
            &samples,
            4,
            seed,
        );
        prop_assert!(r < 1e-12);
    }

    #[test]
    fn hopf_projection_is_circle_invariant(x in raw(4), t in 0.0f64..7.0) {
        let b = bundles::hopf_bundle();
        let Some(p) = on(&b.total, &x) else { return Ok(()) };
        let g = b.group.exp(&DVector::from_element(1, 1.0), t);
        let q = b.right_action.act(&g, &p);
        prop_assert!((b.project(&q) - b.project(&p)).amax() < 1e-12);
        prop_assert!((b.project(&p).norm() - 1.0).abs() < 1e-12);
    }
}
