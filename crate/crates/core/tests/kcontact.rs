use std::sync::Arc;

use contact_bundles::bundles::sample_pairs;
use contact_bundles::catalog;
use contact_bundles::forms::LieDerivativeConfig;
use contact_bundles::kcontact::{self, CompatibleMetricField, EuclideanBackground, RankOneBackground};

#[test]
fn sphere_reeb_is_killing_for_euclidean_background() {
    let m = catalog::sphere(2);
    let g = CompatibleMetricField::new(m.clone(), catalog::standard_contact_form(2), Arc::new(EuclideanBackground));
    let pts = m.sample(10, 1).unwrap();
    let rep = kcontact::killing_residual(&g, &pts.points, LieDerivativeConfig::default()).unwrap();
    assert!(rep.max_residual < 1e-4, "{}", rep.max_residual);
}

#[test]
fn rank_one_background_breaks_killing() {
    let m = catalog::sphere(2);
    let g = CompatibleMetricField::new(
        m.clone(),
        catalog::standard_contact_form(2),
        Arc::new(RankOneBackground::coordinate(4, 0, 1.0)),
    );
    let pts = m.sample(10, 1).unwrap();
    let rep = kcontact::killing_residual(&g, &pts.points, LieDerivativeConfig::default()).unwrap();
    assert!(rep.max_residual > 1e-2, "{}", rep.max_residual);
}

#[test]
fn associated_metrics_are_killing() {
    for n in [1, 2] {
        let sc = kcontact::associated_scenario(n, 5).unwrap();
        let pts = sample_pairs(sc.assoc(), 4, 3).unwrap();
        for x in &pts {
            assert!(sc.assoc().reeb_verticality(x).unwrap() < 1e-7);
            assert!(sc.metric.reeb_dual_residual(x).unwrap() < 1e-9);
            assert!(sc.metric.basic_residual(x).unwrap() < 1e-10);
        }
        let rep = kcontact::killing_residual_associated(&sc.metric, &pts, LieDerivativeConfig::default()).unwrap();
        assert!(rep.max_residual < 1e-4, "n={n}: {}", rep.max_residual);
        let fs = sc.assoc().fiber.sample(20, 2).unwrap();
        let (floor, _) = kcontact::positivity_floor(sc.assoc(), &sc.positive_element, &fs.points);
        assert!((floor - 1.0).abs() < 1e-10, "{floor}");
        let (p, _) = sc.assoc().split(&pts[0]);
        let var = kcontact::horizontal_block_variation(&sc.metric, &p, &fs.points).unwrap();
        if n == 1 {
            assert!(var < 1e-10);
        } else {
            assert!(var > 1e-3);
        }
    }
}
