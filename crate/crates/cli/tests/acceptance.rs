//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Built with `harness = false` so the lines are always printed.

use std::collections::BTreeMap;
use std::process::ExitCode;

use contact_bundles::catalog;
use contact_bundles::contact;
use contact_bundles::crosssection;
use contact_bundles::expr::{self, Expr};
use contact_bundles::forms;
use contact_bundles::jet;
use contact_bundles::kcontact::{BackgroundMetric, CompatibleMetric, RankOneBackground};
use contact_bundles::liealg::LinearAction;
use contact_bundles::bundles;
use contact_bundles_cli::scenarios::{
    noninvariant_form, partially_flat_scenario, wrong_complement, NONINVARIANT_EPS,
};
use contact_bundles_cli::{run, CheckRecord, Report, ScenarioConfig, SCENARIOS};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;

struct Criterion {
    ok: bool,
    notes: Vec<String>,
}

impl Criterion {
    fn new() -> Self {
        Criterion { ok: true, notes: Vec::new() }
    }

    fn require(&mut self, ok: bool, note: impl Into<String>) {
        let note = note.into();
        if !ok {
            self.ok = false;
            self.notes.push(format!("failed: {note}"));
        }
    }

    /// The named check exists, PASSes, and (when given) was evaluated with the
    /// pinned threshold.
    fn pass(&mut self, r: &Report, name: &str, threshold: Option<f64>) {
        match r.check(name) {
            Some(c) => {
                self.require(c.passed(), format!("{}/{name}: {}", r.scenario, summary(c)));
                if let Some(t) = threshold {
                    self.require(c.threshold == t, format!("{}/{name}: threshold {} != {t}", r.scenario, c.threshold));
                }
            }
            None => self.require(false, format!("{}/{name} missing", r.scenario)),
        }
    }

    fn fail_with_witness(&mut self, r: &Report, name: &str) {
        match r.check(name) {
            Some(c) => self.require(
                !c.passed() && c.witness.is_some(),
                format!("{}/{name} should FAIL with a witness: {}", r.scenario, summary(c)),
            ),
            None => self.require(false, format!("{}/{name} missing", r.scenario)),
        }
    }
}

fn summary(c: &CheckRecord) -> String {
    format!("{:?} value={:?} threshold={} ({})", c.status, c.value, c.threshold, c.detail)
}

fn value(r: &Report, name: &str) -> f64 {
    r.check(name).and_then(|c| c.value).unwrap_or(f64::NAN)
}

fn config(scenario: &str, threads: usize) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(scenario, SEED);
    c.threads = Some(threads);
    c
}

fn run_ok(cfg: &ScenarioConfig) -> Report {
    run(cfg).unwrap_or_else(|e| panic!("{}: {e}", cfg.scenario))
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
    terms.into_iter().fold(Expr::Const(0.0), Expr::add)
}

fn exterior_calculus() -> Criterion {
    let mut c = Criterion::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let n = 4;

    // d(df) = 0 with df assembled from symbolic partials.
    let mut dd = 0.0_f64;
    for _ in 0..20 {
        let f = Expr::random(&mut rng, n, 4);
        let df = expr::exact_form(&f, n);
        for _ in 0..100 {
            let p = DVector::from_vec(random_point(&mut rng, n));
            dd = dd.max(df.d_matrix(&p).amax());
        }
    }
    c.require(dd <= 1e-9, format!("max |d(df)| = {dd:.3e}"));

    // dα(X, Y) against X(α(Y)) − Y(α(X)) − α([X, Y]) built symbolically.
    let mut cartan = 0.0_f64;
    for _ in 0..20 {
        let a: Vec<Expr> = (0..n).map(|_| Expr::random(&mut rng, n, 3)).collect();
        let x: Vec<Expr> = (0..n).map(|_| Expr::random(&mut rng, n, 3)).collect();
        let y: Vec<Expr> = (0..n).map(|_| Expr::random(&mut rng, n, 3)).collect();
        let alpha = expr::form_from(a.clone());
        let a_y = sum((0..n).map(|j| Expr::mul(a[j].clone(), y[j].clone())));
        let a_x = sum((0..n).map(|j| Expr::mul(a[j].clone(), x[j].clone())));
        let deriv = |v: &[Expr], g: &Expr, p: &[f64]| (0..n).map(|i| v[i].eval(p) * g.diff(i).eval(p)).sum::<f64>();
        for _ in 0..100 {
            let p = random_point(&mut rng, n);
            let xp = DVector::from_fn(n, |i, _| x[i].eval(&p));
            let yp = DVector::from_fn(n, |i, _| y[i].eval(&p));
            let lhs = forms::eval_d(&alpha, &DVector::from_vec(p.clone()), &xp, &yp);
            let t1 = deriv(&x, &a_y, &p);
            let t2 = deriv(&y, &a_x, &p);
            let t3: f64 = (0..n)
                .map(|j| a[j].eval(&p) * (deriv(&x, &y[j], &p) - deriv(&y, &x[j], &p)))
                .sum();
            let scale = 1.0_f64.max(t1.abs() + t2.abs() + t3.abs());
            cartan = cartan.max((lhs - (t1 - t2 - t3)).abs() / scale);
        }
    }
    c.require(cartan <= 1e-7, format!("max Cartan residual = {cartan:.3e}"));

    // Jet gradients against central differences with step 1e-6.
    let mut fd = 0.0_f64;
    for _ in 0..20 {
        let f = Expr::random(&mut rng, n, 4);
        for _ in 0..10 {
            let p = random_point(&mut rng, n);
            let j = f.eval_jet(&jet::seed(&p));
            for i in 0..n {
                let (mut hi, mut lo) = (p.clone(), p.clone());
                hi[i] += 1e-6;
                lo[i] -= 1e-6;
                let est = (f.eval(&hi) - f.eval(&lo)) / 2e-6;
                fd = fd.max((j.d(i) - est).abs() / 1.0_f64.max(j.d(i).abs()));
            }
        }
    }
    c.require(fd <= 1e-5, format!("max jet/FD relative error = {fd:.3e}"));
    c.notes.push(format!("d∘d {dd:.1e}, Cartan {cartan:.1e}, jet/FD {fd:.1e}"));
    c
}

fn contactness(r: &BTreeMap<&str, Report>) -> Criterion {
    let mut c = Criterion::new();
    let std = &r["std_contact"];
    let names = [
        "contact_r3",
        "contact_r5",
        "contact_r7",
        "contact_s1",
        "contact_s3",
        "contact_s5",
        "contact_ellipsoid_1_2",
        "contact_ellipsoid_1_2_3",
    ];
    for name in names {
        c.pass(std, name, Some(1e-8));
    }
    let neg = &r["negative_controls"];
    c.fail_with_witness(neg, "dz_contact");
    c.fail_with_witness(neg, "flat_associated_contact");
    c.notes.push(format!(
        "relative floors s3 {:.3}, s5 {:.3}, E(1,2) {:.3}",
        value(std, "contact_s3"),
        value(std, "contact_s5"),
        value(std, "contact_ellipsoid_1_2")
    ));
    c
}

fn reeb(r: &BTreeMap<&str, Report>) -> Criterion {
    let mut c = Criterion::new();
    let std = &r["std_contact"];
    c.pass(std, "reeb_r3_exact", Some(1e-12));
    for name in ["reeb_s3", "reeb_s5", "reeb_ellipsoid_1_2"] {
        c.pass(std, name, Some(1e-8));
        let d = std.check(name).map(|x| x.detail.clone()).unwrap_or_default();
        c.require(d.contains("over 500 points"), format!("{name} sample count: {d}"));
    }
    c.notes.push(format!("max S⁵ residual {:.1e}", value(std, "reeb_s5")));
    c
}

fn fatness_equivalence(r: &BTreeMap<&str, Report>) -> Criterion {
    let mut c = Criterion::new();
    for s in ["hopf_fatness", "assoc_contact"] {
        let rep = &r[s];
        c.pass(rep, "fatness", Some(1e-6));
        c.pass(rep, "associated_contact", Some(1e-8));
        c.pass(rep, "fatness_matches_contact", None);
    }
    let neg = &r["negative_controls"];
    for (fat, cont) in [("flat_fatness", "flat_associated_contact"), ("partially_flat_fatness", "partially_flat_contact")] {
        let (f, k) = (neg.check(fat), neg.check(cont));
        c.require(
            matches!((f, k), (Some(f), Some(k)) if f.passed() == k.passed()),
            format!("{fat} and {cont} disagree"),
        );
    }
    let w = |n| neg.check(n).and_then(|x| x.witness.clone());
    c.require(
        w("partially_flat_fatness").is_some() && w("partially_flat_fatness") == w("partially_flat_contact"),
        "partially flat witnesses differ",
    );
    let assoc = &r["assoc_contact"];
    c.pass(assoc, "sigma_identity", Some(1e-6));
    let d = assoc.check("sigma_identity").map(|x| x.detail.clone()).unwrap_or_default();
    c.require(d.contains("200 triples"), format!("sigma sample count: {d}"));
    c.notes.push(format!("σ identity {:.1e}", value(assoc, "sigma_identity")));
    c
}

fn curvature(r: &BTreeMap<&str, Report>) -> Criterion {
    let mut c = Criterion::new();
    let h = &r["hopf_fatness"];
    c.pass(h, "curvature_cross_validation", Some(1e-6));
    let d = h.check("curvature_cross_validation").map(|x| x.detail.clone()).unwrap_or_default();
    c.require(d.contains("100 points"), format!("curvature sample count: {d}"));
    c.notes.push(format!("max mismatch {:.1e}", value(h, "curvature_cross_validation")));
    c
}

fn basic_form(r: &BTreeMap<&str, Report>) -> Criterion {
    let mut c = Criterion::new();
    let a = &r["assoc_contact"];
    c.pass(a, "basic_form", Some(1e-9));
    c.pass(a, "fiber_restriction", Some(0.0));
    for name in ["basic_form", "fiber_restriction"] {
        let d = a.check(name).map(|x| x.detail.clone()).unwrap_or_default();
        c.require(d.contains("500 points"), format!("{name} sample count: {d}"));
    }
    c.notes.push(format!("ι(X)α_tot {:.1e}", value(a, "basic_form")));
    c
}

fn contact_connection(r: &BTreeMap<&str, Report>) -> Criterion {
    let mut c = Criterion::new();
    let a = &r["assoc_contact"];
    c.pass(a, "contact_connection_angle", Some(1e-7));
    c.pass(a, "contact_connection_conformal", Some(1e-7));
    let t = &r["parallel_transport"];
    c.pass(t, "transport_hyperplane_angle", Some(1e-4));
    c.pass(t, "transport_coorientation", None);
    c.pass(t, "transport_base_error", None);
    c.notes.push(format!(
        "angle {:.1e}, transport angle {:.1e}",
        value(a, "contact_connection_angle"),
        value(t, "transport_hyperplane_angle")
    ));
    c
}

fn kcontact(r: &BTreeMap<&str, Report>) -> Criterion {
    let mut c = Criterion::new();
    for s in ["yamazaki_n1", "yamazaki_n2"] {
        let rep = &r[s];
        c.pass(rep, "positivity", None);
        c.pass(rep, "killing", Some(1e-4));
        c.pass(rep, "reeb_verticality", Some(1e-7));
        c.pass(rep, "associated_contact", Some(1e-8));
    }
    c.pass(&r["yamazaki_n2"], "horizontal_fiber_dependence", Some(1e-3));
    c.notes.push(format!(
        "Killing n1 {:.1e}, n2 {:.1e}; block variation {:.2}",
        value(&r["yamazaki_n1"], "killing"),
        value(&r["yamazaki_n2"], "killing"),
        value(&r["yamazaki_n2"], "horizontal_fiber_dependence")
    ));
    c
}

fn cross_sections(r: &BTreeMap<&str, Report>) -> Criterion {
    let mut c = Criterion::new();
    let s = &r["cross_section_su2_s5"];
    c.pass(s, "cross_section_found", None);
    c.require(value(s, "cross_section_found") == 50.0, "50 cross-section points");
    c.pass(s, "section_dimension", None);
    c.require(value(s, "section_dimension") == 3.0, "dim R = 3");
    c.pass(s, "splitting_a", Some(1e-7));
    c.pass(s, "splitting_b", None);
    c.pass(s, "splitting_c", Some(1e-7));
    c.pass(s, "section_contact", None);
    c.pass(s, "conformal_membership", Some(1e-7));
    c.pass(s, "isotropy_invariance", Some(1e-7));
    c.pass(s, "bracket_identity", Some(1e-7));
    c.pass(s, "pairing_nondegenerate", None);
    c.pass(s, "slice_pairing", None);
    c.notes.push(format!("ξ^R Pfaffian floor {:.3}", value(s, "section_contact")));
    c
}

fn determinism(first: &BTreeMap<&str, Report>) -> Criterion {
    let mut c = Criterion::new();
    for s in SCENARIOS {
        let a = first[s].without_timing().to_json();
        let again = run_ok(&config(s, 8)).without_timing().to_json();
        let single = run_ok(&config(s, 1)).without_timing().to_json();
        c.require(a == again, format!("{s}: rerun differs"));
        c.require(a == single, format!("{s}: 1 vs 8 threads differ"));
        let parsed = Report::from_json(&a).map(|p| p.to_json());
        c.require(parsed.as_ref().ok() == Some(&a), format!("{s}: report does not round-trip"));
    }
    c.notes.push(format!("{} scenarios, 8/8/1 threads", SCENARIOS.len()));
    c
}

/// Every negative control FAILs, and the neighbouring checks on the same
/// broken input still PASS.
fn negative_controls(r: &BTreeMap<&str, Report>) -> Criterion {
    let mut c = Criterion::new();
    let neg = &r["negative_controls"];
    for chk in &neg.checks {
        c.require(!chk.passed() && chk.witness.is_some(), format!("{} should FAIL with a witness", chk.name));
    }
    c.require(neg.checks.len() == 9, format!("{} negative checks", neg.checks.len()));

    let siblings = || -> contact_bundles::Result<Vec<(&'static str, bool)>> {
        let mut out = Vec::new();

        let flat = bundles::flat_bundle();
        let fs = flat.total.sample(20, SEED)?;
        out.push(("flat connection reproduces", flat.reproduction_residual(&fs) <= 1e-10));
        out.push(("flat connection equivariant", flat.equivariance_residual(&fs, 5, SEED)? <= 1e-9));

        let s3 = catalog::sphere(2);
        let pts = s3.sample(20, SEED)?;
        let bad = noninvariant_form(NONINVARIANT_EPS);
        let floor = contact::pfaffian_floor(&s3, &bad, &pts, 1e-8)?;
        out.push(("perturbed form still contact", floor.degenerate_count == 0));
        let torus = LinearAction::torus_coordinatewise(2);
        let good = contact::invariance_residual(&s3, &catalog::standard_contact_form(2), &torus, &pts, 20, SEED)?;
        out.push(("unperturbed form invariant", good.max_residual <= 1e-8));

        let hopf = bundles::hopf_bundle();
        let hs = hopf.total.sample(20, SEED)?;
        let mu = [contact_bundles::liealg::CoadjointElement::from_slice(&[1.0])];
        out.push(("Hopf fat at mu = 1", bundles::fatness_check(&hopf, &mu, &hs, 1e-6)?.pass));

        let bg = RankOneBackground::coordinate(4, 0, 1.0);
        let alpha = catalog::standard_contact_form(2);
        let mut compat = 0.0_f64;
        for p in &pts.points {
            let frame = s3.tangent_frame(p)?.columns;
            compat = compat.max(CompatibleMetric::build(&alpha, p, &frame, &bg.matrix(p))?.compatibility_residual());
        }
        out.push(("Reeb-breaking metric still compatible", compat <= 1e-9));

        let problem = crosssection::su2_problem(2);
        let wrong = problem.slice.with_complement(wrong_complement());
        let mut bc = true;
        let mut a_right = true;
        for s in crosssection::find_cross_section(&problem, 10, SEED)? {
            let frame = problem.section_frame(&s.point);
            let w = crosssection::verify_splitting(&problem, &wrong, &s.point, &frame)?;
            bc &= w.b_pass() && w.c_pass();
            a_right &= crosssection::verify_splitting(&problem, &problem.slice, &s.point, &frame)?.a_pass();
        }
        out.push(("wrong complement passes (b), (c)", bc));
        out.push(("orthogonal complement passes (a)", a_right));

        let (assoc, pairs) = partially_flat_scenario(20, SEED)?;
        let basic = pairs.iter().map(|x| assoc.basic_residual(x)).fold(0.0, f64::max);
        out.push(("partially flat form basic", basic <= 1e-9));
        let rep = assoc.contact_report(&pairs[1..])?;
        out.push(("partially flat contact away from z1 = 0", rep.degenerate_count == 0));
        Ok(out)
    };
    match siblings() {
        Ok(list) => {
            for (name, ok) in &list {
                c.require(*ok, *name);
            }
            c.notes.push(format!("9 FAIL, {} sibling checks PASS", list.iter().filter(|x| x.1).count()));
        }
        Err(e) => c.require(false, format!("sibling checks errored: {e}")),
    }
    c
}

fn main() -> ExitCode {
    let reports: BTreeMap<&str, Report> = SCENARIOS.iter().map(|&s| (s, run_ok(&config(s, 8)))).collect();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("exterior calculus: d∘d, Cartan, jets vs finite differences", exterior_calculus()),
        ("contactness oracle: positive floors, dz and flat FAIL", contactness(&reports)),
        ("Reeb fields", reeb(&reports)),
        ("fatness iff contactness; σ identity", fatness_equivalence(&reports)),
        ("curvature cross-validation on Hopf", curvature(&reports)),
        ("basic-form contract", basic_form(&reports)),
        ("contact connection and parallel transport", contact_connection(&reports)),
        ("K-contact associated bundles", kcontact(&reports)),
        ("SU(2) cross-section on S⁵", cross_sections(&reports)),
        ("determinism across reruns and thread counts", determinism(&reports)),
        ("negative controls fail only where intended", negative_controls(&reports)),
    ];
    let mut all = true;
    for (i, (title, c)) in criteria.iter().enumerate() {
        all &= c.ok;
        println!("{} {:>2} {title} [{}]", if c.ok { "PASS" } else { "FAIL" }, i + 1, c.notes.join("; "));
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
