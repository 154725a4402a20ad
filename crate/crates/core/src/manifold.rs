//! Regular level sets in Euclidean space: retraction by Gauss–Newton,
//! orthonormal tangent frames and seeded sampling.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::linalg;
use crate::maps::{QuadraticMap, SharedMap, SmoothMap};

pub const DEFAULT_CONSTRAINT_TOL: f64 = 1e-10;
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
const MAX_GAUSS_NEWTON_ITERS: usize = 50;
const SAMPLE_ATTEMPTS: usize = 100;

/// `{x ∈ ℝᴺ : constraint(x) = 0}` with a full-rank constraint Jacobian.
#[derive(Clone)]
pub struct EmbeddedManifold {
    name: String,
    ambient_dim: usize,
    constraint: SharedMap,
    pub constraint_tol: f64,
    pub rank_tol: f64,
}

impl std::fmt::Debug for EmbeddedManifold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EmbeddedManifold")
            .field("name", &self.name)
            .field("ambient_dim", &self.ambient_dim)
            .field("codim", &self.codim())
            .finish()
    }
}

impl EmbeddedManifold {
    pub fn new(name: impl Into<String>, constraint: SharedMap) -> Self {
        EmbeddedManifold {
            name: name.into(),
            ambient_dim: constraint.in_dim(),
            constraint,
            constraint_tol: DEFAULT_CONSTRAINT_TOL,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }

    pub fn from_quadrics(name: impl Into<String>, map: QuadraticMap) -> Self {
        EmbeddedManifold::new(name, Arc::new(map))
    }

    /// ℝⁿ itself, as the level set of the empty constraint.
    pub fn euclidean(n: usize) -> Self {
        EmbeddedManifold::from_quadrics(format!("R{n}"), QuadraticMap::empty(n))
    }

    pub fn with_tolerances(mut self, constraint_tol: f64, rank_tol: f64) -> Self {
        self.constraint_tol = constraint_tol;
        self.rank_tol = rank_tol;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn codim(&self) -> usize {
        self.constraint.out_dim()
    }

    pub fn dim(&self) -> usize {
        self.ambient_dim - self.codim()
    }

    pub fn constraint(&self) -> &SharedMap {
        &self.constraint
    }

    pub fn residual(&self, x: &[f64]) -> DVector<f64> {
        self.constraint.eval(x)
    }

    pub fn residual_norm(&self, x: &[f64]) -> f64 {
        self.residual(x).amax()
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        self.constraint.jacobian(x)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.ambient_dim && self.residual_norm(x) <= self.constraint_tol
    }

    fn check_rank(&self, jac: &DMatrix<f64>) -> Result<()> {
        if jac.nrows() == 0 {
            return Ok(());
        }
        let s = linalg::singular_values(jac);
        let ratio = s.last().copied().unwrap_or(0.0) / s[0].max(f64::MIN_POSITIVE);
        if s.len() < jac.nrows() || ratio <= self.rank_tol {
            return Err(GeomError::RankDeficient { ratio });
        }
        Ok(())
    }

    /// Gauss–Newton projection onto the level set using minimal-norm steps.
    /// Points already on the manifold are returned unchanged.
    pub fn retract(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        let mut x = q.clone();
        let mut res = self.residual(x.as_slice());
        if res.amax() <= self.constraint_tol {
            return Ok(x);
        }
        let target = self.constraint_tol * 1e-3;
        for it in 0..MAX_GAUSS_NEWTON_ITERS {
            let jac = self.jacobian(x.as_slice());
            self.check_rank(&jac)?;
            let gram = &jac * jac.transpose();
            let y = gram
                .lu()
                .solve(&res)
                .ok_or(GeomError::RankDeficient { ratio: 0.0 })?;
            let step = jac.transpose() * y;
            x -= &step;
            let new_res = self.residual(x.as_slice());
            let stalled = new_res.amax() >= res.amax() && new_res.amax() <= self.constraint_tol;
            res = new_res;
            if !res.iter().all(|r| r.is_finite()) {
                return Err(GeomError::NonConvergence {
                    residual: f64::INFINITY,
                    iterations: it + 1,
                });
            }
            if res.amax() <= target || stalled || step.amax() <= 1e-15 * (1.0 + x.amax()) {
                break;
            }
        }
        let r = res.amax();
        if r <= self.constraint_tol {
            Ok(x)
        } else {
            Err(GeomError::NonConvergence {
                residual: r,
                iterations: MAX_GAUSS_NEWTON_ITERS,
            })
        }
    }

    /// Orthonormal basis of `ker D constraint(p)`.
    ///
    /// The gauge is not canonical: callers must only consume frame-invariant
    /// quantities.
    pub fn tangent_frame(&self, p: &DVector<f64>) -> Result<TangentFrame> {
        let jac = self.jacobian(p.as_slice());
        self.check_rank(&jac)?;
        let (basis, rank) = linalg::null_space(&jac, self.rank_tol);
        if rank != self.codim() || basis.ncols() != self.dim() {
            return Err(GeomError::RankDeficient { ratio: 0.0 });
        }
        Ok(TangentFrame {
            base_point: p.clone(),
            columns: basis,
        })
    }

    /// Orthogonal projection of an ambient vector onto `T_p M`.
    pub fn project_tangent(&self, p: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        let frame = self.tangent_frame(p)?;
        Ok(&frame.columns * (frame.columns.transpose() * v))
    }

    /// Draws one point from the stream `(seed, index)`: ambient standard
    /// Gaussian, then retraction; rejected draws are redrawn.
    pub fn sample_one(&self, seed: u64, index: u64) -> Result<DVector<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut last_err = GeomError::NonConvergence {
            residual: f64::INFINITY,
            iterations: 0,
        };
        for _ in 0..SAMPLE_ATTEMPTS {
            let q = DVector::from_fn(self.ambient_dim, |_, _| StandardNormal.sample(&mut rng));
            match self.retract(&q) {
                Ok(p) if self.tangent_frame(&p).is_ok() => return Ok(p),
                Ok(_) => {}
                Err(e) => last_err = e,
            }
        }
        Err(last_err)
    }

    pub fn sample(&self, count: usize, seed: u64) -> Result<SampleSet> {
        if count == 0 {
            return Err(GeomError::InvalidInput("sample count must be at least 1".into()));
        }
        let points = (0..count as u64)
            .into_par_iter()
            .map(|i| self.sample_one(seed, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(SampleSet { seed, points })
    }

    /// `self × other` in the product ambient space.
    pub fn product(&self, other: &EmbeddedManifold) -> EmbeddedManifold {
        let constraint: SharedMap = Arc::new(ProductMap {
            first: self.constraint.clone(),
            second: other.constraint.clone(),
        });
        EmbeddedManifold {
            name: format!("{}x{}", self.name, other.name),
            ambient_dim: self.ambient_dim + other.ambient_dim,
            constraint,
            constraint_tol: self.constraint_tol.max(other.constraint_tol),
            rank_tol: self.rank_tol.min(other.rank_tol),
        }
    }
}

/// Orthonormal tangent basis at a point, stored as ambient columns.
#[derive(Clone, Debug)]
pub struct TangentFrame {
    pub base_point: DVector<f64>,
    pub columns: DMatrix<f64>,
}

impl TangentFrame {
    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn column(&self, i: usize) -> DVector<f64> {
        self.columns.column(i).into_owned()
    }

    /// Deviation of `columnsᵀ·columns` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        (self.columns.transpose() * &self.columns - DMatrix::identity(n, n)).amax()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub seed: u64,
    pub points: Vec<DVector<f64>>,
}

impl SampleSet {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DVector<f64>> {
        self.points.iter()
    }
}

struct ProductMap {
    first: SharedMap,
    second: SharedMap,
}

impl SmoothMap for ProductMap {
    fn in_dim(&self) -> usize {
        self.first.in_dim() + self.second.in_dim()
    }

    fn out_dim(&self) -> usize {
        self.first.out_dim() + self.second.out_dim()
    }

    fn eval_jet(&self, x: &[crate::jet::Jet1]) -> Vec<crate::jet::Jet1> {
        let n1 = self.first.in_dim();
        let mut out = self.first.eval_jet(&x[..n1]);
        out.extend(self.second.eval_jet(&x[n1..]));
        out
    }

    fn jacobian_jet(&self, x: &[crate::jet::Jet1]) -> Vec<Vec<crate::jet::Jet1>> {
        let n1 = self.first.in_dim();
        let n = self.in_dim();
        let zero = crate::jet::Jet1::zero();
        let mut rows = Vec::with_capacity(self.out_dim());
        for r in self.first.jacobian_jet(&x[..n1]) {
            let mut row = r;
            row.resize(n, zero.clone());
            rows.push(row);
        }
        for r in self.second.jacobian_jet(&x[n1..]) {
            let mut row = vec![zero.clone(); n1];
            row.extend(r);
            rows.push(row);
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn close(a: &DVector<f64>, b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn retract_radial_on_sphere() {
        let s2 = catalog::sphere_real(3);
        let p = s2.retract(&DVector::from_vec(vec![2.0, 0.0, 0.0])).unwrap();
        assert!(close(&p, &[1.0, 0.0, 0.0], 1e-12));
    }

    #[test]
    fn retract_fixes_points_on_manifold() {
        let s2 = catalog::sphere_real(3);
        let p = DVector::from_vec(vec![0.0, 0.6, 0.8]);
        assert_eq!(s2.retract(&p).unwrap(), p);
    }

    #[test]
    fn retract_on_ellipsoid_scales_axially() {
        let e = catalog::ellipsoid(&[1.0, 2.0]);
        let p = e.retract(&DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0])).unwrap();
        assert!(close(&p, &[0.0, 0.0, 1.0 / 2f64.sqrt(), 0.0], 1e-12));
    }

    #[test]
    fn frame_at_north_pole_spans_horizontal_plane() {
        let s2 = catalog::sphere_real(3);
        let f = s2.tangent_frame(&DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
        assert_eq!(f.dim(), 2);
        for i in 0..2 {
            assert!(f.columns[(2, i)].abs() < 1e-14);
        }
        assert!(f.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn frames_on_s3_are_annihilated_by_constraint_jacobian() {
        let s3 = catalog::sphere(2);
        let samples = s3.sample(100, 11).unwrap();
        for p in samples.iter() {
            let f = s3.tangent_frame(p).unwrap();
            assert!(f.orthonormality_defect() <= 1e-10);
            let jf = s3.jacobian(p.as_slice()) * &f.columns;
            assert!(jf.amax() <= 1e-8);
        }
    }

    #[test]
    fn ellipsoid_frame_dimension() {
        for n in 1..=4 {
            let a: Vec<f64> = (1..=n).map(|k| k as f64).collect();
            let e = catalog::ellipsoid(&a);
            let p = e.sample(1, 3).unwrap().points[0].clone();
            assert_eq!(e.tangent_frame(&p).unwrap().dim(), 2 * n - 1);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_on_manifold() {
        let s3 = catalog::sphere(2);
        let a = s3.sample(10, 42).unwrap();
        let b = s3.sample(10, 42).unwrap();
        assert_eq!(a.count(), 10);
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x.norm() - 1.0).abs() <= 1e-10);
            let bits_x: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
            let bits_y: Vec<u64> = y.iter().map(|v| v.to_bits()).collect();
            assert_eq!(bits_x, bits_y);
        }
    }

    #[test]
    fn ellipsoid_samples_satisfy_constraint() {
        let a = [1.0, 2.0, 3.0];
        let e = catalog::ellipsoid(&a);
        let s = e.sample(1000, 7).unwrap();
        for p in s.iter() {
            let v: f64 = (0..3)
                .map(|j| a[j] * (p[2 * j].powi(2) + p[2 * j + 1].powi(2)))
                .sum();
            assert!((v - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn zero_count_is_rejected() {
        assert!(catalog::sphere(2).sample(0, 1).is_err());
    }

    #[test]
    fn retract_is_idempotent() {
        let e = catalog::ellipsoid(&[1.0, 3.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let q = DVector::from_fn(4, |_, _| StandardNormal.sample(&mut rng));
            let p = e.retract(&q).unwrap();
            let pp = e.retract(&p).unwrap();
            assert!((p - pp).amax() <= 1e-10);
        }
    }
}
