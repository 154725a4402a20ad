//! Pointwise exterior calculus on ambient coordinates.
//!
//! One-forms and vector fields are jet-evaluable coefficient functions on the
//! ambient space; restriction to a manifold happens only by evaluating on
//! tangent vectors. `dα` comes from the Jacobian of the coefficients:
//! `dα_p(u, v) = ⟨Dα(p)u, v⟩ − ⟨Dα(p)v, u⟩`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::jet::{self, Jet1};
use crate::linalg;
use crate::manifold::EmbeddedManifold;

pub type JetFn = Arc<dyn Fn(&[Jet1]) -> Vec<Jet1> + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&[Jet1]) -> Jet1 + Send + Sync>;

/// Default threshold for declaring a bordered Pfaffian degenerate, relative
/// to the scale of the bordered matrix.
pub const DEFAULT_PF_TOL: f64 = 1e-8;

#[derive(Clone)]
pub struct OneFormField {
    name: String,
    dim: usize,
    coeffs: JetFn,
}

impl std::fmt::Debug for OneFormField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "OneFormField({}, dim {})", self.name, self.dim)
    }
}

impl OneFormField {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        coeffs: impl Fn(&[Jet1]) -> Vec<Jet1> + Send + Sync + 'static,
    ) -> Self {
        OneFormField {
            name: name.into(),
            dim,
            coeffs: Arc::new(coeffs),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub(crate) fn set_name(&mut self, name: &str) {
        self.name = name.to_string();
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn eval_jet(&self, x: &[Jet1]) -> Vec<Jet1> {
        (self.coeffs)(x)
    }

    /// Coefficient covector at `p`.
    pub fn at(&self, p: &DVector<f64>) -> DVector<f64> {
        jet::values(&self.eval_jet(&jet::constants(p.as_slice())))
    }

    pub fn apply(&self, p: &DVector<f64>, u: &DVector<f64>) -> f64 {
        self.at(p).dot(u)
    }

    /// Coefficients and their Jacobian `D[i][j] = ∂αᵢ/∂xⱼ`.
    pub fn jet_at(&self, p: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let out = self.eval_jet(&jet::seed(p.as_slice()));
        (jet::values(&out), jet::jacobian(&out, self.dim))
    }

    /// Ambient matrix `W` with `dα_p(u, v) = uᵀ W v`.
    pub fn d_matrix(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let (_, d) = self.jet_at(p);
        d.transpose() - d
    }

    /// `e^f · α` for a smooth function `f`.
    pub fn conformal(&self, f: ScalarFn) -> OneFormField {
        let base = self.coeffs.clone();
        OneFormField {
            name: format!("exp(f)*{}", self.name),
            dim: self.dim,
            coeffs: Arc::new(move |x| {
                let ef = f(x).exp();
                base(x).iter().map(|c| c * &ef).collect()
            }),
        }
    }

    /// Multiplies by a smooth function `f` (no positivity implied).
    pub fn scaled_by(&self, f: ScalarFn) -> OneFormField {
        let base = self.coeffs.clone();
        OneFormField {
            name: format!("f*{}", self.name),
            dim: self.dim,
            coeffs: Arc::new(move |x| {
                let s = f(x);
                base(x).iter().map(|c| c * &s).collect()
            }),
        }
    }

    pub fn scale(&self, s: f64) -> OneFormField {
        let base = self.coeffs.clone();
        OneFormField {
            name: format!("{s}*{}", self.name),
            dim: self.dim,
            coeffs: Arc::new(move |x| base(x).iter().map(|c| c.scale(s)).collect()),
        }
    }

    pub fn plus(&self, other: &OneFormField) -> OneFormField {
        assert_eq!(self.dim, other.dim);
        let a = self.coeffs.clone();
        let b = other.coeffs.clone();
        OneFormField {
            name: format!("{}+{}", self.name, other.name),
            dim: self.dim,
            coeffs: Arc::new(move |x| a(x).iter().zip(b(x)).map(|(p, q)| p + q).collect()),
        }
    }

    /// Extends a form on the block `[offset, offset + self.dim)` by zero to a
    /// product space of dimension `dim`.
    pub fn embedded(&self, offset: usize, dim: usize) -> OneFormField {
        let base = self.coeffs.clone();
        let n = self.dim;
        OneFormField {
            name: self.name.clone(),
            dim,
            coeffs: Arc::new(move |x| {
                let mut out = vec![Jet1::zero(); dim];
                for (k, c) in base(&x[offset..offset + n]).into_iter().enumerate() {
                    out[offset + k] = c;
                }
                out
            }),
        }
    }
}

#[derive(Clone)]
pub struct VectorFieldEntity {
    name: String,
    dim: usize,
    coeffs: JetFn,
    pub tangency_tol: f64,
}

impl std::fmt::Debug for VectorFieldEntity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "VectorFieldEntity({}, dim {})", self.name, self.dim)
    }
}

impl VectorFieldEntity {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        coeffs: impl Fn(&[Jet1]) -> Vec<Jet1> + Send + Sync + 'static,
    ) -> Self {
        VectorFieldEntity {
            name: name.into(),
            dim,
            coeffs: Arc::new(coeffs),
            tangency_tol: 1e-8,
        }
    }

    /// The field `x ↦ L x` for a constant matrix `L`.
    pub fn linear(name: impl Into<String>, matrix: DMatrix<f64>) -> Self {
        let n = matrix.ncols();
        VectorFieldEntity::new(name, n, move |x| {
            (0..matrix.nrows())
                .map(|r| {
                    let row: Vec<f64> = matrix.row(r).iter().copied().collect();
                    jet::dot_const(x, &row)
                })
                .collect()
        })
    }

    pub fn constant(name: impl Into<String>, v: DVector<f64>) -> Self {
        VectorFieldEntity::new(name, v.len(), move |_| v.iter().map(|&c| Jet1::constant(c)).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn eval_jet(&self, x: &[Jet1]) -> Vec<Jet1> {
        (self.coeffs)(x)
    }

    pub fn at(&self, p: &DVector<f64>) -> DVector<f64> {
        jet::values(&self.eval_jet(&jet::constants(p.as_slice())))
    }

    /// Value and Jacobian `DX(p)`.
    pub fn jet_at(&self, p: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let out = self.eval_jet(&jet::seed(p.as_slice()));
        (jet::values(&out), jet::jacobian(&out, self.dim))
    }

    pub fn tangency_residual(&self, m: &EmbeddedManifold, p: &DVector<f64>) -> f64 {
        (m.jacobian(p.as_slice()) * self.at(p)).amax()
    }
}

/// `dα_p(u, v)`.
pub fn eval_d(alpha: &OneFormField, p: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let (_, d) = alpha.jet_at(p);
    (&d * u).dot(v) - (&d * v).dot(u)
}

/// `[X, Y](p) = DY(p)·X(p) − DX(p)·Y(p)`.
pub fn lie_bracket(x: &VectorFieldEntity, y: &VectorFieldEntity, p: &DVector<f64>) -> DVector<f64> {
    let (xv, dx) = x.jet_at(p);
    let (yv, dy) = y.jet_at(p);
    dy * xv - dx * yv
}

/// The bordered skew matrix `[[0, α(fⱼ)], [−α(fᵢ), dα(fᵢ, fⱼ)]]` over the
/// columns of `frame`.
pub fn bordered_matrix(alpha: &OneFormField, p: &DVector<f64>, frame: &DMatrix<f64>) -> DMatrix<f64> {
    let (a, d) = alpha.jet_at(p);
    let w_amb = d.transpose() - &d;
    let a_f = frame.transpose() * a;
    let w = frame.transpose() * w_amb * frame;
    let n = frame.ncols();
    let mut b = DMatrix::zeros(n + 1, n + 1);
    for j in 0..n {
        b[(0, j + 1)] = a_f[j];
        b[(j + 1, 0)] = -a_f[j];
        for i in 0..n {
            b[(i + 1, j + 1)] = w[(i, j)];
        }
    }
    // exact antisymmetry
    for i in 0..=n {
        b[(i, i)] = 0.0;
        for j in i + 1..=n {
            let s = 0.5 * (b[(i, j)] - b[(j, i)]);
            b[(i, j)] = s;
            b[(j, i)] = -s;
        }
    }
    b
}

/// Result of the bordered-Pfaffian contact test at one point.
#[derive(Clone, Debug)]
pub struct PfaffianEval {
    pub pfaffian: f64,
    /// `max|entry|^((n+1)/2)`: the size a nondegenerate Pfaffian would have.
    pub scale: f64,
}

impl PfaffianEval {
    pub fn is_degenerate(&self, pf_tol: f64) -> bool {
        !(self.pfaffian.abs() > pf_tol * self.scale)
    }
}

pub fn contact_pfaffian_on_frame(
    alpha: &OneFormField,
    p: &DVector<f64>,
    frame: &DMatrix<f64>,
) -> Result<PfaffianEval> {
    let n = frame.ncols();
    if n.is_multiple_of(2) {
        return Err(GeomError::EvenDimension { dim: n });
    }
    let b = bordered_matrix(alpha, p, frame);
    let pf = linalg::pfaffian(&b);
    let scale = linalg::max_abs(&b).powf((n as f64 + 1.0) / 2.0);
    Ok(PfaffianEval { pfaffian: pf, scale })
}

/// Pfaffian of the bordered matrix over a tangent frame of `m` at `p`;
/// nonzero iff `α ∧ (dα)^((n−1)/2) ≠ 0`. Only `|Pf|` is frame invariant.
pub fn contact_pfaffian(alpha: &OneFormField, m: &EmbeddedManifold, p: &DVector<f64>) -> Result<f64> {
    if m.dim().is_multiple_of(2) {
        return Err(GeomError::EvenDimension { dim: m.dim() });
    }
    let frame = m.tangent_frame(p)?;
    Ok(contact_pfaffian_on_frame(alpha, p, &frame.columns)?.pfaffian)
}

/// Reeb vector of `α` restricted to the span of `frame`: `α(R) = 1`,
/// `dα(R, fᵢ) = 0` for every column.
pub fn reeb_on_frame(
    alpha: &OneFormField,
    p: &DVector<f64>,
    frame: &DMatrix<f64>,
    pf_tol: f64,
) -> Result<DVector<f64>> {
    let pf = contact_pfaffian_on_frame(alpha, p, frame)?;
    if pf.is_degenerate(pf_tol) {
        return Err(GeomError::DegenerateContact {
            abs_pfaffian: pf.pfaffian.abs(),
        });
    }
    let (a, d) = alpha.jet_at(p);
    let w_amb = d.transpose() - &d;
    let a_f = frame.transpose() * a;
    let w = frame.transpose() * w_amb * frame;
    let n = frame.ncols();
    // rows: α(R) = 1 and (Wᵀ c)ⱼ = dα(R, fⱼ) = 0
    let mut sys = DMatrix::zeros(n + 1, n);
    let mut rhs = DVector::zeros(n + 1);
    for i in 0..n {
        sys[(0, i)] = a_f[i];
    }
    rhs[0] = 1.0;
    for j in 0..n {
        for i in 0..n {
            sys[(j + 1, i)] = w[(i, j)];
        }
    }
    let c = linalg::lstsq(&sys, &rhs, 1e-14).ok_or(GeomError::DegenerateContact { abs_pfaffian: 0.0 })?;
    Ok(frame * c)
}

pub fn reeb(alpha: &OneFormField, m: &EmbeddedManifold, p: &DVector<f64>) -> Result<DVector<f64>> {
    let frame = m.tangent_frame(p)?;
    reeb_on_frame(alpha, p, &frame.columns, DEFAULT_PF_TOL)
}

/// Residuals of the Reeb defining system: `(|α(R) − 1|, maxᵢ |dα(R, fᵢ)|)`.
pub fn reeb_residuals(
    alpha: &OneFormField,
    p: &DVector<f64>,
    frame: &DMatrix<f64>,
    r: &DVector<f64>,
) -> (f64, f64) {
    let w = alpha.d_matrix(p);
    let a = alpha.at(p);
    let row = (r.transpose() * w * frame).amax();
    ((a.dot(r) - 1.0).abs(), row)
}

/// An autonomous ambient vector field that may fail to evaluate.
pub trait FlowField: Sync {
    fn velocity(&self, x: &DVector<f64>) -> Result<DVector<f64>>;
}

impl FlowField for VectorFieldEntity {
    fn velocity(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.at(x))
    }
}

/// Adapts a closure into a [`FlowField`].
pub struct FnField<F>(pub F);

impl<F> FlowField for FnField<F>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>> + Sync,
{
    fn velocity(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        (self.0)(x)
    }
}

/// Reeb field of `α` on the level sets of `m`, usable off the manifold.
pub struct ReebField<'a> {
    pub alpha: &'a OneFormField,
    pub manifold: &'a EmbeddedManifold,
}

impl FlowField for ReebField<'_> {
    fn velocity(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        reeb(self.alpha, self.manifold, x)
    }
}

/// Drift of the constraint values above which a flow counts as escaped.
pub const FLOW_ESCAPE_DRIFT: f64 = 1e-6;

/// Classical RK4 for time `t` in `steps` equal steps. When `manifold` is given,
/// the constraint values must stay within [`FLOW_ESCAPE_DRIFT`] of their
/// initial values.
pub fn rk4_flow(
    field: &dyn FlowField,
    x0: &DVector<f64>,
    t: f64,
    steps: usize,
    manifold: Option<&EmbeddedManifold>,
) -> Result<DVector<f64>> {
    let dt = t / steps as f64;
    let c0 = manifold.map(|m| m.residual(x0.as_slice()));
    let mut x = x0.clone();
    for _ in 0..steps {
        let k1 = field.velocity(&x)?;
        let k2 = field.velocity(&(&x + &k1 * (0.5 * dt)))?;
        let k3 = field.velocity(&(&x + &k2 * (0.5 * dt)))?;
        let k4 = field.velocity(&(&x + &k3 * dt))?;
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    if let (Some(m), Some(c0)) = (manifold, c0) {
        let drift = (m.residual(x.as_slice()) - c0).amax();
        if !(drift <= FLOW_ESCAPE_DRIFT) {
            return Err(GeomError::FlowEscape { drift });
        }
    }
    Ok(x)
}

/// A covariant tensor field of rank 1 or 2 evaluated on ambient vectors.
pub trait TensorField: Sync {
    fn rank(&self) -> usize;

    /// For rank 1: the covector values `T(vᵢ)`; for rank 2: the matrix
    /// `T(vᵢ, vⱼ)` over the columns of `vectors`.
    fn eval_on(&self, p: &DVector<f64>, vectors: &DMatrix<f64>) -> Result<TensorValue>;
}

#[derive(Clone, Debug, PartialEq)]
pub enum TensorValue {
    Covector(DVector<f64>),
    Bilinear(DMatrix<f64>),
}

impl TensorValue {
    pub fn max_abs(&self) -> f64 {
        match self {
            TensorValue::Covector(v) => v.amax(),
            TensorValue::Bilinear(m) => m.amax(),
        }
    }

    fn combine(&self, other: &TensorValue, a: f64, b: f64) -> TensorValue {
        match (self, other) {
            (TensorValue::Covector(x), TensorValue::Covector(y)) => TensorValue::Covector(x * a + y * b),
            (TensorValue::Bilinear(x), TensorValue::Bilinear(y)) => TensorValue::Bilinear(x * a + y * b),
            _ => panic!("tensor rank mismatch"),
        }
    }
}

impl TensorField for OneFormField {
    fn rank(&self) -> usize {
        1
    }

    fn eval_on(&self, p: &DVector<f64>, vectors: &DMatrix<f64>) -> Result<TensorValue> {
        Ok(TensorValue::Covector(vectors.transpose() * self.at(p)))
    }
}

/// The ambient Euclidean inner product as a rank-2 field.
pub struct EuclideanMetric;

impl TensorField for EuclideanMetric {
    fn rank(&self) -> usize {
        2
    }

    fn eval_on(&self, _p: &DVector<f64>, vectors: &DMatrix<f64>) -> Result<TensorValue> {
        Ok(TensorValue::Bilinear(vectors.transpose() * vectors))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LieDerivativeConfig {
    /// Flow time `h` of the central difference.
    pub h: f64,
    /// RK4 substeps per flow of length `h`.
    pub substeps: usize,
    /// Step of the central difference for the flow derivative.
    pub fd_eps: f64,
}

impl Default for LieDerivativeConfig {
    fn default() -> Self {
        LieDerivativeConfig {
            h: 1e-3,
            substeps: 10,
            fd_eps: 1e-5,
        }
    }
}

/// `L_X T` at `p` on the columns of `frame`, as the central difference
/// `(φ_h^* T − φ_{−h}^* T) / 2h` of RK4 flow pullbacks.
pub fn lie_derivative_tensor(
    tensor: &dyn TensorField,
    field: &dyn FlowField,
    p: &DVector<f64>,
    frame: &DMatrix<f64>,
    manifold: Option<&EmbeddedManifold>,
    cfg: LieDerivativeConfig,
) -> Result<TensorValue> {
    let mut pulled = Vec::with_capacity(2);
    for sign in [1.0, -1.0] {
        let t = sign * cfg.h;
        let q = rk4_flow(field, p, t, cfg.substeps, manifold)?;
        let mut push = DMatrix::zeros(p.len(), frame.ncols());
        for j in 0..frame.ncols() {
            let e = frame.column(j).into_owned();
            let fwd = rk4_flow(field, &(p + &e * cfg.fd_eps), t, cfg.substeps, None)?;
            let bwd = rk4_flow(field, &(p - &e * cfg.fd_eps), t, cfg.substeps, None)?;
            push.set_column(j, &((fwd - bwd) / (2.0 * cfg.fd_eps)));
        }
        pulled.push(tensor.eval_on(&q, &push)?);
    }
    Ok(pulled[0].combine(&pulled[1], 0.5 / cfg.h, -0.5 / cfg.h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn e(i: usize, n: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    fn r3_contact() -> OneFormField {
        catalog::standard_contact_form_euclidean(1)
    }

    #[test]
    fn d_of_standard_form_on_r3() {
        let a = r3_contact();
        let p = DVector::from_vec(vec![0.3, -1.2, 5.0]);
        // α = dz − y dx: dα = dx∧dy
        assert!((eval_d(&a, &p, &e(0, 3), &e(1, 3)) - 1.0).abs() < 1e-15);
        assert!(eval_d(&a, &p, &e(0, 3), &e(2, 3)).abs() < 1e-15);
    }

    #[test]
    fn d_of_exact_form_vanishes() {
        // α = d(x² + y) = 2x dx + dy
        let a = OneFormField::new("df", 2, |x| vec![x[0].scale(2.0), Jet1::constant(1.0)]);
        let p = DVector::from_vec(vec![0.7, 0.1]);
        let u = DVector::from_vec(vec![0.2, -1.0]);
        let v = DVector::from_vec(vec![1.5, 0.4]);
        assert!(eval_d(&a, &p, &u, &v).abs() < 1e-15);
    }

    #[test]
    fn d_of_x_dy() {
        let a = OneFormField::new("x dy", 2, |x| vec![Jet1::zero(), x[0].clone()]);
        let p = DVector::from_vec(vec![3.0, 4.0]);
        assert!((eval_d(&a, &p, &e(0, 2), &e(1, 2)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn brackets_of_simple_fields() {
        let ex = VectorFieldEntity::constant("ex", e(0, 2));
        let ey = VectorFieldEntity::constant("ey", e(1, 2));
        let p = DVector::from_vec(vec![0.4, -0.9]);
        assert!(lie_bracket(&ex, &ey, &p).amax() == 0.0);
        // X = x∂y, Y = y∂x → [X, Y] = (x, −y)
        let x = VectorFieldEntity::new("x dy", 2, |x| vec![Jet1::zero(), x[0].clone()]);
        let y = VectorFieldEntity::new("y dx", 2, |x| vec![x[1].clone(), Jet1::zero()]);
        let b = lie_bracket(&x, &y, &p);
        assert!((b[0] - 0.4).abs() < 1e-15 && (b[1] + -0.9).abs() < 1e-15);
    }

    #[test]
    fn coordinate_rotations_commute() {
        let r1 = catalog::coordinate_rotation(3, 0);
        let r2 = catalog::coordinate_rotation(3, 2);
        let p = DVector::from_vec(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        assert!(lie_bracket(&r1, &r2, &p).amax() < 1e-15);
    }

    #[test]
    fn bordered_pfaffian_on_r3() {
        let r3 = EmbeddedManifold::euclidean(3);
        let p = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let pf = contact_pfaffian(&r3_contact(), &r3, &p).unwrap();
        assert!((pf.abs() - 1.0).abs() < 1e-14);
        let dz = OneFormField::new("dz", 3, |_| vec![Jet1::zero(), Jet1::zero(), Jet1::constant(1.0)]);
        assert_eq!(contact_pfaffian(&dz, &r3, &p).unwrap(), 0.0);
    }

    #[test]
    fn pfaffian_rejects_even_dimension() {
        let r2 = EmbeddedManifold::euclidean(2);
        let a = OneFormField::new("x dy", 2, |x| vec![Jet1::zero(), x[0].clone()]);
        assert!(matches!(
            contact_pfaffian(&a, &r2, &DVector::zeros(2)),
            Err(GeomError::EvenDimension { dim: 2 })
        ));
    }

    #[test]
    fn reeb_of_standard_r3_form_is_ez() {
        let r3 = EmbeddedManifold::euclidean(3);
        for p in [[0.0, 0.0, 0.0], [1.0, -2.0, 0.5], [3.0, 7.0, -1.0]] {
            let r = reeb(&r3_contact(), &r3, &DVector::from_row_slice(&p)).unwrap();
            assert!((r - e(2, 3)).amax() <= 1e-12);
        }
    }

    #[test]
    fn reeb_of_degenerate_form_is_refused() {
        let r3 = EmbeddedManifold::euclidean(3);
        let dz = OneFormField::new("dz", 3, |_| vec![Jet1::zero(), Jet1::zero(), Jet1::constant(1.0)]);
        assert!(matches!(
            reeb(&dz, &r3, &DVector::zeros(3)),
            Err(GeomError::DegenerateContact { .. })
        ));
    }

    #[test]
    fn lie_derivative_of_euclidean_metric_along_dilation() {
        let r2 = EmbeddedManifold::euclidean(2);
        let x = VectorFieldEntity::new("x dx", 2, |x| vec![x[0].clone(), Jet1::zero()]);
        let p = DVector::from_vec(vec![0.8, -0.3]);
        let frame = DMatrix::identity(2, 2);
        let cfg = LieDerivativeConfig::default();
        let l = lie_derivative_tensor(&EuclideanMetric, &x, &p, &frame, Some(&r2), cfg).unwrap();
        let TensorValue::Bilinear(m) = l else { panic!() };
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        // sinh(2h)/h − 2 ≈ 4h²/3
        assert!((m - expected).amax() <= 2e-6);
    }

    #[test]
    fn rotation_is_an_isometry_of_s2() {
        let s2 = catalog::sphere_real(3);
        let rot = VectorFieldEntity::new("rot", 3, |x| vec![-&x[1], x[0].clone(), Jet1::zero()]);
        for p in s2.sample(20, 3).unwrap().iter() {
            let frame = s2.tangent_frame(p).unwrap();
            let l = lie_derivative_tensor(
                &EuclideanMetric,
                &rot,
                p,
                &frame.columns,
                Some(&s2),
                LieDerivativeConfig::default(),
            )
            .unwrap();
            assert!(l.max_abs() < 1e-7);
        }
    }
}
