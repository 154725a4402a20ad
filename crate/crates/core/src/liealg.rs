//! Matrix Lie groups (tori and SU(2)), their algebras and linear actions on
//! ambient space.
//!
//! Algebra elements are coefficient vectors in the group's basis; dual
//! elements are coefficient vectors in the dual basis, so `⟨μ, X⟩ = μ · x`.
//! Group elements are complex matrices.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::forms::VectorFieldEntity;
use crate::linalg;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    /// `Tⁿ` as diagonal unitary `n × n` matrices; `T⁰` is the trivial group.
    Torus(usize),
    Su2,
}

#[derive(Clone, Debug)]
pub struct MatrixLieGroup {
    kind: GroupKind,
    basis: Vec<CMatrix>,
    /// `structure[k][(i, j)] = c^k_{ij}` with `[Xᵢ, Xⱼ] = Σ_k c^k_{ij} X_k`.
    structure: Vec<DMatrix<f64>>,
    inner: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
}

/// `μ ∈ g*` in the dual basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CoadjointElement {
    pub coeffs: DVector<f64>,
}

impl CoadjointElement {
    pub fn new(coeffs: DVector<f64>) -> Self {
        CoadjointElement { coeffs }
    }

    pub fn from_slice(c: &[f64]) -> Self {
        CoadjointElement::new(DVector::from_row_slice(c))
    }

    pub fn pair(&self, x: &DVector<f64>) -> f64 {
        self.coeffs.dot(x)
    }

    pub fn scaled(&self, s: f64) -> Self {
        CoadjointElement::new(&self.coeffs * s)
    }
}

fn frob(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

impl MatrixLieGroup {
    fn from_basis(kind: GroupKind, basis: Vec<CMatrix>) -> Self {
        let d = basis.len();
        let gram = DMatrix::from_fn(d, d, |i, j| frob(&basis[i], &basis[j]));
        let gram_inv = if d == 0 {
            DMatrix::zeros(0, 0)
        } else {
            gram.try_inverse().expect("algebra basis must be independent")
        };
        let mut g = MatrixLieGroup {
            kind,
            basis,
            structure: Vec::new(),
            inner: DMatrix::identity(d, d),
            gram_inv,
        };
        let mut structure = vec![DMatrix::zeros(d, d); d];
        for i in 0..d {
            for j in 0..d {
                let br = &g.basis[i] * &g.basis[j] - &g.basis[j] * &g.basis[i];
                let co = g.coords(&br);
                for k in 0..d {
                    structure[k][(i, j)] = co[k];
                }
            }
        }
        g.structure = structure;
        // Negative Killing form where it is definite, identity on abelian algebras.
        let killing = DMatrix::from_fn(d, d, |i, j| {
            let mut s = 0.0;
            for k in 0..d {
                for l in 0..d {
                    s += g.structure[l][(i, k)] * g.structure[k][(j, l)];
                }
            }
            s
        });
        if d > 0 && killing.amax() > 0.0 {
            g.inner = -killing;
        }
        g
    }

    pub fn torus(n: usize) -> Self {
        let basis = (0..n)
            .map(|j| {
                let mut m = CMatrix::zeros(n, n);
                m[(j, j)] = I;
                m
            })
            .collect();
        MatrixLieGroup::from_basis(GroupKind::Torus(n), basis)
    }

    pub fn trivial() -> Self {
        MatrixLieGroup::torus(0)
    }

    /// SU(2) with basis `X_k = −i σ_k / 2`, so `[Xᵢ, Xⱼ] = ε_{ijk} X_k`.
    pub fn su2() -> Self {
        let z = c(0.0, 0.0);
        let h = |a: C64, b: C64, cc: C64, d: C64| CMatrix::from_row_slice(2, 2, &[a, b, cc, d]);
        let sigma = [
            h(z, c(1.0, 0.0), c(1.0, 0.0), z),
            h(z, c(0.0, -1.0), c(0.0, 1.0), z),
            h(c(1.0, 0.0), z, z, c(-1.0, 0.0)),
        ];
        let basis = sigma.iter().map(|s| s * c(0.0, -0.5)).collect();
        MatrixLieGroup::from_basis(GroupKind::Su2, basis)
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn name(&self) -> String {
        match self.kind {
            GroupKind::Torus(n) => format!("T{n}"),
            GroupKind::Su2 => "SU2".into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn matrix_dim(&self) -> usize {
        match self.kind {
            GroupKind::Torus(n) => n,
            GroupKind::Su2 => 2,
        }
    }

    pub fn is_abelian(&self) -> bool {
        self.structure.iter().all(|m| m.amax() == 0.0)
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn basis_vector(&self, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        v[i] = 1.0;
        v
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure[k][(i, j)]
    }

    /// Ad-invariant inner product on the algebra in the chosen basis.
    pub fn inner_product(&self) -> &DMatrix<f64> {
        &self.inner
    }

    /// Induced inner product on `g*`.
    pub fn dual_inner(&self, a: &CoadjointElement, b: &CoadjointElement) -> f64 {
        let inv = self.inner.clone().try_inverse().expect("inner product is definite");
        (a.coeffs.transpose() * inv * &b.coeffs)[(0, 0)]
    }

    pub fn dual_norm(&self, a: &CoadjointElement) -> f64 {
        self.dual_inner(a, a).max(0.0).sqrt()
    }

    pub fn identity(&self) -> CMatrix {
        let n = self.matrix_dim();
        CMatrix::identity(n, n)
    }

    pub fn algebra_matrix(&self, x: &DVector<f64>) -> CMatrix {
        let n = self.matrix_dim();
        let mut m = CMatrix::zeros(n, n);
        for (b, &xi) in self.basis.iter().zip(x.iter()) {
            m += b * c(xi, 0.0);
        }
        m
    }

    /// Coordinates of an algebra matrix in the basis (orthogonal projection
    /// in the real Frobenius inner product).
    pub fn coords(&self, m: &CMatrix) -> DVector<f64> {
        let d = self.dim();
        let rhs = DVector::from_fn(d, |i, _| frob(&self.basis[i], m));
        &self.gram_inv * rhs
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        DVector::from_fn(d, |k, _| (x.transpose() * &self.structure[k] * y)[(0, 0)])
    }

    /// Matrix of `ad_X` acting on coefficient vectors.
    pub fn ad_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |k, j| (0..d).map(|i| x[i] * self.structure[k][(i, j)]).sum())
    }

    pub fn exp(&self, x: &DVector<f64>, t: f64) -> CMatrix {
        match self.kind {
            GroupKind::Torus(n) => {
                let mut g = CMatrix::identity(n, n);
                for j in 0..n {
                    g[(j, j)] = C64::from_polar(1.0, t * x[j]);
                }
                g
            }
            GroupKind::Su2 => {
                let norm = x.norm();
                if norm == 0.0 {
                    return self.identity();
                }
                let theta = 0.5 * t * norm;
                // exp(−iθ n·σ) = cos θ − i sin θ (n·σ) and n·σ = 2i·X(n)
                let nsig = self.algebra_matrix(&(x / norm)) * c(0.0, 2.0);
                self.identity() * c(theta.cos(), 0.0) - nsig * c(0.0, theta.sin())
            }
        }
    }

    pub fn inverse(&self, g: &CMatrix) -> CMatrix {
        g.adjoint()
    }

    /// `Ad(g)X = g X g⁻¹` in coordinates.
    pub fn adjoint(&self, g: &CMatrix, x: &DVector<f64>) -> DVector<f64> {
        self.coords(&(g * self.algebra_matrix(x) * self.inverse(g)))
    }

    /// `Ad†(g)μ`, defined by `⟨Ad†(g)μ, X⟩ = ⟨μ, Ad(g⁻¹)X⟩`.
    pub fn coadjoint(&self, g: &CMatrix, mu: &CoadjointElement) -> CoadjointElement {
        let d = self.dim();
        let ginv = self.inverse(g);
        let coeffs = DVector::from_fn(d, |i, _| mu.pair(&self.adjoint(&ginv, &self.basis_vector(i))));
        CoadjointElement::new(coeffs)
    }

    /// Basis (columns) of `g_μ = {X : ⟨μ, [X, Y]⟩ = 0 ∀Y}`.
    pub fn isotropy_algebra(&self, mu: &CoadjointElement, rel_tol: f64) -> DMatrix<f64> {
        let d = self.dim();
        if d == 0 {
            return DMatrix::zeros(0, 0);
        }
        let m = DMatrix::from_fn(d, d, |j, i| {
            (0..d).map(|k| mu.coeffs[k] * self.structure[k][(i, j)]).sum::<f64>()
        });
        if m.amax() <= 1e-14 {
            return DMatrix::identity(d, d);
        }
        linalg::null_space(&m, rel_tol).0
    }

    /// Uniformly spread random element: `exp(X)` with Gaussian coefficients
    /// scaled to cover the group.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> CMatrix {
        let x = DVector::from_fn(self.dim(), |_, _| {
            let z: f64 = StandardNormal.sample(rng);
            2.0 * std::f64::consts::PI * z
        });
        self.exp(&x, 1.0)
    }

    /// `‖g†g − I‖ + |det g − 1|` (the determinant term only for SU(2)).
    pub fn membership_residual(&self, g: &CMatrix) -> f64 {
        let n = self.matrix_dim();
        let u = (g.adjoint() * g - CMatrix::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let det = if self.kind == GroupKind::Su2 {
            (g.determinant() - c(1.0, 0.0)).norm()
        } else {
            0.0
        };
        u + det
    }

    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (x, y, z) = (self.basis_vector(i), self.basis_vector(j), self.basis_vector(k));
                    let r = self.bracket(&x, &self.bracket(&y, &z))
                        + self.bracket(&y, &self.bracket(&z, &x))
                        + self.bracket(&z, &self.bracket(&x, &y));
                    worst = worst.max(r.amax());
                }
            }
        }
        worst
    }

    /// Max over basis pairs of `‖[Xᵢ, Xⱼ] − Σ c^k_{ij} X_k‖`.
    pub fn closure_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let br = &self.basis[i] * &self.basis[j] - &self.basis[j] * &self.basis[i];
                let rec = self.algebra_matrix(&self.bracket(&self.basis_vector(i), &self.basis_vector(j)));
                worst = worst.max((br - rec).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    /// Max over basis triples of `|⟨[Z, X], Y⟩ + ⟨X, [Z, Y]⟩|`.
    pub fn ad_invariance_residual(&self) -> f64 {
        let d = self.dim();
        let ip = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &self.inner * b)[(0, 0)];
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (x, y, z) = (self.basis_vector(i), self.basis_vector(j), self.basis_vector(k));
                    let r = ip(&self.bracket(&z, &x), &y) + ip(&x, &self.bracket(&z, &y));
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }
}

/// How a block of complex coordinates sees the group matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockMode {
    /// `z ↦ g[idx, idx] · z` on the block.
    Full,
    /// `z_a ↦ g[k_a, k_a] · z_a` coordinatewise.
    Diagonal,
}

/// Complex coordinates at the given real offsets (each occupying the pair
/// `(offset, offset + 1)`) transformed by entries of the group matrix with
/// the given indices. With `inverse`, `g⁻¹` is used instead of `g`.
#[derive(Clone, Debug)]
pub struct ActionBlock {
    pub offsets: Vec<usize>,
    pub group_idx: Vec<usize>,
    pub mode: BlockMode,
    pub inverse: bool,
}

impl ActionBlock {
    pub fn full(offsets: Vec<usize>, group_idx: Vec<usize>) -> Self {
        ActionBlock { offsets, group_idx, mode: BlockMode::Full, inverse: false }
    }

    pub fn diagonal(offsets: Vec<usize>, group_idx: Vec<usize>) -> Self {
        ActionBlock { offsets, group_idx, mode: BlockMode::Diagonal, inverse: false }
    }

    pub fn inverted(mut self) -> Self {
        self.inverse = !self.inverse;
        self
    }
}

/// A linear action `x ↦ ρ(g) x` of a matrix group on `ℝᴺ`, assembled from
/// blocks. Uncovered coordinates are fixed. All blocks non-inverted gives a
/// left action; all inverted gives the left action `x ↦ x·g⁻¹` built from a
/// right one.
#[derive(Clone, Debug)]
pub struct LinearAction {
    name: String,
    group: Arc<MatrixLieGroup>,
    ambient_dim: usize,
    blocks: Vec<ActionBlock>,
}

impl LinearAction {
    pub fn new(name: impl Into<String>, group: Arc<MatrixLieGroup>, ambient_dim: usize, blocks: Vec<ActionBlock>) -> Self {
        for b in &blocks {
            assert_eq!(b.offsets.len(), b.group_idx.len());
            for &o in &b.offsets {
                assert!(o + 1 < ambient_dim, "block offset {o} outside ℝ^{ambient_dim}");
            }
            for &k in &b.group_idx {
                assert!(k < group.matrix_dim().max(1));
            }
        }
        LinearAction { name: name.into(), group, ambient_dim, blocks }
    }

    /// `e^{iθ}` acting on every complex coordinate of `ℂⁿ`.
    pub fn circle_diagonal(n: usize) -> Self {
        LinearAction::circle_on(2 * n, (0..n).map(|k| 2 * k).collect())
    }

    /// `e^{iθ}` acting on the complex coordinates at the given real offsets.
    pub fn circle_on(ambient_dim: usize, offsets: Vec<usize>) -> Self {
        let idx = vec![0; offsets.len()];
        LinearAction::new(
            "S1",
            Arc::new(MatrixLieGroup::torus(1)),
            ambient_dim,
            vec![ActionBlock::diagonal(offsets, idx)],
        )
    }

    /// `Tⁿ` acting coordinatewise on `ℂⁿ`.
    pub fn torus_coordinatewise(n: usize) -> Self {
        LinearAction::new(
            format!("T{n}"),
            Arc::new(MatrixLieGroup::torus(n)),
            2 * n,
            vec![ActionBlock::diagonal((0..n).map(|k| 2 * k).collect(), (0..n).collect())],
        )
    }

    /// SU(2) on the first two complex coordinates of `ℂⁿ`.
    pub fn su2_on(n: usize) -> Self {
        assert!(n >= 2);
        LinearAction::new(
            "SU2",
            Arc::new(MatrixLieGroup::su2()),
            2 * n,
            vec![ActionBlock::full(vec![0, 2], vec![0, 1])],
        )
    }

    /// The same action with every block inverted.
    pub fn inverted(&self) -> Self {
        LinearAction {
            name: format!("{}^-1", self.name),
            group: self.group.clone(),
            ambient_dim: self.ambient_dim,
            blocks: self.blocks.iter().cloned().map(ActionBlock::inverted).collect(),
        }
    }

    /// Places this action on the block `[offset, offset + ambient_dim)` of a
    /// larger space.
    pub fn embedded(&self, offset: usize, ambient_dim: usize) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| ActionBlock {
                offsets: b.offsets.iter().map(|o| o + offset).collect(),
                ..b.clone()
            })
            .collect();
        LinearAction::new(self.name.clone(), self.group.clone(), ambient_dim, blocks)
    }

    /// Union of the blocks of two actions of the same group on the same space.
    pub fn combined(&self, other: &LinearAction) -> Self {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        let mut blocks = self.blocks.clone();
        blocks.extend(other.blocks.iter().cloned());
        LinearAction::new(format!("{}+{}", self.name, other.name), self.group.clone(), self.ambient_dim, blocks)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn group(&self) -> &Arc<MatrixLieGroup> {
        &self.group
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    fn place(&self, m: &CMatrix, minv: &CMatrix, fill: f64) -> DMatrix<f64> {
        let n = self.ambient_dim;
        let mut r = DMatrix::identity(n, n) * fill;
        for b in &self.blocks {
            for &o in &b.offsets {
                for row in [o, o + 1] {
                    r.row_mut(row).fill(0.0);
                }
            }
        }
        for b in &self.blocks {
            let src = if b.inverse { minv } else { m };
            for (a, &oa) in b.offsets.iter().enumerate() {
                let cols: Vec<(usize, usize)> = match b.mode {
                    BlockMode::Full => b.offsets.iter().copied().enumerate().collect(),
                    BlockMode::Diagonal => vec![(a, oa)],
                };
                for (bb, ob) in cols {
                    let z = src[(b.group_idx[a], b.group_idx[bb])];
                    r[(oa, ob)] += z.re;
                    r[(oa, ob + 1)] -= z.im;
                    r[(oa + 1, ob)] += z.im;
                    r[(oa + 1, ob + 1)] += z.re;
                }
            }
        }
        r
    }

    /// Real `N × N` matrix of `ρ(g)`.
    pub fn matrix(&self, g: &CMatrix) -> DMatrix<f64> {
        if self.group.dim() == 0 {
            return DMatrix::identity(self.ambient_dim, self.ambient_dim);
        }
        let ginv = self.group.inverse(g);
        self.place(g, &ginv, 1.0)
    }

    pub fn act(&self, g: &CMatrix, x: &DVector<f64>) -> DVector<f64> {
        self.matrix(g) * x
    }

    /// Matrix `L_X` with `X_M(x) = L_X x = d/dt|₀ ρ(exp tX) x`.
    pub fn generator_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        if self.group.dim() == 0 {
            return DMatrix::zeros(self.ambient_dim, self.ambient_dim);
        }
        let m = self.group.algebra_matrix(x);
        let neg = -m.clone();
        self.place(&m, &neg, 0.0)
    }

    pub fn induced_vector_field(&self, x: &DVector<f64>, p: &DVector<f64>) -> DVector<f64> {
        self.generator_matrix(x) * p
    }

    /// `X_M` as a vector field.
    pub fn induced_field(&self, x: &DVector<f64>) -> VectorFieldEntity {
        VectorFieldEntity::linear(format!("{}_M", self.name), self.generator_matrix(x))
    }

    /// Columns `(X_i)_M(p)` for the basis elements.
    pub fn orbit_matrix(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let d = self.group.dim();
        let mut m = DMatrix::zeros(self.ambient_dim, d);
        for i in 0..d {
            m.set_column(i, &self.induced_vector_field(&self.group.basis_vector(i), p));
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cmax(a: &CMatrix) -> f64 {
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn su2_structure_is_cross_product() {
        let g = MatrixLieGroup::su2();
        assert!((g.structure_constant(0, 1, 2) - 1.0).abs() < 1e-15);
        assert!((g.structure_constant(1, 2, 0) - 1.0).abs() < 1e-15);
        assert!((g.structure_constant(1, 0, 2) + 1.0).abs() < 1e-15);
        assert!(g.closure_residual() < 1e-14);
        assert!(g.jacobi_residual() < 1e-14);
        assert!(g.ad_invariance_residual() < 1e-14);
        assert!((g.inner_product() - DMatrix::identity(3, 3) * 2.0).amax() < 1e-14);
    }

    #[test]
    fn circle_exp_closes_at_two_pi() {
        let t1 = MatrixLieGroup::torus(1);
        let g = t1.exp(&DVector::from_vec(vec![1.0]), 2.0 * PI);
        assert!(cmax(&(g - t1.identity())) < 1e-14);
    }

    #[test]
    fn su2_exp_is_spin_double_cover() {
        let g = MatrixLieGroup::su2();
        // iσ₃/2 = −X₃
        let x = DVector::from_vec(vec![0.0, 0.0, -1.0]);
        let e = g.exp(&x, 2.0 * PI);
        assert!(cmax(&(e + g.identity())) < 1e-14);
    }

    #[test]
    fn su2_exp_matches_series() {
        let g = MatrixLieGroup::su2();
        let x = DVector::from_vec(vec![0.3, -1.1, 0.7]);
        let m = g.algebra_matrix(&x);
        // truncated Taylor series as an independent oracle
        let mut term = g.identity();
        let mut sum = g.identity();
        for k in 1..40 {
            term = &term * &m * c(1.0 / k as f64, 0.0);
            sum += &term;
        }
        assert!(cmax(&(g.exp(&x, 1.0) - sum)) < 1e-13);
    }

    #[test]
    fn one_parameter_subgroup() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for g in [MatrixLieGroup::su2(), MatrixLieGroup::torus(3)] {
            for _ in 0..10 {
                let x = DVector::from_fn(g.dim(), |_, _| rng.random_range(-2.0..2.0));
                let (s, t) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
                let lhs = g.exp(&x, s) * g.exp(&x, t);
                assert!(cmax(&(lhs - g.exp(&x, s + t))) < 1e-12);
                assert!(g.membership_residual(&g.exp(&x, s)) < 1e-12);
            }
        }
    }

    #[test]
    fn isotropy_dimensions() {
        let su2 = MatrixLieGroup::su2();
        let e3 = CoadjointElement::from_slice(&[0.0, 0.0, 1.0]);
        let gm = su2.isotropy_algebra(&e3, 1e-10);
        assert_eq!(gm.ncols(), 1);
        assert!((gm[(2, 0)].abs() - 1.0).abs() < 1e-12);
        assert_eq!(su2.isotropy_algebra(&CoadjointElement::from_slice(&[0.0; 3]), 1e-10).ncols(), 3);
        let t2 = MatrixLieGroup::torus(2);
        assert_eq!(t2.isotropy_algebra(&CoadjointElement::from_slice(&[1.0, 2.0]), 1e-10).ncols(), 2);
    }

    #[test]
    fn coadjoint_preserves_norm_and_pairing() {
        let g = MatrixLieGroup::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mu = CoadjointElement::from_slice(&[0.2, -0.5, 1.3]);
        for _ in 0..20 {
            let h = g.random_element(&mut rng);
            let nu = g.coadjoint(&h, &mu);
            assert!((g.dual_norm(&nu) - g.dual_norm(&mu)).abs() < 1e-12);
            let x = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
            let rhs = mu.pair(&g.adjoint(&g.inverse(&h), &x));
            assert!((nu.pair(&x) - rhs).abs() < 1e-12);
        }
        assert_eq!(g.coadjoint(&g.identity(), &mu).coeffs.len(), 3);
        assert!((g.coadjoint(&g.identity(), &mu).coeffs - &mu.coeffs).amax() < 1e-14);
    }

    #[test]
    fn circle_generator_is_rotation() {
        let a = LinearAction::circle_diagonal(2);
        let p = DVector::from_vec(vec![0.1, 0.2, 0.3, 0.4]);
        let v = a.induced_vector_field(&DVector::from_vec(vec![1.0]), &p);
        assert_eq!(v, DVector::from_vec(vec![-0.2, 0.1, -0.4, 0.3]));
        let t2 = LinearAction::torus_coordinatewise(2);
        let v1 = t2.induced_vector_field(&DVector::from_vec(vec![1.0, 0.0]), &p);
        assert_eq!(v1, DVector::from_vec(vec![-0.2, 0.1, 0.0, 0.0]));
    }

    #[test]
    fn action_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for a in [LinearAction::su2_on(3), LinearAction::torus_coordinatewise(3)] {
            let g = a.group().clone();
            for _ in 0..10 {
                let (h1, h2) = (g.random_element(&mut rng), g.random_element(&mut rng));
                let x = DVector::from_fn(a.ambient_dim(), |_, _| rng.random_range(-1.0..1.0));
                let lhs = a.act(&(&h1 * &h2), &x);
                let rhs = a.act(&h1, &a.act(&h2, &x));
                assert!((lhs - rhs).amax() < 1e-12);
                assert!((a.act(&g.identity(), &x) - &x).amax() == 0.0);
            }
        }
    }

    #[test]
    fn generator_matches_derivative_of_action() {
        let a = LinearAction::su2_on(2);
        let g = a.group().clone();
        let x = DVector::from_vec(vec![0.4, -0.3, 0.9]);
        let p = DVector::from_vec(vec![0.5, -0.1, 0.2, 0.7]);
        let h = 1e-6;
        let fd = (a.act(&g.exp(&x, h), &p) - a.act(&g.exp(&x, -h), &p)) / (2.0 * h);
        assert!((fd - a.induced_vector_field(&x, &p)).amax() < 1e-9);
        let inv = a.inverted();
        let fd = (inv.act(&g.exp(&x, h), &p) - inv.act(&g.exp(&x, -h), &p)) / (2.0 * h);
        assert!((fd - inv.induced_vector_field(&x, &p)).amax() < 1e-9);
    }
}
