//! Dense linear-algebra helpers: null spaces, orthonormal bases, subspace
//! angles and the Pfaffian of a skew-symmetric matrix.

use nalgebra::{DMatrix, DVector};

// Decompositions go through faer: nalgebra's SVD returns wrong singular
// vectors on some matrices with repeated singular values, which the
// symmetric examples here produce routinely.

fn to_faer(a: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Singular value decomposition `a = u · diag(s) · vᵀ`, `s` decreasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    /// Thin factors (`u` is m×k, `v` is n×k, `k = min(m, n)`).
    pub fn thin(a: &DMatrix<f64>) -> Option<Svd> {
        Self::compute(a, false)
    }

    /// Full square `u` and `v`.
    pub fn full(a: &DMatrix<f64>) -> Option<Svd> {
        Self::compute(a, true)
    }

    fn compute(a: &DMatrix<f64>, full: bool) -> Option<Svd> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            let k = if full { 0 } else { m.min(n) };
            return Some(Svd {
                u: DMatrix::identity(m, if full { m } else { k }),
                s: DVector::zeros(0),
                v: DMatrix::identity(n, if full { n } else { k }),
            });
        }
        let fa = to_faer(a);
        let (u, s, v) = if full {
            let d = fa.as_ref().svd().ok()?;
            (from_faer(d.U()), d.S().column_vector().iter().copied().collect::<Vec<_>>(), from_faer(d.V()))
        } else {
            let d = fa.as_ref().thin_svd().ok()?;
            (from_faer(d.U()), d.S().column_vector().iter().copied().collect::<Vec<_>>(), from_faer(d.V()))
        };
        if !s.iter().all(|x| x.is_finite()) {
            return None;
        }
        Some(Svd { u, s: DVector::from_vec(s), v })
    }

    /// Minimum-norm least-squares solution, discarding singular values at or
    /// below `eps`.
    pub fn solve(&self, b: &DVector<f64>, eps: f64) -> DVector<f64> {
        let k = self.s.len();
        let mut c = DVector::zeros(self.v.nrows());
        for i in 0..k {
            if self.s[i] > eps {
                let coef = self.u.column(i).dot(b) / self.s[i];
                c.axpy(coef, &self.v.column(i), 1.0);
            }
        }
        c
    }
}

/// Minimum-norm least-squares solve of `a x = b`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, eps: f64) -> Option<DVector<f64>> {
    Svd::thin(a).map(|d| d.solve(b, eps))
}

/// Eigenvalues (increasing) and orthonormal eigenvectors of the symmetric
/// part of `a`.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if n == 0 {
        return Some((DVector::zeros(0), DMatrix::zeros(0, 0)));
    }
    let sym = (a + a.transpose()) * 0.5;
    let d = to_faer(&sym).as_ref().self_adjoint_eigen(faer::Side::Lower).ok()?;
    let vals: DVector<f64> = d.S().column_vector().iter().copied().collect::<Vec<_>>().into();
    vals.iter().all(|x| x.is_finite()).then(|| (vals, from_faer(d.U())))
}

pub fn min_symmetric_eigenvalue(a: &DMatrix<f64>) -> f64 {
    symmetric_eigen(a).map_or(f64::NAN, |(l, _)| l.min())
}

/// Singular values of `a` sorted in decreasing order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let fa = to_faer(a);
    let mut s: Vec<f64> = match fa.as_ref().singular_values() {
        Ok(s) => s,
        Err(_) => return vec![f64::NAN; a.nrows().min(a.ncols())],
    };
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn min_singular_value(a: &DMatrix<f64>) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// Numerical rank: singular values above `rel_tol · σ_max` (and above `abs_floor`).
pub fn rank(a: &DMatrix<f64>, rel_tol: f64, abs_floor: f64) -> usize {
    let s = singular_values(a);
    let smax = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x > rel_tol * smax && x > abs_floor).count()
}

/// Orthonormal basis (columns) of the null space of `a` (r×n), together with
/// the numerical rank of `a`.
pub fn null_space(a: &DMatrix<f64>, rel_tol: f64) -> (DMatrix<f64>, usize) {
    let n = a.ncols();
    if n == 0 {
        return (DMatrix::zeros(0, 0), 0);
    }
    if a.nrows() == 0 {
        return (DMatrix::identity(n, n), 0);
    }
    let Some(svd) = Svd::full(a) else {
        return (DMatrix::zeros(n, 0), n.min(a.nrows()));
    };
    let smax = svd.s[0];
    let r = svd.s.iter().filter(|&&x| x > rel_tol * smax && x > 0.0).count();
    let basis = svd.v.columns(r, n - r).into_owned();
    (orthonormalize(&basis, 1e-12).0, r)
}

/// Modified Gram–Schmidt with re-orthogonalization; drops columns whose
/// remaining norm is below `drop_tol` times their original norm. Returns the
/// basis and the indices of the kept input columns.
pub fn orthonormalize(a: &DMatrix<f64>, drop_tol: f64) -> (DMatrix<f64>, Vec<usize>) {
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let mut kept = Vec::new();
    for j in 0..a.ncols() {
        let orig = a.column(j).into_owned();
        let norm0 = orig.norm();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = orig;
        for _ in 0..2 {
            for q in &cols {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let nv = v.norm();
        if nv > drop_tol * norm0 {
            cols.push(v / nv);
            kept.push(j);
        }
    }
    let basis = if cols.is_empty() {
        DMatrix::zeros(a.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    (basis, kept)
}

/// Orthogonal projection of the columns of `a` onto the complement of the
/// span of the orthonormal columns `q`.
pub fn project_out(a: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    if q.ncols() == 0 {
        return a.clone();
    }
    a - q * (q.transpose() * a)
}

/// Sine of the largest principal angle between the column spans of two
/// orthonormal bases of equal dimension.
pub fn max_principal_angle_sin(u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    assert_eq!(u.ncols(), v.ncols(), "subspace dimensions differ");
    if u.ncols() == 0 {
        return 0.0;
    }
    let residual = project_out(u, v);
    singular_values(&residual).first().copied().unwrap_or(0.0)
}

/// Pfaffian of a skew-symmetric matrix by Parlett–Reid elimination with
/// pivoting (`A = P L T Lᵀ Pᵀ`). Odd dimension gives 0.
pub fn pfaffian(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "Pfaffian needs a square matrix");
    if n % 2 == 1 {
        return 0.0;
    }
    let mut m = a.clone();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        for i in k + 2..n {
            if m[(i, k)].abs() > m[(kp, k)].abs() {
                kp = i;
            }
        }
        if kp != k + 1 {
            m.swap_rows(k + 1, kp);
            m.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = m[(k, k + 1)];
        if m[(k + 1, k)] == 0.0 {
            return 0.0;
        }
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| m[(k, j)] / pivot).collect();
            let col: Vec<f64> = (k + 2..n).map(|i| m[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    m[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// Largest absolute entry.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `Σ⁻¹ᐟ²` and `Σ¹ᐟ²` of a symmetric positive-definite matrix.
pub fn spd_sqrt_pair(s: &DMatrix<f64>) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    let n = s.nrows();
    if n == 0 {
        return Some((DMatrix::zeros(0, 0), DMatrix::zeros(0, 0)));
    }
    let (vals, q) = symmetric_eigen(s)?;
    let lmax = vals.iter().fold(0.0_f64, |m, x| m.max(*x));
    if vals.iter().any(|&l| l <= 1e-14 * lmax.max(1e-300)) {
        return None;
    }
    let d_half = DMatrix::from_diagonal(&vals.map(f64::sqrt));
    let d_inv_half = DMatrix::from_diagonal(&vals.map(|l| 1.0 / l.sqrt()));
    Some((&q * d_inv_half * q.transpose(), &q * d_half * q.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn svd_reconstructs_with_repeated_singular_values() {
        // Reeb system of α_std on S⁵ at a sample point: singular values
        // (4.0176, 4, 4, 4, 2.0088). nalgebra 0.35 reconstructs this with
        // error 0.23.
        let sys = DMatrix::from_column_slice(
            6,
            5,
            &[
                -0.328736985051537, 0.0, 1.7233098434325418, -2.4599354808886655, 2.3894232789659062,
                0.9150437071344106, -1.2299677404443325, -1.723309843432542, 0.0, 2.0630961236683425,
                1.6005952965745336, -0.4008112953519441, -0.8616549217162708, 2.4599354808886655,
                -2.0630961236683425, 0.0, 0.4008112953519437, 1.6005952965745338, 0.4575218535672051,
                -2.3894232789659062, -1.6005952965745336, -0.4008112953519436, 0.0, 2.5943778464347313,
                -1.1947116394829527, -0.9150437071344106, 0.40081129535194415, -1.6005952965745338,
                -2.5943778464347313, 0.0,
            ],
        );
        for d in [Svd::thin(&sys).unwrap(), Svd::full(&sys).unwrap()] {
            let k = d.s.len();
            let rec = d.u.columns(0, k) * DMatrix::from_diagonal(&d.s) * d.v.columns(0, k).transpose();
            assert!((rec - &sys).amax() < 1e-13);
        }
        let mut rhs = DVector::zeros(6);
        rhs[0] = 1.0;
        let c = lstsq(&sys, &rhs, 1e-14).unwrap();
        assert!((&sys * c - rhs).amax() < 1e-13);
    }

    proptest! {
        #[test]
        fn null_space_is_annihilated_and_orthonormal(
            entries in prop::collection::vec(-2.0f64..2.0, 12),
            dup in any::<bool>(),
        ) {
            let mut a = DMatrix::from_row_slice(2, 6, &entries);
            if dup {
                let r = a.row(0).into_owned();
                a.row_mut(1).copy_from(&r);
            }
            let (n, r) = null_space(&a, 1e-10);
            prop_assert_eq!(r + n.ncols(), 6);
            prop_assert!((&a * &n).amax() < 1e-12);
            prop_assert!((n.transpose() * &n - DMatrix::identity(n.ncols(), n.ncols())).amax() < 1e-12);
        }

        #[test]
        fn symmetric_eigen_diagonalizes(entries in prop::collection::vec(-2.0f64..2.0, 16)) {
            let a = DMatrix::from_row_slice(4, 4, &entries);
            let s = &a + a.transpose();
            let (l, q) = symmetric_eigen(&s).unwrap();
            prop_assert!((&q * DMatrix::from_diagonal(&l) * q.transpose() - &s).amax() < 1e-12);
            prop_assert!(l.as_slice().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    /// Pfaffian by expansion along the first row. Exponential cost; test oracle only.
    fn pfaffian_expansion(a: &DMatrix<f64>) -> f64 {
        let n = a.nrows();
        if n == 0 {
            return 1.0;
        }
        if n % 2 == 1 {
            return 0.0;
        }
        let mut total = 0.0;
        for j in 1..n {
            let keep: Vec<usize> = (1..n).filter(|&k| k != j).collect();
            let minor = DMatrix::from_fn(n - 2, n - 2, |r, c| a[(keep[r], keep[c])]);
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            total += sign * a[(0, j)] * pfaffian_expansion(&minor);
        }
        total
    }

    fn skew_from(entries: &[f64], n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                m[(i, j)] = entries[k];
                m[(j, i)] = -entries[k];
                k += 1;
            }
        }
        m
    }

    #[test]
    fn pfaffian_of_standard_blocks() {
        let m = skew_from(&[2.0, 0.0, 0.0, 0.0, 0.0, 4.0], 4);
        assert_eq!(pfaffian(&m), 8.0);
        let j2 = skew_from(&[1.0], 2);
        assert_eq!(pfaffian(&j2), 1.0);
    }

    #[test]
    fn pfaffian_needs_pivoting() {
        // Zero leading entry forces a row/column swap.
        let m = skew_from(&[0.0, 1.0, 0.0, 0.0, 0.0, 1.0], 4);
        assert!((pfaffian(&m) - pfaffian_expansion(&m)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn pfaffian_matches_expansion(entries in proptest::collection::vec(-2.0..2.0f64, 15)) {
            let m = skew_from(&entries, 6);
            let pf = pfaffian(&m);
            let reference = pfaffian_expansion(&m);
            prop_assert!((pf - reference).abs() <= 1e-12 * (1.0 + reference.abs()));
        }

        #[test]
        fn pfaffian_squared_is_determinant(entries in proptest::collection::vec(-2.0..2.0f64, 28)) {
            let m = skew_from(&entries, 8);
            let pf = pfaffian(&m);
            let det = m.clone().determinant();
            prop_assert!((pf * pf - det).abs() <= 1e-9 * (1.0 + det.abs()));
        }
    }

    #[test]
    fn null_space_is_orthonormal_and_annihilated() {
        let a = DMatrix::from_row_slice(2, 5, &[1.0, 2.0, 0.0, -1.0, 3.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
        let (ns, r) = null_space(&a, 1e-12);
        assert_eq!(r, 2);
        assert_eq!(ns.ncols(), 3);
        assert!((ns.transpose() * &ns - DMatrix::identity(3, 3)).norm() < 1e-12);
        assert!((&a * &ns).norm() < 1e-12);
    }

    #[test]
    fn principal_angle_of_rotated_plane() {
        let u = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let t: f64 = 0.3;
        let v = DMatrix::from_column_slice(3, 1, &[t.cos(), t.sin(), 0.0]);
        assert!((max_principal_angle_sin(&u, &v) - t.sin()).abs() < 1e-14);
    }
}
