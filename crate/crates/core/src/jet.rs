//! First-order jets: a value together with its gradient in ambient coordinates.
//!
//! A [`Jet1`] with an empty gradient is a constant and costs no allocation, so
//! every jet-evaluable function doubles as a plain evaluator. Seeding the
//! inputs with [`seed`] yields the full Jacobian of the function in one pass.
//!
//! Mixing a constant with a seeded jet treats the missing gradient as zero.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet1 {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Jet1 {
    pub fn constant(value: f64) -> Self {
        Jet1 { value, grad: Vec::new() }
    }

    /// The coordinate function `x_index` in an `n`-dimensional space.
    pub fn variable(value: f64, index: usize, n: usize) -> Self {
        let mut grad = vec![0.0; n];
        grad[index] = 1.0;
        Jet1 { value, grad }
    }

    pub fn zero() -> Self {
        Jet1::constant(0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.grad.iter().all(|g| *g == 0.0)
    }

    /// Partial derivative along coordinate `i`; zero for constants.
    pub fn d(&self, i: usize) -> f64 {
        self.grad.get(i).copied().unwrap_or(0.0)
    }

    /// Directional derivative `∇f · v`.
    pub fn directional(&self, v: &[f64]) -> f64 {
        self.grad.iter().zip(v).map(|(g, x)| g * x).sum()
    }

    /// Chain rule for a scalar function with value `f` and derivative `df` at `self.value`.
    pub fn chain(&self, f: f64, df: f64) -> Self {
        Jet1 {
            value: f,
            grad: self.grad.iter().map(|g| g * df).collect(),
        }
    }

    pub fn sin(&self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }

    pub fn cos(&self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }

    pub fn ln(&self) -> Self {
        self.chain(self.value.ln(), 1.0 / self.value)
    }

    pub fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s)
    }

    pub fn tanh(&self) -> Self {
        let t = self.value.tanh();
        self.chain(t, 1.0 - t * t)
    }

    pub fn powi(&self, n: i32) -> Self {
        if n == 0 {
            return Jet1::constant(1.0);
        }
        self.chain(self.value.powi(n), n as f64 * self.value.powi(n - 1))
    }

    pub fn recip(&self) -> Self {
        let r = 1.0 / self.value;
        self.chain(r, -r * r)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.chain(self.value * s, s)
    }
}

/// `ca * a + cb * b` for gradients that may be empty (meaning zero).
fn combine(a: &[f64], ca: f64, b: &[f64], cb: f64) -> Vec<f64> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => Vec::new(),
        (false, true) => a.iter().map(|x| ca * x).collect(),
        (true, false) => b.iter().map(|x| cb * x).collect(),
        (false, false) => {
            debug_assert_eq!(a.len(), b.len(), "jet gradient dimensions differ");
            a.iter().zip(b).map(|(x, y)| ca * x + cb * y).collect()
        }
    }
}

impl Add for &Jet1 {
    type Output = Jet1;
    fn add(self, rhs: &Jet1) -> Jet1 {
        Jet1 {
            value: self.value + rhs.value,
            grad: combine(&self.grad, 1.0, &rhs.grad, 1.0),
        }
    }
}

impl Sub for &Jet1 {
    type Output = Jet1;
    fn sub(self, rhs: &Jet1) -> Jet1 {
        Jet1 {
            value: self.value - rhs.value,
            grad: combine(&self.grad, 1.0, &rhs.grad, -1.0),
        }
    }
}

impl Mul for &Jet1 {
    type Output = Jet1;
    fn mul(self, rhs: &Jet1) -> Jet1 {
        Jet1 {
            value: self.value * rhs.value,
            grad: combine(&self.grad, rhs.value, &rhs.grad, self.value),
        }
    }
}

impl Div for &Jet1 {
    type Output = Jet1;
    fn div(self, rhs: &Jet1) -> Jet1 {
        let inv = 1.0 / rhs.value;
        let q = self.value * inv;
        Jet1 {
            value: q,
            grad: combine(&self.grad, inv, &rhs.grad, -q * inv),
        }
    }
}

impl Neg for &Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet1 {
            type Output = Jet1;
            fn $m(self, rhs: Jet1) -> Jet1 {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet1> for Jet1 {
            type Output = Jet1;
            fn $m(self, rhs: &Jet1) -> Jet1 {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet1> for &Jet1 {
            type Output = Jet1;
            fn $m(self, rhs: Jet1) -> Jet1 {
                self.$m(&rhs)
            }
        }
        impl $tr<f64> for Jet1 {
            type Output = Jet1;
            fn $m(self, rhs: f64) -> Jet1 {
                (&self).$m(&Jet1::constant(rhs))
            }
        }
        impl $tr<f64> for &Jet1 {
            type Output = Jet1;
            fn $m(self, rhs: f64) -> Jet1 {
                self.$m(&Jet1::constant(rhs))
            }
        }
        impl $tr<Jet1> for f64 {
            type Output = Jet1;
            fn $m(self, rhs: Jet1) -> Jet1 {
                (&Jet1::constant(self)).$m(&rhs)
            }
        }
        impl $tr<&Jet1> for f64 {
            type Output = Jet1;
            fn $m(self, rhs: &Jet1) -> Jet1 {
                (&Jet1::constant(self)).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        (&self).neg()
    }
}

impl AddAssign<&Jet1> for Jet1 {
    fn add_assign(&mut self, rhs: &Jet1) {
        *self = &*self + rhs;
    }
}

impl AddAssign for Jet1 {
    fn add_assign(&mut self, rhs: Jet1) {
        *self = &*self + &rhs;
    }
}

impl SubAssign<&Jet1> for Jet1 {
    fn sub_assign(&mut self, rhs: &Jet1) {
        *self = &*self - rhs;
    }
}

impl std::iter::Sum for Jet1 {
    fn sum<I: Iterator<Item = Jet1>>(iter: I) -> Jet1 {
        iter.fold(Jet1::zero(), |acc, x| acc + x)
    }
}

/// Seeds every coordinate of `point` as an independent variable.
pub fn seed(point: &[f64]) -> Vec<Jet1> {
    let n = point.len();
    point
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet1::variable(v, i, n))
        .collect()
}

/// Lifts `point` to constant jets (plain evaluation).
pub fn constants(point: &[f64]) -> Vec<Jet1> {
    point.iter().map(|&v| Jet1::constant(v)).collect()
}

pub fn values(jets: &[Jet1]) -> DVector<f64> {
    DVector::from_iterator(jets.len(), jets.iter().map(|j| j.value))
}

/// Stacks the gradients as rows: the Jacobian of the map whose outputs are `jets`.
pub fn jacobian(jets: &[Jet1], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(jets.len(), n, |r, c| jets[r].d(c))
}

/// Dot product of two jet vectors.
pub fn dot(a: &[Jet1], b: &[Jet1]) -> Jet1 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dot product of a jet vector with a constant vector.
pub fn dot_const(a: &[Jet1], b: &[f64]) -> Jet1 {
    let mut acc = Jet1::zero();
    for (x, &y) in a.iter().zip(b) {
        if y != 0.0 {
            acc += x.scale(y);
        }
    }
    acc
}

/// Solves the square system `a · x = b` by Gaussian elimination with partial
/// pivoting on the values. Returns `None` when a pivot falls below `pivot_tol`
/// times the largest entry.
pub fn solve(mut a: Vec<Vec<Jet1>>, mut b: Vec<Jet1>, pivot_tol: f64) -> Option<Vec<Jet1>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter().map(|x| x.value.abs()))
        .fold(0.0_f64, f64::max);
    if n == 0 {
        return Some(Vec::new());
    }
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].value.abs().total_cmp(&a[j][col].value.abs()))
            .unwrap();
        if a[piv][col].value.abs() <= pivot_tol * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for row in col + 1..n {
            if a[row][col].value == 0.0 && a[row][col].is_constant() {
                continue;
            }
            let factor = &a[row][col] * &inv;
            for k in col..n {
                let t = &factor * &a[col][k];
                a[row][k] -= &t;
            }
            let t = &factor * &b[col];
            b[row] -= &t;
        }
    }
    let mut x = vec![Jet1::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc -= &(&a[row][k] * &x[k]);
        }
        x[row] = &acc / &a[row][row];
    }
    Some(x)
}

/// Minimal-norm solution of the (consistent, full row rank) system `a · x = b`
/// via `x = aᵀ (a aᵀ)⁻¹ b`, carried out in jet arithmetic.
pub fn solve_min_norm(a: &[Vec<Jet1>], b: &[Jet1], pivot_tol: f64) -> Option<Vec<Jet1>> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let gram: Vec<Vec<Jet1>> = (0..m)
        .map(|i| (0..m).map(|j| dot(&a[i], &a[j])).collect())
        .collect();
    let y = solve(gram, b.to_vec(), pivot_tol)?;
    Some(
        (0..n)
            .map(|c| (0..m).map(|r| &a[r][c] * &y[r]).sum())
            .collect(),
    )
}

/// Least-squares solution of the overdetermined, full column rank system
/// `a · x = b` via the normal equations in jet arithmetic.
pub fn solve_least_squares(a: &[Vec<Jet1>], b: &[Jet1], pivot_tol: f64) -> Option<Vec<Jet1>> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let normal: Vec<Vec<Jet1>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..m).map(|r| &a[r][i] * &a[r][j]).sum())
                .collect()
        })
        .collect();
    let rhs: Vec<Jet1> = (0..n)
        .map(|i| (0..m).map(|r| &a[r][i] * &b[r]).sum())
        .collect();
    solve(normal, rhs, pivot_tol)
}
