//! Small symbolic expressions with exact derivatives.
//!
//! Used to build test fields whose differentials are known independently of
//! jet arithmetic: `df` is assembled from symbolic partials, so `d(df) = 0`
//! and Cartan's formula can be checked without sharing code paths.

use std::sync::Arc;

use rand::Rng;

use crate::forms::{OneFormField, VectorFieldEntity};
use crate::jet::Jet1;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Tanh(Box<Expr>),
}

impl Expr {
    pub fn add(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), _) if *x == 0.0 => b,
            (_, Expr::Const(y)) if *y == 0.0 => a,
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), _) | (_, Expr::Const(x)) if *x == 0.0 => Expr::Const(0.0),
            (Expr::Const(x), _) if *x == 1.0 => b,
            (_, Expr::Const(y)) if *y == 1.0 => a,
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn diff(&self, i: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(j) => Expr::Const(if *j == i { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => Expr::add(a.diff(i), b.diff(i)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(i), (**b).clone()),
                Expr::mul((**a).clone(), b.diff(i)),
            ),
            Expr::Sin(a) => Expr::mul(Expr::Cos(a.clone()), a.diff(i)),
            Expr::Cos(a) => Expr::mul(
                Expr::mul(Expr::Const(-1.0), Expr::Sin(a.clone())),
                a.diff(i),
            ),
            Expr::Exp(a) => Expr::mul(Expr::Exp(a.clone()), a.diff(i)),
            Expr::Tanh(a) => {
                let t = Expr::Tanh(a.clone());
                let sech2 = Expr::add(Expr::Const(1.0), Expr::mul(Expr::Const(-1.0), Expr::mul(t.clone(), t)));
                Expr::mul(sech2, a.diff(i))
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(j) => x[*j],
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Tanh(a) => a.eval(x).tanh(),
        }
    }

    pub fn eval_jet(&self, x: &[Jet1]) -> Jet1 {
        match self {
            Expr::Const(c) => Jet1::constant(*c),
            Expr::Var(j) => x[*j].clone(),
            Expr::Add(a, b) => a.eval_jet(x) + b.eval_jet(x),
            Expr::Mul(a, b) => a.eval_jet(x) * b.eval_jet(x),
            Expr::Sin(a) => a.eval_jet(x).sin(),
            Expr::Cos(a) => a.eval_jet(x).cos(),
            Expr::Exp(a) => a.eval_jet(x).exp(),
            Expr::Tanh(a) => a.eval_jet(x).tanh(),
        }
    }

    /// Random expression in `n` variables of depth at most `depth`. `Exp` is
    /// only applied to bounded arguments so values stay moderate on the unit
    /// ball.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, depth: usize) -> Expr {
        if depth == 0 || rng.random_bool(0.2) {
            return if rng.random_bool(0.7) {
                Expr::Var(rng.random_range(0..n))
            } else {
                Expr::Const(rng.random_range(-2.0..2.0))
            };
        }
        let sub = |rng: &mut R| Box::new(Expr::random(rng, n, depth - 1));
        match rng.random_range(0..6) {
            0 => Expr::Add(sub(rng), sub(rng)),
            1 => Expr::Mul(sub(rng), sub(rng)),
            2 => Expr::Sin(sub(rng)),
            3 => Expr::Cos(sub(rng)),
            4 => Expr::Exp(Box::new(Expr::Sin(sub(rng)))),
            _ => Expr::Tanh(sub(rng)),
        }
    }
}

/// `df` with coefficients given by the symbolic partials of `f`.
pub fn exact_form(f: &Expr, n: usize) -> OneFormField {
    let partials: Arc<Vec<Expr>> = Arc::new((0..n).map(|i| f.diff(i)).collect());
    OneFormField::new("df", n, move |x| partials.iter().map(|e| e.eval_jet(x)).collect())
}

/// One-form with the given symbolic coefficients.
pub fn form_from(coeffs: Vec<Expr>) -> OneFormField {
    let n = coeffs.len();
    let coeffs = Arc::new(coeffs);
    OneFormField::new("expr-form", n, move |x| coeffs.iter().map(|e| e.eval_jet(x)).collect())
}

/// Vector field with the given symbolic coefficients.
pub fn field_from(coeffs: Vec<Expr>) -> VectorFieldEntity {
    let n = coeffs.len();
    let coeffs = Arc::new(coeffs);
    VectorFieldEntity::new("expr-field", n, move |x| coeffs.iter().map(|e| e.eval_jet(x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diff_of_product() {
        // d/dx (x·sin y) = sin y
        let f = Expr::mul(Expr::Var(0), Expr::Sin(Box::new(Expr::Var(1))));
        let x = [0.4, 1.1];
        assert!((f.diff(0).eval(&x) - 1.1f64.sin()).abs() < 1e-15);
        assert!((f.diff(1).eval(&x) - 0.4 * 1.1f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn symbolic_and_jet_gradients_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let f = Expr::random(&mut rng, 3, 4);
            let x = [0.3, -0.7, 0.2];
            let j = f.eval_jet(&crate::jet::seed(&x));
            for i in 0..3 {
                let s = f.diff(i).eval(&x);
                assert!((j.d(i) - s).abs() <= 1e-12 * (1.0 + s.abs()));
            }
        }
    }
}
