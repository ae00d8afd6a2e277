use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

/// Second-order forward-mode jet: value, gradient and Hessian of a scalar
/// with respect to `dim` independent variables.
///
/// The Hessian is stored as a packed upper triangle, so the matrix handed
/// out by [`Jet::hessian`] is symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

#[inline]
fn packed_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

#[inline]
fn packed_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * dim - i * i.saturating_sub(1) / 2 + (j - i)
}

impl Jet {
    pub fn constant(value: f64, dim: usize) -> Self {
        Jet {
            value,
            grad: vec![0.0; dim],
            hess: vec![0.0; packed_len(dim)],
        }
    }

    /// The `index`-th independent variable evaluated at `value`.
    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut j = Jet::constant(value, dim);
        j.grad[index] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }

    pub fn gradient_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.grad)
    }

    pub fn second(&self, i: usize, j: usize) -> f64 {
        self.hess[packed_index(self.dim(), i, j)]
    }

    pub fn hessian(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.second(i, j))
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|v| v.is_finite())
            && self.hess.iter().all(|v| v.is_finite())
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value()`.
    pub fn chain(&self, f: f64, df: f64, d2f: f64) -> Jet {
        let n = self.dim();
        let mut out = Jet::constant(f, n);
        for i in 0..n {
            out.grad[i] = df * self.grad[i];
        }
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                out.hess[k] = df * self.hess[k] + d2f * self.grad[i] * self.grad[j];
                k += 1;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            value: s * self.value,
            grad: self.grad.iter().map(|g| s * g).collect(),
            hess: self.hess.iter().map(|h| s * h).collect(),
        }
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.value += c;
        out
    }

    pub fn recip(&self) -> Jet {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    /// Embeds a jet over `self.dim()` variables into a space of `dim`
    /// variables, with local variable `i` mapped to `offset + i`.
    pub fn embed(&self, dim: usize, offset: usize) -> Jet {
        let m = self.dim();
        let mut out = Jet::constant(self.value, dim);
        for i in 0..m {
            out.grad[offset + i] = self.grad[i];
            for j in i..m {
                let dst = packed_index(dim, offset + i, offset + j);
                out.hess[dst] = self.second(i, j);
            }
        }
        out
    }
}

fn zip_with(a: &Jet, b: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
    debug_assert_eq!(a.dim(), b.dim());
    Jet {
        value: f(a.value, b.value),
        grad: a.grad.iter().zip(&b.grad).map(|(x, y)| f(*x, *y)).collect(),
        hess: a.hess.iter().zip(&b.hess).map(|(x, y)| f(*x, *y)).collect(),
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.dim();
        let (a, b) = (self, rhs);
        let mut out = Jet::constant(a.value * b.value, n);
        for i in 0..n {
            out.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
        }
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                out.hess[k] = a.hess[k] * b.value
                    + a.value * b.hess[k]
                    + (a.grad[i] * b.grad[j] + a.grad[j] * b.grad[i]);
                k += 1;
            }
        }
        out
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self * &rhs.recip()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);
