use num_traits::Float;
use alloc::format;
use alloc::string::String;

use super::ast::{BinOp, Expr, Func};
use super::jet::Jet;
use crate::error::{Error, Result};

fn domain(msg: String) -> Error {
    Error::Domain(msg)
}

/// Value and first two derivatives of an elementary function at `x`.
fn func_derivs(f: Func, x: f64) -> Result<(f64, f64, f64)> {
    Ok(match f {
        Func::Sin => (x.sin(), x.cos(), -x.sin()),
        Func::Cos => (x.cos(), -x.sin(), -x.cos()),
        Func::Tan => {
            let c = x.cos();
            if c == 0.0 {
                return Err(domain(format!("tan undefined at {x}")));
            }
            let t = x.tan();
            let sec2 = 1.0 / (c * c);
            (t, sec2, 2.0 * t * sec2)
        }
        Func::Exp => {
            let e = x.exp();
            (e, e, e)
        }
        Func::Log => {
            if x <= 0.0 {
                return Err(domain(format!("log of non-positive value {x}")));
            }
            (x.ln(), 1.0 / x, -1.0 / (x * x))
        }
        Func::Sqrt => {
            if x <= 0.0 {
                return Err(domain(format!("sqrt needs a positive argument, got {x}")));
            }
            let s = x.sqrt();
            (s, 0.5 / s, -0.25 / (s * x))
        }
        Func::Sinh => (x.sinh(), x.cosh(), x.sinh()),
        Func::Cosh => (x.cosh(), x.sinh(), x.cosh()),
        Func::Tanh => {
            let t = x.tanh();
            let s2 = 1.0 - t * t;
            (t, s2, -2.0 * t * s2)
        }
        Func::Abs => (x.abs(), if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 }, 0.0),
    })
}

fn pow_derivs(x: f64, c: f64) -> Result<(f64, f64, f64)> {
    if c == 0.0 {
        return Ok((1.0, 0.0, 0.0));
    }
    let integral = c.fract() == 0.0;
    if x < 0.0 && !integral {
        return Err(domain(format!("{x}^{c} with non-integer exponent")));
    }
    if x == 0.0 && (c < 0.0 || (!integral && c < 2.0)) {
        return Err(domain(format!("0^{c} is not twice differentiable")));
    }
    let powi = |e: f64| -> f64 {
        if e == 0.0 {
            1.0
        } else if integral {
            x.powi(e as i32)
        } else {
            x.powf(e)
        }
    };
    Ok((powi(c), c * powi(c - 1.0), c * (c - 1.0) * powi(c - 2.0)))
}

fn checked(j: Jet, what: &str) -> Result<Jet> {
    if j.is_finite() {
        Ok(j)
    } else {
        Err(domain(format!("non-finite result in {what}")))
    }
}

/// Evaluates the tree with each variable replaced by the corresponding jet.
pub(crate) fn eval_jet_with(e: &Expr, inputs: &[Jet], dim: usize) -> Result<Jet> {
    match e {
        Expr::Const(c) => Ok(Jet::constant(*c, dim)),
        Expr::Var(i) => Ok(inputs[*i].clone()),
        Expr::Neg(a) => Ok(-&eval_jet_with(a, inputs, dim)?),
        Expr::Call(f, a) => {
            let x = eval_jet_with(a, inputs, dim)?;
            let (v, d1, d2) = func_derivs(*f, x.value())?;
            checked(x.chain(v, d1, d2), f.name())
        }
        Expr::Pow(a, c) => {
            let x = eval_jet_with(a, inputs, dim)?;
            let (v, d1, d2) = pow_derivs(x.value(), *c)?;
            checked(x.chain(v, d1, d2), "^")
        }
        Expr::Binary(op, a, b) => {
            let x = eval_jet_with(a, inputs, dim)?;
            let y = eval_jet_with(b, inputs, dim)?;
            let out = match op {
                BinOp::Add => &x + &y,
                BinOp::Sub => &x - &y,
                BinOp::Mul => &x * &y,
                BinOp::Div => {
                    if y.value() == 0.0 {
                        return Err(domain("division by zero".into()));
                    }
                    &x / &y
                }
            };
            checked(out, "arithmetic")
        }
    }
}

pub(crate) fn eval_value(e: &Expr, point: &[f64]) -> Result<f64> {
    let v = match e {
        Expr::Const(c) => *c,
        Expr::Var(i) => point[*i],
        Expr::Neg(a) => -eval_value(a, point)?,
        Expr::Call(f, a) => func_derivs(*f, eval_value(a, point)?)?.0,
        Expr::Pow(a, c) => {
            let x = eval_value(a, point)?;
            if x < 0.0 && c.fract() != 0.0 {
                return Err(domain(format!("{x}^{c} with non-integer exponent")));
            }
            if x == 0.0 && *c < 0.0 {
                return Err(domain("division by zero".into()));
            }
            if c.fract() == 0.0 && c.abs() < 2.0e9 {
                x.powi(*c as i32)
            } else {
                x.powf(*c)
            }
        }
        Expr::Binary(op, a, b) => {
            let (x, y) = (eval_value(a, point)?, eval_value(b, point)?);
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(domain("division by zero".into()));
                    }
                    x / y
                }
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain("non-finite result".into()))
    }
}
