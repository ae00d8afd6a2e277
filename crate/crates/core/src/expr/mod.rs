//! Expression language for user-supplied scalar fields.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = atom [ "^" unary ] ;          (* exponent must fold to a constant *)
//! atom    = number | variable | "pi" | func "(" expr ")" | "(" expr ")" ;
//! func    = "sin" | "cos" | "tan" | "exp" | "log" | "sqrt"
//!         | "sinh" | "cosh" | "tanh" | "abs" ;
//! ```
//!
//! Whitespace is insignificant and there is no implicit multiplication.
//! Evaluation yields exact first and second derivatives through [`Jet`].

mod ast;
mod eval;
mod jet;
mod parser;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub use ast::{BinOp, Expr, Func};
pub use jet::Jet;

use crate::error::{Error, Result};

/// A parsed expression together with its declared variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    ast: Expr,
    vars: Vec<String>,
}

impl Expression {
    pub fn parse<S: AsRef<str>>(source: &str, variables: &[S]) -> Result<Self> {
        let vars: Vec<String> = variables.iter().map(|v| v.as_ref().to_string()).collect();
        if vars.is_empty() {
            return Err(Error::InvalidVariables("no variables declared".into()));
        }
        for (i, v) in vars.iter().enumerate() {
            let valid = v.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
                && v.chars().all(|c| c.is_alphanumeric() || c == '_');
            if !valid {
                return Err(Error::InvalidVariables(alloc::format!("`{v}` is not an identifier")));
            }
            if Func::from_name(v).is_some() || v == "pi" {
                return Err(Error::InvalidVariables(alloc::format!("`{v}` is reserved")));
            }
            if vars[..i].contains(v) {
                return Err(Error::InvalidVariables(alloc::format!("`{v}` declared twice")));
            }
        }
        let ast = parser::parse(source, &vars)?;
        Ok(Expression { ast, vars })
    }

    /// Wraps an already-built tree. Variable indices must be in range.
    pub fn from_ast(ast: Expr, variables: Vec<String>) -> Result<Self> {
        fn max_var(e: &Expr) -> Option<usize> {
            match e {
                Expr::Const(_) => None,
                Expr::Var(i) => Some(*i),
                Expr::Neg(a) | Expr::Call(_, a) | Expr::Pow(a, _) => max_var(a),
                Expr::Binary(_, a, b) => max_var(a).max(max_var(b)),
            }
        }
        if max_var(&ast).is_some_and(|m| m >= variables.len()) {
            return Err(Error::InvalidVariables("variable index out of range".into()));
        }
        Ok(Expression { ast, vars: variables })
    }

    pub fn constant(value: f64, variables: Vec<String>) -> Self {
        Expression { ast: Expr::Const(value), vars: variables }
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn node_count(&self) -> usize {
        self.ast.node_count()
    }

    pub fn is_constant(&self) -> bool {
        (0..self.vars.len()).all(|i| !self.ast.uses_var(i))
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.vars.len() {
            return Err(Error::Dimension { expected: self.vars.len(), found: point.len() });
        }
        if let Some(i) = point.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(alloc::format!("variable `{}` is not finite", self.vars[i])));
        }
        Ok(())
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        self.check_point(point)?;
        eval::eval_value(&self.ast, point)
    }

    /// Value, gradient and Hessian at `point` (ordered like the declared
    /// variables).
    pub fn eval_jet(&self, point: &[f64]) -> Result<Jet> {
        self.check_point(point)?;
        let dim = point.len();
        let inputs: Vec<Jet> = point
            .iter()
            .enumerate()
            .map(|(i, v)| Jet::variable(*v, i, dim))
            .collect();
        eval::eval_jet_with(&self.ast, &inputs, dim)
    }

    /// Evaluates with each declared variable bound to an arbitrary jet, so
    /// that derivatives come out with respect to the jets' own variables.
    pub fn eval_composed(&self, inputs: &[Jet]) -> Result<Jet> {
        if inputs.len() != self.vars.len() {
            return Err(Error::Dimension { expected: self.vars.len(), found: inputs.len() });
        }
        let dim = inputs.first().map_or(0, Jet::dim);
        eval::eval_jet_with(&self.ast, inputs, dim)
    }

    /// Symbolic partial derivative with respect to a declared variable.
    pub fn derivative(&self, variable: usize) -> Expression {
        Expression { ast: self.ast.derivative(variable), vars: self.vars.clone() }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.write(&self.vars, f)
    }
}
