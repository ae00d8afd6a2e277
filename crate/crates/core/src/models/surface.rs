use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::MetricField;
use crate::error::{Error, Result};
use crate::expr::{BinOp, Expr, Expression};

/// Surface of revolution with profile `r(z) > 0`, in coordinates `(z, θ)`.
/// The induced metric is `diag(1 + r'(z)², r(z)²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceOfRevolution {
    profile: Expression,
}

pub const SURFACE_COORDS: [&str; 2] = ["z", "theta"];

impl SurfaceOfRevolution {
    /// `profile` is an expression in the single variable `z`.
    pub fn new(profile: &str) -> Result<Self> {
        Ok(SurfaceOfRevolution { profile: Expression::parse(profile, &["z"])? })
    }

    /// The hyperboloid of one sheet, `r(z) = √(1 + z²)`, with `K = −1` on the
    /// waist.
    pub fn hyperboloid() -> Self {
        SurfaceOfRevolution::new("sqrt(1 + z^2)").expect("valid profile")
    }

    pub fn profile(&self) -> &Expression {
        &self.profile
    }

    pub fn coords() -> Vec<String> {
        SURFACE_COORDS.iter().map(|s| String::from(*s)).collect()
    }

    pub fn metric(&self) -> MetricField {
        let r = self.profile.ast().clone();
        let dr = self.profile.derivative(0).ast().clone();
        let g_zz = Expr::Binary(BinOp::Add, Box::new(Expr::Const(1.0)), Box::new(Expr::Pow(Box::new(dr), 2.0)));
        let g_tt = Expr::Pow(Box::new(r), 2.0);
        let coords = Self::coords();
        let upper = vec![
            Expression::from_ast(g_zz, coords.clone()).expect("z is declared"),
            Expression::constant(0.0, coords.clone()),
            Expression::from_ast(g_tt, coords.clone()).expect("z is declared"),
        ];
        MetricField::from_upper(coords, upper).expect("well-formed surface metric")
    }

    /// `K = −r'' / (r (1 + r'²)²)`.
    pub fn gaussian_curvature(&self, z: f64) -> Result<f64> {
        let jet = self.profile.eval_jet(&[z])?;
        let (r, dr, d2r) = (jet.value(), jet.gradient()[0], jet.second(0, 0));
        if r <= 0.0 {
            return Err(Error::Domain(alloc::format!("profile radius {r} is not positive at z = {z}")));
        }
        let s = 1.0 + dr * dr;
        Ok(-d2r / (r * s * s))
    }
}
