//! Central finite-difference stencils.

use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::DVector;

/// Sixth-order central first derivative of `f` at `x` with step `h`.
pub fn derivative<F>(mut f: F, x: f64, h: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    const W: [(f64, f64); 3] = [(1.0, 45.0), (2.0, -9.0), (3.0, 1.0)];
    W.iter()
        .map(|(k, w)| w * (f(x + k * h) - f(x - k * h)))
        .sum::<f64>()
        / (60.0 * h)
}

/// Sixth-order central derivative of a vector-valued function along a
/// direction: `d/ds F(x + s·dir)` at `s = 0`.
pub fn directional<F, E>(mut f: F, x: &DVector<f64>, dir: &DVector<f64>, h: f64) -> Result<DVector<f64>, E>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>, E>,
{
    const W: [(f64, f64); 3] = [(1.0, 45.0), (2.0, -9.0), (3.0, 1.0)];
    let mut acc: Option<DVector<f64>> = None;
    for (k, w) in W {
        let plus = f(&(x + dir * (k * h)))?;
        let minus = f(&(x - dir * (k * h)))?;
        let term = (plus - minus) * w;
        acc = Some(match acc {
            Some(a) => a + term,
            None => term,
        });
    }
    Ok(acc.expect("non-empty stencil") / (60.0 * h))
}

/// Weights for the first three derivatives at the centre of a symmetric
/// 7-point grid `k·h, k = -3..=3`, each exact for polynomials of degree 6.
/// Returned as `[d1, d2, d3]`, each a weight per grid point, to be divided by
/// `h`, `h²`, `h³` respectively.
pub const SEVEN_POINT: [[f64; 7]; 3] = [
    [-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
    [1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, -49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0],
    [1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0],
];

/// Orders of the leading truncation term of each [`SEVEN_POINT`] stencil.
pub const SEVEN_POINT_ORDER: [i32; 3] = [6, 6, 4];

/// Applies one stencil row to samples `values[k+3]` at `k·h`.
pub fn apply_seven<T>(weights: &[f64; 7], values: &[T]) -> T
where
    T: Clone + core::ops::Mul<f64, Output = T> + core::ops::Add<Output = T>,
{
    let mut acc = values[0].clone() * weights[0];
    for (v, w) in values.iter().zip(weights.iter()).skip(1) {
        acc = acc + v.clone() * *w;
    }
    acc
}

/// One Richardson step for an estimate with leading error `O(h^order)`:
/// combines the estimates at `h` (fine) and `2h` (coarse).
pub fn richardson(fine: f64, coarse: f64, order: i32) -> f64 {
    let r = (2.0f64).powi(order);
    (r * fine - coarse) / (r - 1.0)
}

/// Evenly spaced grid on `[lo, hi]` with `count` points.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}
