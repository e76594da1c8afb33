//! Composite trapezoidal rule on uniform grids.
//!
//! Everything in the solver is integrated with the trapezoidal rule, both as
//! a plain definite integral ([`trapezoid`]) and in cumulative (prefix) form
//! ([`cumulative_trapezoid`]), which turns samples of `g` into samples of
//! `x -> integral of g from 0 to x` on the same grid. The integral over a
//! subrange `[x_j, x_i]` is then a difference of two prefix values.
//!
//! Summation is plain left-to-right double precision, which keeps results
//! reproducible across runs and platforms with the same libm.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("sample vector must hold at least one value")]
    Empty,
    #[error("grid step must be finite and positive, got {0}")]
    InvalidStep(f64),
}

/// Computes `h * (s_0/2 + s_1 + ... + s_{m-1} + s_m/2)`.
///
/// A slice with fewer than two samples spans a degenerate interval and
/// integrates to exactly zero. `h` must be finite and positive.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    debug_assert!(h.is_finite() && h > 0.0, "invalid grid step {h}");
    let m = values.len();
    if m < 2 {
        return 0.0;
    }
    let mut acc = 0.5 * values[0];
    for v in &values[1..m - 1] {
        acc += v;
    }
    acc += 0.5 * values[m - 1];
    h * acc
}

/// Prefix integrals: `c_0 = 0` and `c_j = c_{j-1} + h*(s_{j-1} + s_j)/2`.
///
/// The last entry equals [`trapezoid`] of the whole slice up to rounding.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    debug_assert!(h.is_finite() && h > 0.0, "invalid grid step {h}");
    let mut out = Vec::with_capacity(values.len());
    if values.is_empty() {
        return out;
    }
    out.push(0.0);
    for j in 1..values.len() {
        let step = h * (values[j - 1] + values[j]) / 2.0;
        out.push(out[j - 1] + step);
    }
    out
}

/// Samples of a function on a uniform grid with step `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector {
    values: Vec<f64>,
    h: f64,
}

impl SampleVector {
    /// Builds a sample vector, rejecting empty data and invalid steps.
    pub fn new(values: Vec<f64>, h: f64) -> Result<SampleVector, QuadratureError> {
        if values.is_empty() {
            return Err(QuadratureError::Empty);
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(QuadratureError::InvalidStep(h));
        }
        Ok(SampleVector { values, h })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// The integral over the full grid.
    pub fn trapezoid(&self) -> f64 {
        trapezoid(&self.values, self.h)
    }

    /// The running integral, on the same grid.
    pub fn cumulative_trapezoid(&self) -> SampleVector {
        SampleVector {
            values: cumulative_trapezoid(&self.values, self.h),
            h: self.h,
        }
    }
}
