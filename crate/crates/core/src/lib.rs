//! Solver library for nonlinear Volterra integral equations of the second kind,
//!
//! ```text
//! y(x) = f(x) + integral from 0 to x of K(x,t) F(y(t)) dt,   x in [0, x_f],
//! ```
//!
//! discretized on a uniform mesh with the composite trapezoidal rule and solved
//! by fixed-point iteration. Two iteration schemes are provided:
//!
//! * **SAM**, the successive approximation (Picard) method, which applies the
//!   integral operator repeatedly.
//! * **VIM**, a variational iteration scheme that corrects each Picard iterate
//!   with an integral weighted by an exponential Lagrange multiplier built from
//!   `K(t,t) F'(u(t))`. It reaches the same discrete fixed point as SAM, usually
//!   in far fewer iterations.
//!
//! Problems are defined by plain-text math expressions (see [`expr`]), either
//! programmatically, from a `key=value` problem file, or through the `volterra`
//! command-line tool. The module map follows the pipeline:
//!
//! * [`expr`] parses and evaluates the expressions defining a problem,
//! * [`quadrature`] holds the trapezoidal rule and its cumulative form,
//! * [`problem`] models the equation, the mesh, and the discrete Picard operator,
//! * [`solver`] runs the iteration schemes with a max-norm stopping rule.
//!
//! With the default `parallel` feature the per-point integral sums are mapped
//! over rayon's thread pool; results are identical to the sequential path bit
//! for bit because each point's sum is accumulated in the same order. The
//! [`serial`] module exposes the sequential kernels directly so benchmarks can
//! compare both within a single build.

pub mod expr;
pub mod problem;
pub mod quadrature;
pub mod solver;

mod exec;

/// Sequential versions of the data-parallel operations.
///
/// These run exactly the arithmetic of their counterparts in [`problem`] and
/// [`solver`] on the calling thread, without rayon. They exist so benchmarks
/// and downstream code can compare or pin the single-threaded path even when
/// the `parallel` feature is enabled.
pub mod serial {
    use crate::exec::ExecMode;
    use crate::problem::{GridFunction, Mesh, VolterraProblem};
    use crate::solver::{SolveResult, SolverConfig, SolverError};

    /// Sequential [`crate::problem::picard_apply`].
    pub fn picard_apply(p: &VolterraProblem, mesh: &Mesh, u: &GridFunction) -> GridFunction {
        crate::problem::picard_apply_mode(ExecMode::Sequential, p, mesh, u)
    }

    /// Sequential [`crate::solver::sam_step`].
    pub fn sam_step(p: &VolterraProblem, mesh: &Mesh, u: &GridFunction) -> GridFunction {
        picard_apply(p, mesh, u)
    }

    /// Sequential [`crate::solver::vim_step`].
    pub fn vim_step(p: &VolterraProblem, mesh: &Mesh, u: &GridFunction) -> GridFunction {
        crate::solver::vim_step_mode(ExecMode::Sequential, p, mesh, u)
    }

    /// Sequential [`crate::solver::solve`].
    pub fn solve(p: &VolterraProblem, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
        crate::solver::solve_mode(ExecMode::Sequential, p, cfg)
    }
}
