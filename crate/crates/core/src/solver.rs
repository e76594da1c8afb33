//! The two iteration schemes and the fixed-point driver.
//!
//! Both schemes iterate on grid functions over the same mesh and stop when
//! `max_i |u_i^(k+1) - u_i^(k)|` drops below the configured tolerance:
//!
//! * [`sam_step`] is one application of the discrete Picard operator,
//!   `u <- f + integral of K F(u)`.
//! * [`vim_step`] corrects the Picard iterate `v` with a multiplier term,
//!   `u <- v + integral 0..x of L'(t) (v(t) - u(t)) dt`, where
//!   `L'(t) = exp(integral t..x of K(s,s) F'(u(s)) ds) * K(t,t) F'(u(t))`.
//!
//! The exponent is a difference of prefix integrals (see
//! [`multiplier_exponent`]); each pair `(i, j)` exponentiates the difference
//! directly rather than forming `exp(E_i) / exp(E_j)`, so large prefixes do
//! not overflow prematurely. When `F'` is identically zero the multiplier
//! term vanishes and a VIM step reproduces the SAM step bit for bit.
//!
//! Both schemes converge to the same discrete fixed point `u = f + K F(u)`;
//! the multiplier version usually needs far fewer iterations.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::exec::{self, ExecMode};
use crate::problem::{picard_apply_mode, sample, GridFunction, Mesh, VolterraProblem};
use crate::quadrature;

/// Which iteration scheme to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Successive approximation (Picard iteration).
    Sam,
    /// Variational iteration with the exponential multiplier.
    Vim,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Sam => write!(f, "sam"),
            Method::Vim => write!(f, "vim"),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Method, String> {
        match s.to_ascii_lowercase().as_str() {
            "sam" => Ok(Method::Sam),
            "vim" => Ok(Method::Vim),
            other => Err(format!("unknown method `{other}` (expected sam or vim)")),
        }
    }
}

/// Iteration parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Subinterval count of the mesh.
    pub n: usize,
    /// Stopping tolerance on the max-norm difference of successive iterates.
    pub epsilon: f64,
    /// Iteration cap.
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            method: Method::Sam,
            n: 30,
            epsilon: 1e-5,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("subinterval count n must be at least 1")]
    InvalidSubintervals,
    #[error("stopping tolerance must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("iteration cap must be at least 1")]
    InvalidMaxIter,
}

/// Outcome of a [`solve`] run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// The final iterate.
    pub solution: GridFunction,
    /// Per-iteration errors `e_k = max_i |u_i^(k) - u_i^(k-1)|`, one entry
    /// per step taken.
    pub trace: Vec<f64>,
    /// Number of steps taken; equals `trace.len()`.
    pub iterations: usize,
    /// The last trace entry fell below the tolerance.
    pub converged: bool,
    /// A step produced a non-finite value; reported separately from plain
    /// non-convergence.
    pub diverged: bool,
}

/// One step of the successive approximation method. Identical to
/// [`crate::problem::picard_apply`]; the value at `x_0` stays `f(0)` on every
/// step because the degenerate integral is zero.
pub fn sam_step(p: &VolterraProblem, mesh: &Mesh, u: &GridFunction) -> GridFunction {
    picard_apply_mode(ExecMode::default_mode(), p, mesh, u)
}

// g_j = K(x_j, x_j) * F'(u_j) and its prefix integrals, shared by
// `multiplier_exponent` and `vim_step`.
fn exponent_data(p: &VolterraProblem, mesh: &Mesh, u: &GridFunction) -> (Vec<f64>, Vec<f64>) {
    let xs = mesh.points();
    let g: Vec<f64> = u
        .values()
        .iter()
        .enumerate()
        .map(|(j, &uj)| {
            let k = p
                .kernel()
                .eval(&[("x", xs[j]), ("t", xs[j])])
                .expect("problem invariant: K uses only x and t");
            let fp = p
                .nonlinearity_deriv()
                .eval(&[("y", uj)])
                .expect("problem invariant: F_prime uses only y");
            k * fp
        })
        .collect();
    let prefix = quadrature::cumulative_trapezoid(&g, mesh.h());
    (g, prefix)
}

/// Prefix integrals `E_i` of `g(t) = K(t,t) F'(u(t))` over the mesh.
///
/// The multiplier exponent over `[x_j, x_i]` is recovered as `E_i - E_j`;
/// the multiplier itself, `-exp(E_i - E_j)`, is never materialized as a
/// whole function.
///
/// # Panics
///
/// Panics when `u` does not match the mesh.
pub fn multiplier_exponent(p: &VolterraProblem, mesh: &Mesh, u: &GridFunction) -> GridFunction {
    assert_eq!(u.len(), mesh.len(), "grid function does not match the mesh");
    let (_, prefix) = exponent_data(p, mesh, u);
    GridFunction::new(prefix)
}

/// One step of the variational iteration scheme.
///
/// Computes the Picard iterate `v`, then adds the correction
/// `c_i = trapezoid over j=0..=i of exp(E_i - E_j) g_j (v_j - u_j)`.
///
/// # Panics
///
/// Panics when `u` does not match the mesh.
pub fn vim_step(p: &VolterraProblem, mesh: &Mesh, u: &GridFunction) -> GridFunction {
    vim_step_mode(ExecMode::default_mode(), p, mesh, u)
}

pub(crate) fn vim_step_mode(
    mode: ExecMode,
    p: &VolterraProblem,
    mesh: &Mesh,
    u: &GridFunction,
) -> GridFunction {
    assert_eq!(u.len(), mesh.len(), "grid function does not match the mesh");
    let h = mesh.h();
    let v = picard_apply_mode(mode, p, mesh, u);
    let (g, prefix) = exponent_data(p, mesh, u);
    let diff: Vec<f64> = v
        .values()
        .iter()
        .zip(u.values())
        .map(|(vj, uj)| vj - uj)
        .collect();
    let values = exec::map_grid(mode, mesh.len(), |i| {
        let mut row = Vec::with_capacity(i + 1);
        for j in 0..=i {
            row.push((prefix[i] - prefix[j]).exp() * g[j] * diff[j]);
        }
        v.values()[i] + quadrature::trapezoid(&row, h)
    });
    GridFunction::new(values)
}

/// `max_i |u_i - v_i|`, the stopping quantity. Non-finite differences
/// propagate as infinity but NaN entries are ignored by the fold; divergence
/// is detected separately via [`GridFunction::is_finite`].
///
/// # Panics
///
/// Panics when the grid functions have different lengths.
pub fn max_abs_diff(u: &GridFunction, v: &GridFunction) -> f64 {
    assert_eq!(u.len(), v.len(), "grid functions live on different meshes");
    u.values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Runs the configured iteration from `u0 = f` sampled on the mesh.
///
/// After each step the trace records `e_k`; iteration stops as soon as
/// `e_k < epsilon` (converged), a non-finite value appears (diverged), or
/// `max_iter` steps have run (neither flag set).
pub fn solve(p: &VolterraProblem, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
    solve_mode(ExecMode::default_mode(), p, cfg)
}

pub(crate) fn solve_mode(
    mode: ExecMode,
    p: &VolterraProblem,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    if cfg.n == 0 {
        return Err(SolverError::InvalidSubintervals);
    }
    if !(cfg.epsilon.is_finite() && cfg.epsilon > 0.0) {
        return Err(SolverError::InvalidEpsilon(cfg.epsilon));
    }
    if cfg.max_iter == 0 {
        return Err(SolverError::InvalidMaxIter);
    }
    let mesh = Mesh::new(p.x_end(), cfg.n).expect("endpoint and n already validated");
    let mut current = sample(p.forcing(), &mesh).expect("problem invariant: f uses only x");
    let mut trace = Vec::new();
    let mut converged = false;
    let mut diverged = false;
    for _ in 0..cfg.max_iter {
        let next = match cfg.method {
            Method::Sam => picard_apply_mode(mode, p, &mesh, &current),
            Method::Vim => vim_step_mode(mode, p, &mesh, &current),
        };
        let e = max_abs_diff(&next, &current);
        trace.push(e);
        current = next;
        if !current.is_finite() {
            diverged = true;
            break;
        }
        if e < cfg.epsilon {
            converged = true;
            break;
        }
    }
    Ok(SolveResult {
        solution: current,
        iterations: trace.len(),
        trace,
        converged,
        diverged,
    })
}

/// `max_i |solution_i - exact(x_i)|`, or `None` when the problem has no
/// recorded exact solution.
pub fn error_vs_exact(r: &SolveResult, p: &VolterraProblem, mesh: &Mesh) -> Option<f64> {
    let exact = p.exact()?;
    let exact_values = sample(exact, mesh).expect("problem invariant: exact uses only x");
    Some(max_abs_diff(&r.solution, &exact_values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::builtin_problem;

    fn linear_problem() -> VolterraProblem {
        VolterraProblem::from_parts("1", "1", "y", "1", 1.0, None).unwrap()
    }

    #[test]
    fn first_sam_error_for_example1() {
        let p = builtin_problem("example1").unwrap();
        let mesh = Mesh::new(p.x_end(), 30).unwrap();
        let u0 = sample(p.forcing(), &mesh).unwrap();
        let u1 = sam_step(&p, &mesh, &u0);
        let e1 = max_abs_diff(&u1, &u0);
        assert!((e1 - 5.200451).abs() < 1e-3, "e1 = {e1}");
    }

    #[test]
    fn sam_step_with_zero_kernel_is_the_identity_on_f() {
        let p = VolterraProblem::from_parts("cos(x)", "0", "y^2", "2*y", 2.0, None).unwrap();
        let mesh = Mesh::new(2.0, 10).unwrap();
        let u0 = sample(p.forcing(), &mesh).unwrap();
        let u1 = sam_step(&p, &mesh, &u0);
        assert_eq!(u1.values(), u0.values());
    }

    #[test]
    fn sam_step_on_the_linear_problem() {
        let p = linear_problem();
        let mesh = Mesh::new(1.0, 2).unwrap();
        let u = GridFunction::new(vec![1.0, 1.0, 1.0]);
        assert_eq!(sam_step(&p, &mesh, &u).values(), &[1.0, 1.5, 2.0]);
    }

    #[test]
    fn exponent_prefix_of_a_constant_integrand() {
        // K = 1 and F' = 1 make g identically one, so the prefix integrals
        // are the grid points themselves.
        let p = linear_problem();
        let mesh = Mesh::new(1.0, 2).unwrap();
        let u = GridFunction::new(vec![7.0, -3.0, 0.5]);
        let e = multiplier_exponent(&p, &mesh, &u);
        assert_eq!(e.values(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn exponent_prefix_vanishes_without_nonlinearity_derivative() {
        let p = VolterraProblem::from_parts("1", "1", "y", "0", 1.0, None).unwrap();
        let mesh = Mesh::new(1.0, 4).unwrap();
        let u = GridFunction::new(vec![1.0; 5]);
        let e = multiplier_exponent(&p, &mesh, &u);
        assert_eq!(e.values(), &[0.0; 5]);
    }

    #[test]
    fn vim_step_hand_computed() {
        // Linear problem, u == 1 on [0, 1] with h = 0.5: the Picard iterate
        // is [1, 1.5, 2], the difference [0, 0.5, 1], the exponent prefix
        // [0, 0.5, 1]. The corrections follow by one trapezoid each.
        let p = linear_problem();
        let mesh = Mesh::new(1.0, 2).unwrap();
        let u = GridFunction::new(vec![1.0, 1.0, 1.0]);
        let got = vim_step(&p, &mesh, &u);

        let c1 = 0.5 * (0.5 * (0.5f64.exp() * 0.0) + 0.5 * (1.0 * 0.5));
        let row = [1.0f64.exp() * 0.0, 0.5f64.exp() * 0.5, 1.0];
        let c2 = 0.5 * (0.5 * row[0] + row[1] + 0.5 * row[2]);
        assert_eq!(c1, 0.125);
        assert!((c2 - 0.6621805).abs() < 1e-6);

        assert_eq!(got.values()[0], 1.0);
        assert_eq!(got.values()[1], 1.5 + c1);
        assert!((got.values()[2] - (2.0 + c2)).abs() < 1e-15);
        // One multiplier-corrected step already lands near the true value
        // e = 2.71828 of the continuous solution at x = 1, while the plain
        // Picard iterate is still at 2.
        assert!((got.values()[2] - std::f64::consts::E).abs() < 0.06);
    }

    #[test]
    fn vim_step_with_zero_derivative_matches_sam_bitwise() {
        let p = VolterraProblem::from_parts("sin(x) + 1", "x - t", "y^2", "0", 2.0, None).unwrap();
        let mesh = Mesh::new(2.0, 16).unwrap();
        let u = sample(p.forcing(), &mesh).unwrap();
        let sam = sam_step(&p, &mesh, &u);
        let vim = vim_step(&p, &mesh, &u);
        for (a, b) in sam.values().iter().zip(vim.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn max_abs_diff_basics() {
        let u = GridFunction::new(vec![0.0, 1.0]);
        assert_eq!(max_abs_diff(&u, &u), 0.0);
        let v = GridFunction::new(vec![0.0, -2.0]);
        assert_eq!(max_abs_diff(&u, &v), 3.0);
    }

    #[test]
    #[should_panic(expected = "different meshes")]
    fn max_abs_diff_rejects_mismatched_lengths() {
        let u = GridFunction::new(vec![0.0, 1.0]);
        let v = GridFunction::new(vec![0.0]);
        max_abs_diff(&u, &v);
    }

    #[test]
    fn example1_converges_in_15_sam_iterations() {
        let p = builtin_problem("example1").unwrap();
        let cfg = SolverConfig {
            method: Method::Sam,
            n: 30,
            epsilon: 1e-5,
            max_iter: 100,
        };
        let r = solve(&p, &cfg).unwrap();
        assert!(r.converged);
        assert!(!r.diverged);
        assert_eq!(r.iterations, 15);
        assert_eq!(r.trace.len(), 15);
        assert!(*r.trace.last().unwrap() < 1e-5);
    }

    #[test]
    fn example1_converges_in_6_vim_iterations() {
        let p = builtin_problem("example1").unwrap();
        let cfg = SolverConfig {
            method: Method::Vim,
            n: 30,
            epsilon: 1e-5,
            max_iter: 100,
        };
        let r = solve(&p, &cfg).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 6);
        assert!((r.trace[0] - 0.986121).abs() < 0.05, "e1 = {}", r.trace[0]);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let p = builtin_problem("example1").unwrap();
        let cfg = SolverConfig {
            method: Method::Sam,
            n: 30,
            epsilon: 1e-5,
            max_iter: 1,
        };
        let r = solve(&p, &cfg).unwrap();
        assert!(!r.converged);
        assert!(!r.diverged);
        assert_eq!(r.trace.len(), 1);
    }

    #[test]
    fn blowup_is_reported_as_divergence() {
        // Forcing of order exp(10x) cubed repeatedly overflows quickly.
        let p = VolterraProblem::from_parts("exp(10*x)", "1", "y^3", "3*y^2", 5.0, None).unwrap();
        let cfg = SolverConfig {
            method: Method::Sam,
            n: 20,
            epsilon: 1e-5,
            max_iter: 50,
        };
        let r = solve(&p, &cfg).unwrap();
        assert!(r.diverged);
        assert!(!r.converged);
        assert!(r.iterations < 50);
    }

    #[test]
    fn solve_validates_the_config() {
        let p = linear_problem();
        let bad_n = SolverConfig {
            n: 0,
            ..SolverConfig::default()
        };
        assert_eq!(solve(&p, &bad_n), Err(SolverError::InvalidSubintervals));
        let bad_eps = SolverConfig {
            epsilon: 0.0,
            ..SolverConfig::default()
        };
        assert_eq!(solve(&p, &bad_eps), Err(SolverError::InvalidEpsilon(0.0)));
        let bad_cap = SolverConfig {
            max_iter: 0,
            ..SolverConfig::default()
        };
        assert_eq!(solve(&p, &bad_cap), Err(SolverError::InvalidMaxIter));
    }

    #[test]
    fn exact_forcing_with_zero_kernel_solves_exactly() {
        let p =
            VolterraProblem::from_parts("exp(x)", "0", "y", "1", 1.0, Some("exp(x)")).unwrap();
        let cfg = SolverConfig::default();
        let r = solve(&p, &cfg).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        let mesh = Mesh::new(p.x_end(), cfg.n).unwrap();
        let err = error_vs_exact(&r, &p, &mesh).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn error_vs_exact_is_none_without_exact_solution() {
        let p = linear_problem();
        let cfg = SolverConfig::default();
        let r = solve(&p, &cfg).unwrap();
        let mesh = Mesh::new(p.x_end(), cfg.n).unwrap();
        assert_eq!(error_vs_exact(&r, &p, &mesh), None);
    }

    #[test]
    fn vim_step_leaves_the_sam_fixed_point_in_place() {
        let p = builtin_problem("example1").unwrap();
        let cfg = SolverConfig {
            method: Method::Sam,
            n: 30,
            epsilon: 1e-5,
            max_iter: 100,
        };
        let r = solve(&p, &cfg).unwrap();
        assert!(r.converged);
        let mesh = Mesh::new(p.x_end(), cfg.n).unwrap();
        let moved = vim_step(&p, &mesh, &r.solution);
        assert!(max_abs_diff(&moved, &r.solution) <= 10.0 * cfg.epsilon);
    }

    #[test]
    fn method_parses_from_text() {
        assert_eq!("sam".parse::<Method>(), Ok(Method::Sam));
        assert_eq!("VIM".parse::<Method>(), Ok(Method::Vim));
        assert!("newton".parse::<Method>().is_err());
    }
}
