//! The equation model, the uniform mesh, and the discrete Picard operator.
//!
//! A [`VolterraProblem`] holds the data of one equation
//! `y(x) = f(x) + integral 0..x of K(x,t) F(y(t)) dt`: the forcing term `f`,
//! the kernel `K`, the nonlinearity `F` with its derivative `F'`, the right
//! endpoint, and optionally a known exact solution for error reporting. `F'`
//! is supplied by the caller; there is no symbolic differentiation here.
//!
//! Discretization lives on a uniform [`Mesh`] over `[0, x_f]`. Grid samples
//! of a function are a [`GridFunction`]; [`picard_apply`] maps an iterate `u`
//! to `f + integral of K F(u)` with the trapezoidal rule, which is one step
//! of the successive approximation method.

use std::str::FromStr;

use thiserror::Error;

use crate::exec::{self, ExecMode};
use crate::expr::{self, EvalError, Expression, ParseError};
use crate::quadrature;

/// Errors from problem construction, problem files, and mesh construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("invalid expression for `{field}`: {source}")]
    Expr {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error("`{field}` may only use the variable(s) {allowed}, found `{name}`")]
    WrongVariable {
        field: String,
        allowed: String,
        name: String,
    },
    #[error("right endpoint must be positive and finite, got {0}")]
    InvalidEndpoint(f64),
    #[error("mesh needs at least one subinterval")]
    ZeroSubintervals,
    #[error("unknown builtin problem `{0}` (expected example1 or example2)")]
    UnknownProblem(String),
    #[error("problem file line {line}: expected `key=value`")]
    MalformedLine { line: usize },
    #[error("problem file line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("problem file line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("problem file is missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("`x_f` must be a constant expression: {0}")]
    EndpointNotConstant(String),
}

/// One nonlinear Volterra equation of the second kind.
#[derive(Debug, Clone)]
pub struct VolterraProblem {
    forcing: Expression,
    kernel: Expression,
    nonlinearity: Expression,
    nonlinearity_deriv: Expression,
    x_end: f64,
    exact: Option<Expression>,
}

impl VolterraProblem {
    /// Builds a problem from already-parsed expressions.
    ///
    /// The forcing term may only reference `x`, the kernel `x` and `t`, the
    /// nonlinearity and its derivative `y`, and the exact solution `x`.
    pub fn new(
        forcing: Expression,
        kernel: Expression,
        nonlinearity: Expression,
        nonlinearity_deriv: Expression,
        x_end: f64,
        exact: Option<Expression>,
    ) -> Result<VolterraProblem, ProblemError> {
        if !(x_end.is_finite() && x_end > 0.0) {
            return Err(ProblemError::InvalidEndpoint(x_end));
        }
        check_variables("f", &forcing, &["x"])?;
        check_variables("K", &kernel, &["x", "t"])?;
        check_variables("F", &nonlinearity, &["y"])?;
        check_variables("F_prime", &nonlinearity_deriv, &["y"])?;
        if let Some(e) = &exact {
            check_variables("exact", e, &["x"])?;
        }
        Ok(VolterraProblem {
            forcing,
            kernel,
            nonlinearity,
            nonlinearity_deriv,
            x_end,
            exact,
        })
    }

    /// Parses the five defining expressions from source text and builds the
    /// problem. `exact` is optional.
    pub fn from_parts(
        forcing: &str,
        kernel: &str,
        nonlinearity: &str,
        nonlinearity_deriv: &str,
        x_end: f64,
        exact: Option<&str>,
    ) -> Result<VolterraProblem, ProblemError> {
        let parse_field = |field: &str, src: &str, vars: &[&str]| {
            expr::parse(src, vars).map_err(|source| ProblemError::Expr {
                field: field.to_string(),
                source,
            })
        };
        let exact = match exact {
            Some(src) => Some(parse_field("exact", src, &["x"])?),
            None => None,
        };
        VolterraProblem::new(
            parse_field("f", forcing, &["x"])?,
            parse_field("K", kernel, &["x", "t"])?,
            parse_field("F", nonlinearity, &["y"])?,
            parse_field("F_prime", nonlinearity_deriv, &["y"])?,
            x_end,
            exact,
        )
    }

    pub fn forcing(&self) -> &Expression {
        &self.forcing
    }

    pub fn kernel(&self) -> &Expression {
        &self.kernel
    }

    pub fn nonlinearity(&self) -> &Expression {
        &self.nonlinearity
    }

    pub fn nonlinearity_deriv(&self) -> &Expression {
        &self.nonlinearity_deriv
    }

    pub fn x_end(&self) -> f64 {
        self.x_end
    }

    pub fn exact(&self) -> Option<&Expression> {
        self.exact.as_ref()
    }
}

fn check_variables(
    field: &str,
    expression: &Expression,
    allowed: &[&str],
) -> Result<(), ProblemError> {
    for name in expression.variables() {
        if !allowed.contains(&name) {
            return Err(ProblemError::WrongVariable {
                field: field.to_string(),
                allowed: allowed.join(", "),
                name: name.to_string(),
            });
        }
    }
    Ok(())
}

impl FromStr for VolterraProblem {
    type Err = ProblemError;

    /// Parses the flat `key=value` problem file format.
    ///
    /// Recognized keys: `f`, `K`, `F`, `F_prime`, `x_f`, and optionally
    /// `exact`. Values are expression strings; `x_f` must evaluate to a
    /// constant (so `x_f = pi` works). Blank lines and lines starting with
    /// `#` are ignored; keys and values are whitespace-trimmed.
    fn from_str(text: &str) -> Result<VolterraProblem, ProblemError> {
        const KEYS: [&str; 6] = ["f", "K", "F", "F_prime", "x_f", "exact"];
        let mut entries: [Option<String>; 6] = Default::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or(ProblemError::MalformedLine { line })?;
            let key = key.trim();
            let value = value.trim();
            let slot = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| ProblemError::UnknownKey {
                    line,
                    key: key.to_string(),
                })?;
            if entries[slot].is_some() {
                return Err(ProblemError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
            entries[slot] = Some(value.to_string());
        }
        let required = |slot: usize, key: &'static str| {
            entries[slot].clone().ok_or(ProblemError::MissingKey(key))
        };
        let x_end_src = required(4, "x_f")?;
        let x_end = parse_constant(&x_end_src)?;
        VolterraProblem::from_parts(
            &required(0, "f")?,
            &required(1, "K")?,
            &required(2, "F")?,
            &required(3, "F_prime")?,
            x_end,
            entries[5].as_deref(),
        )
    }
}

/// Evaluates a variable-free expression such as `pi` or `1e-5`.
pub fn parse_constant(source: &str) -> Result<f64, ProblemError> {
    let e = expr::parse(source, &[])
        .map_err(|err| ProblemError::EndpointNotConstant(err.to_string()))?;
    e.eval(&[])
        .map_err(|err| ProblemError::EndpointNotConstant(err.to_string()))
}

/// The two worked examples shipped with the solver.
///
/// `example1` is `y = cos x - sin(2x)/4 - x/2 + integral of y^2` on `[0, pi]`
/// with solution `cos x`; `example2` is
/// `y = e^x - x e^{3x}/3 + x/3 + integral of x y^3` on `[0, 1]` with solution
/// `e^x`.
pub fn builtin_problem(name: &str) -> Result<VolterraProblem, ProblemError> {
    match name {
        "example1" => VolterraProblem::from_parts(
            "cos(x) - 0.25*sin(2*x) - 0.5*x",
            "1",
            "y^2",
            "2*y",
            std::f64::consts::PI,
            Some("cos(x)"),
        ),
        "example2" => VolterraProblem::from_parts(
            "exp(x) - (1/3)*x*exp(3*x) + x/3",
            "x",
            "y^3",
            "3*y^2",
            1.0,
            Some("exp(x)"),
        ),
        other => Err(ProblemError::UnknownProblem(other.to_string())),
    }
}

/// A uniform grid `x_i = i*h`, `i = 0..=n`, with `h = x_f/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    n: usize,
    h: f64,
    points: Vec<f64>,
}

impl Mesh {
    /// Builds the mesh over `[0, x_end]` with `n` subintervals (`n+1` points).
    pub fn new(x_end: f64, n: usize) -> Result<Mesh, ProblemError> {
        if !(x_end.is_finite() && x_end > 0.0) {
            return Err(ProblemError::InvalidEndpoint(x_end));
        }
        if n == 0 {
            return Err(ProblemError::ZeroSubintervals);
        }
        let h = x_end / n as f64;
        let points = (0..=n).map(|i| i as f64 * h).collect();
        Ok(Mesh { n, h, points })
    }

    /// Number of subintervals.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid step.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// The `n+1` grid points.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of grid points (`n + 1`).
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Samples of a function on the points of a [`Mesh`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> GridFunction {
        GridFunction { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when every sample is finite. A non-finite sample marks a
    /// diverging iteration.
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl From<Vec<f64>> for GridFunction {
    fn from(values: Vec<f64>) -> GridFunction {
        GridFunction { values }
    }
}

/// Samples an expression in `x` at every mesh point.
pub fn sample(e: &Expression, mesh: &Mesh) -> Result<GridFunction, EvalError> {
    let mut values = Vec::with_capacity(mesh.len());
    for &x in mesh.points() {
        values.push(e.eval(&[("x", x)])?);
    }
    Ok(GridFunction::new(values))
}

/// One application of the discrete Picard operator:
/// `v_i = f(x_i) + trapezoid over j=0..=i of K(x_i, x_j) F(u_j)`.
///
/// `v_0 = f(0)` since the integral over a degenerate interval is zero. The
/// value at `x_i` depends only on `u_0..=u_i`.
///
/// # Panics
///
/// Panics when `u` does not match the mesh.
pub fn picard_apply(p: &VolterraProblem, mesh: &Mesh, u: &GridFunction) -> GridFunction {
    picard_apply_mode(ExecMode::default_mode(), p, mesh, u)
}

pub(crate) fn picard_apply_mode(
    mode: ExecMode,
    p: &VolterraProblem,
    mesh: &Mesh,
    u: &GridFunction,
) -> GridFunction {
    assert_eq!(u.len(), mesh.len(), "grid function does not match the mesh");
    let xs = mesh.points();
    let h = mesh.h();
    // F(u_j) does not depend on the target point, so it is evaluated once.
    let fu: Vec<f64> = u
        .values()
        .iter()
        .map(|&uj| {
            p.nonlinearity
                .eval(&[("y", uj)])
                .expect("problem invariant: F uses only y")
        })
        .collect();
    let values = exec::map_grid(mode, mesh.len(), |i| {
        let xi = xs[i];
        let fi = p
            .forcing
            .eval(&[("x", xi)])
            .expect("problem invariant: f uses only x");
        let mut row = Vec::with_capacity(i + 1);
        for (j, &fuj) in fu[..=i].iter().enumerate() {
            let k = p
                .kernel
                .eval(&[("x", xi), ("t", xs[j])])
                .expect("problem invariant: K uses only x and t");
            row.push(k * fuj);
        }
        fi + quadrature::trapezoid(&row, h)
    });
    GridFunction::new(values)
}
