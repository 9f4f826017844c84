//! Variance-minimizing measures on a fixed support grid.
//!
//! Minimizes `w' G w` over weight vectors with unit total mass, where `G` is
//! the limit covariance on the support points. Signed weights are allowed by
//! default — unit mass is forced by consistency of the integral estimator,
//! while nonnegativity is a modeling choice surfaced as an optional
//! constraint. The unit-mass problem reduces to one ridge-stabilized linear
//! solve (with iterative refinement so the reported stationarity residual
//! reflects the unridged system); the nonnegative problem runs projected
//! gradient on the simplex from the uniform start with fixed step
//! `1/(2 lambda_max)`. Both are deterministic.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evt_core::TailGrid;
use crate::functionals::GridMeasure;
use crate::limit_gaussian::CovarianceKernel;

/// Stop projected gradient when the stationarity residual drops below this.
pub const KKT_TOLERANCE: f64 = 1e-8;

/// Projected-gradient iteration cap.
pub const MAX_PG_ITERATIONS: usize = 100_000;

/// Feasible weight class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MassConstraint {
    /// Signed weights summing to one.
    UnitMass,
    /// Nonnegative weights summing to one (simplex).
    UnitMassNonNegative,
}

/// A grid-scale variance minimization problem.
#[derive(Debug, Clone)]
pub struct OptimizationProblem {
    matrix: DMatrix<f64>,
    constraint: MassConstraint,
    ridge: f64,
    lambda_max: f64,
}

impl OptimizationProblem {
    /// The kernel matrix must be symmetric (within `1e-12` relative to its
    /// scale) and positive semidefinite (minimum eigenvalue `>= -1e-8`).
    pub fn new(matrix: DMatrix<f64>, constraint: MassConstraint, ridge: f64) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidInput(
                "kernel matrix must be square and nonempty".into(),
            ));
        }
        if !(ridge >= 0.0 && ridge.is_finite()) {
            return Err(Error::InvalidInput("ridge must be a nonnegative real".into()));
        }
        let scale = matrix.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..matrix.nrows() {
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidInput(format!(
                        "kernel matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let eigen = SymmetricEigen::new(matrix.clone());
        let lambda_min = eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let lambda_max = eigen
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        if lambda_min < -1e-8 {
            return Err(Error::InvalidInput(format!(
                "kernel matrix is not positive semidefinite (min eigenvalue {lambda_min})"
            )));
        }
        Ok(Self {
            matrix,
            constraint,
            ridge,
            lambda_max,
        })
    }

    /// Build the problem from a kernel on the grid points.
    pub fn from_kernel(
        kernel: &CovarianceKernel,
        grid: &TailGrid,
        constraint: MassConstraint,
    ) -> Result<Self> {
        Self::new(kernel.matrix(grid.points()), constraint, 1e-10)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn constraint(&self) -> MassConstraint {
        self.constraint
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Optimizer output: the measure, its variance, and a stationarity residual.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureOptimum {
    #[serde(flatten)]
    pub measure: GridMeasure,
    pub sigma2: f64,
    pub kkt_residual: f64,
}

fn objective(g: &DMatrix<f64>, w: &DVector<f64>) -> f64 {
    (w.transpose() * g * w)[(0, 0)]
}

/// Relative spread of the gradient `2 G w`: zero exactly at stationarity of
/// the equality-constrained problem.
fn gradient_spread(g: &DMatrix<f64>, w: &DVector<f64>) -> f64 {
    let grad = g * w * 2.0;
    let max = grad.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = grad.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = grad.iter().sum::<f64>() / grad.len() as f64;
    (max - min) / mean.abs().max(1e-300)
}

/// Simplex stationarity residual: active gradients must share the minimum.
fn simplex_residual(g: &DMatrix<f64>, w: &DVector<f64>) -> f64 {
    let grad = g * w * 2.0;
    let mu = grad.iter().cloned().fold(f64::INFINITY, f64::min);
    let worst = grad
        .iter()
        .zip(w.iter())
        .filter(|(_, &wi)| wi > 1e-14)
        .map(|(&gi, _)| gi - mu)
        .fold(0.0f64, f64::max);
    worst / mu.abs().max(1e-300)
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &DVector<f64>) -> DVector<f64> {
    let mut sorted: Vec<f64> = v.iter().copied().collect();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (j, &vj) in sorted.iter().enumerate() {
        cumulative += vj;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if vj - candidate > 0.0 {
            tau = candidate;
        }
    }
    v.map(|x| (x - tau).max(0.0))
}

fn solve_unit_mass(problem: &OptimizationProblem) -> Result<(DVector<f64>, f64)> {
    let g = &problem.matrix;
    let dim = problem.dim();
    let ones = DVector::from_element(dim, 1.0);
    let mut ridge = problem.ridge.max(f64::MIN_POSITIVE);
    for _attempt in 0..3 {
        let regularized = g + DMatrix::identity(dim, dim) * ridge;
        if let Some(chol) = regularized.cholesky() {
            let mut x = chol.solve(&ones);
            // Iterative refinement against the unridged matrix, so the
            // reported stationarity reflects the true problem.
            for _ in 0..8 {
                let residual = &ones - g * &x;
                let norm = residual.amax();
                if norm <= 1e-14 * x.amax().max(1.0) {
                    break;
                }
                x += chol.solve(&residual);
            }
            let mass: f64 = x.iter().sum();
            if mass.abs() < 1e-300 || !mass.is_finite() {
                return Err(Error::Singular(
                    "unit-mass system has no normalizable solution".into(),
                ));
            }
            let w = x / mass;
            let residual = gradient_spread(g, &w);
            return Ok((w, residual));
        }
        ridge *= 100.0;
    }
    Err(Error::Singular(format!(
        "kernel system stayed unfactorable up to ridge {ridge:e}"
    )))
}

fn solve_simplex(problem: &OptimizationProblem) -> (DVector<f64>, f64) {
    let g = &problem.matrix;
    let dim = problem.dim();
    let uniform = DVector::from_element(dim, 1.0 / dim as f64);
    if problem.lambda_max <= 0.0 {
        // Degenerate (essentially zero) kernel: everything is optimal.
        let r = simplex_residual(g, &uniform);
        return (uniform, r);
    }
    let step = 1.0 / (2.0 * problem.lambda_max);
    let mut w = uniform.clone();
    let mut residual = simplex_residual(g, &w);
    for _ in 0..MAX_PG_ITERATIONS {
        if residual < KKT_TOLERANCE {
            break;
        }
        let grad = g * &w * 2.0;
        w = project_simplex(&(&w - grad * step));
        residual = simplex_residual(g, &w);
    }
    // The uniform start is feasible; never return anything worse.
    if objective(g, &uniform) < objective(g, &w) {
        let r = simplex_residual(g, &uniform);
        (uniform, r)
    } else {
        (w, residual)
    }
}

/// Minimize `w' G w` subject to the problem's mass constraint; the support
/// grid labels the coordinates.
pub fn optimize_measure(
    problem: &OptimizationProblem,
    support: &TailGrid,
) -> Result<MeasureOptimum> {
    if support.len() != problem.dim() {
        return Err(Error::InvalidInput(format!(
            "support has {} points but the kernel matrix is {}x{}",
            support.len(),
            problem.dim(),
            problem.dim()
        )));
    }
    let (w, kkt_residual) = match problem.constraint {
        MassConstraint::UnitMass => solve_unit_mass(problem)?,
        MassConstraint::UnitMassNonNegative => {
            // If the unconstrained-sign optimum is already nonnegative it is
            // optimal over the simplex as well.
            match solve_unit_mass(problem) {
                Ok((w, r)) if w.iter().all(|&x| x >= 0.0) => (w, r),
                _ => solve_simplex(problem),
            }
        }
    };
    let sigma2 = objective(&problem.matrix, &w);
    let measure = GridMeasure::new(support.points().to_vec(), w.iter().copied().collect())?;
    Ok(MeasureOptimum {
        measure,
        sigma2,
        kkt_residual,
    })
}
