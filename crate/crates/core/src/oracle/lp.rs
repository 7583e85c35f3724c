//! Small linear programs over `x >= 0`, solved with `microlp` and checked
//! against the original constraints before being reported optimal.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

/// Feasibility tolerance for reported solutions.
pub const LP_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coefficients: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Constraint {
            coefficients,
            relation,
            rhs,
        }
    }

    fn violation(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self.coefficients.iter().zip(x).map(|(a, b)| a * b).sum();
        match self.relation {
            Relation::Le => lhs - self.rhs,
            Relation::Ge => self.rhs - lhs,
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The solver gave up or its answer failed verification.
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Meaningful only when `status` is `Optimal`.
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    fn failed(status: LpStatus, n: usize) -> Self {
        LpSolution {
            status,
            x: vec![0.0; n],
            objective: f64::NAN,
        }
    }
}

/// Maximizes `objective · x` subject to `constraints` and `x >= 0`.
pub fn lp_solve(objective: &[f64], constraints: &[Constraint]) -> LpSolution {
    let n = objective.len();
    if objective.iter().any(|c| !c.is_finite())
        || constraints
            .iter()
            .any(|c| c.coefficients.len() != n || !c.rhs.is_finite() || c.coefficients.iter().any(|a| !a.is_finite()))
    {
        return LpSolution::failed(LpStatus::NumericalFailure, n);
    }
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = objective.iter().map(|&c| problem.add_var(c, (0.0, f64::INFINITY))).collect();
    for c in constraints {
        let expr: Vec<_> = vars
            .iter()
            .zip(&c.coefficients)
            .filter(|(_, a)| **a != 0.0)
            .map(|(v, a)| (*v, *a))
            .collect();
        let op = match c.relation {
            Relation::Le => ComparisonOp::Le,
            Relation::Ge => ComparisonOp::Ge,
            Relation::Eq => ComparisonOp::Eq,
        };
        problem.add_constraint(expr, op, c.rhs);
    }
    let solution = match problem.solve() {
        Ok(s) => s,
        Err(microlp::Error::Infeasible) => return LpSolution::failed(LpStatus::Infeasible, n),
        Err(microlp::Error::Unbounded) => return LpSolution::failed(LpStatus::Unbounded, n),
        Err(microlp::Error::InternalError(_)) => return LpSolution::failed(LpStatus::NumericalFailure, n),
    };
    let x: Vec<f64> = vars.iter().map(|&v| solution[v].max(0.0)).collect();
    let scale = 1.0 + constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
    if constraints.iter().any(|c| c.violation(&x) > LP_TOLERANCE * scale) {
        return LpSolution::failed(LpStatus::NumericalFailure, n);
    }
    let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpSolution {
        status: LpStatus::Optimal,
        x,
        objective: value,
    }
}
