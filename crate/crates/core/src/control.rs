//! The two feedback laws and the instantaneous profit.
//!
//! The optimal law saturates the affine rule `βλ + 1` at the admissible
//! bounds. The myopic (liquidity-constrained) law additionally forces the
//! instantaneous profit `u(1 − u/2) − x` to stay nonnegative whenever that is
//! possible at all, i.e. while `x ≤ 1/2`.

use crate::error::{Error, Result};

/// Which feedback rule drives the production rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlKind {
    Optimal,
    Myopic,
}

/// A feedback law together with the impact ratio it responds to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlLaw {
    pub kind: ControlKind,
    pub beta: f64,
}

impl ControlLaw {
    pub fn optimal(beta: f64) -> Result<Self> {
        Self::new(ControlKind::Optimal, beta)
    }

    pub fn myopic(beta: f64) -> Result<Self> {
        Self::new(ControlKind::Myopic, beta)
    }

    pub fn new(kind: ControlKind, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid("beta", format!("must be > 0, got {beta}")));
        }
        Ok(ControlLaw { kind, beta })
    }

    /// Control value for the current adjoint and state.
    pub fn evaluate(&self, lambda: f64, x: f64) -> f64 {
        match self.kind {
            ControlKind::Optimal => optimal_control(lambda, self.beta),
            ControlKind::Myopic => myopic_control(lambda, x, self.beta),
        }
    }
}

/// Saturated optimal control: `0` below `λ = −1/β`, `1` above `λ = 0`,
/// affine `βλ + 1` in between. The upper branch is unreachable along the
/// periodic adjoint (it never turns positive) but is kept for totality.
pub fn optimal_control(lambda: f64, beta: f64) -> f64 {
    if lambda < -1.0 / beta {
        0.0
    } else if lambda > 0.0 {
        1.0
    } else {
        (beta * lambda + 1.0).clamp(0.0, 1.0)
    }
}

/// Myopic control: the optimal rule with its lower bound raised from `0` to
/// the zero-profit boundary `1 − √(1 − 2x)` while `x ≤ 1/2`. Past `x = 1/2`
/// no control keeps the profit nonnegative and the rule pins at `1`.
pub fn myopic_control(lambda: f64, x: f64, beta: f64) -> f64 {
    if lambda > 0.0 || x > 0.5 {
        return 1.0;
    }
    // clamp absorbs roundoff when integration error pushes x past 1/2
    let floor = (1.0 - 2.0 * x).clamp(0.0, 1.0).sqrt();
    if -beta * lambda >= floor {
        1.0 - floor
    } else {
        (beta * lambda + 1.0).clamp(0.0, 1.0)
    }
}

/// Instantaneous profit `u(1 − u/2) − x`.
pub fn instantaneous_profit(u: f64, x: f64) -> f64 {
    u * (1.0 - 0.5 * u) - x
}
