//! Closed-form evaluation of the unique bounded, T-periodic adjoint.
//!
//! Within each regime the adjoint obeys the scalar linear equation
//! `λ̇ = ρᵢ λ + 1` with `ρᵢ = r + δᵢ > 0`. Both rest points `−1/ρᵢ` are
//! unstable, so exactly one initial value `λ(0) = λ_eq` produces a bounded
//! (hence periodic) solution; every other choice blows up exponentially.
//! That periodic solution is evaluated here in closed form — no ODE stepping
//! on the production path.

use crate::model::ModelParams;

/// Anchor value `λ(0)` of the bounded periodic adjoint.
///
/// The closed form is usually stated for a unit period. Rescaling time by
/// `1/T` maps the general problem onto the unit-period one with rates `ρᵢT`
/// and switch fraction `t_s/T`, and the adjoint scales back by the factor `T`
/// (its unit is time: minus the discounted time-to-forgive of one marginal
/// unit of stock). Algebraically that is the same as replacing the exponent
/// `ρ₂(t_s − 1)` by `ρ₂(t_s − T)` below, which keeps `λ̇ = ρλ + 1` valid in
/// unscaled time for every `T`.
pub fn lambda_eq(params: &ModelParams) -> f64 {
    let (r1, r2) = (params.rho1, params.rho2);
    let a = (r1 * params.t_s).exp();
    let b = (r2 * (params.t_s - params.period)).exp();
    (r1 - r2 + r2 * a - r1 * b) / (r1 * r2 * (b - a))
}

/// The periodic adjoint, anchored at `lambda_eq` and evaluated piecewise.
#[derive(Debug, Clone, Copy)]
pub struct CostateSolution {
    params: ModelParams,
    lambda_eq: f64,
    lambda_switch: f64,
}

impl CostateSolution {
    pub fn new(params: &ModelParams) -> Self {
        let leq = lambda_eq(params);
        let lsw = segment_value(leq, params.rho1, params.t_s);
        CostateSolution {
            params: *params,
            lambda_eq: leq,
            lambda_switch: lsw,
        }
    }

    /// Adjoint value at period starts.
    pub fn lambda_eq(&self) -> f64 {
        self.lambda_eq
    }

    /// Adjoint value at the switching time within each period.
    pub fn lambda_switch(&self) -> f64 {
        self.lambda_switch
    }

    /// Evaluates `λ(t)` for any `t >= 0`. The argument is reduced modulo the
    /// period first, so exponents stay bounded by `max(ρ₁, ρ₂)·T`.
    pub fn lambda_at(&self, t: f64) -> f64 {
        let p = &self.params;
        let tau = t % p.period;
        if tau < p.t_s {
            segment_value(self.lambda_eq, p.rho1, tau)
        } else {
            segment_value(self.lambda_switch, p.rho2, tau - p.t_s)
        }
    }

    /// `(min, max)` of the adjoint over a period. The adjoint is monotone on
    /// each regime segment, so the extrema sit at the segment endpoints.
    pub fn extrema(&self) -> (f64, f64) {
        (
            self.lambda_eq.min(self.lambda_switch),
            self.lambda_eq.max(self.lambda_switch),
        )
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

/// Solution of `λ̇ = ρλ + 1` a time `dt` after the segment start value.
fn segment_value(lambda_start: f64, rho: f64, dt: f64) -> f64 {
    (lambda_start + 1.0 / rho) * (rho * dt).exp() - 1.0 / rho
}
