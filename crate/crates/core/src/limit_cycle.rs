//! The unique hybrid limit cycle of the optimal policy, located as the fixed
//! point of the period (Poincaré) map `S(x) = φ(T, x)`.
//!
//! `S` is affine in `x` with slope `e^{−(δ₁t_s + δ₂(T−t_s))} < 1`, so it is a
//! contraction; instead of iterating blindly from scratch the solver
//! identifies slope and intercept from two map evaluations, jumps to the
//! fixed point, and lets the plain iteration polish and certify it.

use std::io::{self, Write};

use serde::Serialize;

use crate::control::ControlLaw;
use crate::costate::CostateSolution;
use crate::dynamics::{advance, flow_map};
use crate::error::{Error, Result};
use crate::fmt::format_float;
use crate::model::ModelParams;

/// One point of the sampled cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleSample {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    pub lambda: f64,
}

/// The hybrid limit cycle: period-map fixed point plus one sampled period.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitCycle {
    /// Fixed point of the period map.
    pub x_eq: f64,
    /// Adjoint anchor at period starts.
    pub lambda_eq: f64,
    /// One period of `(t, x_h, u*, λ)` on a uniform grid including both
    /// endpoints.
    pub samples: Vec<CycleSample>,
    /// `|φ(T, x_eq) − x_eq|`, re-measured along the sampled walk.
    pub residual: f64,
}

/// Sidecar summary serialized next to the sampled cycle.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CycleSummary {
    pub x_eq: f64,
    pub lambda_eq: f64,
    pub residual: f64,
    pub contraction_rate: f64,
}

impl LimitCycle {
    pub fn summary(&self, params: &ModelParams) -> CycleSummary {
        CycleSummary {
            x_eq: self.x_eq,
            lambda_eq: self.lambda_eq,
            residual: self.residual,
            contraction_rate: contraction_rate(params),
        }
    }

    /// Writes `t,x_h,u,lambda` rows at full double precision.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x_h,u,lambda")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{},{},{}",
                format_float(s.t),
                format_float(s.x),
                format_float(s.u),
                format_float(s.lambda),
            )?;
        }
        Ok(())
    }
}

/// Exact one-period contraction factor `e^{−(δ₁t_s + δ₂(T−t_s))}` of the
/// period map.
pub fn contraction_rate(params: &ModelParams) -> f64 {
    (-(params.delta1 * params.t_s + params.delta2 * (params.period - params.t_s))).exp()
}

/// The period map `S(x) = φ(T, x)` under the optimal law.
pub fn poincare_map(params: &ModelParams, x: f64) -> Result<f64> {
    let law = ControlLaw::optimal(params.beta)?;
    flow_map(params, &law, x, params.period)
}

const FIXED_POINT_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 200;
/// Grid resolution of the sampled period.
const CYCLE_SAMPLES: usize = 500;

/// Locates the fixed point `x_eq = S(x_eq)` and samples one period from it.
pub fn find_x_eq(params: &ModelParams) -> Result<LimitCycle> {
    // two evaluations pin down the affine map; solving it is one Newton step
    let s0 = poincare_map(params, 0.0)?;
    let s1 = poincare_map(params, 1.0)?;
    let slope = s1 - s0;
    let mut x = if slope.abs() < 1.0 {
        (s0 / (1.0 - slope)).max(0.0)
    } else {
        0.0
    };

    let mut converged = false;
    let mut gap = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let mapped = poincare_map(params, x)?;
        gap = (mapped - x).abs();
        if gap < FIXED_POINT_TOL {
            converged = true;
            break;
        }
        x = mapped;
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            gap,
        });
    }

    let law = ControlLaw::optimal(params.beta)?;
    let sol = CostateSolution::new(params);
    let n = CYCLE_SAMPLES;
    let mut samples = Vec::with_capacity(n + 1);
    let mut state = x;
    let mut prev_t = 0.0;
    for k in 0..=n {
        let t = if k == n {
            params.period
        } else {
            k as f64 * params.period / n as f64
        };
        if k > 0 {
            state = advance(params, &law, &sol, state, prev_t, t);
        }
        let lambda = sol.lambda_at(t);
        samples.push(CycleSample {
            t,
            x: state,
            u: law.evaluate(lambda, state),
            lambda,
        });
        prev_t = t;
    }
    let residual = (state - x).abs();

    Ok(LimitCycle {
        x_eq: x,
        lambda_eq: sol.lambda_eq(),
        samples,
        residual,
    })
}

/// Distances `|φ(kT, x₀) − x_eq|` for `k = 1..=k_max`, obtained by iterating
/// the period map (the closed loop is T-periodic, so k applications of `S`
/// are exactly the flow over k periods).
pub fn convergence_envelope(
    params: &ModelParams,
    x0: f64,
    k_max: usize,
) -> Result<Vec<(usize, f64)>> {
    if !(x0.is_finite() && x0 >= 0.0) {
        return Err(Error::invalid("x0", format!("must be >= 0, got {x0}")));
    }
    if k_max < 1 {
        return Err(Error::invalid("k_max", format!("must be >= 1, got {k_max}")));
    }
    let cycle = find_x_eq(params)?;
    let mut out = Vec::with_capacity(k_max);
    let mut x = x0;
    for k in 1..=k_max {
        x = poincare_map(params, x)?;
        out.push((k, (x - cycle.x_eq).abs()));
    }
    Ok(out)
}
