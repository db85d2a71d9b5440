//! Optimal pollution control under periodic regime shifts.
//!
//! A polluting producer maximizes discounted profit `∫ e^{−rt}(u(1 − u/2) − x)dt`
//! subject to `ẋ = βu − δ(t)x`, where the environment's self-cleaning rate
//! `δ(t)` alternates between two values within each period (think seasons).
//! The adjoint of this problem decouples from the state and admits a closed
//! form, the optimal feedback is an affine saturation of it, and the closed
//! loop converges to a unique hybrid limit cycle. This crate provides:
//!
//! * [`model`] — raw and normalized problem data, the regime schedule;
//! * [`costate`] — the closed-form bounded periodic adjoint;
//! * [`control`] — the optimal and myopic (profit-floor) feedback laws;
//! * [`dynamics`] — aligned fixed-step integration, payoff accumulation, and
//!   the exact flow map;
//! * [`limit_cycle`] — the period-map fixed point and its contraction
//!   certificate;
//! * [`sustainability`] — exact and sufficient conditions for the optimal
//!   control to stay interior, plus region scans.

pub mod control;
pub mod costate;
pub mod dynamics;
mod error;
pub mod fmt;
pub mod limit_cycle;
pub mod model;
mod quad;
pub mod sustainability;

pub use control::{instantaneous_profit, myopic_control, optimal_control, ControlKind, ControlLaw};
pub use costate::{lambda_eq, CostateSolution};
pub use dynamics::{
    discount_tail_bound, flow_map, integrate, integrate_with, IntegratorConfig, Trajectory,
};
pub use error::{Error, Result};
pub use limit_cycle::{
    contraction_rate, convergence_envelope, find_x_eq, poincare_map, CycleSample, CycleSummary,
    LimitCycle,
};
pub use model::{
    normalize, ModelParams, NormalizedConfig, ParamsConfig, RawParams, Regime, RegimeSchedule,
    SegmentStart,
};
pub use sustainability::{
    check_sustainable, check_sustainable_raw, corollary_raw, lemma3_sufficient, region_grid,
    saturation_lhs, RegionCell, RegionGrid, SaturationCase, SustainabilityReport,
};
