//! Problem data: raw parameters, normalization to the dimensionless form,
//! and the periodic two-regime schedule of the self-cleaning rate.
//!
//! The raw problem controls an emission rate `v ∈ [0, b]` against a pollution
//! stock `z` with `ż = ξv − δ(t)z`, profit `a·v(b − v/2) − q·z` discounted at
//! rate `r`. Substituting `u = v/b`, `x = qz/(ab²)` turns it into the
//! dimensionless problem `ẋ = βu − δ(t)x` with `β = ξq/(ab)` and control
//! `u ∈ [0, 1]`. The self-cleaning rate alternates between `delta1` on
//! `[kT, kT + t_s)` and `delta2` on `[kT + t_s, (k+1)T)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unnormalized problem data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    /// Profit scale (currency per squared production rate).
    pub a: f64,
    /// Maximal admissible emission rate.
    pub b: f64,
    /// Ecotax rate (currency per unit of pollution stock).
    pub q: f64,
    /// Fraction of emissions accumulated in the reservoir, in (0, 1).
    pub xi: f64,
    /// Self-cleaning rate in the first regime.
    pub delta1: f64,
    /// Self-cleaning rate in the second regime.
    pub delta2: f64,
    /// Discount rate.
    pub r: f64,
    /// Initial pollution stock.
    pub z0: f64,
    /// Fraction of each period spent in the first regime, in (0, 1).
    pub alpha: f64,
    /// Regime period.
    #[serde(rename = "T", alias = "period")]
    pub period: f64,
}

impl RawParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("a", self.a)?;
        check_positive("b", self.b)?;
        check_positive("q", self.q)?;
        // xi = 1 (everything emitted accumulates) is the admissible closure
        if !(self.xi.is_finite() && self.xi > 0.0 && self.xi <= 1.0) {
            return Err(Error::invalid(
                "xi",
                format!("must lie in (0, 1], got {}", self.xi),
            ));
        }
        check_positive("delta1", self.delta1)?;
        check_positive("delta2", self.delta2)?;
        if self.delta1 == self.delta2 {
            return Err(Error::invalid(
                "delta2",
                format!("delta1 and delta2 must differ (both are {})", self.delta1),
            ));
        }
        check_positive("r", self.r)?;
        if !self.z0.is_finite() || self.z0 < 0.0 {
            return Err(Error::invalid("z0", format!("must be >= 0, got {}", self.z0)));
        }
        check_open_unit("alpha", self.alpha)?;
        check_positive("T", self.period)?;
        Ok(())
    }
}

/// Normalized (dimensionless) problem data plus the derived rates
/// `rho_i = r + delta_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// Impact ratio β = ξq/(ab).
    pub beta: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub r: f64,
    /// Switching time within each period, in (0, T).
    pub t_s: f64,
    /// Regime period T.
    #[serde(rename = "T")]
    pub period: f64,
    /// Initial normalized state.
    pub x0: f64,
    /// r + delta1, derived.
    pub rho1: f64,
    /// r + delta2, derived.
    pub rho2: f64,
}

impl ModelParams {
    /// Builds validated parameters; `rho1`/`rho2` are derived here and
    /// cannot drift out of sync with `r` and the deltas.
    pub fn new(
        beta: f64,
        delta1: f64,
        delta2: f64,
        r: f64,
        t_s: f64,
        period: f64,
        x0: f64,
    ) -> Result<Self> {
        check_positive("beta", beta)?;
        check_positive("delta1", delta1)?;
        check_positive("delta2", delta2)?;
        if delta1 == delta2 {
            return Err(Error::invalid(
                "delta2",
                format!("delta1 and delta2 must differ (both are {delta1})"),
            ));
        }
        check_positive("r", r)?;
        check_positive("T", period)?;
        if !t_s.is_finite() || t_s <= 0.0 || t_s >= period {
            return Err(Error::invalid(
                "t_s",
                format!("must lie strictly inside (0, {period}), got {t_s}"),
            ));
        }
        if !x0.is_finite() || x0 < 0.0 {
            return Err(Error::invalid("x0", format!("must be >= 0, got {x0}")));
        }
        Ok(ModelParams {
            beta,
            delta1,
            delta2,
            r,
            t_s,
            period,
            x0,
            rho1: r + delta1,
            rho2: r + delta2,
        })
    }

    pub fn schedule(&self) -> RegimeSchedule {
        RegimeSchedule {
            t_s: self.t_s,
            period: self.period,
            delta1: self.delta1,
            delta2: self.delta2,
        }
    }

    pub fn delta_min(&self) -> f64 {
        self.delta1.min(self.delta2)
    }
}

/// Normalizes the raw pollution problem: `u = v/b`, `x = qz/(ab²)`,
/// `β = ξq/(ab)`, `t_s = αT`. Time keeps its physical unit.
pub fn normalize(raw: &RawParams) -> Result<ModelParams> {
    raw.validate()?;
    let beta = raw.xi * raw.q / (raw.a * raw.b);
    let x0 = raw.q * raw.z0 / (raw.a * raw.b * raw.b);
    let t_s = raw.alpha * raw.period;
    ModelParams::new(beta, raw.delta1, raw.delta2, raw.r, t_s, raw.period, x0)
}

/// Which of the two regimes is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    First,
    Second,
}

impl Regime {
    pub fn index(self) -> usize {
        match self {
            Regime::First => 1,
            Regime::Second => 2,
        }
    }
}

/// The T-periodic two-regime schedule of the self-cleaning rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeSchedule {
    pub t_s: f64,
    pub period: f64,
    pub delta1: f64,
    pub delta2: f64,
}

/// A regime boundary: the segment starting at `t` runs under `regime`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentStart {
    pub t: f64,
    pub regime: Regime,
}

impl RegimeSchedule {
    /// Regime active at time `t >= 0`. Half-open convention: at `t mod T = t_s`
    /// exactly, the second regime has already begun.
    pub fn regime_at(&self, t: f64) -> Regime {
        let tau = t % self.period;
        if tau < self.t_s {
            Regime::First
        } else {
            Regime::Second
        }
    }

    pub fn delta_of(&self, regime: Regime) -> f64 {
        match regime {
            Regime::First => self.delta1,
            Regime::Second => self.delta2,
        }
    }

    /// Self-cleaning rate at time `t >= 0`.
    pub fn delta_at(&self, t: f64) -> f64 {
        self.delta_of(self.regime_at(t))
    }

    /// All regime boundaries `{0, t_s, T, T + t_s, ...}` up to and including
    /// the first one `>= horizon`, each tagged with the regime of the segment
    /// it starts. Boundary times are computed from integer multiples of the
    /// period, not accumulated, so they are reproducible.
    pub fn segment_boundaries(&self, horizon: f64) -> Vec<SegmentStart> {
        let mut out = Vec::new();
        let mut k: u64 = 0;
        loop {
            let base = k as f64 * self.period;
            for (t, regime) in [(base, Regime::First), (base + self.t_s, Regime::Second)] {
                out.push(SegmentStart { t, regime });
                if t >= horizon {
                    return out;
                }
            }
            k += 1;
        }
    }
}

fn check_positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be > 0, got {v}")))
    }
}

fn check_open_unit(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must lie in (0, 1), got {v}")))
    }
}

/// JSON configuration document. Exactly one of the two blocks must be present:
///
/// ```json
/// { "raw": { "a": 1.0, "b": 1.0, "q": 0.8, "xi": 1.0, "delta1": 0.5,
///            "delta2": 1.5, "r": 0.03, "z0": 0.0, "alpha": 0.5, "T": 1.0 } }
/// ```
///
/// or
///
/// ```json
/// { "normalized": { "beta": 0.8, "delta1": 0.5, "delta2": 1.5,
///                   "r": 0.03, "t_s": 0.5, "T": 1.0, "x0": 0.0 } }
/// ```
///
/// Fields of the `normalized` block may be omitted; the caller supplies
/// defaults for the missing ones.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub raw: Option<RawParams>,
    pub normalized: Option<NormalizedConfig>,
}

/// Partial normalized-parameter block of a [`ParamsConfig`].
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizedConfig {
    pub beta: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub r: Option<f64>,
    pub t_s: Option<f64>,
    #[serde(rename = "T", alias = "period")]
    pub period: Option<f64>,
    pub x0: Option<f64>,
}

impl ParamsConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ParamsConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate_shape()?;
        Ok(cfg)
    }

    fn validate_shape(&self) -> Result<()> {
        match (&self.raw, &self.normalized) {
            (Some(_), Some(_)) => Err(Error::Config(
                "exactly one of `raw` and `normalized` is required, got both".into(),
            )),
            (None, None) => Err(Error::Config(
                "exactly one of `raw` and `normalized` is required, got neither".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn base_raw() -> RawParams {
        RawParams {
            a: 1.0,
            b: 1.0,
            q: 0.8,
            xi: 1.0,
            delta1: 0.5,
            delta2: 1.5,
            r: 0.03,
            z0: 0.0,
            alpha: 0.5,
            period: 1.0,
        }
    }

    #[test]
    fn normalize_reference_case() {
        let p = normalize(&base_raw()).unwrap();
        assert_eq!(p.beta, 0.8);
        assert_eq!(p.x0, 0.0);
        assert_eq!(p.t_s, 0.5);
        assert_eq!(p.rho1, 0.53);
        assert_eq!(p.rho2, 1.53);
    }

    #[test]
    fn normalize_direct_arithmetic() {
        let raw = RawParams {
            a: 2.0,
            b: 3.0,
            q: 6.0,
            xi: 0.5,
            z0: 9.0,
            ..base_raw()
        };
        let p = normalize(&raw).unwrap();
        assert!((p.beta - 0.5).abs() < 1e-15);
        assert!((p.x0 - 3.0).abs() < 1e-15);
    }

    #[test]
    fn normalize_rejects_equal_deltas() {
        let raw = RawParams {
            xi: 0.5,
            delta1: 1.0,
            delta2: 1.0,
            ..base_raw()
        };
        let err = normalize(&raw).unwrap_err();
        match err {
            Error::InvalidParam { field, .. } => assert_eq!(field, "delta2"),
            other => panic!("expected InvalidParam, got {other:?}"),
        }
    }

    #[test]
    fn model_params_reject_bad_switch_time() {
        assert!(ModelParams::new(0.8, 0.5, 1.5, 0.03, 0.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(0.8, 0.5, 1.5, 0.03, 1.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(0.8, 0.5, 1.5, 0.03, 1.2, 1.0, 0.0).is_err());
    }

    fn base_schedule() -> RegimeSchedule {
        RegimeSchedule {
            t_s: 0.5,
            period: 1.0,
            delta1: 0.5,
            delta2: 1.5,
        }
    }

    #[test]
    fn delta_at_examples() {
        let s = base_schedule();
        assert_eq!(s.delta_at(0.25), 0.5);
        // half-open boundary: the switch instant already belongs to regime 2
        assert_eq!(s.delta_at(0.5), 1.5);
        assert_eq!(s.delta_at(7.8), 1.5);
    }

    #[test]
    fn delta_at_is_periodic() {
        let s = base_schedule();
        for &t in &[0.0, 0.1, 0.47, 0.5, 0.93] {
            for k in 0..=100u32 {
                assert_eq!(s.delta_at(t + k as f64 * s.period), s.delta_at(t), "t={t} k={k}");
            }
        }
    }

    #[test]
    fn segment_boundaries_examples() {
        let s = base_schedule();
        let got: Vec<(f64, usize)> = s
            .segment_boundaries(2.0)
            .iter()
            .map(|b| (b.t, b.regime.index()))
            .collect();
        assert_eq!(got, vec![(0.0, 1), (0.5, 2), (1.0, 1), (1.5, 2), (2.0, 1)]);

        let s = RegimeSchedule { t_s: 0.2, ..base_schedule() };
        let got: Vec<(f64, usize)> = s
            .segment_boundaries(1.0)
            .iter()
            .map(|b| (b.t, b.regime.index()))
            .collect();
        assert_eq!(got, vec![(0.0, 1), (0.2, 2), (1.0, 1)]);

        // horizon between boundaries: list ends at the first boundary >= horizon
        let s = RegimeSchedule { t_s: 0.5, period: 2.0, delta1: 0.5, delta2: 1.5 };
        let got: Vec<(f64, usize)> = s
            .segment_boundaries(3.0)
            .iter()
            .map(|b| (b.t, b.regime.index()))
            .collect();
        assert_eq!(got, vec![(0.0, 1), (0.5, 2), (2.0, 1), (2.5, 2), (4.0, 1)]);
    }

    #[test]
    fn segment_gaps_alternate() {
        for &(t_s, period) in &[(0.5, 1.0), (0.2, 1.0), (0.7, 2.5)] {
            let s = RegimeSchedule { t_s, period, delta1: 0.5, delta2: 1.5 };
            let bounds = s.segment_boundaries(10.0 * period);
            for pair in bounds.windows(2) {
                let gap = pair[1].t - pair[0].t;
                let expect = match pair[0].regime {
                    Regime::First => t_s,
                    Regime::Second => period - t_s,
                };
                assert!((gap - expect).abs() < 1e-12, "gap {gap} vs {expect}");
            }
        }
    }

    #[test]
    fn config_requires_exactly_one_block() {
        assert!(ParamsConfig::from_json(r#"{}"#).is_err());
        let both = r#"{"raw": {"a":1,"b":1,"q":0.8,"xi":0.5,"delta1":0.5,"delta2":1.5,"r":0.03,"z0":0,"alpha":0.5,"T":1},
                       "normalized": {"beta": 0.8}}"#;
        assert!(ParamsConfig::from_json(both).is_err());
        let ok = r#"{"normalized": {"beta": 0.8, "t_s": 0.5}}"#;
        let cfg = ParamsConfig::from_json(ok).unwrap();
        assert_eq!(cfg.normalized.unwrap().beta, Some(0.8));
    }

    #[test]
    fn config_parses_raw_block() {
        let text = r#"{"raw": {"a":1,"b":1,"q":0.8,"xi":1,"delta1":0.5,"delta2":1.5,"r":0.03,"z0":0,"alpha":0.5,"T":1}}"#;
        let cfg = ParamsConfig::from_json(text).unwrap();
        let p = normalize(&cfg.raw.unwrap()).unwrap();
        assert_eq!(p.beta, 0.8);
    }

    proptest! {
        // scaling (a, q) by a common factor leaves the dimensionless problem alone
        #[test]
        fn normalize_scale_consistency(c in 1e-3f64..1e3) {
            let base = RawParams { z0: 2.0, ..base_raw() };
            let scaled = RawParams { a: base.a * c, q: base.q * c, ..base };
            let p0 = normalize(&base).unwrap();
            let p1 = normalize(&scaled).unwrap();
            prop_assert!((p0.beta - p1.beta).abs() <= 1e-12 * p0.beta.abs());
            prop_assert!((p0.x0 - p1.x0).abs() <= 1e-12 * p0.x0.abs());
        }
    }
}
