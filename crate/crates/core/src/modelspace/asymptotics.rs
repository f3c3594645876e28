//! Model-side limits. None of these is a symbolic limit: they are finite-grid
//! estimates with an explicit trend diagnostic.

use serde::Serialize;

use super::{ModelError, ModelSpace, QuadratureConfig, RadiusGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParabolicityVerdict {
    Parabolic,
    Hyperbolic,
    Inconclusive,
}

/// Evidence gathered by the tail probe of `∫^∞ ds/Vol(S^w_s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parabolicity {
    pub verdict: ParabolicityVerdict,
    /// Probe radii `1, 10, 100, …`.
    pub ladder: Vec<f64>,
    /// `∫_{T_{k-1}}^{T_k} ds/Vol(S^w_s)`.
    pub increments: Vec<f64>,
    /// Successive increment ratios.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    /// Relative change over the last tenth of the grid below 1e-6.
    Stable,
    Increasing,
    Decreasing,
    /// Monotonically increasing by more than 1% over the last tenth.
    Divergent,
}

pub const LIMSUP_NOTE: &str = "estimate at finite t, not a proven limit";

/// Sampled quantity and its reported upper limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimsupEstimate {
    pub samples: Vec<(f64, f64)>,
    /// Maximum over the last tenth of the samples; infinite when divergent.
    pub reported_limsup: f64,
    pub trend: Trend,
    pub note: &'static str,
    /// Set when a hypothesis of the quantity failed on the grid.
    pub warning: Option<String>,
}

impl LimsupEstimate {
    pub fn from_samples(samples: Vec<(f64, f64)>) -> Self {
        let n = samples.len();
        let tail_len = n.div_ceil(10).max(2).min(n);
        let tail = &samples[n - tail_len..];
        let reported = tail.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        let first = tail[0].1;
        let last = tail[tail_len - 1].1;
        let monotone_up = tail.windows(2).all(|w| w[1].1 >= w[0].1);
        let rel = if first.abs() > 0.0 { (last - first) / first.abs() } else if last == 0.0 { 0.0 } else { f64::INFINITY };
        let trend = if tail_len < 2 || rel.abs() <= 1e-6 {
            Trend::Stable
        } else if rel > 1e-2 && monotone_up {
            Trend::Divergent
        } else if rel > 0.0 {
            Trend::Increasing
        } else {
            Trend::Decreasing
        };
        let reported_limsup = if trend == Trend::Divergent { f64::INFINITY } else { reported };
        LimsupEstimate { samples, reported_limsup, trend, note: LIMSUP_NOTE, warning: None }
    }

    pub fn is_divergent(&self) -> bool {
        self.trend == Trend::Divergent
    }
}

/// Cheeger-type lower bound `1/(4L²)` with `L = sup q_w`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheegerBound {
    /// Supremum of `q_w` over the grid (infinite when unbounded).
    pub sup_q: f64,
    pub lower_bound: f64,
    /// `q_w` still increasing at the end of the grid: `sup_q` underestimates
    /// `L` and `lower_bound` overestimates the true bound.
    pub still_increasing: bool,
    pub unbounded: bool,
}

const GEOMETRIC_DECAY: f64 = 0.5;

impl ModelSpace {
    /// Classifies the model as parabolic or hyperbolic from the decay of
    /// `∫_{T_{k-1}}^{T_k} ds/Vol(S^w_s)` along `T = 1, 10, …, t_max`.
    pub fn parabolicity_test(&self, q: &QuadratureConfig) -> Result<Parabolicity, ModelError> {
        q.validate()?;
        if self.warp().limit().is_finite() {
            return Err(ModelError::BoundedModel(self.warp().limit()));
        }
        let mut ladder = vec![1.0];
        while *ladder.last().unwrap() * 10.0 <= q.t_max * (1.0 + 1e-12) {
            let next = ladder.last().unwrap() * 10.0;
            ladder.push(next);
        }
        let increments = ladder
            .windows(2)
            .map(|w| self.inverse_area_integral(w[0], w[1], q))
            .collect::<Result<Vec<_>, _>>()?;
        let ratios: Vec<f64> = increments
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
            .collect();
        // increments decaying like 1/k (harmonic) or slower keep the sum divergent
        let parabolic = ratios.iter().enumerate().all(|(i, &r)| {
            let k = (i + 1) as f64;
            r >= k / (k + 1.0)
        });
        let geometric_mean = if ratios.iter().any(|&r| r <= 0.0) {
            0.0
        } else {
            (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp()
        };
        let verdict = if ratios.is_empty() {
            ParabolicityVerdict::Inconclusive
        } else if parabolic {
            ParabolicityVerdict::Parabolic
        } else if geometric_mean < GEOMETRIC_DECAY {
            ParabolicityVerdict::Hyperbolic
        } else {
            ParabolicityVerdict::Inconclusive
        };
        Ok(Parabolicity { verdict, ladder, increments, ratios })
    }

    /// Samples `1/(Vol(B^w_t) ∫_t^∞ ds/Vol(S^w_s))`. Identically zero unless the
    /// model is hyperbolic.
    pub fn tone_upper_limit(&self, grid: &RadiusGrid, q: &QuadratureConfig) -> Result<LimsupEstimate, ModelError> {
        let verdict = self.parabolicity_test(q)?.verdict;
        if verdict != ParabolicityVerdict::Hyperbolic {
            let mut est = LimsupEstimate::from_samples(grid.points().iter().map(|&t| (t, 0.0)).collect());
            est.warning = Some(format!("tail integral treated as divergent ({verdict:?})"));
            return Ok(est);
        }
        let samples = grid
            .points()
            .iter()
            .map(|&t| {
                let denom = self.vol_ball(t, q)? * self.inverse_area_tail(t, q)?;
                Ok((t, 1.0 / denom))
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Ok(LimsupEstimate::from_samples(samples))
    }

    /// `L = sup q_w` over the grid and the bound `1/(4L²)`.
    pub fn cheeger_bound(&self, grid: &RadiusGrid, q: &QuadratureConfig) -> Result<CheegerBound, ModelError> {
        let samples = grid
            .points()
            .iter()
            .map(|&t| Ok((t, self.iso_quotient(t, q)?)))
            .collect::<Result<Vec<_>, ModelError>>()?;
        let sup = samples.iter().map(|s| s.1).fold(0.0, f64::max);
        let est = LimsupEstimate::from_samples(samples);
        let unbounded = est.is_divergent();
        let still_increasing = matches!(est.trend, super::Trend::Increasing);
        let (sup_q, lower_bound) = if unbounded || sup <= 0.0 {
            (f64::INFINITY, 0.0)
        } else {
            (sup, 1.0 / (4.0 * sup * sup))
        };
        Ok(CheegerBound { sup_q, lower_bound, still_increasing, unbounded })
    }

    /// Samples `m ∫_0^t w^{m-1} / t^m`, whose upper limit is `C_w`.
    pub fn ends_coefficient(&self, grid: &RadiusGrid, q: &QuadratureConfig) -> Result<LimsupEstimate, ModelError> {
        let m = self.dim() as f64;
        let samples = grid
            .points()
            .iter()
            .map(|&t| Ok((t, m * self.fiber_integral(t, q)? / t.powi(self.dim() as i32))))
            .collect::<Result<Vec<_>, ModelError>>()?;
        let mut est = LimsupEstimate::from_samples(samples);
        if !self.is_nondecreasing_on(grid)? {
            est.warning = Some("w' < 0 somewhere on the grid".into());
        }
        Ok(est)
    }
}
