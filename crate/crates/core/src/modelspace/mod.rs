//! Rotationally symmetric model spaces `[0, Λ) ×_w S^{m-1}`.
//!
//! Every quantity is a one-dimensional integral of the warping function.
//! Space forms use closed forms wherever one is available and numerically
//! stable; custom warps always go through adaptive quadrature.

mod asymptotics;
pub mod quad;
mod warp;

use serde::Serialize;

pub use asymptotics::{CheegerBound, LimsupEstimate, Parabolicity, ParabolicityVerdict, Trend};
pub use quad::{Integral, QuadratureConfig};
pub use warp::{WarpKind, WarpingSpec};

use crate::wexpr::{EvalError, ParseError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid warping function: {0}")]
    InvalidWarp(String),
    #[error("model dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("radius {r} outside the model domain [0, {limit})")]
    OutOfDomain { r: f64, limit: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid radius grid: {0}")]
    BadGrid(String),
    #[error("quadrature did not converge (value {value}, error estimate {error_estimate:e})")]
    QuadratureNotConverged { value: f64, error_estimate: f64 },
    #[error("integrand is not finite at {at}")]
    NonFiniteIntegrand { at: f64 },
    #[error("operation needs an unbounded model (Λ = {0})")]
    BoundedModel(f64),
}

/// Strictly increasing list of positive radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusGrid(Vec<f64>);

impl RadiusGrid {
    pub fn new(points: Vec<f64>) -> Result<Self, ModelError> {
        if points.is_empty() {
            return Err(ModelError::BadGrid("grid is empty".into()));
        }
        if points.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(ModelError::BadGrid("radii must be positive and finite".into()));
        }
        if points.windows(2).any(|p| p[1] <= p[0]) {
            return Err(ModelError::BadGrid("radii must be strictly increasing".into()));
        }
        Ok(RadiusGrid(points))
    }

    /// `n` equally spaced radii from `a` to `b` inclusive.
    pub fn linspace(a: f64, b: f64, n: usize) -> Result<Self, ModelError> {
        match n {
            0 => Err(ModelError::BadGrid("grid is empty".into())),
            1 => Self::new(vec![a]),
            _ => Self::new((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
        }
    }

    /// Parses `a:b:n`.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || ModelError::BadGrid(format!("expected a:b:n, got `{text}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        Self::linspace(a, b, n)
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.0.last().expect("grid is never empty")
    }
}

/// Measure of the unit sphere `S^{m-1}`: `2 π^{m/2} / Γ(m/2)`.
pub fn unit_sphere_measure(m: usize) -> f64 {
    use std::f64::consts::PI;
    // Γ(m/2) via Γ(1) = 1, Γ(1/2) = √π and Γ(x + 1) = x Γ(x)
    let (mut gamma, mut x) = if m.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while x + 1e-9 < m as f64 / 2.0 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(m as f64 / 2.0) / gamma
}

/// Outcome of the balance conditions on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    /// `q_w η_w ≥ 1/m` everywhere on the grid.
    pub below: bool,
    /// `q_w η_w ≤ 1/(m-1)` everywhere on the grid.
    pub above: bool,
    /// Smallest `q_w η_w - 1/m` and where it occurs.
    pub worst_below_margin: f64,
    pub worst_below_at: f64,
    /// Smallest `1/(m-1) - q_w η_w` and where it occurs.
    pub worst_above_margin: f64,
    pub worst_above_at: f64,
}

const BALANCE_SLACK: f64 = 1e-12;
const ETA_SERIES_BELOW: f64 = 1e-8;

/// The model space `M^m_w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpace {
    dim: usize,
    warp: WarpingSpec,
    v0: f64,
}

impl ModelSpace {
    pub fn new(dim: usize, warp: WarpingSpec) -> Result<Self, ModelError> {
        if dim < 2 {
            return Err(ModelError::InvalidDimension(dim));
        }
        Ok(ModelSpace { dim, warp, v0: unit_sphere_measure(dim) })
    }

    pub fn euclidean(dim: usize) -> Result<Self, ModelError> {
        Self::new(dim, WarpingSpec::euclidean())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn warp(&self) -> &WarpingSpec {
        &self.warp
    }

    /// Unit-sphere measure `V_0`.
    pub fn v0(&self) -> f64 {
        self.v0
    }

    fn fiber_power(&self) -> i32 {
        self.dim as i32 - 1
    }

    fn space_form_scale(&self) -> Option<(f64, f64)> {
        self.warp.curvature().map(|b| (b, b.abs().sqrt()))
    }

    fn require_domain(&self, r: f64) -> Result<(), ModelError> {
        if r >= 0.0 && r < self.warp.limit() {
            Ok(())
        } else {
            Err(ModelError::OutOfDomain { r, limit: self.warp.limit() })
        }
    }

    /// Mean curvature `w'/w` of the distance sphere of radius `r`.
    pub fn eta(&self, r: f64) -> Result<f64, ModelError> {
        if !(r > 0.0) {
            return Err(ModelError::OutOfDomain { r, limit: self.warp.limit() });
        }
        self.require_domain(r)?;
        if r < ETA_SERIES_BELOW {
            // w = r + w''(0) r²/2 + O(r³) gives w'/w = 1/r + w''(0)/2 + O(r)
            return Ok(1.0 / r + 0.5 * self.warp.d2w(0.0)?);
        }
        Ok(self.warp.dw(r)? / self.warp.w(r)?)
    }

    /// `Vol(S^w_r) = V_0 w(r)^{m-1}`.
    pub fn vol_sphere(&self, r: f64) -> Result<f64, ModelError> {
        self.require_domain(r)?;
        Ok(self.v0 * self.warp.w(r)?.powi(self.fiber_power()))
    }

    /// `∫_0^r w^{m-1}`.
    pub fn fiber_integral(&self, r: f64, q: &QuadratureConfig) -> Result<f64, ModelError> {
        self.require_domain(r)?;
        if r == 0.0 {
            return Ok(0.0);
        }
        let n = self.fiber_power();
        if let Some((b, k)) = self.space_form_scale() {
            if b == 0.0 {
                return Ok(r.powi(n + 1) / (n + 1) as f64);
            }
            let x = k * r;
            let closed = match n {
                1 => {
                    let h = if b < 0.0 { (0.5 * x).sinh() } else { (0.5 * x).sin() };
                    Some(2.0 * h * h)
                }
                // the reduction formula cancels badly for small arguments
                _ if x >= 0.5 => Some(if b < 0.0 { sinh_power_integral(n, x) } else { sin_power_integral(n, x) }),
                _ => None,
            };
            if let Some(c) = closed {
                return Ok(c / k.powi(n + 1));
            }
        }
        let warp = &self.warp;
        Ok(quad::integrate(|s| Ok(warp.w(s)?.powi(n)), 0.0, r, q)?.value)
    }

    /// `Vol(B^w_r) = V_0 ∫_0^r w^{m-1}`.
    pub fn vol_ball(&self, r: f64, q: &QuadratureConfig) -> Result<f64, ModelError> {
        Ok(self.v0 * self.fiber_integral(r, q)?)
    }

    /// Isoperimetric quotient `q_w(r) = Vol(B^w_r)/Vol(S^w_r)`, with `q_w(0) = 0`.
    pub fn iso_quotient(&self, r: f64, q: &QuadratureConfig) -> Result<f64, ModelError> {
        self.require_domain(r)?;
        if r == 0.0 {
            return Ok(0.0);
        }
        if r < ETA_SERIES_BELOW {
            return Ok(r / self.dim as f64);
        }
        Ok(self.fiber_integral(r, q)? / self.warp.w(r)?.powi(self.fiber_power()))
    }

    /// Evaluates `q_w η_w` on the grid against `1/m` and `1/(m-1)`.
    pub fn balance_check(&self, grid: &RadiusGrid, q: &QuadratureConfig) -> Result<BalanceReport, ModelError> {
        let lower = 1.0 / self.dim as f64;
        let upper = 1.0 / (self.dim as f64 - 1.0);
        let mut report = BalanceReport {
            below: true,
            above: true,
            worst_below_margin: f64::INFINITY,
            worst_below_at: grid.points()[0],
            worst_above_margin: f64::INFINITY,
            worst_above_at: grid.points()[0],
        };
        for &r in grid.points() {
            let value = self.iso_quotient(r, q)? * self.eta(r)?;
            let below_margin = value - lower;
            let above_margin = upper - value;
            if below_margin < report.worst_below_margin {
                report.worst_below_margin = below_margin;
                report.worst_below_at = r;
            }
            if above_margin < report.worst_above_margin {
                report.worst_above_margin = above_margin;
                report.worst_above_at = r;
            }
        }
        report.below = report.worst_below_margin >= -BALANCE_SLACK;
        report.above = report.worst_above_margin >= -BALANCE_SLACK;
        Ok(report)
    }

    /// `∫_a^b ds / Vol(S^w_s)` for `0 < a ≤ b < Λ`.
    pub fn inverse_area_integral(&self, a: f64, b: f64, q: &QuadratureConfig) -> Result<f64, ModelError> {
        if !(a > 0.0 && a <= b) {
            return Err(ModelError::InvalidArgument(format!("need 0 < a <= b, got a={a}, b={b}")));
        }
        self.require_domain(b)?;
        if a == b {
            return Ok(0.0);
        }
        let n = self.fiber_power();
        if let Some((curv, k)) = self.space_form_scale() {
            let closed = if curv == 0.0 {
                Some(if n == 1 { (b / a).ln() } else { (a.powi(1 - n) - b.powi(1 - n)) / (n - 1) as f64 })
            } else if curv < 0.0 {
                match n {
                    1 => Some(log_tanh_half(k * b) - log_tanh_half(k * a)),
                    2 => Some(k * (coth_minus_one(k * a) - coth_minus_one(k * b))),
                    _ => None,
                }
            } else {
                match n {
                    1 => Some(((0.5 * k * b).tan() / (0.5 * k * a).tan()).ln()),
                    2 => Some(k * (1.0 / (k * a).tan() - 1.0 / (k * b).tan())),
                    _ => None,
                }
            };
            if let Some(c) = closed {
                return Ok(c / self.v0);
            }
        }
        let v0 = self.v0;
        let warp = &self.warp;
        Ok(quad::integrate(|s| Ok(1.0 / (v0 * warp.w(s)?.powi(n))), a, b, q)?.value)
    }

    /// `∫_t^∞ ds / Vol(S^w_s)`; infinite when the integral diverges in closed form.
    pub fn inverse_area_tail(&self, t: f64, q: &QuadratureConfig) -> Result<f64, ModelError> {
        if self.warp.limit().is_finite() {
            return Err(ModelError::BoundedModel(self.warp.limit()));
        }
        if !(t > 0.0) {
            return Err(ModelError::InvalidArgument(format!("tail start must be positive, got {t}")));
        }
        let n = self.fiber_power();
        if let Some((curv, k)) = self.space_form_scale() {
            let closed = if curv == 0.0 {
                Some(if n == 1 { f64::INFINITY } else { t.powi(1 - n) / (n - 1) as f64 })
            } else {
                match n {
                    1 => Some(-log_tanh_half(k * t)),
                    2 => Some(k * coth_minus_one(k * t)),
                    _ => None,
                }
            };
            if let Some(c) = closed {
                return Ok(c / self.v0);
            }
        }
        let v0 = self.v0;
        let warp = &self.warp;
        Ok(quad::integrate_to_infinity(|s| Ok(1.0 / (v0 * warp.w(s)?.powi(n))), t, q)?.value)
    }

    /// Capacity of the model annulus `A^w_{ρ,R}`: `(∫_ρ^R ds/Vol(S^w_s))^{-1}`.
    pub fn capacity_model(&self, rho: f64, big_r: f64, q: &QuadratureConfig) -> Result<f64, ModelError> {
        if !(rho > 0.0 && rho < big_r) {
            return Err(ModelError::InvalidArgument(format!("need 0 < rho < R, got rho={rho}, R={big_r}")));
        }
        Ok(1.0 / self.inverse_area_integral(rho, big_r, q)?)
    }

    /// Radial harmonic potential of the annulus, 0 at `ρ` and 1 at `R`.
    pub fn potential_model(&self, rho: f64, big_r: f64, t: f64, q: &QuadratureConfig) -> Result<f64, ModelError> {
        if !(rho > 0.0 && rho < big_r) {
            return Err(ModelError::InvalidArgument(format!("need 0 < rho < R, got rho={rho}, R={big_r}")));
        }
        if !(t >= rho && t <= big_r) {
            return Err(ModelError::InvalidArgument(format!("t={t} outside [{rho}, {big_r}]")));
        }
        if t == rho {
            return Ok(0.0);
        }
        if t == big_r {
            return Ok(1.0);
        }
        let total = self.inverse_area_integral(rho, big_r, q)?;
        Ok((self.inverse_area_integral(rho, t, q)? / total).clamp(0.0, 1.0))
    }

    /// Mean exit time `E^w_R(r) = ∫_r^R q_w` of the model ball of radius `R`.
    pub fn mean_exit_model(&self, big_r: f64, r: f64, q: &QuadratureConfig) -> Result<f64, ModelError> {
        if !(r >= 0.0 && r <= big_r) {
            return Err(ModelError::InvalidArgument(format!("need 0 <= r <= R, got r={r}, R={big_r}")));
        }
        self.require_domain(big_r)?;
        if r == big_r {
            return Ok(0.0);
        }
        if self.warp.curvature() == Some(0.0) {
            return Ok((big_r * big_r - r * r) / (2.0 * self.dim as f64));
        }
        Ok(quad::integrate(|t| self.iso_quotient(t, q), r, big_r, q)?.value)
    }

    /// `q_w(s) ≤ s` on the grid.
    pub fn check_q_linear_bound(&self, grid: &RadiusGrid, q: &QuadratureConfig) -> Result<bool, ModelError> {
        for &s in grid.points() {
            if self.iso_quotient(s, q)? > s + 1e-12 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `w' ≥ 0` at every grid point.
    pub fn is_nondecreasing_on(&self, grid: &RadiusGrid) -> Result<bool, ModelError> {
        for &r in grid.points() {
            if self.warp.dw(r)? < 0.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Largest radial curvature `-w''/w` over the grid.
    pub fn max_radial_curvature(&self, grid: &RadiusGrid) -> Result<f64, ModelError> {
        grid.points().iter().try_fold(f64::NEG_INFINITY, |acc, &r| Ok(acc.max(self.warp.radial_curvature(r)?)))
    }

    /// Smallest radial curvature `-w''/w` over the grid.
    pub fn min_radial_curvature(&self, grid: &RadiusGrid) -> Result<f64, ModelError> {
        grid.points().iter().try_fold(f64::INFINITY, |acc, &r| Ok(acc.min(self.warp.radial_curvature(r)?)))
    }

    /// Largest tangential curvature `(1 - w'^2)/w^2` over the grid. Diagnostic only.
    pub fn max_tangential_curvature(&self, grid: &RadiusGrid) -> Result<f64, ModelError> {
        grid.points().iter().try_fold(f64::NEG_INFINITY, |acc, &r| {
            let (w, dw) = (self.warp.w(r)?, self.warp.dw(r)?);
            Ok(acc.max((1.0 - dw * dw) / (w * w)))
        })
    }
}

/// `∫_0^x sinh^n`, by the reduction `S_n = sinh^{n-1} cosh / n - (n-1)/n S_{n-2}`.
fn sinh_power_integral(n: i32, x: f64) -> f64 {
    match n {
        0 => x,
        1 => x.cosh() - 1.0,
        _ => {
            let nf = n as f64;
            x.sinh().powi(n - 1) * x.cosh() / nf - (nf - 1.0) / nf * sinh_power_integral(n - 2, x)
        }
    }
}

/// `∫_0^x sin^n`, by the reduction `C_n = -sin^{n-1} cos / n + (n-1)/n C_{n-2}`.
fn sin_power_integral(n: i32, x: f64) -> f64 {
    match n {
        0 => x,
        1 => 1.0 - x.cos(),
        _ => {
            let nf = n as f64;
            -x.sin().powi(n - 1) * x.cos() / nf + (nf - 1.0) / nf * sin_power_integral(n - 2, x)
        }
    }
}

/// `ln tanh(x/2)` without cancellation for large `x`.
fn log_tanh_half(x: f64) -> f64 {
    let e = (-x).exp();
    (-e).ln_1p() - e.ln_1p()
}

/// `coth(x) - 1 = 2 e^{-2x} / (1 - e^{-2x})`.
fn coth_minus_one(x: f64) -> f64 {
    2.0 * (-2.0 * x).exp() / -(-2.0 * x).exp_m1()
}

#[cfg(test)]
mod tests;
