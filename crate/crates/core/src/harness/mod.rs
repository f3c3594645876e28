//! Turns model-space and mesh computations into quotient curves and checked
//! inequalities. Every check records both sides, its tolerance and a verdict;
//! a check whose hypotheses fail is reported inconclusive.
//!
//! The ambient space of every mesh is Euclidean `R³`, so the sectional
//! curvature bound `K_N ≤ -w''/w` reduces to `-w''/w ≥ 0`.

mod curves;
mod report;
mod suite;
mod theorems;

use thiserror::Error;

pub use curves::{quotient_curves, verify_isoperimetric, volume_flux_tail, QuotientCurve};
pub use report::{Check, MeshInfo, Provenance, Relation, ToleranceMode, Verdict, VerificationReport};
pub use suite::{run_suite, SuiteOutcome, SuiteSpec, RIGIDITY_NOTE};
pub use theorems::{
    ends_bound, exit_time_comparison, tone_report, verify_capacity_sandwich, verify_euclidean_sandwich, EndsReport,
    ToneReport,
};

use crate::dgeom::{CgConfig, DgeomError, EigenConfig};
use crate::modelspace::{ModelError, ModelSpace, QuadratureConfig, RadiusGrid};
use crate::surfaces::{minimality_residual, TriMesh};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] DgeomError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Tolerances and solver settings shared by all checks.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnessConfig {
    pub quadrature: QuadratureConfig,
    pub cg: CgConfig,
    pub eigen: EigenConfig,
    /// Relative tolerance of `vol quotient ≤ flux quotient`.
    pub iso_tol: f64,
    /// Relative slack of monotonicity checks.
    pub mono_slack: f64,
    pub capacity_tol: f64,
    /// Exit-time tolerance as a fraction of `max E^w`.
    pub exit_tol: f64,
    pub tail_tol: f64,
    /// Largest relative change of the volume quotient over the last tenth of
    /// the grid that still counts as finite w-volume.
    pub tail_stability: f64,
    /// Minimality residual above which a mesh is not treated as minimal.
    pub minimality_tol: f64,
    /// Radii for model-side upper limits.
    pub model_grid: RadiusGrid,
    /// Samples per hypothesis gate.
    pub gate_samples: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            quadrature: QuadratureConfig::default(),
            cg: CgConfig::default(),
            eigen: EigenConfig::default(),
            iso_tol: 0.01,
            mono_slack: 0.01,
            capacity_tol: 0.03,
            exit_tol: 0.02,
            tail_tol: 0.02,
            tail_stability: 0.01,
            minimality_tol: 0.1,
            model_grid: RadiusGrid::linspace(0.5, 30.0, 60).expect("static grid"),
            gate_samples: 400,
        }
    }
}

/// Theorem hypotheses that can be checked by sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hypothesis {
    /// `q_w η_w ≥ 1/m` on `(0, upto]`.
    BalancedBelow,
    /// `w' ≥ 0`.
    NondecreasingWarp,
    /// `w' > 0`.
    IncreasingWarp,
    /// `0 = K_N ≤ -w''/w`.
    CurvatureBound,
    /// `-w''/w ≤ 0` on `[from, upto]`.
    NonpositiveModelCurvatureFrom(f64),
    /// The pole lies on the surface.
    PoleOnSurface,
    /// The mesh is a discrete minimal surface.
    Minimal,
}

/// Names of the hypotheses that fail on `(0, upto]`.
pub fn failed_hypotheses(
    needs: &[Hypothesis],
    model: &ModelSpace,
    mesh: Option<&TriMesh>,
    upto: f64,
    cfg: &HarnessConfig,
) -> Result<Vec<String>, HarnessError> {
    let limit = model.warp().limit();
    if !(upto > 0.0) {
        return Err(HarnessError::InvalidArgument(format!("gate radius {upto} must be positive")));
    }
    if upto >= limit {
        return Ok(vec![format!("radius {upto} outside the model domain [0, {limit})")]);
    }
    let n = cfg.gate_samples.max(2);
    let grid = RadiusGrid::linspace(upto / n as f64, upto, n)?;
    let mut failed = Vec::new();
    for need in needs {
        let ok = match *need {
            Hypothesis::BalancedBelow => model.balance_check(&grid, &cfg.quadrature)?.below,
            Hypothesis::NondecreasingWarp => model.is_nondecreasing_on(&grid)?,
            Hypothesis::IncreasingWarp => {
                let mut ok = true;
                for &r in grid.points() {
                    ok &= model.warp().dw(r)? > 0.0;
                }
                ok
            }
            Hypothesis::CurvatureBound => model.min_radial_curvature(&grid)? >= -1e-12,
            Hypothesis::NonpositiveModelCurvatureFrom(from) => {
                let tail: Vec<f64> = grid.points().iter().copied().filter(|&r| r >= from).collect();
                match RadiusGrid::new(tail) {
                    Ok(g) => model.max_radial_curvature(&g)? <= 1e-12,
                    Err(_) => true,
                }
            }
            Hypothesis::PoleOnSurface => mesh.is_some_and(|m| m.pole_distance() <= 1e-9 * upto.max(1.0)),
            Hypothesis::Minimal => mesh.is_some_and(|m| minimality_residual(m) <= cfg.minimality_tol),
        };
        if !ok {
            failed.push(describe(*need));
        }
    }
    Ok(failed)
}

fn describe(h: Hypothesis) -> String {
    match h {
        Hypothesis::BalancedBelow => "model balanced from below".into(),
        Hypothesis::NondecreasingWarp => "w' >= 0".into(),
        Hypothesis::IncreasingWarp => "w' > 0".into(),
        Hypothesis::CurvatureBound => "Euclidean curvature bound 0 <= -w''/w".into(),
        Hypothesis::NonpositiveModelCurvatureFrom(r) => format!("-w''/w <= 0 beyond R = {r}"),
        Hypothesis::PoleOnSurface => "pole lies on the surface".into(),
        Hypothesis::Minimal => "mesh is minimal".into(),
    }
}

fn require_surface_model(model: &ModelSpace) -> Result<(), HarnessError> {
    if model.dim() != 2 {
        return Err(HarnessError::InvalidArgument(format!(
            "meshes are surfaces; model dimension must be 2, got {}",
            model.dim()
        )));
    }
    Ok(())
}
