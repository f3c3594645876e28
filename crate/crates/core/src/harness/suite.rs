use serde::Serialize;

use super::curves::{quotient_curves, verify_isoperimetric, volume_flux_tail, QuotientCurve};
use super::report::{Provenance, VerificationReport};
use super::theorems::{
    ends_bound, exit_time_comparison, tone_report, verify_capacity_sandwich, verify_euclidean_sandwich, EndsReport,
    ToneReport,
};
use super::{failed_hypotheses, HarnessConfig, HarnessError, Hypothesis};
use crate::modelspace::{ModelSpace, RadiusGrid};
use crate::surfaces::TriMesh;

/// Radii used by a full verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSpec {
    /// Quotient curve grid.
    pub grid: RadiusGrid,
    /// Annulus `A_{ρ,R}`; `R` is also the exit-time radius.
    pub rho: f64,
    pub big_r: f64,
    /// Ends are counted outside `D_{ends_r}` and bounded with `t = ends_t`.
    pub ends_r: f64,
    pub ends_t: f64,
    /// Radii of the discrete eigenvalue trend.
    pub tone_grid: RadiusGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub report: VerificationReport,
    pub curve: QuotientCurve,
    pub ends: EndsReport,
    pub tone: ToneReport,
}

pub const RIGIDITY_NOTE: &str =
    "equality in Cap(A)/Cap(A^w) <= J(R)/J^w(R) forces D_R to be a minimal cone; exact equality is not attainable on a mesh";

/// Every theorem check for one mesh and model, in a fixed order.
pub fn run_suite(
    mesh: &TriMesh,
    model: &ModelSpace,
    spec: &SuiteSpec,
    cfg: &HarnessConfig,
) -> Result<SuiteOutcome, HarnessError> {
    let prov = Provenance::new(Some(mesh), Some(model), cfg);
    let mut report = VerificationReport { not_testable: vec![RIGIDITY_NOTE.into()], ..Default::default() };

    let curve = quotient_curves(mesh, model, &spec.grid, None, cfg)?;
    let gates = failed_hypotheses(
        &[Hypothesis::Minimal, Hypothesis::CurvatureBound, Hypothesis::BalancedBelow],
        model,
        Some(mesh),
        spec.grid.last(),
        cfg,
    )?;
    report.extend(verify_isoperimetric(&curve, &prov, cfg).into_iter().map(|c| c.gated(&gates)));
    report.extend([volume_flux_tail(&curve, &prov, cfg).gated(&gates)]);
    report.extend(verify_capacity_sandwich(mesh, model, spec.rho, spec.big_r, cfg)?);
    report.extend(verify_euclidean_sandwich(mesh, spec.rho, spec.big_r, cfg)?);
    report.extend(exit_time_comparison(mesh, model, spec.big_r, cfg)?);
    let ends = ends_bound(mesh, model, spec.ends_r, spec.ends_t, cfg)?;
    report.extend(ends.checks());
    let tone = tone_report(Some(mesh), model, spec.ends_r, &spec.tone_grid, cfg)?;
    report.extend(tone.checks.iter().cloned());
    Ok(SuiteOutcome { report, curve, ends, tone })
}
