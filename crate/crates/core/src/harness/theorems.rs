use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::curves::quotient_curves;
use super::report::{Check, Provenance, Relation, ToleranceMode, Verdict};
use super::{failed_hypotheses, require_surface_model, HarnessConfig, HarnessError, Hypothesis};
use crate::dgeom::{
    capacity_discrete, clip, count_ends, exit_time_discrete, first_eigenvalue_estimate, flux, region_area, DgeomError,
    RegionLabel, TruncationPolicy,
};
use crate::modelspace::{ModelSpace, ParabolicityVerdict, RadiusGrid, Trend};
use crate::surfaces::TriMesh;

fn area_or_zero(mesh: &TriMesh, big_r: f64) -> Result<f64, HarnessError> {
    match region_area(&clip(mesh, 0.0, big_r)?, None) {
        Ok(a) => Ok(a),
        Err(DgeomError::EmptyRegion) => Ok(0.0),
        Err(e) => Err(e.into()),
    }
}

fn volume_quotient(mesh: &TriMesh, model: &ModelSpace, big_r: f64, cfg: &HarnessConfig) -> Result<f64, HarnessError> {
    Ok(area_or_zero(mesh, big_r)? / model.vol_ball(big_r, &cfg.quadrature)?)
}

fn flux_quotient(mesh: &TriMesh, model: &ModelSpace, big_r: f64) -> Result<f64, HarnessError> {
    Ok(flux(mesh, big_r, None)? / model.vol_sphere(big_r)?)
}

fn discrete_capacity(mesh: &TriMesh, rho: f64, big_r: f64, cfg: &HarnessConfig) -> Result<f64, HarnessError> {
    Ok(capacity_discrete(&clip(mesh, rho, big_r)?, TruncationPolicy::Error, &cfg.cg)?.capacity)
}

/// Flux quotients at the inner and outer radius bracket the capacity ratio.
pub fn verify_capacity_sandwich(
    mesh: &TriMesh,
    model: &ModelSpace,
    rho: f64,
    big_r: f64,
    cfg: &HarnessConfig,
) -> Result<Vec<Check>, HarnessError> {
    require_surface_model(model)?;
    let prov = Provenance::new(Some(mesh), Some(model), cfg);
    let ratio = discrete_capacity(mesh, rho, big_r, cfg)? / model.capacity_model(rho, big_r, &cfg.quadrature)?;
    let lower = flux_quotient(mesh, model, rho)?;
    let upper = flux_quotient(mesh, model, big_r)?;
    let lower_gates = failed_hypotheses(
        &[Hypothesis::Minimal, Hypothesis::CurvatureBound, Hypothesis::NondecreasingWarp, Hypothesis::PoleOnSurface],
        model,
        Some(mesh),
        big_r,
        cfg,
    )?;
    let upper_gates =
        failed_hypotheses(&[Hypothesis::Minimal, Hypothesis::CurvatureBound, Hypothesis::BalancedBelow], model, Some(mesh), big_r, cfg)?;
    Ok(vec![
        Check::evaluate(
            "capacity-flux-lower",
            "J(rho)/J^w(rho) <= Cap(A)/Cap(A^w)",
            Relation::Le,
            Some(rho),
            lower,
            ratio,
            cfg.capacity_tol,
            ToleranceMode::Relative,
            &prov,
        )
        .gated(&lower_gates),
        Check::evaluate(
            "capacity-flux-upper",
            "Cap(A)/Cap(A^w) <= J(R)/J^w(R)",
            Relation::Le,
            Some(big_r),
            ratio,
            upper,
            cfg.capacity_tol,
            ToleranceMode::Relative,
            &prov,
        )
        .gated(&upper_gates),
    ])
}

/// Euclidean volume quotients at `ρ` and `R` bracket the capacity ratio
/// against the flat annulus.
pub fn verify_euclidean_sandwich(
    mesh: &TriMesh,
    rho: f64,
    big_r: f64,
    cfg: &HarnessConfig,
) -> Result<Vec<Check>, HarnessError> {
    let flat = ModelSpace::euclidean(2)?;
    let prov = Provenance::new(Some(mesh), Some(&flat), cfg);
    let ratio = discrete_capacity(mesh, rho, big_r, cfg)? / (2.0 * PI / (big_r / rho).ln());
    let lower = area_or_zero(mesh, rho)? / (PI * rho * rho);
    let upper = area_or_zero(mesh, big_r)? / (PI * big_r * big_r);
    let gates = failed_hypotheses(&[Hypothesis::Minimal], &flat, Some(mesh), big_r, cfg)?;
    Ok(vec![
        Check::evaluate(
            "euclidean-capacity-lower",
            "Vol(D_rho)/(pi rho^2) <= Cap(A)/Cap(A^flat)",
            Relation::Le,
            Some(rho),
            lower,
            ratio,
            cfg.capacity_tol,
            ToleranceMode::Relative,
            &prov,
        )
        .gated(&gates),
        Check::evaluate(
            "euclidean-capacity-upper",
            "Cap(A)/Cap(A^flat) <= Vol(D_R)/(pi R^2)",
            Relation::Le,
            Some(big_r),
            ratio,
            upper,
            cfg.capacity_tol,
            ToleranceMode::Relative,
            &prov,
        )
        .gated(&gates),
    ])
}

/// Discrete mean exit time of `D_R` against the transplanted model exit time.
pub fn exit_time_comparison(
    mesh: &TriMesh,
    model: &ModelSpace,
    big_r: f64,
    cfg: &HarnessConfig,
) -> Result<Vec<Check>, HarnessError> {
    require_surface_model(model)?;
    let prov = Provenance::new(Some(mesh), Some(model), cfg);
    let region = clip(mesh, 0.0, big_r)?;
    let e_p = exit_time_discrete(&region, &cfg.cg)?;
    let e_w = region
        .r()
        .par_iter()
        .map(|&r| model.mean_exit_model(big_r, r.min(big_r), &cfg.quadrature))
        .collect::<Result<Vec<f64>, _>>()?;
    let scale = model.mean_exit_model(big_r, 0.0, &cfg.quadrature)?;
    let tol = cfg.exit_tol * scale;
    let gates =
        failed_hypotheses(&[Hypothesis::Minimal, Hypothesis::CurvatureBound, Hypothesis::BalancedBelow], model, Some(mesh), big_r, cfg)?;

    let boundary: Vec<usize> = (0..region.vertex_count()).filter(|&v| region.labels()[v] != RegionLabel::Interior).collect();
    let interior: Vec<usize> = (0..region.vertex_count()).filter(|&v| region.labels()[v] == RegionLabel::Interior).collect();
    if interior.is_empty() {
        return Err(HarnessError::InvalidArgument(format!("D_{big_r} has no interior vertices")));
    }
    let worst = *interior.iter().min_by(|&&a, &&b| (e_p[a] - e_w[a]).total_cmp(&(e_p[b] - e_w[b]))).expect("nonempty");
    let mut checks = vec![Check::evaluate(
        "exit-time-lower",
        "E^P(x) >= E^w(r(x)) at every interior vertex",
        Relation::Ge,
        Some(big_r),
        e_p[worst],
        e_w[worst],
        tol,
        ToleranceMode::Absolute,
        &prov,
    )
    .with_note(format!("worst vertex at r = {}; tolerance is {} of max E^w = {scale}", region.r()[worst], cfg.exit_tol))
    .gated(&gates)];

    let max_abs = |vals: &[f64]| boundary.iter().map(|&v| vals[v].abs()).fold(0.0, f64::max);
    checks.push(Check::evaluate(
        "exit-time-boundary",
        "E^P = E^w = 0 on the boundary of D_R",
        Relation::Approx,
        Some(big_r),
        max_abs(&e_p),
        max_abs(&e_w),
        0.0,
        ToleranceMode::Absolute,
        &prov,
    ));

    // equality-case proxy: both quotients agree at R and are stable from R/2 to R
    let half = 0.5 * big_r;
    let (vol, fl) = (volume_quotient(mesh, model, big_r, cfg)?, flux_quotient(mesh, model, big_r)?);
    let (vol_half, fl_half) = (volume_quotient(mesh, model, half, cfg)?, flux_quotient(mesh, model, half)?);
    let close = |a: f64, b: f64| (a - b).abs() <= cfg.iso_tol * a.abs().max(b.abs());
    if close(vol, fl) && close(vol, vol_half) && close(fl, fl_half) {
        let far = *interior
            .iter()
            .max_by(|&&a, &&b| (e_p[a] - e_w[a]).abs().total_cmp(&(e_p[b] - e_w[b]).abs()))
            .expect("nonempty");
        checks.push(
            Check::evaluate(
                "exit-time-equality",
                "E^P(x) = E^w(r(x)) when the volume and flux quotients agree",
                Relation::Approx,
                Some(big_r),
                e_p[far],
                e_w[far],
                tol,
                ToleranceMode::Absolute,
                &prov,
            )
            .with_note(format!("largest deviation at r = {}", region.r()[far]))
            .gated(&gates),
        );
    }
    Ok(checks)
}

/// Upper bounds on the number of ends outside `D_R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndsReport {
    pub radius: f64,
    pub t: f64,
    /// `(2/(1-R/t))^m (m∫_0^t w^{m-1}/t^m) Vol(D_t)/Vol(B^w_t)`.
    pub bound: f64,
    /// The same bound with the constant `1` in place of `2^m`.
    pub bound_unit_constant: f64,
    pub volume_quotient_at_t: f64,
    /// Upper limit of `m∫_0^t w^{m-1}/t^m` over the model grid; absent when divergent.
    pub ends_coefficient: Option<f64>,
    /// Grid maximum of the volume quotient on `(0, t]`.
    pub volume_w: f64,
    /// `2^m C_w Vol_w` when `C_w` is finite.
    pub asymptotic_bound: Option<f64>,
    pub asymptotic_bound_unit_constant: Option<f64>,
    pub count: usize,
    pub verdict: Verdict,
    pub asymptotic_verdict: Option<Verdict>,
    pub failed_hypotheses: Vec<String>,
    pub warning: Option<String>,
    pub provenance: Provenance,
}

impl EndsReport {
    pub fn checks(&self) -> Vec<Check> {
        let mut out = vec![Check::evaluate(
            "ends-bound",
            "number of ends outside D_R <= (2/(1-R/t))^m C(t) Vol(D_t)/Vol(B^w_t)",
            Relation::Le,
            Some(self.radius),
            self.count as f64,
            self.bound,
            0.0,
            ToleranceMode::Absolute,
            &self.provenance,
        )
        .with_note(format!("t = {}", self.t))
        .gated(&self.failed_hypotheses)];
        if let Some(bound) = self.asymptotic_bound {
            out.push(
                Check::evaluate(
                    "ends-bound-asymptotic",
                    "number of ends <= 2^m C_w Vol_w",
                    Relation::Le,
                    None,
                    self.count as f64,
                    bound,
                    0.0,
                    ToleranceMode::Absolute,
                    &self.provenance,
                )
                .with_note("Vol_w is the grid maximum up to t")
                .gated(&self.failed_hypotheses),
            );
        }
        out
    }
}

pub fn ends_bound(
    mesh: &TriMesh,
    model: &ModelSpace,
    big_r: f64,
    t: f64,
    cfg: &HarnessConfig,
) -> Result<EndsReport, HarnessError> {
    require_surface_model(model)?;
    if !(big_r > 0.0 && t > big_r) {
        return Err(HarnessError::InvalidArgument(format!("need 0 < R < t, got R={big_r}, t={t}")));
    }
    let failed = failed_hypotheses(
        &[
            Hypothesis::Minimal,
            Hypothesis::CurvatureBound,
            Hypothesis::BalancedBelow,
            Hypothesis::IncreasingWarp,
            Hypothesis::NonpositiveModelCurvatureFrom(big_r),
        ],
        model,
        Some(mesh),
        t,
        cfg,
    )?;
    let m = model.dim() as i32;
    let mf = m as f64;
    let coefficient = mf * model.fiber_integral(t, &cfg.quadrature)? / t.powi(m);
    let volume_quotient_at_t = volume_quotient(mesh, model, t, cfg)?;
    let bound_unit_constant = (1.0 / (1.0 - big_r / t)).powi(m) * coefficient * volume_quotient_at_t;
    let bound = 2f64.powi(m) * bound_unit_constant;

    let ends = count_ends(mesh, big_r)?;
    let c_w = model.ends_coefficient(&cfg.model_grid, &cfg.quadrature)?;
    let ends_coefficient = (!c_w.is_divergent()).then_some(c_w.reported_limsup);
    let grid = RadiusGrid::linspace(t / 16.0, t, 16)?;
    let volume_w = grid
        .points()
        .par_iter()
        .map(|&s| volume_quotient(mesh, model, s, cfg))
        .collect::<Result<Vec<f64>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let asymptotic_bound_unit_constant = ends_coefficient.map(|c| c * volume_w);
    let asymptotic_bound = asymptotic_bound_unit_constant.map(|b| 2f64.powi(m) * b);
    let count = ends.count;
    let judge = |b: f64| {
        if !failed.is_empty() {
            Verdict::Inconclusive
        } else if count as f64 <= b {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    };
    Ok(EndsReport {
        radius: big_r,
        t,
        bound,
        bound_unit_constant,
        volume_quotient_at_t,
        ends_coefficient,
        volume_w,
        asymptotic_bound,
        asymptotic_bound_unit_constant,
        count,
        verdict: judge(bound),
        asymptotic_verdict: asymptotic_bound.map(judge),
        failed_hypotheses: failed,
        warning: ends.warning,
        provenance: Provenance::new(Some(mesh), Some(model), cfg),
    })
}

/// Bounds on the fundamental tone and the discrete eigenvalue trend.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToneReport {
    pub parabolicity: ParabolicityVerdict,
    /// Upper limit of `1/(Vol(B^w_t) ∫_t^∞ ds/Vol(S^w_s))`.
    pub tone_upper_limit: f64,
    pub tone_upper_trend: Trend,
    /// `Flux_w(V)/Vol_w(V)` of the best end; absent in model-only runs.
    pub end_factor: Option<f64>,
    pub end_used: Option<usize>,
    pub upper_bound: f64,
    /// `1/(4L²)`.
    pub lower_bound: f64,
    pub sup_q: f64,
    /// `(R, λ₁(D_R))`.
    pub eigenvalues: Vec<(f64, f64)>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

pub fn tone_report(
    mesh: Option<&TriMesh>,
    model: &ModelSpace,
    r0: f64,
    grid: &RadiusGrid,
    cfg: &HarnessConfig,
) -> Result<ToneReport, HarnessError> {
    let q = &cfg.quadrature;
    let prov = Provenance::new(mesh, Some(model), cfg);
    let parabolicity = model.parabolicity_test(q)?.verdict;
    let limit = model.tone_upper_limit(&cfg.model_grid, q)?;
    let cheeger = model.cheeger_bound(&cfg.model_grid, q)?;
    let mut warnings: Vec<String> = limit.warning.iter().cloned().collect();
    if cheeger.still_increasing {
        warnings.push("q_w still increasing at the end of the model grid; 1/(4L^2) may be too large".into());
    }

    let (mut end_factor, mut end_used, mut eigenvalues) = (None, None, Vec::new());
    let mut gates = Vec::new();
    if let Some(mesh) = mesh {
        require_surface_model(model)?;
        gates = failed_hypotheses(&[Hypothesis::Minimal, Hypothesis::CurvatureBound], model, Some(mesh), grid.last(), cfg)?;
        let ends = count_ends(mesh, r0)?;
        warnings.extend(ends.warning.clone());
        for e in 0..ends.count {
            let mask = ends.face_mask(mesh, e);
            let curve = quotient_curves(mesh, model, grid, Some((e, &mask)), cfg)?;
            let vol_w = curve.volume_w();
            if vol_w > 0.0 {
                let factor = curve.flux_w() / vol_w;
                if end_factor.is_none_or(|f| factor < f) {
                    end_factor = Some(factor);
                    end_used = Some(e);
                }
            }
        }
        if end_factor.is_none() {
            warnings.push(format!("no end with positive volume outside D_{r0}"));
        }
        eigenvalues = grid
            .points()
            .par_iter()
            .map(|&big_r| {
                let region = clip(mesh, 0.0, big_r)?;
                Ok((big_r, first_eigenvalue_estimate(&region, &cfg.eigen)?.lambda))
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
    }

    let factor = if mesh.is_some() { end_factor.unwrap_or(f64::NAN) } else { 1.0 };
    let upper_bound = if limit.reported_limsup == 0.0 { 0.0 } else { factor * limit.reported_limsup };
    let lower_bound = cheeger.lower_bound;

    let mut checks = Vec::new();
    let mut consistent = Check::evaluate(
        "tone-bounds-consistent",
        "1/(4L^2) <= upper bound on the fundamental tone",
        Relation::Le,
        None,
        lower_bound,
        upper_bound,
        1e-12,
        ToleranceMode::Absolute,
        &prov,
    );
    if limit.is_divergent() || !upper_bound.is_finite() {
        consistent.verdict = Verdict::Inconclusive;
        consistent.note = Some("tone upper limit not finite on the model grid".into());
    }
    checks.push(consistent.gated(&gates));
    if !eigenvalues.is_empty() {
        let smallest = eigenvalues.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty");
        checks.push(
            Check::evaluate(
                "tone-eigenvalue-lower",
                "lambda_1(D_R) >= 1/(4L^2)",
                Relation::Ge,
                Some(smallest.0),
                smallest.1,
                lower_bound,
                1e-12,
                ToleranceMode::Absolute,
                &prov,
            )
            .gated(&gates),
        );
        let (mut at, mut prev, mut next, mut worst) = (eigenvalues[0].0, eigenvalues[0].1, eigenvalues[0].1, f64::INFINITY);
        for w in eigenvalues.windows(2) {
            let margin = w[0].1 - w[1].1;
            if margin < worst {
                (at, prev, next, worst) = (w[1].0, w[0].1, w[1].1, margin);
            }
        }
        checks.push(
            Check::evaluate(
                "tone-eigenvalue-monotone",
                "lambda_1(D_R) nonincreasing in R",
                Relation::Le,
                Some(at),
                next,
                prev,
                cfg.mono_slack,
                ToleranceMode::Relative,
                &prov,
            )
            .gated(&gates),
        );
    }

    Ok(ToneReport {
        parabolicity,
        tone_upper_limit: limit.reported_limsup,
        tone_upper_trend: limit.trend,
        end_factor,
        end_used,
        upper_bound,
        lower_bound,
        sup_q: cheeger.sup_q,
        eigenvalues,
        checks,
        warnings,
    })
}
