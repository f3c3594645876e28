use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::report::{Check, Provenance, Relation, ToleranceMode, Verdict};
use super::{require_surface_model, HarnessConfig, HarnessError};
use crate::dgeom::{clip, flux, region_area, DgeomError};
use crate::modelspace::{ModelSpace, RadiusGrid};
use crate::surfaces::TriMesh;

/// Volume and flux comparison quotients on a radius grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientCurve {
    pub radii: Vec<f64>,
    /// `Vol(D_R) / Vol(B^w_R)`.
    pub volume_quotient: Vec<f64>,
    /// `J_r(R) / J^w_r(R)`.
    pub flux_quotient: Vec<f64>,
    /// End the quantities are restricted to, if any.
    pub end: Option<usize>,
}

impl QuotientCurve {
    pub fn new(
        radii: Vec<f64>,
        volume_quotient: Vec<f64>,
        flux_quotient: Vec<f64>,
        end: Option<usize>,
    ) -> Result<Self, HarnessError> {
        if radii.is_empty() || radii.len() != volume_quotient.len() || radii.len() != flux_quotient.len() {
            return Err(HarnessError::InvalidArgument("curve columns must be nonempty and of equal length".into()));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(HarnessError::InvalidArgument("curve radii must be strictly increasing".into()));
        }
        if volume_quotient.iter().chain(&flux_quotient).any(|&q| !(q >= 0.0)) {
            return Err(HarnessError::InvalidArgument("quotients must be nonnegative".into()));
        }
        Ok(QuotientCurve { radii, volume_quotient, flux_quotient, end })
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Grid maximum of the volume quotient, the reported `Vol_w` estimate.
    pub fn volume_w(&self) -> f64 {
        self.volume_quotient.iter().copied().fold(0.0, f64::max)
    }

    /// Grid maximum of the flux quotient, the reported `Flux_w` estimate.
    pub fn flux_w(&self) -> f64 {
        self.flux_quotient.iter().copied().fold(0.0, f64::max)
    }

    /// Relative change of the volume quotient over the last tenth of the grid.
    pub fn tail_change(&self) -> f64 {
        let n = self.len();
        let k = n.div_ceil(10).max(2).min(n);
        let first = self.volume_quotient[n - k];
        let last = self.volume_quotient[n - 1];
        if first > 0.0 {
            (last - first).abs() / first
        } else if last == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn write_csv(&self, out: impl Write) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["radius [length]", "volume_quotient [1]", "flux_quotient [1]"])?;
        for k in 0..self.len() {
            w.write_record([
                self.radii[k].to_string(),
                self.volume_quotient[k].to_string(),
                self.flux_quotient[k].to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Samples both quotients of `mesh` against `model` on `grid`, optionally
/// restricted to the faces selected by `end_mask`.
pub fn quotient_curves(
    mesh: &TriMesh,
    model: &ModelSpace,
    grid: &RadiusGrid,
    end_mask: Option<(usize, &[bool])>,
    cfg: &HarnessConfig,
) -> Result<QuotientCurve, HarnessError> {
    require_surface_model(model)?;
    let mask = end_mask.map(|m| m.1);
    if mask.is_some_and(|m| m.len() != mesh.triangles().len()) {
        return Err(HarnessError::InvalidArgument("end mask length differs from the face count".into()));
    }
    let rows = grid
        .points()
        .par_iter()
        .map(|&big_r| {
            let area = match region_area(&clip(mesh, 0.0, big_r)?, mask) {
                Ok(a) => a,
                Err(DgeomError::EmptyRegion) => 0.0,
                Err(e) => return Err(HarnessError::from(e)),
            };
            let vol = area / model.vol_ball(big_r, &cfg.quadrature)?;
            let fl = flux(mesh, big_r, mask)? / model.vol_sphere(big_r)?;
            Ok((vol, fl))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let (vol, fl) = rows.into_iter().unzip();
    QuotientCurve::new(grid.points().to_vec(), vol, fl, end_mask.map(|m| m.0))
}

/// Volume quotient below flux quotient at each radius, and both quotients
/// nondecreasing up to `mono_slack`.
pub fn verify_isoperimetric(curve: &QuotientCurve, provenance: &Provenance, cfg: &HarnessConfig) -> Vec<Check> {
    let mut checks: Vec<Check> = (0..curve.len())
        .map(|k| {
            Check::evaluate(
                "volume-below-flux",
                "Vol(D_R)/Vol(B^w_R) <= J(R)/J^w(R)",
                Relation::Le,
                Some(curve.radii[k]),
                curve.volume_quotient[k],
                curve.flux_quotient[k],
                cfg.iso_tol,
                ToleranceMode::Relative,
                provenance,
            )
        })
        .collect();
    for (name, values) in [("volume", &curve.volume_quotient), ("flux", &curve.flux_quotient)] {
        checks.push(monotone_check(name, &curve.radii, values, provenance, cfg));
    }
    checks
}

/// One check per quotient at its worst step; a failure names that radius.
fn monotone_check(name: &str, radii: &[f64], values: &[f64], provenance: &Provenance, cfg: &HarnessConfig) -> Check {
    let text = format!("{name} quotient nondecreasing in R");
    let theorem = format!("{name}-quotient-monotone");
    let mut worst: Option<Check> = None;
    for k in 1..values.len() {
        let c = Check::evaluate(
            &theorem,
            &text,
            Relation::Le,
            Some(radii[k]),
            values[k - 1],
            values[k],
            cfg.mono_slack,
            ToleranceMode::Relative,
            provenance,
        );
        let rank = |c: &Check| (c.verdict == Verdict::Pass, c.margin);
        if worst.as_ref().is_none_or(|w| {
            let (a, b) = (rank(&c), rank(w));
            (!a.0 && b.0) || (a.0 == b.0 && a.1 < b.1)
        }) {
            worst = Some(c);
        }
    }
    worst.unwrap_or_else(|| {
        Check::evaluate(&theorem, &text, Relation::Le, Some(radii[0]), values[0], values[0], cfg.mono_slack, ToleranceMode::Relative, provenance)
            .with_note("single grid point")
    })
}

/// Flux quotient equals volume quotient at the largest radius once the volume
/// quotient has stabilized; inconclusive when finite w-volume is not detected.
pub fn volume_flux_tail(curve: &QuotientCurve, provenance: &Provenance, cfg: &HarnessConfig) -> Check {
    let n = curve.len() - 1;
    let check = Check::evaluate(
        "volume-flux-at-infinity",
        "J(R)/J^w(R) = Vol(D_R)/Vol(B^w_R) at the largest R",
        Relation::Approx,
        Some(curve.radii[n]),
        curve.flux_quotient[n],
        curve.volume_quotient[n],
        cfg.tail_tol,
        ToleranceMode::Relative,
        provenance,
    );
    let change = curve.tail_change();
    if curve.len() < 2 || !(change < cfg.tail_stability) {
        let mut c = check.with_note(format!(
            "finite w-volume not detected: volume quotient changes by {change:.3e} over the last tenth of the grid"
        ));
        c.verdict = Verdict::Inconclusive;
        c
    } else {
        check
    }
}
