use std::fmt;

use serde::{Serialize, Serializer};

use super::HarnessConfig;
use crate::modelspace::ModelSpace;
use crate::surfaces::TriMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// How `lhs` is compared with `rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs ≤ rhs`; margin `rhs - lhs`.
    Le,
    /// `lhs ≥ rhs`; margin `lhs - rhs`.
    Ge,
    /// `lhs ≈ rhs`; margin `-|lhs - rhs|`.
    Approx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceMode {
    /// Allowance `tolerance · max(|lhs|, |rhs|)`.
    Relative,
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshInfo {
    pub fingerprint: String,
    pub vertices: usize,
    pub triangles: usize,
    pub mean_edge_length: f64,
}

/// Where the numbers of a check came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub mesh: Option<MeshInfo>,
    pub model: Option<String>,
    pub quadrature_rel_tol: f64,
    pub cg_rel_tol: f64,
}

impl Provenance {
    pub fn new(mesh: Option<&TriMesh>, model: Option<&ModelSpace>, cfg: &HarnessConfig) -> Self {
        Provenance {
            mesh: mesh.map(|m| MeshInfo {
                fingerprint: format!("{:016x}", m.fingerprint()),
                vertices: m.vertex_count(),
                triangles: m.triangles().len(),
                mean_edge_length: m.mean_edge_length(),
            }),
            model: model.map(|m| format!("dim={},warp={}", m.dim(), m.warp())),
            quadrature_rel_tol: cfg.quadrature.rel_tol,
            cg_rel_tol: cfg.cg.rel_tol,
        }
    }
}

/// One inequality with both measured sides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub theorem: String,
    pub inequality: String,
    pub relation: Relation,
    #[serde(serialize_with = "opt_number")]
    pub radius: Option<f64>,
    #[serde(serialize_with = "number")]
    pub lhs: f64,
    #[serde(serialize_with = "number")]
    pub rhs: f64,
    #[serde(serialize_with = "number")]
    pub margin: f64,
    pub tolerance: f64,
    pub tolerance_mode: ToleranceMode,
    pub verdict: Verdict,
    pub note: Option<String>,
    pub provenance: Provenance,
}

impl Check {
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate(
        theorem: &str,
        inequality: &str,
        relation: Relation,
        radius: Option<f64>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        mode: ToleranceMode,
        provenance: &Provenance,
    ) -> Check {
        let margin = match relation {
            Relation::Le => rhs - lhs,
            Relation::Ge => lhs - rhs,
            Relation::Approx => -(lhs - rhs).abs(),
        };
        let allowance = match mode {
            ToleranceMode::Relative => tolerance * lhs.abs().max(rhs.abs()),
            ToleranceMode::Absolute => tolerance,
        };
        let verdict = if margin >= -allowance || (lhs == rhs && lhs.is_finite()) {
            Verdict::Pass
        } else if margin.is_nan() && !(lhs.is_nan() || rhs.is_nan()) {
            // both sides infinite with the same sign
            Verdict::Inconclusive
        } else {
            Verdict::Fail
        };
        Check {
            theorem: theorem.into(),
            inequality: inequality.into(),
            relation,
            radius,
            lhs,
            rhs,
            margin,
            tolerance,
            tolerance_mode: mode,
            verdict,
            note: None,
            provenance: provenance.clone(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }

    /// Downgrades the verdict to inconclusive when any hypothesis failed.
    pub fn gated(mut self, failed: &[String]) -> Check {
        if !failed.is_empty() {
            self.verdict = Verdict::Inconclusive;
            let text = format!("hypothesis not met: {}", failed.join("; "));
            self.note = Some(match self.note.take() {
                Some(n) => format!("{text}; {n}"),
                None => text,
            });
        }
        self
    }

    pub fn summary(&self) -> String {
        let at = self.radius.map(|r| format!(" at R={}", (r * 1e4).round() / 1e4)).unwrap_or_default();
        format!(
            "{:<12} {}{at}: {} (lhs={:.6}, rhs={:.6}, margin={:.3e}, tol={})",
            self.verdict.to_string().to_uppercase(),
            self.theorem,
            self.inequality,
            self.lhs,
            self.rhs,
            self.margin,
            self.tolerance
        )
    }
}

fn number<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn opt_number<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => number(v, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    /// Statements that cannot be decided on a discrete mesh.
    pub not_testable: Vec<String>,
}

impl VerificationReport {
    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.checks.iter().filter(|c| c.verdict == verdict).count()
    }

    pub fn has_failures(&self) -> bool {
        self.count(Verdict::Fail) > 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
