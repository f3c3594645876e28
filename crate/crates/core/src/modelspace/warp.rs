use std::fmt;

use serde::{Serialize, Serializer};

use super::ModelError;
use crate::wexpr::{self, differentiate, Expr};

/// How the warping function is represented.
#[derive(Debug, Clone, PartialEq)]
pub enum WarpKind {
    /// Constant sectional curvature `b`: `r`, `sinh(√-b r)/√-b` or `sin(√b r)/√b`.
    SpaceForm { curvature: f64 },
    /// A parsed expression with its first two symbolic derivatives.
    Custom { expr: Expr, first: Expr, second: Expr },
}

/// A warping function `w` with `w(0) = 0`, `w'(0) = 1` and `w > 0` on `(0, Λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingSpec {
    kind: WarpKind,
    limit: f64,
}

const NORMALIZATION_TOL: f64 = 1e-8;

impl WarpingSpec {
    pub fn space_form(curvature: f64) -> Result<Self, ModelError> {
        if !curvature.is_finite() {
            return Err(ModelError::InvalidWarp(format!("curvature {curvature} is not finite")));
        }
        let limit = if curvature > 0.0 { std::f64::consts::PI / curvature.sqrt() } else { f64::INFINITY };
        Ok(WarpingSpec { kind: WarpKind::SpaceForm { curvature }, limit })
    }

    pub fn euclidean() -> Self {
        WarpingSpec { kind: WarpKind::SpaceForm { curvature: 0.0 }, limit: f64::INFINITY }
    }

    /// Validates `w(0) = 0`, `w'(0) = 1` and positivity. If `w` changes sign,
    /// `Λ` is placed at the first root found by sampling and bisection.
    pub fn custom(expr: Expr) -> Result<Self, ModelError> {
        let first = differentiate(&expr);
        let second = differentiate(&first);
        let spec = WarpingSpec { kind: WarpKind::Custom { expr, first, second }, limit: f64::INFINITY };
        let w0 = spec.eval_w(0.0)?;
        let dw0 = spec.eval_dw(0.0)?;
        if w0.abs() > NORMALIZATION_TOL {
            return Err(ModelError::InvalidWarp(format!("w(0) = {w0}, expected 0")));
        }
        if (dw0 - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ModelError::InvalidWarp(format!("w'(0) = {dw0}, expected 1")));
        }
        let limit = spec.first_nonpositive_point()?;
        Ok(WarpingSpec { limit, ..spec })
    }

    /// Accepts either `b=<curvature>` or an expression in `r`.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let trimmed = text.trim();
        if let Some(rest) = trimmed.strip_prefix("b=") {
            let b: f64 = rest
                .trim()
                .parse()
                .map_err(|_| ModelError::InvalidWarp(format!("bad curvature `{rest}`")))?;
            return Self::space_form(b);
        }
        Self::custom(wexpr::parse(trimmed)?)
    }

    pub fn kind(&self) -> &WarpKind {
        &self.kind
    }

    /// Domain bound `Λ` (may be infinite).
    pub fn limit(&self) -> f64 {
        self.limit
    }

    pub fn curvature(&self) -> Option<f64> {
        match self.kind {
            WarpKind::SpaceForm { curvature } => Some(curvature),
            WarpKind::Custom { .. } => None,
        }
    }

    fn first_nonpositive_point(&self) -> Result<f64, ModelError> {
        // geometric sampling out to r = 200
        let mut prev = 0.0;
        let mut r = 1e-3;
        while r <= 200.0 {
            let v = self.eval_w(r)?;
            if !(v > 0.0) {
                let (mut lo, mut hi) = (prev, r);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.eval_w(mid)? > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                if lo <= 0.0 {
                    return Err(ModelError::InvalidWarp("w is not positive near 0".into()));
                }
                return Ok(hi);
            }
            prev = r;
            r *= 1.05;
        }
        Ok(f64::INFINITY)
    }

    fn scale(&self) -> f64 {
        match self.kind {
            WarpKind::SpaceForm { curvature } => curvature.abs().sqrt(),
            WarpKind::Custom { .. } => 0.0,
        }
    }

    fn eval_w(&self, r: f64) -> Result<f64, ModelError> {
        match &self.kind {
            WarpKind::SpaceForm { curvature } => {
                let k = self.scale();
                Ok(if *curvature == 0.0 {
                    r
                } else if *curvature < 0.0 {
                    (k * r).sinh() / k
                } else {
                    (k * r).sin() / k
                })
            }
            WarpKind::Custom { expr, .. } => Ok(expr.evaluate(r)?),
        }
    }

    fn eval_dw(&self, r: f64) -> Result<f64, ModelError> {
        match &self.kind {
            WarpKind::SpaceForm { curvature } => {
                let k = self.scale();
                Ok(if *curvature == 0.0 {
                    1.0
                } else if *curvature < 0.0 {
                    (k * r).cosh()
                } else {
                    (k * r).cos()
                })
            }
            WarpKind::Custom { first, .. } => Ok(first.evaluate(r)?),
        }
    }

    fn eval_d2w(&self, r: f64) -> Result<f64, ModelError> {
        match &self.kind {
            WarpKind::SpaceForm { curvature } => Ok(-curvature * self.eval_w(r)?),
            WarpKind::Custom { second, .. } => Ok(second.evaluate(r)?),
        }
    }

    fn check_domain(&self, r: f64) -> Result<(), ModelError> {
        if r >= 0.0 && r < self.limit {
            Ok(())
        } else {
            Err(ModelError::OutOfDomain { r, limit: self.limit })
        }
    }

    /// `w(r)` for `0 ≤ r < Λ`.
    pub fn w(&self, r: f64) -> Result<f64, ModelError> {
        self.check_domain(r)?;
        self.eval_w(r)
    }

    pub fn dw(&self, r: f64) -> Result<f64, ModelError> {
        self.check_domain(r)?;
        self.eval_dw(r)
    }

    pub fn d2w(&self, r: f64) -> Result<f64, ModelError> {
        self.check_domain(r)?;
        self.eval_d2w(r)
    }

    /// Radial sectional curvature `-w''/w` at `r > 0`.
    pub fn radial_curvature(&self, r: f64) -> Result<f64, ModelError> {
        if let Some(b) = self.curvature() {
            self.check_domain(r)?;
            return Ok(b);
        }
        Ok(-self.d2w(r)? / self.w(r)?)
    }
}

impl fmt::Display for WarpingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            WarpKind::SpaceForm { curvature } => write!(f, "b={curvature}"),
            WarpKind::Custom { expr, .. } => write!(f, "{expr}"),
        }
    }
}

impl Serialize for WarpingSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_forms_and_limits() {
        let hyp = WarpingSpec::space_form(-1.0).unwrap();
        assert_eq!(hyp.limit(), f64::INFINITY);
        assert!((hyp.w(1.0).unwrap() - 1f64.sinh()).abs() < 1e-15);
        assert_eq!(hyp.radial_curvature(2.0).unwrap(), -1.0);
        let sph = WarpingSpec::space_form(1.0).unwrap();
        assert!((sph.limit() - std::f64::consts::PI).abs() < 1e-15);
        assert!(sph.w(4.0).is_err());
        let k = WarpingSpec::space_form(-4.0).unwrap();
        assert!((k.w(0.5).unwrap() - 1f64.sinh() / 2.0).abs() < 1e-15);
        assert!((k.d2w(0.5).unwrap() - 4.0 * k.w(0.5).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn custom_validation() {
        assert!(WarpingSpec::parse("sinh(r)").is_ok());
        assert!(matches!(WarpingSpec::parse("1 + r"), Err(ModelError::InvalidWarp(_))));
        assert!(matches!(WarpingSpec::parse("2*r"), Err(ModelError::InvalidWarp(_))));
        assert!(matches!(WarpingSpec::parse("r +"), Err(ModelError::Parse(_))));
        let sin = WarpingSpec::parse("sin(r)").unwrap();
        assert!((sin.limit() - std::f64::consts::PI).abs() < 1e-9);
        let b = WarpingSpec::parse("b=-1").unwrap();
        assert_eq!(b.curvature(), Some(-1.0));
        assert_eq!(b.to_string(), "b=-1");
    }

    #[test]
    fn custom_matches_space_form() {
        let c = WarpingSpec::parse("sinh(r)").unwrap();
        let s = WarpingSpec::space_form(-1.0).unwrap();
        for r in [0.1, 1.0, 3.0] {
            assert_eq!(c.w(r).unwrap(), s.w(r).unwrap());
            assert_eq!(c.dw(r).unwrap(), s.dw(r).unwrap());
            assert!((c.radial_curvature(r).unwrap() + 1.0).abs() < 1e-15);
        }
    }
}
