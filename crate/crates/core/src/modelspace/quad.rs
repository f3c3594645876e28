//! Globally adaptive 7/15-point Gauss–Kronrod quadrature.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Tolerances shared by every quadrature-backed model-space operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Largest radius probed when classifying improper integrals.
    pub t_max: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { abs_tol: 1e-10, rel_tol: 1e-10, max_subdivisions: 2000, t_max: 1e4 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(ModelError::Config("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(ModelError::Config("max_subdivisions must be at least 1".into()));
        }
        if !(self.t_max > 10.0) {
            return Err(ModelError::Config("t_max must exceed 10".into()));
        }
        Ok(())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Segment, ModelError>
where
    F: FnMut(f64) -> Result<f64, ModelError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64, ModelError> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ModelError::NonFiniteIntegrand { at: x })
        }
    };
    let fc = eval(center)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = eval(center - dx)? + eval(center + dx)?;
        kron += wk * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Ok(Segment { a, b, value: kron * half, error: ((kron - gauss) * half).abs() })
}

/// Result of a converged integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Adaptive integration of `f` over the finite interval `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Integral, ModelError>
where
    F: FnMut(f64) -> Result<f64, ModelError>,
{
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    if b < a {
        let r = integrate(f, b, a, cfg)?;
        return Ok(Integral { value: -r.value, error: r.error });
    }
    let first = kronrod(&mut f, a, b)?;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut splits = 0;
    while error > cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
        if splits >= cfg.max_subdivisions {
            return Err(ModelError::QuadratureNotConverged { value, error_estimate: error });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval can no longer be bisected in floating point
            return Err(ModelError::QuadratureNotConverged { value, error_estimate: error });
        }
        let left = kronrod(&mut f, worst.a, mid)?;
        let right = kronrod(&mut f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        splits += 1;
        if heap.len() % 64 == 0 {
            // refresh the running sums to shed accumulated rounding
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
    let value = heap.iter().map(|s| s.value).sum();
    Ok(Integral { value, error })
}

/// Integral of `f` over `[a, ∞)` through the substitution `s = a + x/(1-x)`.
pub fn integrate_to_infinity<F>(mut f: F, a: f64, cfg: &QuadratureConfig) -> Result<Integral, ModelError>
where
    F: FnMut(f64) -> Result<f64, ModelError>,
{
    integrate(
        |x| {
            let one_minus = 1.0 - x;
            let s = a + x / one_minus;
            let v = f(s)?;
            if v == 0.0 {
                Ok(0.0)
            } else {
                Ok(v / (one_minus * one_minus))
            }
        },
        0.0,
        1.0,
        cfg,
    )
}
