//! Linear finite elements on clipped regions: cotangent stiffness, lumped
//! mass, Dirichlet and Poisson solves, capacity, exit time, and the first
//! Dirichlet eigenvalue.

use std::collections::HashMap;

use serde::Serialize;

use super::clip::{ClippedRegion, RegionLabel};
use super::sparse::{conjugate_gradient, CgConfig, CsrMatrix};
use super::DgeomError;
use crate::vec3::{self, Vec3};

/// Cotangent stiffness matrix. Edge weights `(cot α + cot β)/2` that come out
/// negative are clamped to zero.
pub fn stiffness_matrix(positions: &[Vec3], triangles: &[[usize; 3]]) -> CsrMatrix {
    let mut weights: HashMap<(usize, usize), f64> = HashMap::with_capacity(triangles.len() * 2);
    for t in triangles {
        let p = t.map(|v| positions[v]);
        let twice_area = vec3::norm(vec3::cross(vec3::sub(p[1], p[0]), vec3::sub(p[2], p[0])));
        if !(twice_area > 0.0) {
            continue;
        }
        for k in 0..3 {
            let (i, j, o) = (k, (k + 1) % 3, (k + 2) % 3);
            let cot = vec3::dot(vec3::sub(p[i], p[o]), vec3::sub(p[j], p[o])) / twice_area;
            let key = if t[i] < t[j] { (t[i], t[j]) } else { (t[j], t[i]) };
            *weights.entry(key).or_insert(0.0) += 0.5 * cot;
        }
    }
    let mut edges: Vec<((usize, usize), f64)> = weights.into_iter().collect();
    edges.sort_unstable_by_key(|a| a.0);
    let mut triplets = Vec::with_capacity(4 * edges.len());
    for ((i, j), w) in edges {
        let w = w.max(0.0);
        if w == 0.0 {
            continue;
        }
        triplets.push((i, j, -w));
        triplets.push((j, i, -w));
        triplets.push((i, i, w));
        triplets.push((j, j, w));
    }
    CsrMatrix::from_triplets(positions.len(), triplets)
}

/// Barycentric lumped mass: a third of each incident triangle area.
pub fn lumped_mass(positions: &[Vec3], triangles: &[[usize; 3]]) -> Vec<f64> {
    let mut mass = vec![0.0; positions.len()];
    for t in triangles {
        let a = vec3::triangle_area(positions[t[0]], positions[t[1]], positions[t[2]]) / 3.0;
        for &v in t {
            mass[v] += a;
        }
    }
    mass
}

/// Dirichlet values per boundary kind; `None` leaves the kind free
/// (natural zero-Neumann condition).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundarySpec {
    pub inner: Option<f64>,
    pub outer: Option<f64>,
    pub truncation: Option<f64>,
}

/// Stiffness, lumped mass and Dirichlet constraints of one region.
#[derive(Debug, Clone)]
pub struct SparseSpdSystem {
    pub stiffness: CsrMatrix,
    pub mass: Vec<f64>,
    /// `(vertex, value)` in ascending vertex order.
    pub constrained: Vec<(usize, f64)>,
}

pub fn assemble_laplacian(region: &ClippedRegion, spec: &BoundarySpec) -> Result<SparseSpdSystem, DgeomError> {
    let constrained: Vec<(usize, f64)> = region
        .labels()
        .iter()
        .enumerate()
        .filter_map(|(v, l)| {
            let value = match l {
                RegionLabel::InnerLevel => spec.inner,
                RegionLabel::OuterLevel => spec.outer,
                RegionLabel::Truncation => spec.truncation,
                RegionLabel::Interior => None,
            };
            value.map(|x| (v, x))
        })
        .collect();
    if constrained.is_empty() {
        return Err(DgeomError::Unconstrained);
    }
    Ok(SparseSpdSystem {
        stiffness: stiffness_matrix(region.positions(), region.triangles()),
        mass: lumped_mass(region.positions(), region.triangles()),
        constrained,
    })
}

struct Reduced {
    free: Vec<usize>,
    matrix: CsrMatrix,
    values: Vec<f64>,
}

impl SparseSpdSystem {
    fn reduce(&self) -> Result<Reduced, DgeomError> {
        let n = self.mass.len();
        let mut fixed = vec![None; n];
        for &(v, x) in &self.constrained {
            fixed[v] = Some(x);
        }
        let free: Vec<usize> = (0..n).filter(|&v| fixed[v].is_none()).collect();
        let mut index = vec![None; n];
        for (k, &v) in free.iter().enumerate() {
            index[v] = Some(k);
        }
        // every free component must reach a constrained vertex
        let mut reached = vec![false; n];
        let mut stack: Vec<usize> = self.constrained.iter().map(|c| c.0).collect();
        for &v in &stack {
            reached[v] = true;
        }
        while let Some(v) = stack.pop() {
            for (u, w) in self.stiffness.row(v) {
                if w != 0.0 && !reached[u] {
                    reached[u] = true;
                    stack.push(u);
                }
            }
        }
        if free.iter().any(|&v| !reached[v]) {
            return Err(DgeomError::Unconstrained);
        }
        let values = (0..n).map(|v| fixed[v].unwrap_or(0.0)).collect();
        Ok(Reduced { matrix: self.stiffness.restrict(&free, &index), free, values })
    }

    /// Solves `K u = source` on free vertices with the constrained values in
    /// place; `source` is indexed by region vertex.
    fn solve_with(&self, source: Option<&[f64]>, cg: &CgConfig) -> Result<Vec<f64>, DgeomError> {
        let Reduced { free, matrix, mut values } = self.reduce()?;
        // free entries of `values` are still zero, so this only sees boundary data
        let rhs: Vec<f64> = free
            .iter()
            .map(|&v| {
                let coupling: f64 = self.stiffness.row(v).map(|(u, w)| w * values[u]).sum();
                source.map_or(0.0, |s| s[v]) - coupling
            })
            .collect();
        let mut x = vec![0.0; free.len()];
        if !free.is_empty() {
            conjugate_gradient(&matrix, &rhs, &mut x, cg)?;
        }
        for (k, &v) in free.iter().enumerate() {
            values[v] = x[k];
        }
        Ok(values)
    }
}

/// Harmonic extension of the Dirichlet data.
pub fn solve_dirichlet(system: &SparseSpdSystem, cg: &CgConfig) -> Result<Vec<f64>, DgeomError> {
    system.solve_with(None, cg)
}

/// What to do when the annulus touches the window boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationPolicy {
    /// Zero-Neumann condition on the window boundary.
    Reflect,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    pub capacity: f64,
    /// Effective resistance `1/Cap`.
    pub resistance: f64,
    pub truncation_contact: bool,
}

/// Dirichlet energy `ΨᵀKΨ` of the potential with `Ψ = 0` on `r = ρ` and
/// `Ψ = 1` on `r = R`.
pub fn capacity_discrete(
    region: &ClippedRegion,
    policy: TruncationPolicy,
    cg: &CgConfig,
) -> Result<CapacityResult, DgeomError> {
    if region.truncation_contact() && policy == TruncationPolicy::Error {
        return Err(DgeomError::TruncationContact);
    }
    if !(region.rho() > 0.0) {
        return Err(DgeomError::InvalidArgument("capacity needs an annulus with rho > 0".into()));
    }
    let spacing = mean_edge_length(region);
    if region.big_r() - region.rho() < 2.0 * spacing {
        return Err(DgeomError::InvalidArgument(format!(
            "R - rho = {} is below twice the mesh spacing {spacing}",
            region.big_r() - region.rho()
        )));
    }
    for needed in [RegionLabel::InnerLevel, RegionLabel::OuterLevel] {
        if !region.labels().contains(&needed) {
            return Err(DgeomError::InvalidArgument(format!("region has no {needed:?} vertices")));
        }
    }
    let system = assemble_laplacian(region, &BoundarySpec { inner: Some(0.0), outer: Some(1.0), truncation: None })?;
    let psi = solve_dirichlet(&system, cg)?;
    let capacity = system.stiffness.quadratic_form(&psi);
    Ok(CapacityResult { capacity, resistance: 1.0 / capacity, truncation_contact: region.truncation_contact() })
}

fn mean_edge_length(region: &ClippedRegion) -> f64 {
    let p = region.positions();
    let mut sum = 0.0;
    for t in region.triangles() {
        for k in 0..3 {
            sum += vec3::dist(p[t[k]], p[t[(k + 1) % 3]]);
        }
    }
    sum / (3 * region.triangles().len()).max(1) as f64
}

fn require_ball(region: &ClippedRegion) -> Result<(), DgeomError> {
    if region.truncation_contact() {
        return Err(DgeomError::TruncationContact);
    }
    if region.is_empty() {
        return Err(DgeomError::EmptyRegion);
    }
    Ok(())
}

/// Mean exit time: `K E = M 1` with `E = 0` on the boundary of the region.
pub fn exit_time_discrete(region: &ClippedRegion, cg: &CgConfig) -> Result<Vec<f64>, DgeomError> {
    require_ball(region)?;
    let system = assemble_laplacian(region, &BoundarySpec { inner: Some(0.0), outer: Some(0.0), truncation: None })?;
    let source = system.mass.clone();
    system.solve_with(Some(&source), cg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenEstimate {
    pub lambda: f64,
    pub iterations: usize,
    /// Relative change of the Rayleigh quotient in the last step.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenConfig {
    pub rel_tol: f64,
    pub max_iter: usize,
    pub cg: CgConfig,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig { rel_tol: 1e-8, max_iter: 500, cg: CgConfig::default() }
    }
}

/// Smallest Dirichlet eigenvalue of `K u = λ M u` by inverse power iteration.
pub fn first_eigenvalue_estimate(region: &ClippedRegion, cfg: &EigenConfig) -> Result<EigenEstimate, DgeomError> {
    require_ball(region)?;
    let system = assemble_laplacian(region, &BoundarySpec { inner: Some(0.0), outer: Some(0.0), truncation: None })?;
    let Reduced { free, matrix, .. } = system.reduce()?;
    if free.is_empty() {
        return Err(DgeomError::EmptyRegion);
    }
    let mass: Vec<f64> = free.iter().map(|&v| system.mass[v]).collect();
    let mut x = vec![1.0; free.len()];
    let mut lambda = f64::INFINITY;
    let mut gap = f64::INFINITY;
    let mut y = vec![0.0; free.len()];
    for it in 1..=cfg.max_iter {
        let rhs: Vec<f64> = x.iter().zip(&mass).map(|(a, m)| a * m).collect();
        conjugate_gradient(&matrix, &rhs, &mut y, &cfg.cg)?;
        let num = matrix.quadratic_form(&y);
        let den: f64 = y.iter().zip(&mass).map(|(a, m)| a * a * m).sum();
        let next = num / den;
        gap = (next - lambda).abs() / next;
        lambda = next;
        let scale = den.sqrt();
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / scale;
        }
        if gap <= cfg.rel_tol {
            return Ok(EigenEstimate { lambda, iterations: it, gap });
        }
    }
    Err(DgeomError::EigenNotConverged { iterations: cfg.max_iter, gap })
}
