//! Discrete operators on triangulated surfaces: extrinsic clipping, level-set
//! flux, cotangent finite elements, and end counting.

mod clip;
mod fem;
pub mod sparse;

use serde::Serialize;
use thiserror::Error;

pub use clip::{clip, clip_with, BoundaryLoop, ClippedRegion, Coverage, RegionLabel};
pub use fem::{
    assemble_laplacian, capacity_discrete, exit_time_discrete, first_eigenvalue_estimate, lumped_mass,
    solve_dirichlet, stiffness_matrix, BoundarySpec, CapacityResult, EigenConfig, EigenEstimate, SparseSpdSystem,
    TruncationPolicy,
};
pub use sparse::{CgConfig, CsrMatrix};

use crate::surfaces::{TriMesh, VertexTag};
use crate::vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DgeomError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("window boundary reaches r = {truncation_r} inside the extrinsic ball of radius {radius}")]
    Coverage { radius: f64, truncation_r: f64 },
    #[error("region touches the window boundary")]
    TruncationContact,
    #[error("region is empty")]
    EmptyRegion,
    #[error("face {0} is degenerate")]
    DegenerateFace(usize),
    #[error("pole lies on face {0}")]
    PoleOnFace(usize),
    #[error("system has free vertices without Dirichlet data")]
    Unconstrained,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("conjugate gradients stopped after {iterations} iterations at relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("inverse iteration stopped after {iterations} iterations with relative gap {gap:e}")]
    EigenNotConverged { iterations: usize, gap: f64 },
}

/// `|∇^P r|` on a face: the norm of the tangential part of the unit radial
/// direction at the face centroid.
pub fn radial_gradient_norm(mesh: &TriMesh, face: usize) -> Result<f64, DgeomError> {
    let t = mesh.triangles()[face];
    let p = t.map(|v| mesh.positions()[v]);
    let n = vec3::cross(vec3::sub(p[1], p[0]), vec3::sub(p[2], p[0]));
    let n_len = vec3::norm(n);
    if !(n_len > 0.0) {
        return Err(DgeomError::DegenerateFace(face));
    }
    let centroid = vec3::scale(vec3::add(vec3::add(p[0], p[1]), p[2]), 1.0 / 3.0);
    let radial = vec3::sub(centroid, mesh.pole());
    let radial_len = vec3::norm(radial);
    if !(radial_len > 0.0) {
        return Err(DgeomError::PoleOnFace(face));
    }
    let c = vec3::dot(radial, n) / (radial_len * n_len);
    Ok((1.0 - c * c).max(0.0).sqrt().min(1.0))
}

/// Area of the clipped region, counting only triangles whose parent face is
/// selected by `mask` when one is given.
pub fn region_area(region: &ClippedRegion, mask: Option<&[bool]>) -> Result<f64, DgeomError> {
    if region.is_empty() {
        return Err(DgeomError::EmptyRegion);
    }
    Ok((0..region.triangles().len())
        .filter(|&k| mask.is_none_or(|m| m[region.parent_faces()[k]]))
        .map(|k| region.triangle_area(k))
        .sum())
}

/// `J_r(R) = ∫_{r=R} |∇^P r|`: level segments from marching triangles, each
/// weighted by its face's radial gradient norm. A vertex with `r = R` counts
/// as lying above the level.
pub fn flux(mesh: &TriMesh, big_r: f64, mask: Option<&[bool]>) -> Result<f64, DgeomError> {
    if !(big_r > 0.0 && big_r.is_finite()) {
        return Err(DgeomError::InvalidArgument(format!("flux radius {big_r} must be positive")));
    }
    let truncation_r = mesh.truncation_radius();
    if truncation_r < big_r {
        return Err(DgeomError::Coverage { radius: big_r, truncation_r });
    }
    let r = mesh.r();
    let pos = mesh.positions();
    let mut total = 0.0;
    for (f, t) in mesh.triangles().iter().enumerate() {
        if mask.is_some_and(|m| !m[f]) {
            continue;
        }
        let below = t.map(|v| r[v] < big_r);
        let n_below = below.iter().filter(|&&b| b).count();
        if n_below == 0 || n_below == 3 {
            continue;
        }
        let mut pts = [[0.0; 3]; 2];
        let mut k = 0;
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            if below[e] != below[(e + 1) % 3] {
                let (lo, hi) = if r[a] < big_r { (a, b) } else { (b, a) };
                let s = (big_r - r[lo]) / (r[hi] - r[lo]);
                pts[k] = vec3::lerp(pos[lo], pos[hi], s);
                k += 1;
            }
        }
        total += vec3::dist(pts[0], pts[1]) * radial_gradient_norm(mesh, f)?;
    }
    Ok(total)
}

/// Unbounded components of `{r > R}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndsCount {
    pub radius: f64,
    pub count: usize,
    /// Components of `{r > R}` that do not reach the window boundary.
    pub bounded_components: usize,
    /// End index of each vertex, `None` inside `D_R` or in a bounded component.
    pub component: Vec<Option<usize>>,
    pub warning: Option<String>,
}

impl EndsCount {
    /// Faces with at least one vertex in end `end`.
    pub fn face_mask(&self, mesh: &TriMesh, end: usize) -> Vec<bool> {
        mesh.triangles().iter().map(|t| t.iter().any(|&v| self.component[v] == Some(end))).collect()
    }
}

/// Counts the components of `{r > R}` that touch the window boundary, the
/// discrete stand-in for components with non-compact closure.
pub fn count_ends(mesh: &TriMesh, big_r: f64) -> Result<EndsCount, DgeomError> {
    if !(big_r > 0.0 && big_r.is_finite()) {
        return Err(DgeomError::InvalidArgument(format!("radius {big_r} must be positive")));
    }
    let r = mesh.r();
    let adj = mesh.neighbors();
    let n = mesh.vertex_count();
    let mut raw = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for seed in 0..n {
        if raw[seed] != usize::MAX || !(r[seed] > big_r) {
            continue;
        }
        let id = members.len();
        let mut list = vec![seed];
        raw[seed] = id;
        let mut k = 0;
        while k < list.len() {
            let v = list[k];
            k += 1;
            for &u in &adj[v] {
                if raw[u] == usize::MAX && r[u] > big_r {
                    raw[u] = id;
                    list.push(u);
                }
            }
        }
        members.push(list);
    }
    let mut component = vec![None; n];
    let mut count = 0;
    let mut bounded = 0;
    for list in &members {
        if list.iter().any(|&v| mesh.tags()[v] == VertexTag::OuterTruncation) {
            for &v in list {
                component[v] = Some(count);
            }
            count += 1;
        } else {
            bounded += 1;
        }
    }
    let max_r = mesh.max_r();
    let warning = (max_r < 2.0 * big_r)
        .then(|| format!("mesh reaches r = {max_r}, less than twice R = {big_r}; ends may be merged or missed"));
    Ok(EndsCount { radius: big_r, count, bounded_components: bounded, component, warning })
}
