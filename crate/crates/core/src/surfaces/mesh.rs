use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, VecDeque};
use std::hash::{Hash, Hasher};

use serde::Serialize;

use super::SurfaceError;
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexTag {
    Interior,
    /// On the boundary of the computational window.
    OuterTruncation,
    /// On the stitched line of a periodic parameter axis.
    Seam,
}

/// Triangulated immersed surface with extrinsic distances to a pole.
#[derive(Debug, Clone)]
pub struct TriMesh {
    positions: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    r: Vec<f64>,
    tags: Vec<VertexTag>,
    pole: Vec3,
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Number of triangles using each undirected edge.
pub(crate) fn edge_counts(triangles: &[[usize; 3]]) -> HashMap<(usize, usize), usize> {
    let mut counts = HashMap::with_capacity(triangles.len() * 2);
    for t in triangles {
        for k in 0..3 {
            *counts.entry(edge_key(t[k], t[(k + 1) % 3])).or_insert(0) += 1;
        }
    }
    counts
}

impl TriMesh {
    /// Validates the connectivity, orients the triangles consistently,
    /// computes `r` and tags window-boundary vertices.
    pub fn new(positions: Vec<Vec3>, mut triangles: Vec<[usize; 3]>, pole: Vec3) -> Result<Self, SurfaceError> {
        let n = positions.len();
        for (i, p) in positions.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(SurfaceError::InvalidMesh(format!("vertex {i} has non-finite coordinates")));
            }
        }
        for (i, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= n) {
                return Err(SurfaceError::InvalidMesh(format!("triangle {i} references a missing vertex")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(SurfaceError::InvalidMesh(format!("triangle {i} repeats a vertex")));
            }
        }
        let counts = edge_counts(&triangles);
        let mut bad: Vec<(usize, usize)> = counts.iter().filter(|(_, &c)| c > 2).map(|(&e, _)| e).collect();
        if !bad.is_empty() {
            bad.sort_unstable();
            return Err(SurfaceError::NonManifold { edges: bad });
        }
        orient(&mut triangles)?;
        let mut tags = vec![VertexTag::Interior; n];
        for (&(a, b), &c) in &counts {
            if c == 1 {
                tags[a] = VertexTag::OuterTruncation;
                tags[b] = VertexTag::OuterTruncation;
            }
        }
        let r = positions.iter().map(|&p| vec3::dist(p, pole)).collect();
        Ok(TriMesh { positions, triangles, r, tags, pole })
    }

    pub(crate) fn mark_seam(&mut self, vertices: impl IntoIterator<Item = usize>) {
        for v in vertices {
            if self.tags[v] == VertexTag::Interior {
                self.tags[v] = VertexTag::Seam;
            }
        }
    }

    /// Same surface measured from another pole.
    pub fn with_pole(mut self, pole: Vec3) -> Self {
        self.r = self.positions.iter().map(|&p| vec3::dist(p, pole)).collect();
        self.pole = pole;
        self
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Extrinsic distance of each vertex to the pole.
    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn tags(&self) -> &[VertexTag] {
        &self.tags
    }

    pub fn pole(&self) -> Vec3 {
        self.pole
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn max_r(&self) -> f64 {
        self.r.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest `r` on the window boundary, infinite for a closed mesh.
    pub fn truncation_radius(&self) -> f64 {
        self.r
            .iter()
            .zip(&self.tags)
            .filter(|(_, &t)| t == VertexTag::OuterTruncation)
            .map(|(&r, _)| r)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.triangles[f];
        vec3::triangle_area(self.positions[a], self.positions[b], self.positions[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn mean_edge_length(&self) -> f64 {
        let mut sum = 0.0;
        for t in &self.triangles {
            for k in 0..3 {
                sum += vec3::dist(self.positions[t[k]], self.positions[t[(k + 1) % 3]]);
            }
        }
        sum / (3 * self.triangles.len()).max(1) as f64
    }

    /// Distance from the pole to the surface.
    pub fn pole_distance(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                vec3::point_triangle_distance(self.pole, self.positions[t[0]], self.positions[t[1]], self.positions[t[2]])
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Deterministic fingerprint of positions, connectivity and pole.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for p in &self.positions {
            for c in p {
                c.to_bits().hash(&mut h);
            }
        }
        self.triangles.hash(&mut h);
        for c in &self.pole {
            c.to_bits().hash(&mut h);
        }
        h.finish()
    }

    /// Vertex adjacency lists in ascending order.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.positions.len()];
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }
}

/// Flips triangles so that every interior edge is traversed in opposite
/// directions by its two triangles.
fn orient(triangles: &mut [[usize; 3]]) -> Result<(), SurfaceError> {
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::with_capacity(triangles.len() * 2);
    for (i, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            by_edge.entry(edge_key(t[k], t[(k + 1) % 3])).or_default().push(i);
        }
    }
    let directed = |t: &[usize; 3], a: usize, b: usize| (0..3).any(|k| t[k] == a && t[(k + 1) % 3] == b);
    let mut visited = vec![false; triangles.len()];
    for seed in 0..triangles.len() {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        let mut queue = VecDeque::from([seed]);
        while let Some(i) = queue.pop_front() {
            let t = triangles[i];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                for &j in &by_edge[&edge_key(a, b)] {
                    if j == i {
                        continue;
                    }
                    let clash = directed(&triangles[j], a, b);
                    if visited[j] {
                        if clash {
                            return Err(SurfaceError::NonOrientable);
                        }
                    } else {
                        if clash {
                            triangles[j].swap(1, 2);
                        }
                        visited[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    Ok(())
}
