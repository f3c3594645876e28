use std::collections::HashMap;

use serde::Serialize;

use super::DgeomError;
use crate::surfaces::{TriMesh, VertexTag};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionLabel {
    Interior,
    /// On the level set `r = ρ`.
    InnerLevel,
    /// On the level set `r = R`.
    OuterLevel,
    /// On the boundary of the computational window.
    Truncation,
}

/// How `clip` treats window-boundary vertices inside the region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    /// Any window-boundary vertex inside the region is an error.
    Strict,
    /// Keep them and record the contact.
    Allow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryLoop {
    pub label: RegionLabel,
    pub vertices: Vec<usize>,
    pub closed: bool,
}

/// The extrinsic annulus `{ρ ≤ r ≤ R}` cut out of a mesh along linearly
/// interpolated level lines.
#[derive(Debug, Clone)]
pub struct ClippedRegion {
    parent: u64,
    rho: f64,
    big_r: f64,
    positions: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    r: Vec<f64>,
    labels: Vec<RegionLabel>,
    parent_face: Vec<usize>,
    truncation_contact: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Keep,
    On,
    Drop,
}

struct Work {
    positions: Vec<Vec3>,
    r: Vec<f64>,
    labels: Vec<RegionLabel>,
    triangles: Vec<[usize; 3]>,
    parent_face: Vec<usize>,
}

impl Work {
    /// Keeps `r ≥ level` (`keep_above`) or `r ≤ level`. Vertices within `eps`
    /// of the level are placed on it; a triangle lying entirely on the level
    /// belongs to the upper side.
    fn clip(self, level: f64, keep_above: bool, eps: f64, label: RegionLabel) -> Work {
        let side: Vec<Side> = self
            .r
            .iter()
            .map(|&r| {
                if (r - level).abs() <= eps {
                    Side::On
                } else if (r > level) == keep_above {
                    Side::Keep
                } else {
                    Side::Drop
                }
            })
            .collect();
        let mut out = Work {
            positions: self.positions,
            r: self.r,
            labels: self.labels,
            triangles: Vec::with_capacity(self.triangles.len()),
            parent_face: Vec::with_capacity(self.triangles.len()),
        };
        for (i, s) in side.iter().enumerate() {
            if *s == Side::On {
                out.labels[i] = label;
            }
        }
        let mut cuts: HashMap<(usize, usize), usize> = HashMap::new();
        let mut poly: Vec<usize> = Vec::with_capacity(4);
        for (t, &face) in self.triangles.iter().zip(&self.parent_face) {
            let sides = t.map(|v| side[v]);
            if sides.iter().all(|&s| s != Side::Drop) {
                if sides.iter().all(|&s| s == Side::On) && !keep_above {
                    continue;
                }
                out.triangles.push(*t);
                out.parent_face.push(face);
                continue;
            }
            if sides.iter().all(|&s| s != Side::Keep) {
                continue;
            }
            poly.clear();
            for k in 0..3 {
                let (p, q) = (t[k], t[(k + 1) % 3]);
                if side[p] != Side::Drop {
                    poly.push(p);
                }
                let crossing = matches!((side[p], side[q]), (Side::Keep, Side::Drop) | (Side::Drop, Side::Keep));
                if crossing {
                    let key = if p < q { (p, q) } else { (q, p) };
                    let id = *cuts.entry(key).or_insert_with(|| {
                        let (a, b) = key;
                        let t = (level - out.r[a]) / (out.r[b] - out.r[a]);
                        out.positions.push(vec3::lerp(out.positions[a], out.positions[b], t));
                        out.r.push(level);
                        out.labels.push(label);
                        out.positions.len() - 1
                    });
                    poly.push(id);
                }
            }
            match poly.len() {
                3 => {
                    out.triangles.push([poly[0], poly[1], poly[2]]);
                    out.parent_face.push(face);
                }
                4 => {
                    let d02 = vec3::dist(out.positions[poly[0]], out.positions[poly[2]]);
                    let d13 = vec3::dist(out.positions[poly[1]], out.positions[poly[3]]);
                    let pair = if d02 <= d13 {
                        [[poly[0], poly[1], poly[2]], [poly[0], poly[2], poly[3]]]
                    } else {
                        [[poly[1], poly[2], poly[3]], [poly[1], poly[3], poly[0]]]
                    };
                    out.triangles.extend(pair);
                    out.parent_face.extend([face, face]);
                }
                _ => {}
            }
        }
        out
    }
}

/// Clips with [`Coverage::Strict`].
pub fn clip(mesh: &TriMesh, rho: f64, big_r: f64) -> Result<ClippedRegion, DgeomError> {
    clip_with(mesh, rho, big_r, Coverage::Strict)
}

pub fn clip_with(mesh: &TriMesh, rho: f64, big_r: f64, coverage: Coverage) -> Result<ClippedRegion, DgeomError> {
    if !(rho >= 0.0 && big_r.is_finite() && rho < big_r) {
        return Err(DgeomError::InvalidArgument(format!("need 0 <= rho < R, got rho={rho}, R={big_r}")));
    }
    let eps = 1e-12 * big_r;
    let labels = mesh
        .tags()
        .iter()
        .map(|&t| if t == VertexTag::OuterTruncation { RegionLabel::Truncation } else { RegionLabel::Interior })
        .collect();
    let mut work = Work {
        positions: mesh.positions().to_vec(),
        r: mesh.r().to_vec(),
        labels,
        triangles: mesh.triangles().to_vec(),
        parent_face: (0..mesh.triangles().len()).collect(),
    };
    if rho > 0.0 {
        work = work.clip(rho, true, eps, RegionLabel::InnerLevel);
    }
    work = work.clip(big_r, false, eps, RegionLabel::OuterLevel);

    // compact
    let mut map = vec![usize::MAX; work.positions.len()];
    let mut positions = Vec::new();
    let mut r = Vec::new();
    let mut labels = Vec::new();
    for t in &work.triangles {
        for &v in t {
            if map[v] == usize::MAX {
                map[v] = positions.len();
                positions.push(work.positions[v]);
                r.push(work.r[v]);
                labels.push(work.labels[v]);
            }
        }
    }
    let triangles: Vec<[usize; 3]> = work.triangles.iter().map(|t| t.map(|v| map[v])).collect();
    let truncation_r = r
        .iter()
        .zip(&labels)
        .filter(|(_, &l)| l == RegionLabel::Truncation)
        .map(|(&r, _)| r)
        .fold(f64::INFINITY, f64::min);
    let truncation_contact = truncation_r.is_finite();
    if truncation_contact && coverage == Coverage::Strict {
        return Err(DgeomError::Coverage { radius: big_r, truncation_r });
    }
    Ok(ClippedRegion {
        parent: mesh.fingerprint(),
        rho,
        big_r,
        positions,
        triangles,
        r,
        labels,
        parent_face: work.parent_face,
        truncation_contact,
    })
}

impl ClippedRegion {
    /// Fingerprint of the mesh the region was cut from.
    pub fn parent(&self) -> u64 {
        self.parent
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn big_r(&self) -> f64 {
        self.big_r
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn labels(&self) -> &[RegionLabel] {
        &self.labels
    }

    /// Parent mesh face of each region triangle.
    pub fn parent_faces(&self) -> &[usize] {
        &self.parent_face
    }

    pub fn truncation_contact(&self) -> bool {
        self.truncation_contact
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn triangle_area(&self, k: usize) -> f64 {
        let [a, b, c] = self.triangles[k];
        vec3::triangle_area(self.positions[a], self.positions[b], self.positions[c])
    }

    /// Closed boundary polylines, labeled by the level they lie on; loops
    /// touching the window boundary are labeled `Truncation`.
    pub fn boundary_loops(&self) -> Vec<BoundaryLoop> {
        let counts = crate::surfaces::edge_counts(&self.triangles);
        let mut next: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut edges = Vec::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = if a < b { (a, b) } else { (b, a) };
                if counts[&key] == 1 {
                    next.entry(a).or_default().push(b);
                    edges.push((a, b));
                }
            }
        }
        for list in next.values_mut() {
            list.sort_unstable();
            list.reverse();
        }
        edges.sort_unstable();
        let mut loops = Vec::new();
        for (start, _) in edges {
            let Some(list) = next.get_mut(&start) else { continue };
            if list.is_empty() {
                continue;
            }
            let mut vertices = vec![start];
            let mut cur = start;
            let closed = loop {
                let Some(n) = next.get_mut(&cur).and_then(|l| l.pop()) else { break false };
                if n == start {
                    break true;
                }
                vertices.push(n);
                cur = n;
            };
            let label = if vertices.iter().all(|&v| self.labels[v] == RegionLabel::InnerLevel) {
                RegionLabel::InnerLevel
            } else if vertices.iter().all(|&v| self.labels[v] == RegionLabel::OuterLevel) {
                RegionLabel::OuterLevel
            } else {
                RegionLabel::Truncation
            };
            loops.push(BoundaryLoop { label, vertices, closed });
        }
        loops
    }
}
