//! Minimal surfaces in R³: analytic parametrizations, tessellation, mesh I/O.

mod io;
mod mesh;

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use io::{load_mesh, parse_obj, parse_off, write_off, MeshFormat};
pub use mesh::{TriMesh, VertexTag};

use crate::vec3::{self, Vec3};
pub(crate) use mesh::edge_counts;
use mesh::edge_key;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("unknown surface `{0}` (expected plane, catenoid, helicoid or enneper)")]
    UnknownSurface(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("resolution {nu}x{nv} is below the minimum of 8 per axis")]
    Resolution { nu: usize, nv: usize },
    #[error("map is not an immersion near (u, v) = ({u}, {v})")]
    NotImmersed { u: f64, v: f64 },
    #[error("{count} degenerate triangles; smallest is #{worst} with area ratio {ratio:e} to the mean")]
    DegenerateTriangles { count: usize, worst: usize, ratio: f64 },
    #[error("mesh only covers extrinsic radius {reached} but radius {radius} is required")]
    InsufficientCoverage { radius: f64, reached: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("non-manifold edges: {edges:?}")]
    NonManifold { edges: Vec<(usize, usize)> },
    #[error("mesh is not orientable")]
    NonOrientable,
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

type SurfaceMap = dyn Fn(f64, f64) -> Vec3 + Send + Sync;

/// A parametrized surface `(u, v) ↦ (x, y, z)` over a rectangle.
#[derive(Clone)]
pub struct ParamSurface {
    name: String,
    params: BTreeMap<String, f64>,
    u_range: (f64, f64),
    v_range: (f64, f64),
    periodic_u: bool,
    periodic_v: bool,
    map: Arc<SurfaceMap>,
}

impl fmt::Debug for ParamSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamSurface")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("u_range", &self.u_range)
            .field("v_range", &self.v_range)
            .field("periodic_u", &self.periodic_u)
            .field("periodic_v", &self.periodic_v)
            .finish()
    }
}

const IMMERSION_SAMPLES: usize = 17;

impl ParamSurface {
    /// Builds a surface and checks by sampling that `map` is an immersion.
    pub fn new(
        name: impl Into<String>,
        u_range: (f64, f64),
        v_range: (f64, f64),
        periodic: (bool, bool),
        map: impl Fn(f64, f64) -> Vec3 + Send + Sync + 'static,
    ) -> Result<Self, SurfaceError> {
        for (lo, hi) in [u_range, v_range] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(SurfaceError::InvalidParameter(format!("empty parameter range [{lo}, {hi}]")));
            }
        }
        let s = ParamSurface {
            name: name.into(),
            params: BTreeMap::new(),
            u_range,
            v_range,
            periodic_u: periodic.0,
            periodic_v: periodic.1,
            map: Arc::new(map),
        };
        s.check_immersion()?;
        Ok(s)
    }

    fn with_params(mut self, params: BTreeMap<String, f64>) -> Self {
        self.params = params;
        self
    }

    fn check_immersion(&self) -> Result<(), SurfaceError> {
        let (u0, u1) = self.u_range;
        let (v0, v1) = self.v_range;
        let hu = 1e-6 * (u1 - u0);
        let hv = 1e-6 * (v1 - v0);
        for i in 0..IMMERSION_SAMPLES {
            for j in 0..IMMERSION_SAMPLES {
                let u = u0 + (u1 - u0) * (i as f64 + 0.5) / IMMERSION_SAMPLES as f64;
                let v = v0 + (v1 - v0) * (j as f64 + 0.5) / IMMERSION_SAMPLES as f64;
                let du = vec3::scale(vec3::sub(self.eval(u + hu, v), self.eval(u - hu, v)), 0.5 / hu);
                let dv = vec3::scale(vec3::sub(self.eval(u, v + hv), self.eval(u, v - hv)), 0.5 / hv);
                let n = vec3::norm(vec3::cross(du, dv));
                if !(n > 1e-8 * vec3::norm(du) * vec3::norm(dv)) {
                    return Err(SurfaceError::NotImmersed { u, v });
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn u_range(&self) -> (f64, f64) {
        self.u_range
    }

    pub fn v_range(&self) -> (f64, f64) {
        self.v_range
    }

    pub fn eval(&self, u: f64, v: f64) -> Vec3 {
        (self.map)(u, v)
    }

    /// Replaces the parameter rectangle.
    pub fn with_rect(mut self, u_range: (f64, f64), v_range: (f64, f64)) -> Result<Self, SurfaceError> {
        for (lo, hi) in [u_range, v_range] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(SurfaceError::InvalidParameter(format!("empty parameter range [{lo}, {hi}]")));
            }
        }
        self.u_range = u_range;
        self.v_range = v_range;
        self.check_immersion()?;
        Ok(self)
    }
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn positive(name: &str, x: f64) -> Result<f64, SurfaceError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(SurfaceError::InvalidParameter(format!("{name} must be positive, got {x}")))
    }
}

/// Built-in minimal surfaces.
///
/// | name | map | parameters (default) |
/// |---|---|---|
/// | plane | `(u, v, 0)` | `half` (4): rectangle `[-half, half]²` |
/// | catenoid | `(a cosh v cos u, a cosh v sin u, a v)` | `a` (1), `vmax` (4); `u` periodic |
/// | helicoid | `(v cos u, v sin u, c u)` | `c` (1), `umax` (3π), `vmax` (6) |
/// | enneper | `(u − u³/3 + uv², −v + v³/3 − vu², u² − v²)` | `half` (3.5) |
pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<ParamSurface, SurfaceError> {
    let allowed: &[&str] = match name {
        "plane" | "enneper" => &["half"],
        "catenoid" => &["a", "vmax"],
        "helicoid" => &["c", "umax", "vmax"],
        other => return Err(SurfaceError::UnknownSurface(other.to_string())),
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(SurfaceError::InvalidParameter(format!("`{k}` is not a parameter of {name}")));
    }
    let surface = match name {
        "plane" => {
            let h = positive("half", param(params, "half", 4.0))?;
            ParamSurface::new("plane", (-h, h), (-h, h), (false, false), |u, v| [u, v, 0.0])?
        }
        "catenoid" => {
            let a = positive("a", param(params, "a", 1.0))?;
            let vmax = positive("vmax", param(params, "vmax", 4.0))?;
            ParamSurface::new("catenoid", (0.0, 2.0 * PI), (-vmax, vmax), (true, false), move |u, v| {
                let c = a * v.cosh();
                [c * u.cos(), c * u.sin(), a * v]
            })?
        }
        "helicoid" => {
            let c = positive("c", param(params, "c", 1.0))?;
            let umax = positive("umax", param(params, "umax", 3.0 * PI))?;
            let vmax = positive("vmax", param(params, "vmax", 6.0))?;
            ParamSurface::new("helicoid", (-umax, umax), (-vmax, vmax), (false, false), move |u, v| {
                [v * u.cos(), v * u.sin(), c * u]
            })?
        }
        _ => {
            let h = positive("half", param(params, "half", 3.5))?;
            ParamSurface::new("enneper", (-h, h), (-h, h), (false, false), |u, v| {
                [u - u * u * u / 3.0 + u * v * v, -v + v * v * v / 3.0 - v * u * u, u * u - v * v]
            })?
        }
    };
    Ok(surface.with_params(params.clone()))
}

/// Grid tessellation with one optional round of red-green refinement.
pub fn tessellate(s: &ParamSurface, nu: usize, nv: usize, refine_near: &[f64]) -> Result<TriMesh, SurfaceError> {
    tessellate_about(s, nu, nv, refine_near, [0.0; 3])
}

/// As [`tessellate`], measuring `r` from `pole`.
pub fn tessellate_about(
    s: &ParamSurface,
    nu: usize,
    nv: usize,
    refine_near: &[f64],
    pole: Vec3,
) -> Result<TriMesh, SurfaceError> {
    if nu < 8 || nv < 8 {
        return Err(SurfaceError::Resolution { nu, nv });
    }
    if let Some(bad) = refine_near.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(SurfaceError::InvalidParameter(format!("refinement radius {bad} must be positive")));
    }
    let (u0, u1) = s.u_range;
    let (v0, v1) = s.v_range;
    let cols = if s.periodic_u { nu } else { nu + 1 };
    let rows = if s.periodic_v { nv } else { nv + 1 };
    let mut params = Vec::with_capacity(cols * rows);
    for j in 0..rows {
        let v = v0 + (v1 - v0) * j as f64 / nv as f64;
        for i in 0..cols {
            params.push([u0 + (u1 - u0) * i as f64 / nu as f64, v]);
        }
    }
    let id = |i: usize, j: usize| (j % rows) * cols + (i % cols);
    let mut triangles = Vec::with_capacity(2 * nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    if !refine_near.is_empty() {
        let r: Vec<f64> = params.iter().map(|p| vec3::dist(s.eval(p[0], p[1]), pole)).collect();
        triangles = refine(s, &mut params, &triangles, &r, refine_near);
    }
    let positions: Vec<Vec3> = params.iter().map(|p| s.eval(p[0], p[1])).collect();
    check_degenerate(&positions, &triangles)?;
    let mut mesh = TriMesh::new(positions, triangles, pole)?;
    let seam: Vec<usize> = (0..params.len())
        .filter(|&k| (s.periodic_u && params[k][0] == u0) || (s.periodic_v && params[k][1] == v0))
        .collect();
    mesh.mark_seam(seam);
    if let Some(&deepest) = refine_near.iter().max_by(|a, b| a.total_cmp(b)) {
        let needed = 1.2 * deepest;
        let reached = mesh.truncation_radius();
        if reached < needed {
            return Err(SurfaceError::InsufficientCoverage { radius: needed, reached });
        }
    }
    Ok(mesh)
}

fn check_degenerate(positions: &[Vec3], triangles: &[[usize; 3]]) -> Result<(), SurfaceError> {
    let areas: Vec<f64> =
        triangles.iter().map(|t| vec3::triangle_area(positions[t[0]], positions[t[1]], positions[t[2]])).collect();
    let mean = areas.iter().sum::<f64>() / areas.len() as f64;
    let mut count = 0;
    let mut worst = (0, f64::INFINITY);
    for (k, &a) in areas.iter().enumerate() {
        if !(a >= 1e-14 * mean) {
            count += 1;
            if !(a >= worst.1) {
                worst = (k, a);
            }
        }
    }
    if count > 0 {
        return Err(SurfaceError::DegenerateTriangles { count, worst: worst.0, ratio: worst.1 / mean });
    }
    Ok(())
}

/// Splits every triangle whose `r`-range contains one of `radii` into four,
/// closing the resulting hanging nodes by bisection.
fn refine(
    s: &ParamSurface,
    params: &mut Vec<[f64; 2]>,
    triangles: &[[usize; 3]],
    r: &[f64],
    radii: &[f64],
) -> Vec<[usize; 3]> {
    let crosses = |t: &[usize; 3]| {
        let lo = t.iter().map(|&k| r[k]).fold(f64::INFINITY, f64::min);
        let hi = t.iter().map(|&k| r[k]).fold(f64::NEG_INFINITY, f64::max);
        radii.iter().any(|&x| lo <= x && x <= hi)
    };
    let mut red: Vec<bool> = triangles.iter().map(crosses).collect();
    let mut split: HashMap<(usize, usize), usize> = HashMap::new();
    loop {
        split.clear();
        for (t, _) in triangles.iter().zip(&red).filter(|(_, &is_red)| is_red) {
            for k in 0..3 {
                split.insert(edge_key(t[k], t[(k + 1) % 3]), usize::MAX);
            }
        }
        let mut changed = false;
        for (t, is_red) in triangles.iter().zip(red.iter_mut()) {
            if !*is_red && (0..3).filter(|&k| split.contains_key(&edge_key(t[k], t[(k + 1) % 3]))).count() >= 2 {
                *is_red = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut keys: Vec<(usize, usize)> = split.keys().copied().collect();
    keys.sort_unstable();
    let (u0, u1) = s.u_range;
    let (v0, v1) = s.v_range;
    for key in keys {
        let (p, q) = (params[key.0], params[key.1]);
        let mid = [
            periodic_midpoint(p[0], q[0], u0, u1, s.periodic_u),
            periodic_midpoint(p[1], q[1], v0, v1, s.periodic_v),
        ];
        split.insert(key, params.len());
        params.push(mid);
    }
    let mut out = Vec::with_capacity(triangles.len() + 3 * split.len());
    for (t, &is_red) in triangles.iter().zip(&red) {
        let m = |k: usize| split.get(&edge_key(t[k], t[(k + 1) % 3])).copied();
        if is_red {
            let (ab, bc, ca) = (m(0).unwrap(), m(1).unwrap(), m(2).unwrap());
            out.push([t[0], ab, ca]);
            out.push([ab, t[1], bc]);
            out.push([ca, bc, t[2]]);
            out.push([ab, bc, ca]);
        } else if let Some(k) = (0..3).find(|&k| m(k).is_some()) {
            let mid = m(k).unwrap();
            let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            out.push([a, mid, c]);
            out.push([mid, b, c]);
        } else {
            out.push(*t);
        }
    }
    out
}

fn periodic_midpoint(a: f64, b: f64, lo: f64, hi: f64, periodic: bool) -> f64 {
    if !periodic {
        return 0.5 * (a + b);
    }
    let period = hi - lo;
    let mut b = b;
    if b - a > 0.5 * period {
        b -= period;
    } else if a - b > 0.5 * period {
        b += period;
    }
    let mut mid = 0.5 * (a + b);
    if mid < lo {
        mid += period;
    } else if mid >= hi {
        mid -= period;
    }
    mid
}

/// 95th percentile over non-boundary vertices of `|Δx|`, the norm of the
/// cotangent Laplacian of the coordinates divided by the barycentric area.
pub fn minimality_residual(mesh: &TriMesh) -> f64 {
    let pos = mesh.positions();
    let mut lap = vec![[0.0; 3]; pos.len()];
    let mut area = vec![0.0; pos.len()];
    for t in mesh.triangles() {
        let p = [pos[t[0]], pos[t[1]], pos[t[2]]];
        let a = vec3::triangle_area(p[0], p[1], p[2]);
        for k in 0..3 {
            area[t[k]] += a / 3.0;
            let (i, j, o) = (k, (k + 1) % 3, (k + 2) % 3);
            let w = 0.5 * vec3::cot_at(p[o], p[i], p[j]);
            let d = vec3::scale(vec3::sub(p[j], p[i]), w);
            lap[t[i]] = vec3::add(lap[t[i]], d);
            lap[t[j]] = vec3::sub(lap[t[j]], d);
        }
    }
    let mut values: Vec<f64> = (0..pos.len())
        .filter(|&v| mesh.tags()[v] != VertexTag::OuterTruncation && area[v] > 0.0)
        .map(|v| vec3::norm(lap[v]) / area[v])
        .collect();
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let rank = ((0.95 * values.len() as f64).ceil() as usize).clamp(1, values.len());
    values[rank - 1]
}

#[cfg(test)]
mod tests;
