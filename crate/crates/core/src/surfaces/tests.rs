use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::*;

fn none() -> BTreeMap<String, f64> {
    BTreeMap::new()
}

fn with(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn sphere_band() -> ParamSurface {
    ParamSurface::new("sphere", (0.0, 2.0 * PI), (-1.2, 1.2), (true, false), |u, v| {
        [v.cos() * u.cos(), v.cos() * u.sin(), v.sin()]
    })
    .unwrap()
}

#[test]
fn builtin_maps() {
    assert_eq!(builtin("plane", &none()).unwrap().eval(1.0, 2.0), [1.0, 2.0, 0.0]);
    assert_eq!(builtin("catenoid", &with(&[("a", 1.0)])).unwrap().eval(0.0, 0.0), [1.0, 0.0, 0.0]);
    assert_eq!(builtin("enneper", &none()).unwrap().eval(0.0, 0.0), [0.0, 0.0, 0.0]);
    let h = builtin("helicoid", &with(&[("c", 2.0)])).unwrap().eval(PI / 2.0, 1.0);
    assert!((h[0]).abs() < 1e-15 && (h[1] - 1.0).abs() < 1e-15 && (h[2] - PI).abs() < 1e-15);
    assert!(matches!(builtin("scherk", &none()), Err(SurfaceError::UnknownSurface(_))));
    assert!(matches!(builtin("catenoid", &with(&[("a", -1.0)])), Err(SurfaceError::InvalidParameter(_))));
    assert!(matches!(builtin("plane", &with(&[("a", 1.0)])), Err(SurfaceError::InvalidParameter(_))));
}

#[test]
fn non_immersion_is_rejected() {
    let folded = ParamSurface::new("fold", (-1.0, 1.0), (-1.0, 1.0), (false, false), |u, v| [u * u, v, 0.0]);
    assert!(matches!(folded, Err(SurfaceError::NotImmersed { .. })));
}

#[test]
fn plane_tessellation() {
    let m = tessellate(&builtin("plane", &none()).unwrap(), 64, 64, &[]).unwrap();
    assert_eq!(m.triangles().len(), 2 * 64 * 64);
    assert_eq!(m.vertex_count(), 65 * 65);
    assert!((m.max_r() - 4.0 * 2f64.sqrt()).abs() < 1e-12);
    assert!((m.total_area() / 64.0 - 1.0).abs() < 1e-12);
    let boundary = m.tags().iter().filter(|&&t| t == VertexTag::OuterTruncation).count();
    assert_eq!(boundary, 4 * 64);
    for (p, &r) in m.positions().iter().zip(m.r()) {
        assert_eq!(r, crate::vec3::dist(*p, [0.0; 3]));
    }
}

#[test]
fn catenoid_tessellation_is_stitched() {
    let s = builtin("catenoid", &with(&[("vmax", 3.0)])).unwrap();
    let m = tessellate(&s, 32, 24, &[]).unwrap();
    assert_eq!(m.vertex_count(), 32 * 25);
    assert_eq!(m.triangles().len(), 2 * 32 * 24);
    assert!(m.max_r() >= 3f64.cosh());
    assert_eq!(m.tags().iter().filter(|&&t| t == VertexTag::OuterTruncation).count(), 64);
    assert_eq!(m.tags().iter().filter(|&&t| t == VertexTag::Seam).count(), 23);
}

#[test]
fn resolution_precondition() {
    let s = builtin("plane", &none()).unwrap();
    assert!(matches!(tessellate(&s, 4, 16, &[]), Err(SurfaceError::Resolution { nu: 4, nv: 16 })));
}

#[test]
fn refinement_is_conforming_and_keeps_area() {
    let s = builtin("catenoid", &none()).unwrap();
    let coarse = tessellate(&s, 24, 24, &[]).unwrap();
    let fine = tessellate(&s, 24, 24, &[3.0]).unwrap();
    assert!(fine.triangles().len() > coarse.triangles().len());
    // every interior edge is shared by exactly two triangles
    let counts = mesh::edge_counts(fine.triangles());
    let boundary = counts.values().filter(|&&c| c == 1).count();
    assert_eq!(boundary, 48);
    assert!(counts.values().all(|&c| c <= 2));
    // new vertices lie on the surface
    for p in fine.positions() {
        let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
        assert!((rho - p[2].cosh()).abs() < 1e-12);
    }
    let plane = builtin("plane", &none()).unwrap();
    let refined = tessellate(&plane, 16, 16, &[2.0]).unwrap();
    assert!((refined.total_area() / 64.0 - 1.0).abs() < 1e-12);
}

#[test]
fn refinement_coverage_is_checked() {
    let s = builtin("plane", &none()).unwrap();
    match tessellate(&s, 16, 16, &[3.5]) {
        Err(SurfaceError::InsufficientCoverage { radius, reached }) => {
            assert!((radius - 4.2).abs() < 1e-12);
            assert_eq!(reached, 4.0);
        }
        other => panic!("expected coverage error, got {other:?}"),
    }
}

#[test]
fn residual_examples() {
    let plane = tessellate(&builtin("plane", &none()).unwrap(), 32, 32, &[]).unwrap();
    assert!(minimality_residual(&plane) < 1e-12);
    let sphere = tessellate(&sphere_band(), 96, 48, &[]).unwrap();
    assert!((minimality_residual(&sphere) - 2.0).abs() < 2e-2);
}

#[test]
fn catenoid_residual_shrinks_under_refinement() {
    let s = builtin("catenoid", &none()).unwrap();
    let coarse = minimality_residual(&tessellate(&s, 64, 64, &[]).unwrap());
    let fine = minimality_residual(&tessellate(&s, 128, 128, &[]).unwrap());
    assert!(fine <= 5e-3, "{fine}");
    assert!(fine < coarse / 1.8, "{coarse} -> {fine}");
}

#[test]
fn residual_converges_for_every_builtin() {
    for name in ["helicoid", "enneper"] {
        let s = builtin(name, &none()).unwrap();
        let coarse = minimality_residual(&tessellate(&s, 48, 48, &[]).unwrap());
        let fine = minimality_residual(&tessellate(&s, 96, 96, &[]).unwrap());
        assert!(fine < coarse / 1.8, "{name}: {coarse} -> {fine}");
    }
}

#[test]
fn off_round_trip() {
    let m = tessellate(&builtin("enneper", &none()).unwrap(), 8, 8, &[]).unwrap();
    let mut buf = Vec::new();
    write_off(&m, &mut buf).unwrap();
    let (p, t) = parse_off(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(p, m.positions());
    assert_eq!(t, m.triangles());
}

#[test]
fn off_and_obj_examples() {
    let off = "OFF\n# square\n4 2 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n3 0 2 3\n";
    let (p, t) = parse_off(off).unwrap();
    let m = TriMesh::new(p, t, [0.0; 3]).unwrap();
    assert_eq!(m.vertex_count(), 4);
    assert_eq!(m.r(), &[0.0, 1.0, 2f64.sqrt(), 1.0]);
    let obj = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n";
    let (_, t) = parse_obj(obj).unwrap();
    assert_eq!(t, vec![[0, 1, 2], [0, 2, 3]]);
    let (_, t) = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n").unwrap();
    assert_eq!(t, vec![[0, 1, 2]]);
}

#[test]
fn malformed_files_report_lines() {
    assert!(matches!(parse_off("OFF\n2 0 0\n0 0 0\n1 x 0\n"), Err(SurfaceError::Parse { line: 4, .. })));
    assert!(matches!(parse_off("OFF\n1 1 0\n0 0 0\n3 0 1 2\n"), Err(SurfaceError::Parse { line: 4, .. })));
    assert!(matches!(parse_off("PLY\n"), Err(SurfaceError::Parse { line: 1, .. })));
    assert!(matches!(parse_obj("v 0 0 0\nf 1 2\n"), Err(SurfaceError::Parse { line: 2, .. })));
    assert!(matches!(parse_obj("v 0 0\n"), Err(SurfaceError::Parse { line: 1, .. })));
}

#[test]
fn non_manifold_edge_is_listed() {
    let off = "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 -1 0\n0 0 1\n3 0 1 2\n3 0 1 3\n3 0 1 4\n";
    let (p, t) = parse_off(off).unwrap();
    match TriMesh::new(p, t, [0.0; 3]) {
        Err(SurfaceError::NonManifold { edges }) => assert_eq!(edges, vec![(0, 1)]),
        other => panic!("expected non-manifold error, got {other:?}"),
    }
}

#[test]
fn load_mesh_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("square.off");
    std::fs::write(&path, "OFF\n4 2 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n3 0 2 3\n").unwrap();
    assert_eq!(MeshFormat::from_path(&path), Some(MeshFormat::Off));
    let m = load_mesh(&path, MeshFormat::Off, [1.0, 1.0, 0.0]).unwrap();
    assert_eq!(m.r()[2], 0.0);
    assert!(load_mesh(&dir.path().join("missing.off"), MeshFormat::Off, [0.0; 3]).is_err());
}
