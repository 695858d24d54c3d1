//! Mesh generators: structured rectangles and the channel-with-cylinder domain.

use std::collections::HashMap;

use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::{enumerate_facets, BoundaryTag, Mesh};
use crate::error::{Error, Result};

/// Center of the obstacle in the channel domain.
pub const CYLINDER_CENTER: [f64; 2] = [0.2, 0.2];
pub const CYLINDER_RADIUS: f64 = 0.05;
const CHANNEL_LENGTH: f64 = 2.2;
const CHANNEL_HEIGHT: f64 = 0.41;

/// Structured mesh of `[x0,x1] x [y0,y1]` with `nx * ny` cells, each split along its
/// lower-left to upper-right diagonal. All boundary facets are Dirichlet.
pub fn generate_rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Mesh {
    let (vertices, elements) = structured_grid(x0, x1, y0, y1, nx, ny);
    Mesh::from_parts(vertices, elements, &[], &[]).expect("structured grid is valid")
}

fn structured_grid(
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    nx: usize,
    ny: usize,
) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    assert!(nx >= 1 && ny >= 1, "grid needs at least one cell per direction");
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { x1 } else { x0 + (x1 - x0) * i as f64 / nx as f64 };
            let y = if j == ny { y1 } else { y0 + (y1 - y0) * j as f64 / ny as f64 };
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut elements = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            elements.push([a, b, c]);
            elements.push([a, c, d]);
        }
    }
    (vertices, elements)
}

/// `2 n^2` triangles on the unit square; with `periodic`, left/right and
/// bottom/top boundary facets are identified (left and bottom are masters).
pub fn generate_unit_square(n: usize, periodic: bool) -> Mesh {
    let (vertices, elements) = structured_grid(0.0, 1.0, 0.0, 1.0, n, n);
    let mut pairs = Vec::new();
    if periodic {
        let (_, index) = enumerate_facets(&elements);
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let f = |a: usize, b: usize| index[&[a.min(b), a.max(b)]];
        for j in 0..n {
            pairs.push((f(id(0, j), id(0, j + 1)), f(id(n, j), id(n, j + 1))));
        }
        for i in 0..n {
            pairs.push((f(id(i, 0), id(i + 1, 0)), f(id(i, n), id(i + 1, n))));
        }
    }
    Mesh::from_parts(vertices, elements, &[], &pairs).expect("unit square mesh is valid")
}

/// Structured mesh of the Kovasznay domain `[-1/2, 1] x [-1/2, 3/2]` with roughly
/// `target` elements, choosing the grid whose cells are closest to square.
pub fn kovasznay_mesh(target: usize) -> Mesh {
    let (w, h) = (1.5, 2.0);
    let mut best = (f64::INFINITY, 1usize, 1usize);
    for nx in 1..=64usize {
        for ny in 1..=64usize {
            let count = 2 * nx * ny;
            let rel = (count as f64 - target as f64).abs() / target.max(1) as f64;
            if rel > 0.25 && !(best.0.is_infinite() && nx == 64 && ny == 64) {
                continue;
            }
            let aspect = ((w / nx as f64) / (h / ny as f64)).ln().abs();
            let score = aspect + 0.1 * rel;
            if score < best.0 {
                best = (score, nx, ny);
            }
        }
    }
    if best.0.is_infinite() {
        // tiny targets: fall back to the closest count
        let nx = ((target as f64 / 2.0 * w / h).sqrt().round() as usize).max(1);
        let ny = ((target as f64 / 2.0 / nx as f64).round() as usize).max(1);
        best = (0.0, nx, ny);
    }
    generate_rectangle(-0.5, 1.0, -0.5, 1.5, best.1, best.2)
}

fn cylinder_distance(p: [f64; 2]) -> f64 {
    ((p[0] - CYLINDER_CENTER[0]).powi(2) + (p[1] - CYLINDER_CENTER[1]).powi(2)).sqrt() - CYLINDER_RADIUS
}

/// Unstructured mesh of the channel around the cylinder.
///
/// Element size is `h_target` away from the obstacle and grades down to about
/// `h_target / 3` on the cylinder polygon, whose chords never exceed `h_target`.
/// Inflow is `x = 0`, outflow `x = 2.2`, every other boundary facet is wall.
pub fn generate_channel_cylinder(h_target: f64) -> Result<Mesh> {
    if !(h_target > 0.0 && h_target < CHANNEL_HEIGHT) {
        return Err(Error::MeshGeneration(format!(
            "h_target must lie in (0, {CHANNEL_HEIGHT}), got {h_target}"
        )));
    }
    let h_cyl = h_target / 3.0;
    let grading = 0.3;
    let size = |p: [f64; 2]| (h_cyl + grading * cylinder_distance(p).max(0.0)).min(h_target);

    // boundary points: cylinder polygon and the outer rectangle
    let n_cyl = ((2.0 * std::f64::consts::PI * CYLINDER_RADIUS / h_cyl).ceil() as usize).max(8);
    let mut cyl = Vec::with_capacity(n_cyl);
    for i in 0..n_cyl {
        let a = 2.0 * std::f64::consts::PI * i as f64 / n_cyl as f64;
        cyl.push([
            CYLINDER_CENTER[0] + CYLINDER_RADIUS * a.cos(),
            CYLINDER_CENTER[1] + CYLINDER_RADIUS * a.sin(),
        ]);
    }
    let corners = [
        [0.0, 0.0],
        [CHANNEL_LENGTH, 0.0],
        [CHANNEL_LENGTH, CHANNEL_HEIGHT],
        [0.0, CHANNEL_HEIGHT],
    ];
    let mut outer: Vec<[f64; 2]> = Vec::new();
    for c in 0..4 {
        let (a, b) = (corners[c], corners[(c + 1) % 4]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        // equidistribute points in the metric 1 / size along the edge
        let samples = 4000;
        let mut cum = vec![0.0; samples + 1];
        for i in 0..samples {
            let t = (i as f64 + 0.5) / samples as f64;
            let p = [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t];
            cum[i + 1] = cum[i] + len / samples as f64 / size(p);
        }
        let nseg = (cum[samples].ceil() as usize).max(1);
        let mut i = 0;
        for s in 0..nseg {
            let target = cum[samples] * s as f64 / nseg as f64;
            while cum[i + 1] < target {
                i += 1;
            }
            let frac = if cum[i + 1] > cum[i] { (target - cum[i]) / (cum[i + 1] - cum[i]) } else { 0.0 };
            let t = (i as f64 + frac) / samples as f64;
            outer.push([a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t]);
        }
    }

    let mut boundary_points: Vec<[f64; 2]> = outer.clone();
    boundary_points.extend_from_slice(&cyl);

    // greedy interior point placement on a fine candidate lattice, finest sizes first
    let step = h_cyl / 2.5;
    let nxc = (CHANNEL_LENGTH / step).ceil() as usize;
    let nyc = (CHANNEL_HEIGHT / step).ceil() as usize;
    let mut candidates = Vec::new();
    for j in 1..nyc {
        for i in 1..nxc {
            // stagger alternate rows for a hexagonal-ish pattern
            let shift = if j % 2 == 0 { 0.0 } else { 0.5 * step };
            let p = [i as f64 * step + shift, j as f64 * step];
            if p[0] <= 0.0 || p[0] >= CHANNEL_LENGTH || p[1] >= CHANNEL_HEIGHT {
                continue;
            }
            let s = size(p);
            let wall = p[0].min(CHANNEL_LENGTH - p[0]).min(p[1]).min(CHANNEL_HEIGHT - p[1]);
            if wall < 0.7 * s || cylinder_distance(p) < 0.7 * s {
                continue;
            }
            candidates.push((s, p));
        }
    }
    candidates.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1[1].partial_cmp(&b.1[1]).unwrap())
            .then(a.1[0].partial_cmp(&b.1[0]).unwrap())
    });
    let cell = h_target;
    let mut grid: HashMap<(i64, i64), Vec<[f64; 2]>> = HashMap::new();
    let key = |p: [f64; 2]| ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64);
    for &p in &boundary_points {
        grid.entry(key(p)).or_default().push(p);
    }
    let mut interior = Vec::new();
    for (s, p) in candidates {
        let r = 0.85 * s;
        let (ci, cj) = key(p);
        let mut ok = true;
        'search: for di in -1..=1 {
            for dj in -1..=1 {
                if let Some(list) = grid.get(&(ci + di, cj + dj)) {
                    for q in list {
                        if (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) < r * r {
                            ok = false;
                            break 'search;
                        }
                    }
                }
            }
        }
        if ok {
            grid.entry(key(p)).or_default().push(p);
            interior.push(p);
        }
    }

    let n_outer = outer.len();
    let mut points = boundary_points;
    let n_fixed = points.len();
    points.extend_from_slice(&interior);

    let mut triangles = triangulate(&points, n_outer, n_cyl)?;
    // Laplacian smoothing of the interior points, retriangulating after each sweep
    for _ in 0..4 {
        let mut sum = vec![[0.0f64; 2]; points.len()];
        let mut count = vec![0usize; points.len()];
        for t in &triangles {
            for a in 0..3 {
                for b in 0..3 {
                    if a != b {
                        sum[t[a]][0] += points[t[b]][0];
                        sum[t[a]][1] += points[t[b]][1];
                        count[t[a]] += 1;
                    }
                }
            }
        }
        for i in n_fixed..points.len() {
            if count[i] > 0 {
                points[i] = [sum[i][0] / count[i] as f64, sum[i][1] / count[i] as f64];
            }
        }
        triangles = triangulate(&points, n_outer, n_cyl)?;
    }

    // drop unused vertices and renumber
    let mut used = vec![usize::MAX; points.len()];
    let mut vertices = Vec::new();
    let mut elements = Vec::with_capacity(triangles.len());
    for t in &triangles {
        let mut el = [0usize; 3];
        for a in 0..3 {
            if used[t[a]] == usize::MAX {
                used[t[a]] = vertices.len();
                vertices.push(points[t[a]]);
            }
            el[a] = used[t[a]];
        }
        elements.push(el);
    }
    let (list, _) = enumerate_facets(&elements);
    let mut count = vec![0usize; list.len()];
    {
        let (_, index) = enumerate_facets(&elements);
        for el in &elements {
            for i in 0..3 {
                let (a, b) = (el[(i + 1) % 3], el[(i + 2) % 3]);
                count[index[&[a.min(b), a.max(b)]]] += 1;
            }
        }
    }
    let eps = 1e-9;
    let mut boundary = Vec::new();
    for (f, &[a, b]) in list.iter().enumerate() {
        if count[f] != 1 {
            continue;
        }
        let (p, q) = (vertices[a], vertices[b]);
        let tag = if p[0].abs() < eps && q[0].abs() < eps {
            BoundaryTag::Inflow
        } else if (p[0] - CHANNEL_LENGTH).abs() < eps && (q[0] - CHANNEL_LENGTH).abs() < eps {
            BoundaryTag::Outflow
        } else {
            BoundaryTag::Wall
        };
        boundary.push((a, b, tag));
    }
    let mesh = Mesh::from_parts(vertices, elements, &boundary, &[])?;
    let area = CHANNEL_LENGTH * CHANNEL_HEIGHT
        - 0.5 * n_cyl as f64 * CYLINDER_RADIUS.powi(2) * (2.0 * std::f64::consts::PI / n_cyl as f64).sin();
    if (mesh.total_area() - area).abs() > 1e-9 * area {
        return Err(Error::MeshGeneration(format!(
            "triangulation covers area {} instead of {area}",
            mesh.total_area()
        )));
    }
    Ok(mesh)
}

/// Constrained Delaunay triangulation of the point set; returns counterclockwise
/// triangles outside the cylinder polygon.
fn triangulate(points: &[[f64; 2]], n_outer: usize, n_cyl: usize) -> Result<Vec<[usize; 3]>> {
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::new();
    let mut handles = Vec::with_capacity(points.len());
    for p in points {
        let h = cdt
            .insert(Point2::new(p[0], p[1]))
            .map_err(|e| Error::MeshGeneration(format!("insertion failed: {e:?}")))?;
        handles.push(h);
    }
    let mut index_of = HashMap::new();
    for (i, h) in handles.iter().enumerate() {
        if index_of.insert(h.index(), i).is_some() {
            return Err(Error::MeshGeneration("duplicate mesh points".into()));
        }
    }
    for i in 0..n_outer {
        cdt.add_constraint(handles[i], handles[(i + 1) % n_outer]);
    }
    for i in 0..n_cyl {
        cdt.add_constraint(handles[n_outer + i], handles[n_outer + (i + 1) % n_cyl]);
    }
    let mut out = Vec::new();
    for f in cdt.inner_faces() {
        let v = f.vertices().map(|v| index_of[&v.fix().index()]);
        let p = v.map(|i| points[i]);
        let c = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        if cylinder_distance(c) < 0.0 {
            continue;
        }
        let area = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
        if area.abs() < 1e-14 {
            return Err(Error::MeshGeneration("degenerate triangle".into()));
        }
        out.push(if area > 0.0 { v } else { [v[0], v[2], v[1]] });
    }
    Ok(out)
}
