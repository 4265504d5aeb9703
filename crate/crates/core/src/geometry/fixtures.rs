//! Mesh generators for the test surfaces.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::mesh::{Parametrization, Point, TriangleMesh};
use crate::geometry::surfaces::AnalyticSurface;

pub fn tetrahedron() -> TriangleMesh {
    let v = vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
    let f = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
    TriangleMesh::new(v, f).expect("regular tetrahedron is valid")
}

fn icosahedron() -> (Vec<Point>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let v = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v, f)
}

/// Splits every triangle into four at the edge midpoints.
pub fn subdivide(vertices: &mut Vec<Point>, faces: &[[usize; 3]]) -> Vec<[usize; 3]> {
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let (p, q) = (vertices[a], vertices[b]);
            vertices.push([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]);
            vertices.len() - 1
        })
    };
    let mut out = Vec::with_capacity(faces.len() * 4);
    for &[a, b, c] in faces {
        let ab = mid(a, b, vertices);
        let bc = mid(b, c, vertices);
        let ca = mid(c, a, vertices);
        out.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
    }
    out
}

/// Unit-sphere directions of the subdivided icosahedron.
fn sphere_directions(subdivisions: u32) -> (Vec<Point>, Vec<[usize; 3]>) {
    let (mut v, mut f) = icosahedron();
    for _ in 0..subdivisions {
        f = subdivide(&mut v, &f);
    }
    for p in v.iter_mut() {
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        *p = [p[0] / r, p[1] / r, p[2] / r];
    }
    (v, f)
}

fn polar_coords(p: &Point) -> [f64; 2] {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [(p[2] / r).clamp(-1.0, 1.0).acos(), p[1].atan2(p[0])]
}

/// Subdivided icosahedron projected to the sphere of radius `radius`
/// (`10·4^s + 2` vertices).
pub fn icosphere(radius: f64, subdivisions: u32) -> Result<TriangleMesh> {
    positive("radius", radius)?;
    let (dirs, f) = sphere_directions(subdivisions);
    let coords: Vec<[f64; 2]> = dirs.iter().map(polar_coords).collect();
    let v = dirs.iter().map(|p| [radius * p[0], radius * p[1], radius * p[2]]).collect();
    TriangleMesh::new(v, f)?.with_parametrization(Parametrization {
        surface: AnalyticSurface::RoundSphere { radius },
        coords,
    })
}

/// Icosphere with every vertex moved radially to `1 + amplitude · cos(frequency · θ)`.
pub fn bumpy_sphere(amplitude: f64, frequency: u32, subdivisions: u32) -> Result<TriangleMesh> {
    if !(amplitude.is_finite() && amplitude.abs() < 1.0) {
        return Err(Error::InvalidParameter {
            name: "amplitude",
            reason: format!("must lie in (-1, 1), got {amplitude}"),
        });
    }
    let surface = AnalyticSurface::BumpySphere { amplitude, frequency };
    let (dirs, f) = sphere_directions(subdivisions);
    let coords: Vec<[f64; 2]> = dirs.iter().map(polar_coords).collect();
    let v = coords.iter().map(|&[u, w]| surface.position(u, w)).collect();
    TriangleMesh::new(v, f)?.with_parametrization(Parametrization { surface, coords })
}

/// Faces of an `m × n` periodic grid, vertex `(i, j)` at index `i * n + j`,
/// each cell cut along its `(i, j)–(i+1, j+1)` diagonal.
fn periodic_grid_faces(m: usize, n: usize) -> Vec<[usize; 3]> {
    let idx = |i: usize, j: usize| (i % m) * n + (j % n);
    let mut faces = Vec::with_capacity(2 * m * n);
    for i in 0..m {
        for j in 0..n {
            let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
    }
    faces
}

fn grid_size(m: usize, n: usize) -> Result<()> {
    if m < 3 || n < 3 {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: format!("periodic grids need at least 3×3 cells, got {m}×{n}"),
        });
    }
    Ok(())
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and positive, got {x}"),
        })
    }
}

/// Flat torus `R²/(aZ × bZ)` on an `m × n` grid with intrinsic edge lengths.
/// All angle defects vanish.
pub fn flat_torus(a: f64, b: f64, m: usize, n: usize) -> Result<TriangleMesh> {
    positive("a", a)?;
    positive("b", b)?;
    grid_size(m, n)?;
    let surface = AnalyticSurface::FlatTorus { a, b };
    let coords: Vec<[f64; 2]> = (0..m * n)
        .map(|k| [a * (k / n) as f64 / m as f64, b * (k % n) as f64 / n as f64])
        .collect();
    let v = coords.iter().map(|&[u, w]| surface.position(u, w)).collect();
    let (hx, hy) = (a / m as f64, b / n as f64);
    let wrap = |d: isize, period: usize| -> f64 {
        let p = period as isize;
        let d = d.rem_euclid(p);
        (if d > p / 2 { d - p } else { d }) as f64
    };
    let length = |p: usize, q: usize| {
        let di = wrap((q / n) as isize - (p / n) as isize, m);
        let dj = wrap((q % n) as isize - (p % n) as isize, n);
        ((di * hx).powi(2) + (dj * hy).powi(2)).sqrt()
    };
    TriangleMesh::with_metric(v, periodic_grid_faces(m, n), length)?
        .with_parametrization(Parametrization { surface, coords })
}

/// Torus of revolution sampled on an `m × n` grid of its two angles.
pub fn torus_of_revolution(major: f64, minor: f64, m: usize, n: usize) -> Result<TriangleMesh> {
    positive("minor", minor)?;
    if !(major.is_finite() && major > minor) {
        return Err(Error::InvalidParameter {
            name: "major",
            reason: format!("must exceed the minor radius {minor}, got {major}"),
        });
    }
    grid_size(m, n)?;
    let surface = AnalyticSurface::TorusOfRevolution { major, minor };
    let coords: Vec<[f64; 2]> = (0..m * n)
        .map(|k| [2.0 * PI * (k / n) as f64 / m as f64, 2.0 * PI * (k % n) as f64 / n as f64])
        .collect();
    let v = coords.iter().map(|&[u, w]| surface.position(u, w)).collect();
    TriangleMesh::new(v, periodic_grid_faces(m, n))?.with_parametrization(Parametrization { surface, coords })
}

/// Boundary of a 3×5×1 block of unit voxels with two of them removed, a
/// closed genus-2 surface (`χ = -2`). Each square is cut into two triangles
/// and the result subdivided `subdivisions` times.
pub fn genus2(subdivisions: u32) -> Result<TriangleMesh> {
    let (nx, ny, nz) = (3i64, 5i64, 1i64);
    let holes = [(1, 1), (1, 3)];
    let filled = |x: i64, y: i64, z: i64| {
        (0..nx).contains(&x) && (0..ny).contains(&y) && (0..nz).contains(&z) && !holes.contains(&(x, y))
    };
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let mut id = |p: [i64; 3], vertices: &mut Vec<Point>| -> usize {
        *index.entry(p).or_insert_with(|| {
            vertices.push([p[0] as f64, p[1] as f64, p[2] as f64]);
            vertices.len() - 1
        })
    };
    let mut faces = Vec::new();
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                if !filled(x, y, z) {
                    continue;
                }
                for axis in 0..3 {
                    for side in [1i64, -1] {
                        let mut nb = [x, y, z];
                        nb[axis] += side;
                        if filled(nb[0], nb[1], nb[2]) {
                            continue;
                        }
                        let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
                        let mut base = [x, y, z];
                        if side > 0 {
                            base[axis] += 1;
                        }
                        let mut corners = [base; 4];
                        corners[1][b] += 1;
                        corners[2][b] += 1;
                        corners[2][c] += 1;
                        corners[3][c] += 1;
                        if side < 0 {
                            corners.reverse();
                        }
                        let q = corners.map(|p| id(p, &mut vertices));
                        faces.push([q[0], q[1], q[2]]);
                        faces.push([q[0], q[2], q[3]]);
                    }
                }
            }
        }
    }
    for _ in 0..subdivisions {
        faces = subdivide(&mut vertices, &faces);
    }
    TriangleMesh::new(vertices, faces)
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 6] = ["sphere", "flat-torus", "torus-rev", "bumpy-sphere", "genus2", "tetrahedron"];

/// Amplitude and frequency of the `bumpy-sphere` builtin; its curvature stays positive.
pub const BUMPY_AMPLITUDE: f64 = 0.15;
pub const BUMPY_FREQUENCY: u32 = 2;

/// A named fixture at refinement `level`.
///
/// | name | mesh |
/// |---|---|
/// | `sphere` | unit icosphere, `level` subdivisions |
/// | `flat-torus` | `1 × 1` flat torus on a `3·2^level` square grid |
/// | `torus-rev` | radii `2`, `0.7` on a `6·2^level × 3·2^level` grid |
/// | `bumpy-sphere` | [`bumpy_sphere`] with the constants above |
/// | `genus2` | [`genus2`] with `level` subdivisions |
/// | `tetrahedron` | regular tetrahedron, `level` ignored |
pub fn builtin(name: &str, level: u32) -> Result<TriangleMesh> {
    if level > 6 {
        return Err(Error::InvalidParameter {
            name: "subdivision",
            reason: format!("at most 6 supported, got {level}"),
        });
    }
    let scale = 1usize << level;
    match name {
        "sphere" => icosphere(1.0, level),
        "flat-torus" => flat_torus(1.0, 1.0, 3 * scale, 3 * scale),
        "torus-rev" => torus_of_revolution(2.0, 0.7, 6 * scale, 3 * scale),
        "bumpy-sphere" => bumpy_sphere(BUMPY_AMPLITUDE, BUMPY_FREQUENCY, level),
        "genus2" => genus2(level),
        "tetrahedron" => Ok(tetrahedron()),
        other => Err(Error::InvalidParameter {
            name: "builtin",
            reason: format!("unknown fixture `{other}`; expected one of {}", BUILTIN_NAMES.join(", ")),
        }),
    }
}
