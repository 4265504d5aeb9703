//! Closed-form test surfaces.
//!
//! Coordinates `(u, v)`: polar and azimuthal angle on the spheres, arc length
//! along the two periods on the flat torus, and the two angles of the torus
//! of revolution (`v` around the tube, `v = 0` on the outer equator).

use std::f64::consts::PI;

use serde::Serialize;

use crate::geometry::mesh::Point;
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticSurface {
    RoundSphere { radius: f64 },
    FlatTorus { a: f64, b: f64 },
    TorusOfRevolution { major: f64, minor: f64 },
    /// Surface of revolution with radius `1 + amplitude · cos(frequency · θ)`.
    BumpySphere { amplitude: f64, frequency: u32 },
}

/// `(ρ, ρ', ρ'')` of the bumpy sphere's radial profile at polar angle `θ`.
fn bumpy_profile(amplitude: f64, frequency: u32, theta: f64) -> (f64, f64, f64) {
    let k = frequency as f64;
    (
        1.0 + amplitude * (k * theta).cos(),
        -amplitude * k * (k * theta).sin(),
        -amplitude * k * k * (k * theta).cos(),
    )
}

impl AnalyticSurface {
    pub fn name(&self) -> &'static str {
        match self {
            Self::RoundSphere { .. } => "sphere",
            Self::FlatTorus { .. } => "flat-torus",
            Self::TorusOfRevolution { .. } => "torus-rev",
            Self::BumpySphere { .. } => "bumpy-sphere",
        }
    }

    pub fn genus(&self) -> usize {
        match self {
            Self::RoundSphere { .. } | Self::BumpySphere { .. } => 0,
            Self::FlatTorus { .. } | Self::TorusOfRevolution { .. } => 1,
        }
    }

    /// Embedding in `R³`. For the flat torus this is only a picture: a torus
    /// of revolution with the same periods, whose metric is not flat.
    pub fn position(&self, u: f64, v: f64) -> Point {
        match *self {
            Self::RoundSphere { radius } => [
                radius * u.sin() * v.cos(),
                radius * u.sin() * v.sin(),
                radius * u.cos(),
            ],
            Self::FlatTorus { a, b } => {
                let r = b / (2.0 * PI);
                let big = r + a / (2.0 * PI);
                Self::TorusOfRevolution { major: big, minor: r }.position(2.0 * PI * u / a, 2.0 * PI * v / b)
            }
            Self::TorusOfRevolution { major, minor } => [
                (major + minor * v.cos()) * u.cos(),
                (major + minor * v.cos()) * u.sin(),
                minor * v.sin(),
            ],
            Self::BumpySphere { amplitude, frequency } => {
                let (rho, _, _) = bumpy_profile(amplitude, frequency, u);
                [rho * u.sin() * v.cos(), rho * u.sin() * v.sin(), rho * u.cos()]
            }
        }
    }

    pub fn gaussian_curvature(&self, u: f64, v: f64) -> f64 {
        match *self {
            Self::RoundSphere { radius } => 1.0 / (radius * radius),
            Self::FlatTorus { .. } => 0.0,
            Self::TorusOfRevolution { major, minor } => v.cos() / (minor * (major + minor * v.cos())),
            Self::BumpySphere { amplitude, frequency } => {
                // Profile (f, g) = (ρ sin θ, ρ cos θ) rotated about the z axis:
                // K = g'(f'g'' - f''g') / (f (f'² + g'²)²). The poles are
                // removable singularities; evaluate just off them.
                let t = u.clamp(1e-4, PI - 1e-4);
                let (r, r1, r2) = bumpy_profile(amplitude, frequency, t);
                let (s, c) = t.sin_cos();
                let f = r * s;
                let f1 = r1 * s + r * c;
                let f2 = r2 * s + 2.0 * r1 * c - r * s;
                let g1 = r1 * c - r * s;
                let g2 = r2 * c - 2.0 * r1 * s - r * c;
                let speed2 = f1 * f1 + g1 * g1;
                g1 * (f1 * g2 - f2 * g1) / (f * speed2 * speed2)
            }
        }
    }

    /// `√det g` in the surface coordinates.
    pub fn area_element(&self, u: f64, v: f64) -> f64 {
        match *self {
            Self::RoundSphere { radius } => radius * radius * u.sin(),
            Self::FlatTorus { .. } => 1.0,
            Self::TorusOfRevolution { major, minor } => minor * (major + minor * v.cos()),
            Self::BumpySphere { amplitude, frequency } => {
                let (r, r1, _) = bumpy_profile(amplitude, frequency, u);
                r * u.sin() * (r * r + r1 * r1).sqrt()
            }
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Self::RoundSphere { radius } => 4.0 * PI * radius * radius,
            Self::FlatTorus { a, b } => a * b,
            Self::TorusOfRevolution { major, minor } => 4.0 * PI * PI * major * minor,
            Self::BumpySphere { frequency, .. } => {
                let panels = 8 * frequency.max(1) as usize;
                let h = PI / panels as f64;
                (0..panels)
                    .map(|k| {
                        let a = k as f64 * h;
                        integrate(32, a, a + h, |t| self.area_element(t, 0.0))
                    })
                    .sum::<f64>()
                    * 2.0
                    * PI
            }
        }
    }

    /// Volume of a surface is its area.
    pub fn volume(&self) -> f64 {
        self.area()
    }

    /// Intrinsic diameter where it has a closed form.
    pub fn diameter(&self) -> Option<f64> {
        match *self {
            Self::RoundSphere { radius } => Some(PI * radius),
            Self::FlatTorus { a, b } => Some(0.5 * (a * a + b * b).sqrt()),
            _ => None,
        }
    }

    /// `max(0, -min K)`.
    pub fn curvature_lower_bound(&self) -> Option<f64> {
        match *self {
            Self::RoundSphere { .. } | Self::FlatTorus { .. } => Some(0.0),
            Self::TorusOfRevolution { major, minor } => Some(1.0 / (minor * (major - minor))),
            Self::BumpySphere { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `∫∫ K dA` by tensor Gauss–Legendre over the coordinate rectangle.
    fn total_curvature(s: &AnalyticSurface, u: (f64, f64), v: (f64, f64)) -> f64 {
        let panels = 16;
        let h = (u.1 - u.0) / panels as f64;
        (0..panels)
            .map(|k| {
                let a = u.0 + k as f64 * h;
                integrate(16, a, a + h, |x| {
                    integrate(32, v.0, v.1, |y| s.gaussian_curvature(x, y) * s.area_element(x, y))
                })
            })
            .sum()
    }

    #[test]
    fn gauss_bonnet_for_closed_forms() {
        let cases = [
            (AnalyticSurface::RoundSphere { radius: 1.7 }, (0.0, PI), (0.0, 2.0 * PI), 4.0 * PI),
            (AnalyticSurface::TorusOfRevolution { major: 2.0, minor: 0.7 }, (0.0, 2.0 * PI), (0.0, 2.0 * PI), 0.0),
            (AnalyticSurface::BumpySphere { amplitude: 0.1, frequency: 3 }, (0.0, PI), (0.0, 2.0 * PI), 4.0 * PI),
        ];
        for (s, u, v, expected) in cases {
            let total = total_curvature(&s, u, v);
            assert!((total - expected).abs() < 1e-6, "{}: {total}", s.name());
        }
    }

    #[test]
    fn bumpy_sphere_without_bumps_is_the_unit_sphere() {
        let s = AnalyticSurface::BumpySphere { amplitude: 0.0, frequency: 2 };
        for k in 0..10 {
            let t = 0.05 + 0.3 * k as f64;
            assert!((s.gaussian_curvature(t, 0.0) - 1.0).abs() < 1e-12);
        }
        assert!((s.area() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn torus_curvature_extremes() {
        let s = AnalyticSurface::TorusOfRevolution { major: 3.0, minor: 1.0 };
        assert!((s.gaussian_curvature(0.0, 0.0) - 0.25).abs() < 1e-15);
        assert!((s.gaussian_curvature(0.0, PI) + 0.5).abs() < 1e-15);
        assert_eq!(s.curvature_lower_bound(), Some(0.5));
    }
}
