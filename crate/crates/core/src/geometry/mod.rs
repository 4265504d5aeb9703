//! Closed oriented triangle meshes, discrete exterior calculus and curvature.

mod curvature;
mod dec;
pub mod fixtures;
mod homology;
pub mod io;
mod mesh;
mod surfaces;

pub use curvature::{
    gauss_bonnet_residual, gaussian_curvature, relative_l2_distance, ricci_potential, CurvatureField,
    CurvatureSource, RicciPotential,
};
pub use dec::{build_dec, schrodinger_comparison, DecOperators, Incidence};
pub use homology::{betti1_both, betti1_hodge, betti1_homology, betti1_oracle, modular_rank, Betti1};
pub use mesh::{Parametrization, Point, TriangleMesh, MIN_ANGLE};
pub use surfaces::AnalyticSurface;
