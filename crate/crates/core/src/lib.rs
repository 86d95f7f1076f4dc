//! Hyperbolic tilings, host graphs, and discrete Steklov spectra.
//!
//! The pipeline runs in stages, one module each:
//!
//! * [`hypgeo`]: Poincaré disk primitives (points, isometries, triangles).
//! * [`tiling`]: triangle-group tilings and their 3-regular dual host graphs.
//! * [`graphcore`]: finite graphs with a marked boundary.
//! * [`steklov`]: Dirichlet-to-Neumann maps and Steklov spectra.
//! * [`domain`]: shrunken-tile domains with connectors, ball removal and
//!   corner smoothing.
//! * [`discretize`]: ε-nets over a domain and rough-isometry certificates.

/// Library version, embedded in output provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod discretize;
pub mod domain;
pub mod graphcore;
pub mod hypgeo;
pub mod linalg;
pub mod render;
pub mod steklov;
pub mod tiling;
pub mod util;

pub use discretize::{
    build_discretization, cobblestone_map, epsilon_max, maximal_separated_subset,
    rough_isometry_constants, DiscretizationGraph, DiscretizeError, RoughIsometryReport,
};
pub use domain::{
    boundary_length, build_domain, lambda_and_rho, shrink_triangle, structural_equivalence_check,
    BoundaryCurve, BoundaryPrimitive, CornerMode, DomainError, DomainModel, Piece, PieceKind,
};
pub use render::{render_discretization, render_domain, render_tiling};
pub use hypgeo::{
    circle_perimeter, hyp_distance, triangle_from_angles, CircularArc, DiskPoint, GeoError,
    GeodesicSegment, HypCircle, HypIsometry, HypTriangle,
};
pub use graphcore::{
    ball_subgraph, induce_subgraph, punctured_ball, GraphError, GraphWithBoundary,
};
pub use steklov::{
    assemble_laplacian, dtn_matrix, harmonic_extension, rayleigh_oracle, steklov_spectrum,
    LaplacianBlocks, SpectrumError, SteklovSpectrum,
};
pub use tiling::{generate_tiling, HostGraph, Tiling, TilingError};
