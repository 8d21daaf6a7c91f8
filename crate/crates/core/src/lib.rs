//! Super-smooth C¹ spline spaces over planar meshes made of triangles and
//! quadrilaterals.
//!
//! Every element carries a polynomial patch in Bernstein form: total degree
//! `p` on triangles, bi-degree `(p, p)` on quads. The space is C¹ across
//! edges, C² at vertices, and the normal derivative along every edge is a
//! polynomial of degree `p - 1`. A spline is determined by Hermite data at
//! vertices, value and normal-derivative samples on edges, and interior
//! samples per element.
//!
//! The core is generic over the floating point type; the aliases below fix
//! it to `f64`.

pub mod analysis;
pub mod assembly;
pub mod bernstein;
pub mod cli;
pub mod error;
pub mod functions;
pub mod geometry;
pub mod interpolation;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod scalar;
pub mod space;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

pub type Mesh = mesh::MixedMesh<f64>;
pub type Space = space::SplineSpace<f64>;
pub type Spline = space::SplineFunction<f64>;
pub type Patch = bernstein::Patch<f64>;
pub type Gluing = geometry::GluingData<f64>;
pub type Report = analysis::ErrorReport;
