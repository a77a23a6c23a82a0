//! Numerical laboratory for star-shaped hypersurfaces in hyperbolic space.
//!
//! Hypersurfaces are axisymmetric radial graphs over geodesic spheres. The
//! crate evolves them under the inverse mean curvature flow and the flow with
//! inward speed `cosh r`, evaluates the curvature functionals whose
//! monotonicity drives the hyperbolic Alexandrov-Fenchel inequality, and
//! checks the Penrose inequality on rotationally symmetric asymptotically
//! hyperbolic graphs.

pub mod convergence;
pub mod error;
pub mod flow;
pub mod functionals;
pub mod geometry;
pub mod grid;
pub mod mass;
pub mod shapes;

pub use error::{LabError, Result};
pub use flow::{run, FlowKind, FlowSpec, FlowTrace};
pub use functionals::{af_margin, bhw_margin, evaluate, FunctionalReport};
pub use geometry::{compute_fields, min_mean_curvature, GeometryFields, RadialGraph};
pub use grid::{unit_sphere_area, AxisymField, SphereGrid};
pub use mass::{build_adss_profile, build_profile, horizon_radius, penrose_check, AdSSModel, GraphProfile, ProfileFamily};
pub use shapes::{build, sphere_closed_forms, ShapeSpec};
