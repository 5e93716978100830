//! Exact projective geometry for realization spaces of polytopes.

pub mod config;
pub mod derive;
pub mod exact;
pub mod hull;
pub mod linalg;
pub mod projgeom;
pub mod shephard;
pub mod universal;
pub mod vonstaudt;

pub use config::{PointConfiguration, Role};
pub use derive::{check_certificate, DerivationCertificate};
pub use exact::{ExactError, IntPolynomial, NumberField, Scalar};
pub use hull::Polytope;
pub use projgeom::{Flat, HPoint, ProjectiveMap};
