//! Pointwise numerical verification of contact fiber bundles.
//!
//! Every object lives on a regular level set in Euclidean space. Forms and
//! vector fields are jet-evaluable coefficient functions in ambient
//! coordinates; quotients such as associated bundles `P ×_G F` are never
//! formed, and checks run on `P × F` against frames transverse to the group
//! orbits.

pub mod bundles;
pub mod catalog;
pub mod contact;
pub mod crosssection;
pub mod error;
pub mod expr;
pub mod forms;
pub mod jet;
pub mod kcontact;
pub mod liealg;
pub mod linalg;
pub mod manifold;
pub mod maps;

pub use error::{GeomError, Result};
pub use jet::Jet1;
pub use manifold::{EmbeddedManifold, SampleSet, TangentFrame};
