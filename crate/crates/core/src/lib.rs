//! Direction sets, tangent cones and sea-tangle neighbourhoods of set-germs at
//! the origin of `R^n`, estimated from multi-scale samples.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod error;
pub mod germs;
pub mod kdtree;
pub mod rng;
pub mod sphere;
pub mod vecops;

pub use error::{Error, Result};
pub use germs::{AnnulusSample, ScaleSchedule, SetGerm};
pub use sphere::SphericalCloud;
pub mod maps;
pub use maps::GermMap;
pub mod directions;
pub mod seatangle;
