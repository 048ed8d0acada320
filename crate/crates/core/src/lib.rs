// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fnexpr;
pub mod maps;
pub mod lipschitz;
pub mod metrics;
pub mod optimize;
pub mod report;
pub mod singularity;
pub mod sphere;
pub mod zalcman;

pub use error::{Error, Result};
pub use fnexpr::HoloExpr;
pub use maps::HoloMap;
pub use sphere::{chordal, SpherePoint};
