pub mod cli;
pub mod dd;
pub mod error;
pub mod expansion;
pub mod group_duals;
pub mod gw;
pub mod heat_trace;
pub mod hurwitz;
pub mod partitions;
pub mod qseries;
pub mod verify;

pub use dd::DoubleDouble;
pub use error::{Error, Result};
pub use qseries::CertifiedValue;
