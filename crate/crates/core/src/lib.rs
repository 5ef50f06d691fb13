pub mod abelian;
pub mod classgroup;
mod error;
pub mod forms;
pub mod ideal;
pub mod lattice;
pub mod numfield;
pub mod polya;
pub mod suites;
pub mod units;

pub use error::{Error, Result};
