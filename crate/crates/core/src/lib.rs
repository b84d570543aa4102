pub mod congruence;
pub mod error;
pub mod forms;
pub mod geom;
pub mod pell;
pub mod precise;
pub mod report;
pub mod ring;
pub mod verify;

pub use error::{Error, Result};
