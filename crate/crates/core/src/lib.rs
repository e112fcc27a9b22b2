pub mod error;
pub mod awvd;
pub mod bench;
pub mod exact;
pub mod geom;
pub mod instance;
pub mod local_search;
pub mod reductions;

pub use error::{Error, Result};
