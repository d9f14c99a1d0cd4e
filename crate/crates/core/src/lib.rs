pub mod bis;
pub mod bpc;
pub mod error;
pub mod graphs;
pub mod harness;
pub mod lp;
pub mod maxsize;
pub mod model;
pub mod oracle;
pub mod packing_classic;
pub mod rng;

pub use error::{Error, Result};
