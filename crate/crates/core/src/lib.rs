pub mod error;
pub mod exact;
pub mod p1;
pub mod point_rep;
pub mod quiver;
pub mod solver;
pub mod spec_io;
pub mod torus;

pub use error::{Error, Result};
