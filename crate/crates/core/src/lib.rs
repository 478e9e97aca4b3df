#![allow(clippy::single_range_in_vec_init, clippy::needless_range_loop)]

//! Communication-avoiding QR: TSQR over reduction trees (sequential,
//! out-of-core and message-passing parallel), 2-D CAQR on a simulated
//! processor grid, Gram-Schmidt and CholeskyQR baselines, and closed-form
//! latency-bandwidth cost models.

pub mod alt;
pub mod caqr;
pub mod error;
pub mod executor;
pub mod flops;
pub mod gen;
pub mod householder;
pub mod io;
pub mod layout;
pub mod matrix;
pub mod model;
pub mod tree;
pub mod tsqr;

pub use error::{Error, Result};
pub use flops::FlopCounter;
pub use matrix::Matrix;
