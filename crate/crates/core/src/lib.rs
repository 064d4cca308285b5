pub mod antenna;
pub mod channel;
pub mod cli;
pub mod error;
pub mod oracle;
pub mod quadrature;
pub mod specfun;
pub mod swe;
pub mod units;

pub use error::{Error, Result};
