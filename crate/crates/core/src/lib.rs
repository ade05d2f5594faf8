pub mod census;
pub mod cli;
pub mod constants;
pub mod error;
pub mod gaussian;
pub mod graded;
pub mod instance;
pub mod integers;
pub mod monoid;
pub mod series;
pub mod sieve;
pub mod summation;
pub mod verify;

pub use error::{Error, Result};
pub use instance::{ElementSource, ElementTable, Monoid};
pub use monoid::{Factorization, Grid, PrimeHandle, Term};
