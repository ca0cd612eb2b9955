#![cfg_attr(not(feature = "std"), no_std)]
extern crate alloc;

pub mod error;
pub mod etale;
pub mod field;
pub mod gf;
pub mod hecke;
pub mod lattice;
pub mod matrix;
pub mod orbital;
pub mod pairs;
pub mod poly;
pub mod quad;
pub mod reduction;
pub mod ring;
pub mod sym;

pub use error::{Error, Result};
pub use field::{Fe, Field};
pub use matrix::Matrix;
pub use poly::Poly;
pub use ring::{Dvr, Ring};
