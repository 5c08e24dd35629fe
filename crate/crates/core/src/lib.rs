pub mod asymptotics;
pub mod cli;
pub mod disorder;
pub mod elliptic;
pub mod error;
pub mod free_fermion;
pub mod linalg;
pub mod oracle;
pub mod output;
pub mod parity_game;
pub mod perturbation;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
