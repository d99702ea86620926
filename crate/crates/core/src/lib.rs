//! State-augmentation transformations for finite MDPs and Markov reward
//! processes, with risk-sensitive evaluation of the resulting return
//! distributions.

pub mod cli;
pub mod error;
pub mod evaluate;
pub mod export;
pub mod inventory;
pub mod mdp;
pub mod simulate;
pub mod transform;

pub use error::{Error, Result};
