//! Patterned symmetric random matrices, their Schur-Hadamard products, and
//! two independent routes to their limiting spectral moments: Monte Carlo
//! spectra and exact counting of circuit classes.
//!
//! The crate is `no_std` with `alloc`. Parallelism is injected through the
//! [`exec::Executor`] trait so that IO-free callers can stay single threaded.
#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod circuits;
pub mod ensemble;
pub mod error;
pub mod exec;
pub mod linkfn;
pub mod oracle;
pub mod spectral;
pub mod words;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use linkfn::{LinkFunction, LinkProfile, LinkTable, LinkValue, Transform, TransformKind};
pub use words::Word;
