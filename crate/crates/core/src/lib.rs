#![cfg_attr(not(feature = "std"), no_std)]
//! Jordan-algebraic quantum probability at finite dimension.
//!
//! Algebras are real subspaces of complex Hermitian matrices closed under the
//! Jordan product X∘Y = (XY + YX)/2. On top of that the crate provides
//! states and conditional probabilities, the directed compatibility relation,
//! Radon–Nikodym elements and conditional expectations, observables and the
//! kernels of Markov processes built from them, and the generators of the
//! resulting dynamical semigroups.
//!
//! The crate is `no_std` with `alloc`; the `std` feature (on by default) only
//! switches dependencies to their std builds.

extern crate alloc;

pub mod algebra;
pub mod condexp;
pub mod dynamics;
pub mod element;
pub mod error;
pub mod linalg;
pub mod maps;
pub mod markov;
pub mod processes;
pub mod random;
pub mod states;
pub mod tol;

pub use algebra::{Event, JordanAlgebra, SpectralDecomposition};
pub use element::{Element, C64};
pub use error::{Error, Result};
pub use states::{Functional, Pairing, State};
pub use tol::{Config, Sampling, Tolerances};
pub use condexp::{conditional_expectation, CompatibilityReport, CondExpResult, ConditionalExpectation, Verdict};
pub use dynamics::{Classification, GeneratorMap};
pub use maps::{LinearMap, Observable};
pub use markov::{KernelFamily, MarkovProcess, TimeGrid};
