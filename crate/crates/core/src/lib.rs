//! Allocation-only core of the patchem toolkit.
//!
//! Everything here is a pure function of its inputs: SMILES parsing and
//! canonicalization, circular fingerprints, similarity networks, tree
//! ensembles with feature selection and hyperparameter search, core-compound
//! ranking, and the multi-recognizer OCSR arbitration loop. IO, subprocess
//! adapters and the command line live in the `patchem` crate.
//!
//! The crate is `no_std` unless the `std` feature is enabled; `parallel`
//! additionally enables rayon for tree training and prediction.
#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod arbiter;
pub mod chem;
pub mod coreid;
pub mod feat;
pub mod hash;
pub mod learn;
pub(crate) mod math;
pub mod simnet;

pub use chem::{parse_smiles, standardize, write_smiles, Atom, Bond, BondOrder, Molecule, ParseDiagnostic};

pub use feat::{ecfp, tanimoto, Fingerprint};
