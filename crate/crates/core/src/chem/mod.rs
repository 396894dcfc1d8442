//! Molecular graphs and SMILES: parsing, ring perception, aromaticity,
//! canonical ranking and canonical writing.

pub mod aromatic;
pub mod canon;
pub mod element;
pub mod molecule;
pub mod parser;
pub mod rings;
mod writer;

pub use aromatic::{aromatic_ring_count, perceive_aromaticity};
pub use canon::{canonical_ranks, standardize, standardize_molecule, write_smiles};
pub use molecule::{Atom, Bond, BondOrder, Molecule, MoleculeError, StereoMark};
pub use parser::{parse_smiles, DiagnosticKind, ParseDiagnostic};
