//! Molecular features: circular fingerprints, Tanimoto similarity and
//! graph-derived physicochemical descriptors.

pub mod descriptors;
pub mod ecfp;
pub mod fingerprint;

pub use descriptors::{descriptors, DescriptorVector};
pub use ecfp::{ecfp, environment_codes, DEFAULT_RADIUS, DEFAULT_WIDTH};
pub use fingerprint::{tanimoto, FeatError, Fingerprint};
