//! Analysis of the components of substitution-permutation block ciphers and
//! of the permutation groups generated by their round functions.
//!
//! The crate has three layers:
//!
//! * component analysis: S-box predicates ([`sboxprops`], [`vboolfn`]) and
//!   mixing-layer structure ([`mixlayer`]) over packed GF(2) linear algebra
//!   ([`gf2`]);
//! * a theorem engine ([`tbcipher`]) that combines those predicates into
//!   primitivity and alternating-group verdicts for a one-round cipher
//!   model, with every hypothesis recorded;
//! * a desk-scale group engine ([`permgroup`]) that verifies the same
//!   conclusions directly on small instances via stabilizer chains, block
//!   systems and order computations.

pub mod cli;
pub mod fixtures;
pub mod formats;
pub mod gf2;
pub mod mixlayer;
pub mod permgroup;
pub mod report;
pub mod sboxprops;
pub mod tbcipher;
pub mod vboolfn;

pub use gf2::{AffineSubspace, Gf2Matrix, Gf2Subspace, Gf2Vec};
pub use mixlayer::{BrickPartition, LinearLayer, Wall};
pub use permgroup::{Group, Parity, Permutation};
pub use tbcipher::{CipherSpec, Verdict};
pub use vboolfn::SBox;
