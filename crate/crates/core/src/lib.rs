//! Metric, symmetry-group and automorphism-group toolkit for ordered Hamming
//! block spaces.

pub mod automorphisms;
pub mod chain;
pub mod codes;
pub mod decimal;
pub mod error;
pub mod field;
pub mod oracle;
pub mod product;
pub mod space;
pub mod table;

pub use chain::{chain_order, ChainShape, ChainSymmetry};
pub use error::{Error, Result};
pub use field::{Field, FieldElement, FieldOp, FieldSpec};
pub use product::Symmetry;
pub use space::{chain_distance, BlockVector, Coord, CoordSet, Space, SpaceConfig};
