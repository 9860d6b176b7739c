//! Desk-scale fault-tolerance laboratory: symplectic Pauli algebra, CSS codes,
//! dense channel checks, noise samplers, matching and lookup decoders,
//! fault-tolerant gadgets with a stabilizer simulator, gate teleportation and
//! single-shot memory experiments.

pub mod bits;
pub mod channel;
pub mod code;
pub mod codes;
pub mod decoder;
pub mod error;
pub mod ft;
pub mod gf2;
pub mod matching;
pub mod noise;
pub mod pauli;
pub mod singleshot;
pub mod stats;
pub mod teleport;
pub mod toric;

pub use bits::BitVector;
pub use code::{CssCode, LogicalClass, Sector, Syndrome};
pub use error::{Error, Result};
pub use gf2::BinMatrix;
pub use pauli::{Pauli1, PauliOp};
