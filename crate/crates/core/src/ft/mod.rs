//! Fault-tolerant circuits: gadget IR, stabilizer and Pauli-frame
//! simulation, Shor-style error correction, encoders and rectangles.

pub mod circuit;
pub mod encoder;
pub mod frame;
pub mod rec;
pub mod shor;
pub mod sim;
pub mod tableau;

pub use circuit::{Circuit, CircuitBuilder, FaultPath, GateKind, Location, Region};
pub use encoder::{build_interface_down, build_interface_up, build_round_trip, BasisState, CssEncoder};
pub use frame::PauliFrame;
pub use rec::{build_rec, check_correctness, classify_fault_path, Rec, Rec1, RecGate, RecPath, Verdict};
pub use shor::build_shor_ec;
pub use sim::{simulate_frame, simulate_with_faults, RunRecord};
pub use tableau::Tableau;
