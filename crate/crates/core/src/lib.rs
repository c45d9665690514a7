//! Simulator, assembler and analysis toolkit for the quantum control machine,
//! an instruction set whose program counter can be in superposition.
//!
//! * [`qstate`]: sparse superpositions over basis labels.
//! * [`isa`]: instructions, assembler and printer.
//! * [`machine`]: the fetch/execute/retire executor.
//! * [`embedding`]: conventional-jump machines lifted to superposition.
//! * [`analysis`]: synchronization checks and induced data maps.
//! * [`oracle`]: independent reference operators.
//! * [`corpus`]: the bundled example programs.

#![allow(clippy::result_large_err)]

pub mod analysis;
pub mod corpus;
pub mod embedding;
pub mod isa;
pub mod machine;
pub mod oracle;
pub mod qstate;

pub use analysis::{check_synchronized, find_sync_times, induced_data_map, InputDomain, SyncReport};
pub use isa::{parse_program, Instruction, ParseError, Program};
pub use machine::{init_run, run, MachineConfig, MachineError, MachineRun, TraceMode};
pub use qstate::{BasisLabel, Field, Gate, QuantumState, Separability, StateError};
