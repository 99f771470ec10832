//! Classical surrogate for matchgate variational MaxCut optimization.
//!
//! States and Hamiltonians are tracked only through their projections onto
//! the grade-`κ` Majorana modules `B_κ`, which free-fermionic circuits act on
//! by rotations. The MaxCut cost lives entirely in `B_4`.

pub mod algebra;
pub mod bits;
pub mod circuit;
pub mod combinatorics;
pub mod dense;
pub mod engine;
pub mod error;
pub mod graph;
pub mod kernel;
pub mod modspace;
pub mod optimize;
pub mod scalar;
pub mod verify;

pub use algebra::{MajoranaIndex, Pauli, PauliString, Phase};
pub use bits::BitString;
pub use circuit::{
    build_ansatz, AnsatzBuilder, Circuit, GateTable, Generator, GeneratorKind, TableCache,
};
pub use engine::{extract_bits, EvalState, Evaluator};
pub use error::{Error, Result};
pub use graph::{Edge, Graph};
pub use modspace::{dim_module, project_basis_state, project_maxcut, ModuleVector, ModuleWeights};
pub use optimize::{run_trial, solve_instance, InstanceResult, OptimizerConfig, RunResult, Sector};
pub use scalar::Scalar;

pub type ModuleVec = ModuleVector<f64>;
pub type ModuleVecF32 = ModuleVector<f32>;
pub type Engine = Evaluator<f64>;
pub type EngineF32 = Evaluator<f32>;
