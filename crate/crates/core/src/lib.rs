//! Stockham autosort FFTs planned against a GPU hardware model.
//!
//! The crate executes plans on the host for validation, estimates their
//! cost on a modeled GPU, and emits Metal Shading Language kernels.

pub mod butterfly;
pub mod cost;
pub mod emit;
pub mod complex;
pub mod error;
pub mod four_step;
pub mod hardware;
pub mod oracle;
pub mod plan;
pub mod planner;
pub mod stockham;

pub use complex::{cmul, twiddle, twiddle_chain, Complex, Complex32, Complex64, Precision, Real, Scalar};
pub use error::{FftError, Result};
pub use four_step::{execute_four_step, execute_four_step_inverse, four_step_split, FourStepPlan, OuterPlan};
pub use hardware::HardwareModel;
pub use plan::{count_barriers, make_plan, shuffle_hybrid_plan, BufferStrategy, FftPlan, RadixPolicy, StageDescriptor};
pub use planner::{max_local_fft, select_radix, synthesize, synthesize_with, DecompositionKind, DecompositionPlan, MemoryStrategy};
pub use stockham::{execute, execute_batch, execute_inverse, Signal};
pub use cost::{estimate, rank_designs, thesis_comparison, CostEstimate};
pub use emit::{emit_four_step_kernels, emit_kernel, emit_plan, structural_check, KernelBundle, KernelSource};
