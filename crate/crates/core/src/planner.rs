//! Hardware-aware plan synthesis.
//!
//! The planner derives the largest FFT one threadgroup can hold, picks the
//! widest radix whose register footprint fits, and decides between a single
//! threadgroup kernel and a four-step decomposition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{Precision, Real};
use crate::error::{FftError, Result};
use crate::four_step::{execute_four_step, execute_four_step_inverse, FourStepPlan};
use crate::hardware::HardwareModel;
use crate::plan::{check_size, radix_sequence, BufferStrategy, FftPlan, RadixPolicy};
use crate::stockham::{execute, execute_inverse, Signal};

/// Fraction of the per-thread register budget a radix may claim.
pub const DEFAULT_REGISTER_HEADROOM: f64 = 0.5;

/// Sizes up to this multiple of the block size count as a plain four-step;
/// beyond it the decomposition is reported as multi-level.
pub const FOUR_STEP_SPAN: usize = 4;

/// How signal data is held while one threadgroup transforms it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryStrategy {
    /// One threadgroup buffer, values staged through registers.
    RegisterTiled,
    /// Two threadgroup buffers, ping-pong.
    DoubleBuffered,
    /// Data held in registers across the resident threads.
    RegisterResident,
}

/// Largest power of two not above `x`, or 0 for 0.
fn floor_pow2(x: u64) -> u64 {
    if x == 0 {
        0
    } else {
        1 << (63 - x.leading_zeros())
    }
}

/// Largest power-of-two FFT length whose working set fits one threadgroup.
///
/// `bytes_per_element` is the complex element size: 4 (FP16), 8 (FP32)
/// or 16 (FP64).
pub fn max_local_fft(hw: &HardwareModel, bytes_per_element: usize, strategy: MemoryStrategy) -> Result<usize> {
    if Precision::from_complex_bytes(bytes_per_element).is_none() {
        return Err(FftError::UnsupportedElementBytes(bytes_per_element));
    }
    let eb = bytes_per_element as u64;
    let elements = match strategy {
        MemoryStrategy::RegisterTiled => hw.threadgroup_memory_bytes / eb,
        MemoryStrategy::DoubleBuffered => hw.threadgroup_memory_bytes / (2 * eb),
        MemoryStrategy::RegisterResident => {
            let resident = hw.resident_threads * hw.resident_bytes_per_thread / eb;
            resident.min(hw.register_file_bytes / eb)
        }
    };
    Ok(floor_pow2(elements).max(1) as usize)
}

/// Resource footprint of one radix, per butterfly and per thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadixProfile {
    pub radix: usize,
    pub flops_per_butterfly: u64,
    pub gprs_per_thread: u64,
    pub stages_at_4096: usize,
    pub barriers_at_4096: usize,
}

/// Measured register pressure and cost of radices 2 through 16.
pub fn radix_profiles() -> Vec<RadixProfile> {
    [(2, 10, 8, 12, 22), (4, 34, 18, 6, 10), (8, 94, 38, 4, 6), (16, 214, 78, 3, 4)]
        .into_iter()
        .map(|(radix, flops, gprs, stages, barriers)| RadixProfile {
            radix,
            flops_per_butterfly: flops,
            gprs_per_thread: gprs,
            stages_at_4096: stages,
            barriers_at_4096: barriers,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadixSelection {
    pub profile: RadixProfile,
    /// No profile fit the budget; the lightest one was returned anyway.
    pub degraded: bool,
}

/// Widest radix whose registers fit in half the per-thread budget.
pub fn select_radix(hw: &HardwareModel, profiles: &[RadixProfile]) -> Result<RadixSelection> {
    select_radix_with_headroom(hw, profiles, DEFAULT_REGISTER_HEADROOM)
}

/// Widest radix with `gprs_per_thread ≤ headroom · hw.gprs_per_thread`.
/// Falls back to the profile with the fewest registers, flagged degraded.
pub fn select_radix_with_headroom(
    hw: &HardwareModel,
    profiles: &[RadixProfile],
    headroom: f64,
) -> Result<RadixSelection> {
    let budget = headroom * hw.gprs_per_thread as f64;
    let fitting = profiles
        .iter()
        .filter(|p| p.gprs_per_thread as f64 <= budget)
        .max_by_key(|p| (p.radix, std::cmp::Reverse(p.gprs_per_thread)));
    if let Some(p) = fitting {
        return Ok(RadixSelection { profile: *p, degraded: false });
    }
    profiles
        .iter()
        .min_by_key(|p| (p.gprs_per_thread, p.radix))
        .map(|p| RadixSelection { profile: *p, degraded: true })
        .ok_or_else(|| FftError::InvalidPlan("no radix profiles to choose from".into()))
}

/// Threads for a size-`n` transform at `radix`: one per butterfly, capped
/// by the threadgroup limit and rounded down to whole SIMD groups.
pub fn thread_count(n: usize, radix: usize, hw: &HardwareModel) -> usize {
    let simd = hw.simd_width as usize;
    let wanted = (n / radix.max(1)).min(hw.max_threads_per_threadgroup as usize);
    (wanted / simd * simd).max(simd)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionKind {
    SingleThreadgroup,
    FourStep,
    MultiLevelFourStep,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decomposition {
    Single(FftPlan),
    FourStep(FourStepPlan),
}

/// A complete execution recipe for one transform size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionPlan {
    pub n: usize,
    pub kind: DecompositionKind,
    /// Largest local FFT the plan was built against.
    pub b_max: usize,
    pub plan: Decomposition,
    pub rationale: Vec<String>,
}

impl DecompositionPlan {
    /// Wraps a hand-built single-threadgroup plan.
    pub fn single(plan: FftPlan, rationale: impl Into<String>) -> Self {
        DecompositionPlan {
            n: plan.n,
            kind: DecompositionKind::SingleThreadgroup,
            b_max: plan.n,
            plan: Decomposition::Single(plan),
            rationale: vec![rationale.into()],
        }
    }

    pub fn execute<T: Real>(&self, input: &Signal<T>) -> Result<Signal<T>> {
        match &self.plan {
            Decomposition::Single(p) => execute(p, input),
            Decomposition::FourStep(p) => execute_four_step(p, input),
        }
    }

    pub fn execute_inverse<T: Real>(&self, input: &Signal<T>) -> Result<Signal<T>> {
        match &self.plan {
            Decomposition::Single(p) => execute_inverse(p, input),
            Decomposition::FourStep(p) => execute_four_step_inverse(p, input),
        }
    }

    /// Transforms each signal independently, in parallel.
    pub fn execute_batch<T: Real>(&self, inputs: &[Signal<T>], inverse: bool) -> Result<Vec<Signal<T>>> {
        inputs
            .par_iter()
            .map(|x| if inverse { self.execute_inverse(x) } else { self.execute(x) })
            .collect()
    }

    /// The single-threadgroup plan, or the innermost row plan of a four-step.
    pub fn local_plan(&self) -> &FftPlan {
        match &self.plan {
            Decomposition::Single(p) => p,
            Decomposition::FourStep(p) => &p.inner_plan,
        }
    }

    pub fn threadgroup_bytes(&self) -> usize {
        self.local_plan().threadgroup_bytes
    }
}

/// Plan synthesis knobs. The defaults use FP32, a register-tiled buffer and
/// the radix chosen from the register budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOptions {
    pub precision: Precision,
    /// Forces a radix family instead of the register-based choice.
    pub radix_override: Option<RadixPolicy>,
    pub register_headroom: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            precision: Precision::Single,
            radix_override: None,
            register_headroom: DEFAULT_REGISTER_HEADROOM,
        }
    }
}

/// Builds the plan for `n` on `hw` with default options.
pub fn synthesize(n: usize, hw: &HardwareModel) -> Result<DecompositionPlan> {
    synthesize_with(n, hw, &SynthesisOptions::default())
}

pub fn synthesize_with(n: usize, hw: &HardwareModel, opts: &SynthesisOptions) -> Result<DecompositionPlan> {
    check_size(n)?;
    hw.validate()?;
    let eb = opts.precision.complex_bytes();
    let b_max = max_local_fft(hw, eb, MemoryStrategy::RegisterTiled)?;
    if b_max < 2 {
        return Err(FftError::InvalidHardware(format!(
            "threadgroup memory of {} B cannot hold two {eb}-byte elements",
            hw.threadgroup_memory_bytes
        )));
    }
    let mut rationale = vec![format!(
        "block size {b_max}: {} B threadgroup memory / {eb} B per element, one register-tiled buffer",
        hw.threadgroup_memory_bytes
    )];

    let policy = match opts.radix_override {
        Some(policy) => {
            rationale.push(format!("radix {} forced by caller", policy.base_radix()));
            policy
        }
        None => {
            let sel = select_radix_with_headroom(hw, &radix_profiles(), opts.register_headroom)?;
            let p = sel.profile;
            if sel.degraded {
                rationale.push(format!(
                    "no radix fits {:.0}% of {} registers; falling back to radix {} ({} registers), expect spills",
                    opts.register_headroom * 100.0,
                    hw.gprs_per_thread,
                    p.radix,
                    p.gprs_per_thread
                ));
            } else {
                rationale.push(format!(
                    "radix {}: {} registers per thread within {:.0}% of {}",
                    p.radix,
                    p.gprs_per_thread,
                    opts.register_headroom * 100.0,
                    hw.gprs_per_thread
                ));
            }
            RadixPolicy::for_radix(p.radix).unwrap_or_else(|| {
                rationale.push(format!("radix {} has no butterfly kernel; using radix 8", p.radix));
                RadixPolicy::Prefer8
            })
        }
    };

    let precision = opts.precision;
    let make = |m: usize| -> Result<FftPlan> {
        let radix = policy.base_radix();
        Ok(FftPlan::from_radices(
            m,
            &radix_sequence(m, policy),
            thread_count(m, radix, hw),
            BufferStrategy::RegisterTiledSingleBuffer,
            precision,
        ))
    };

    if n <= b_max {
        let plan = make(n)?;
        rationale.push(format!(
            "single threadgroup: {n} <= {b_max}; {} stages, {} threads, {} barriers, {} B threadgroup memory",
            plan.stages.len(),
            plan.threads,
            plan.barrier_count,
            plan.threadgroup_bytes
        ));
        return Ok(DecompositionPlan { n, kind: DecompositionKind::SingleThreadgroup, b_max, plan: Decomposition::Single(plan), rationale });
    }

    let fs = FourStepPlan::build(n, b_max, &make)?;
    let kind = if n <= FOUR_STEP_SPAN * b_max {
        DecompositionKind::FourStep
    } else {
        DecompositionKind::MultiLevelFourStep
    };
    rationale.push(format!(
        "{}: {n} > {b_max}, split {} x {} with {} level(s)",
        match kind {
            DecompositionKind::FourStep => "four-step",
            _ => "multi-level four-step",
        },
        fs.n1,
        fs.n2,
        fs.depth()
    ));
    Ok(DecompositionPlan { n, kind, b_max, plan: Decomposition::FourStep(fs), rationale })
}
