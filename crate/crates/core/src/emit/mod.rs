//! Metal Shading Language kernels for planned transforms.
//!
//! Each single-threadgroup plan becomes one kernel with every stage
//! unrolled into its own block. Four-step plans become a sequence of
//! dispatches: row FFTs, a twiddle-scaling transpose and column FFTs, plus
//! a plain transpose per extra recursion level. The row and column kernels
//! are the same text as the standalone kernels of their sizes; where they
//! read and write is set by a `FftParams` buffer described in the sidecar.

mod check;
mod msl;

use serde::{Deserialize, Serialize};

pub use check::{structural_check, CheckItem, CheckReport};

use crate::complex::Precision;
use crate::error::{FftError, Result};
use crate::four_step::{FourStepPlan, OuterPlan};
use crate::plan::{BufferStrategy, Exchange, FftPlan, MAX_PLAN_THREADS};
use crate::planner::{Decomposition, DecompositionPlan};

/// Threadgroup memory available to one Metal threadgroup on Apple GPUs.
pub const MAX_THREADGROUP_BYTES: usize = 32 * 1024;

/// Threads per threadgroup used by transpose kernels.
pub const TRANSPOSE_THREADS: usize = 256;

/// Buffer indices shared by every emitted kernel.
pub const SRC_BINDING: u32 = 0;
pub const DST_BINDING: u32 = 1;
pub const PARAMS_BINDING: u32 = 2;

/// The plan facts a kernel was generated from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanDigest {
    pub n: usize,
    pub radices: Vec<usize>,
    pub threads: usize,
    pub barrier_count: usize,
    pub threadgroup_buffers: usize,
    pub double_buffered: bool,
}

impl PlanDigest {
    pub fn of(plan: &FftPlan) -> Self {
        PlanDigest {
            n: plan.n,
            radices: plan.radices(),
            threads: plan.threads,
            barrier_count: plan.barrier_count,
            threadgroup_buffers: plan.threadgroup_buffers(),
            double_buffered: plan.buffer_strategy == BufferStrategy::DoubleBuffer,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelRole {
    Fft,
    /// Transpose scaling element `(r, c)` by `W_N^{rc}`.
    TwiddleTranspose,
    Transpose,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSource {
    pub entry_point: String,
    pub role: KernelRole,
    pub threads_per_threadgroup: usize,
    /// Present for FFT kernels.
    pub plan_digest: Option<PlanDigest>,
    pub text: String,
}

impl KernelSource {
    pub fn file_name(&self) -> String {
        format!("{}.metal", self.entry_point)
    }
}

/// Where one threadgroup's signal lives in a device buffer. Threadgroup `t`
/// starts at `(t / group)·group_stride + (t % group)·lane_stride` and its
/// samples are `elem_stride` apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub group: u32,
    pub group_stride: u32,
    pub lane_stride: u32,
    pub elem_stride: u32,
}

impl Layout {
    /// Consecutive signals of length `n`, each contiguous.
    pub fn contiguous(n: usize) -> Self {
        Layout { group: 1, group_stride: n as u32, lane_stride: 0, elem_stride: 1 }
    }

    /// `rows` interleaved signals per block of `rows·len` elements: signal
    /// `t % rows` of block `t / rows` starts at offset `t % rows` and steps
    /// by `rows`.
    pub fn interleaved(rows: usize, len: usize) -> Self {
        Layout { group: rows as u32, group_stride: (rows * len) as u32, lane_stride: 1, elem_stride: rows as u32 }
    }

    pub fn base(&self, threadgroup: usize) -> usize {
        let g = self.group as usize;
        threadgroup / g * self.group_stride as usize + threadgroup % g * self.lane_stride as usize
    }

    pub fn index(&self, threadgroup: usize, element: usize) -> usize {
        self.base(threadgroup) + element * self.elem_stride as usize
    }
}

/// Contents of the params buffer bound to FFT kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FftParams {
    pub src: Layout,
    pub dst: Layout,
}

impl FftParams {
    pub fn contiguous(n: usize) -> Self {
        FftParams { src: Layout::contiguous(n), dst: Layout::contiguous(n) }
    }
}

/// One kernel launch. Grid sizes are per transform of the whole batch;
/// multiply `threadgroups_per_transform` by the batch size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dispatch {
    pub kernel: String,
    pub threads_per_threadgroup: usize,
    pub threadgroups_per_transform: usize,
    pub src: String,
    pub dst: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<FftParams>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bindings {
    pub src: u32,
    pub dst: u32,
    pub params: u32,
}

/// Host-side launch recipe written next to the kernels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DispatchSequence {
    pub n: usize,
    pub element: String,
    pub bindings: Bindings,
    /// Named device buffers, each holding `n` elements per transform.
    pub buffers: Vec<String>,
    pub dispatches: Vec<Dispatch>,
}

impl DispatchSequence {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dispatch sequence serializes")
    }
}

/// Kernels (one per distinct entry point) and the launches that use them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelBundle {
    pub kernels: Vec<KernelSource>,
    pub dispatch: DispatchSequence,
}

impl KernelBundle {
    fn new(n: usize) -> Self {
        KernelBundle {
            kernels: Vec::new(),
            dispatch: DispatchSequence {
                n,
                element: "float2".into(),
                bindings: Bindings { src: SRC_BINDING, dst: DST_BINDING, params: PARAMS_BINDING },
                buffers: vec!["input".into(), "output".into()],
                dispatches: Vec::new(),
            },
        }
    }

    fn add_kernel(&mut self, k: KernelSource) -> String {
        let name = k.entry_point.clone();
        if !self.kernels.iter().any(|e| e.entry_point == name) {
            self.kernels.push(k);
        }
        name
    }

    fn scratch(&mut self) -> String {
        let name = format!("scratch{}", self.dispatch.buffers.len() - 2);
        self.dispatch.buffers.push(name.clone());
        name
    }

    pub fn kernel(&self, entry_point: &str) -> Option<&KernelSource> {
        self.kernels.iter().find(|k| k.entry_point == entry_point)
    }
}

fn entry_point(plan: &FftPlan) -> String {
    let radices: String = plan.radices().iter().map(|r| r.to_string()).collect();
    let suffix = if plan.buffer_strategy == BufferStrategy::DoubleBuffer { "_db" } else { "" };
    format!("fft_{}_r{radices}{suffix}", plan.n)
}

/// Emits the kernel of a single-threadgroup plan.
///
/// Rejects plans that do not fit one threadgroup, use SIMD-shuffle stages,
/// or are not single precision.
pub fn emit_kernel(plan: &FftPlan) -> Result<KernelSource> {
    plan.validate()?;
    if plan.threadgroup_bytes > MAX_THREADGROUP_BYTES {
        return Err(FftError::NotSingleThreadgroup(plan.n));
    }
    if plan.precision != Precision::Single {
        return Err(FftError::InvalidPlan(format!("kernels are float2 only, plan is {:?}", plan.precision)));
    }
    if plan.stages.iter().any(|s| s.exchange == Exchange::SimdShuffle) {
        return Err(FftError::InvalidPlan("SIMD-shuffle stages are not emitted".into()));
    }
    if plan.threads == 0 || plan.threads > MAX_PLAN_THREADS {
        return Err(FftError::InvalidPlan(format!("{} threads per threadgroup", plan.threads)));
    }
    let entry = entry_point(plan);
    Ok(KernelSource {
        text: msl::fft_kernel(plan, &entry),
        threads_per_threadgroup: plan.threads,
        plan_digest: Some(PlanDigest::of(plan)),
        role: KernelRole::Fft,
        entry_point: entry,
    })
}

fn transpose_kernel(rows: usize, cols: usize, twiddle: bool) -> KernelSource {
    let prefix = if twiddle { "twiddle_transpose" } else { "transpose" };
    let entry = format!("{prefix}_{rows}x{cols}");
    KernelSource {
        text: msl::transpose_kernel(rows, cols, twiddle, &entry),
        threads_per_threadgroup: TRANSPOSE_THREADS.min(rows * cols),
        plan_digest: None,
        role: if twiddle { KernelRole::TwiddleTranspose } else { KernelRole::Transpose },
        entry_point: entry,
    }
}

/// Emits the kernels and dispatch sequence of any synthesized plan.
pub fn emit_plan(plan: &DecompositionPlan) -> Result<KernelBundle> {
    match &plan.plan {
        Decomposition::Single(p) => {
            let mut bundle = KernelBundle::new(p.n);
            let kernel = emit_kernel(p)?;
            let threads = kernel.threads_per_threadgroup;
            let name = bundle.add_kernel(kernel);
            bundle.dispatch.dispatches.push(Dispatch {
                kernel: name,
                threads_per_threadgroup: threads,
                threadgroups_per_transform: 1,
                src: "input".into(),
                dst: "output".into(),
                params: Some(FftParams::contiguous(p.n)),
            });
            Ok(bundle)
        }
        Decomposition::FourStep(fs) => emit_four_step_kernels(fs),
    }
}

/// Emits a four-step plan: row FFT kernel, twiddle transpose, column FFT
/// kernel (or a nested four-step followed by a transpose).
pub fn emit_four_step_kernels(plan: &FourStepPlan) -> Result<KernelBundle> {
    let mut bundle = KernelBundle::new(plan.n);
    push_four_step(&mut bundle, plan, 1, "input", "output")?;
    Ok(bundle)
}

// Appends the launches for `count` size-`plan.n` transforms per top-level
// transform, stored contiguously in `src`, natural-order results to `dst`.
fn push_four_step(bundle: &mut KernelBundle, plan: &FourStepPlan, count: usize, src: &str, dst: &str) -> Result<()> {
    let (n, n1, n2) = (plan.n, plan.n1, plan.n2);
    let rows = emit_kernel(&plan.inner_plan)?;
    let rows_threads = rows.threads_per_threadgroup;
    let rows_name = bundle.add_kernel(rows);
    let scaled = bundle.scratch();
    bundle.dispatch.dispatches.push(Dispatch {
        kernel: rows_name,
        threads_per_threadgroup: rows_threads,
        threadgroups_per_transform: count * n1,
        src: src.into(),
        dst: scaled.clone(),
        params: Some(FftParams { src: Layout::interleaved(n1, n2), dst: Layout::contiguous(n2) }),
    });

    let tw = transpose_kernel(n1, n2, true);
    let tw_threads = tw.threads_per_threadgroup;
    let tw_name = bundle.add_kernel(tw);
    let columns = bundle.scratch();
    bundle.dispatch.dispatches.push(Dispatch {
        kernel: tw_name,
        threads_per_threadgroup: tw_threads,
        threadgroups_per_transform: count * n / tw_threads,
        src: scaled,
        dst: columns.clone(),
        params: None,
    });

    match &plan.outer_plan {
        OuterPlan::Direct(outer) => {
            let k = emit_kernel(outer)?;
            let threads = k.threads_per_threadgroup;
            let name = bundle.add_kernel(k);
            bundle.dispatch.dispatches.push(Dispatch {
                kernel: name,
                threads_per_threadgroup: threads,
                threadgroups_per_transform: count * n2,
                src: columns,
                dst: dst.into(),
                params: Some(FftParams { src: Layout::contiguous(n1), dst: Layout::interleaved(n2, n1) }),
            });
        }
        OuterPlan::FourStep(nested) => {
            let spectra = bundle.scratch();
            push_four_step(bundle, nested, count * n2, &columns, &spectra)?;
            let t = transpose_kernel(n2, n1, false);
            let threads = t.threads_per_threadgroup;
            let name = bundle.add_kernel(t);
            bundle.dispatch.dispatches.push(Dispatch {
                kernel: name,
                threads_per_threadgroup: threads,
                threadgroups_per_transform: count * n / threads,
                src: spectra,
                dst: dst.into(),
                params: None,
            });
        }
    }
    Ok(())
}
