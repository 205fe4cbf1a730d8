//! Analytic time and throughput estimates for plans on a hardware model.
//!
//! A transform's time is the larger of its compute and memory times plus
//! barrier stalls. Memory time adds up every traffic tier the plan touches:
//! SIMD shuffles, threadgroup memory (sequential or strided bandwidth by
//! access class) and device memory.

use serde::{Deserialize, Serialize};

use crate::butterfly::COMPLEX_MUL_FLOPS;
use crate::error::Result;
use crate::four_step::{FourStepPlan, OuterPlan};
use crate::hardware::HardwareModel;
use crate::plan::{make_plan, shuffle_hybrid_plan, AccessClass, Exchange, FftPlan, RadixPolicy};
use crate::planner::{max_local_fft, Decomposition, DecompositionPlan, MemoryStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub flops: u64,
    /// Bytes moved by SIMD shuffles.
    pub tier1_bytes: u64,
    /// Bytes moved through threadgroup memory.
    pub tier2_bytes: u64,
    pub device_bytes: u64,
    pub barriers: u64,
    pub barrier_cycles: f64,
    pub compute_seconds: f64,
    pub memory_seconds: f64,
    pub barrier_seconds: f64,
    pub predicted_seconds: f64,
    pub gflops_predicted: f64,
}

/// Nominal FFT work, `5·N·log2(N)` per transform.
pub fn fft_flops(n: usize, batch: usize) -> u64 {
    5 * n as u64 * n.trailing_zeros() as u64 * batch as u64
}

/// Per-transform totals before they are turned into time.
#[derive(Debug, Default, Clone, Copy)]
struct Traffic {
    flops: u64,
    tier1_bytes: u64,
    tier2_bytes: u64,
    device_bytes: u64,
    barriers: u64,
    memory_seconds: f64,
}

impl Traffic {
    fn scaled(self, k: usize) -> Traffic {
        let k64 = k as u64;
        Traffic {
            flops: self.flops * k64,
            tier1_bytes: self.tier1_bytes * k64,
            tier2_bytes: self.tier2_bytes * k64,
            device_bytes: self.device_bytes * k64,
            barriers: self.barriers * k64,
            memory_seconds: self.memory_seconds * k as f64,
        }
    }

    fn add(self, o: Traffic) -> Traffic {
        Traffic {
            flops: self.flops + o.flops,
            tier1_bytes: self.tier1_bytes + o.tier1_bytes,
            tier2_bytes: self.tier2_bytes + o.tier2_bytes,
            device_bytes: self.device_bytes + o.device_bytes,
            barriers: self.barriers + o.barriers,
            memory_seconds: self.memory_seconds + o.memory_seconds,
        }
    }

    fn device(bytes: u64, hw: &HardwareModel) -> Traffic {
        Traffic { device_bytes: bytes, memory_seconds: bytes as f64 / hw.dram_bandwidth_bytes_per_sec, ..Default::default() }
    }
}

fn local_traffic(plan: &FftPlan, hw: &HardwareModel) -> Traffic {
    let pass = 2 * (plan.n * plan.precision.complex_bytes()) as u64;
    let mut t = Traffic::device(pass, hw);
    t.flops = fft_flops(plan.n, 1);
    t.barriers = plan.barrier_count as u64;
    for stage in &plan.stages {
        match stage.exchange {
            Exchange::Device => {}
            Exchange::Threadgroup => {
                let bw = match stage.access_class {
                    AccessClass::Sequential => hw.tg_bw_sequential_bytes_per_sec,
                    AccessClass::Strided | AccessClass::Scattered => hw.tg_bw_strided_bytes_per_sec,
                };
                t.tier2_bytes += pass;
                t.memory_seconds += pass as f64 / bw;
            }
            Exchange::SimdShuffle => {
                t.tier1_bytes += pass;
                t.memory_seconds += pass as f64 / hw.shuffle_bw_bytes_per_sec;
            }
        }
    }
    t
}

// Both row passes read and write device memory once; the write of the
// first and the read of the second are the transpose traffic. The twiddle
// scaling costs one complex multiply per element.
fn four_step_traffic(plan: &FourStepPlan, hw: &HardwareModel) -> Traffic {
    let inner = local_traffic(&plan.inner_plan, hw).scaled(plan.n1);
    let outer = match &plan.outer_plan {
        OuterPlan::Direct(p) => local_traffic(p, hw),
        OuterPlan::FourStep(p) => four_step_traffic(p, hw),
    }
    .scaled(plan.n2);
    let mut t = inner.add(outer);
    t.flops += COMPLEX_MUL_FLOPS * plan.n as u64;
    t
}

fn plan_traffic(plan: &DecompositionPlan, hw: &HardwareModel) -> Traffic {
    match &plan.plan {
        Decomposition::Single(p) => local_traffic(p, hw),
        Decomposition::FourStep(p) => four_step_traffic(p, hw),
    }
}

/// Predicted cost of running `batch` independent transforms of `plan`.
pub fn estimate(plan: &DecompositionPlan, hw: &HardwareModel, batch: usize) -> CostEstimate {
    let t = plan_traffic(plan, hw).scaled(batch);
    let compute_seconds = t.flops as f64 / hw.peak_flops();
    let barrier_cycles = t.barriers as f64 * hw.barrier_cost_cycles;
    let barrier_seconds = barrier_cycles / hw.clock_hz;
    let predicted_seconds = compute_seconds.max(t.memory_seconds) + barrier_seconds;
    let gflops_predicted = if predicted_seconds > 0.0 { t.flops as f64 / predicted_seconds / 1e9 } else { 0.0 };
    CostEstimate {
        flops: t.flops,
        tier1_bytes: t.tier1_bytes,
        tier2_bytes: t.tier2_bytes,
        device_bytes: t.device_bytes,
        barriers: t.barriers,
        barrier_cycles,
        compute_seconds,
        memory_seconds: t.memory_seconds,
        barrier_seconds,
        predicted_seconds,
        gflops_predicted,
    }
}

/// Candidate designs ordered fastest first. Ties keep their input order.
pub fn rank_designs<'a>(
    designs: &'a [DecompositionPlan],
    hw: &HardwareModel,
    batch: usize,
) -> Vec<(&'a DecompositionPlan, CostEstimate)> {
    let mut ranked: Vec<_> = designs.iter().map(|d| (d, estimate(d, hw, batch))).collect();
    ranked.sort_by(|a, b| a.1.predicted_seconds.total_cmp(&b.1.predicted_seconds));
    ranked
}

/// The three reference single-threadgroup designs for size `n`: radix-8
/// and radix-4 Stockham, and the SIMD-shuffle hybrid.
pub fn reference_designs(n: usize, hw: &HardwareModel) -> Result<Vec<DecompositionPlan>> {
    Ok(vec![
        DecompositionPlan::single(make_plan(n, RadixPolicy::Prefer8)?, "radix-8 Stockham"),
        DecompositionPlan::single(make_plan(n, RadixPolicy::Prefer4)?, "radix-4 Stockham"),
        DecompositionPlan::single(
            shuffle_hybrid_plan(n, hw.simd_width as usize)?,
            "SIMD-shuffle hybrid with threadgroup exchanges between SIMD chunks",
        ),
    ])
}

/// Headline figures of one hardware model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareSummary {
    pub name: String,
    pub max_local_fft: usize,
    pub threadgroup_memory_bytes: u64,
    pub register_file_bytes: u64,
    pub simd_width: u64,
    pub dram_bandwidth_bytes_per_sec: f64,
}

impl HardwareSummary {
    /// Uses the reported local FFT limit when the model carries one,
    /// otherwise the FP32 register-tiled capacity.
    pub fn of(hw: &HardwareModel) -> Self {
        let computed = max_local_fft(hw, 8, MemoryStrategy::RegisterTiled).expect("8-byte elements are supported");
        HardwareSummary {
            name: hw.name.clone(),
            max_local_fft: hw.reported_max_local_fft.map_or(computed, |r| r as usize),
            threadgroup_memory_bytes: hw.threadgroup_memory_bytes,
            register_file_bytes: hw.register_file_bytes,
            simd_width: hw.simd_width,
            dram_bandwidth_bytes_per_sec: hw.dram_bandwidth_bytes_per_sec,
        }
    }
}

/// How far `target` extends the single-threadgroup regime of `baseline`.
/// Ratios are target over baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThesisComparison {
    pub baseline: HardwareSummary,
    pub target: HardwareSummary,
    pub local_fft_ratio: f64,
    pub threadgroup_memory_ratio: f64,
    pub register_file_ratio: f64,
    pub simd_width_ratio: f64,
    pub dram_bandwidth_ratio: f64,
}

pub fn thesis_comparison(baseline: &HardwareModel, target: &HardwareModel) -> ThesisComparison {
    let a = HardwareSummary::of(baseline);
    let b = HardwareSummary::of(target);
    ThesisComparison {
        local_fft_ratio: b.max_local_fft as f64 / a.max_local_fft as f64,
        threadgroup_memory_ratio: b.threadgroup_memory_bytes as f64 / a.threadgroup_memory_bytes as f64,
        register_file_ratio: b.register_file_bytes as f64 / a.register_file_bytes as f64,
        simd_width_ratio: b.simd_width as f64 / a.simd_width as f64,
        dram_bandwidth_ratio: b.dram_bandwidth_bytes_per_sec / a.dram_bandwidth_bytes_per_sec,
        baseline: a,
        target: b,
    }
}
