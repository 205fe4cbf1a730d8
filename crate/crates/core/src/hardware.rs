//! Architectural parameters that drive planning and costing.
//!
//! Models are flat key/value TOML documents whose key names carry their
//! units. Two presets ship with the crate: an Apple M1 GPU and the Intel
//! IvyBridge EU that earlier local-FFT decomposition work targeted.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FftError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareModel {
    pub name: String,
    pub gpu_cores: u64,
    pub alus_per_core: u64,
    pub fp32_flops_per_cycle_per_core: u64,
    pub simd_width: u64,
    pub max_threads_per_threadgroup: u64,
    /// 32-bit registers available to one thread.
    pub gprs_per_thread: u64,
    pub register_file_bytes: u64,
    pub threadgroup_memory_bytes: u64,
    pub dram_bandwidth_bytes_per_sec: f64,
    pub clock_hz: f64,
    pub tg_bw_sequential_bytes_per_sec: f64,
    pub tg_bw_strided_bytes_per_sec: f64,
    pub shuffle_bw_bytes_per_sec: f64,
    /// Measured register/threadgroup copy rate; recorded, not used by the
    /// cost model.
    pub register_copy_bw_bytes_per_sec: f64,
    pub barrier_cost_cycles: f64,
    /// Threads assumed by the register-resident capacity bound.
    pub resident_threads: u64,
    /// Register bytes per thread holding signal data in that bound.
    pub resident_bytes_per_thread: u64,
    /// Local FFT limit reported for the hardware when it does not follow
    /// from threadgroup capacity. Used only by comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported_max_local_fft: Option<u64>,
}

impl HardwareModel {
    /// Apple M1 GPU: 8 cores at 1278 MHz, 32 KiB threadgroup memory and a
    /// 208 KiB register file, with measured threadgroup bandwidths.
    pub fn apple_m1() -> Self {
        HardwareModel {
            name: "apple-m1".into(),
            gpu_cores: 8,
            alus_per_core: 128,
            fp32_flops_per_cycle_per_core: 256,
            simd_width: 32,
            max_threads_per_threadgroup: 1024,
            gprs_per_thread: 128,
            register_file_bytes: 208 * 1024,
            threadgroup_memory_bytes: 32 * 1024,
            dram_bandwidth_bytes_per_sec: 68e9,
            clock_hz: 1278e6,
            tg_bw_sequential_bytes_per_sec: 688e9,
            tg_bw_strided_bytes_per_sec: 217e9,
            shuffle_bw_bytes_per_sec: 262e9,
            register_copy_bw_bytes_per_sec: 407e9,
            barrier_cost_cycles: 2.0,
            resident_threads: 256,
            // 32 single-precision complex elements.
            resident_bytes_per_thread: 256,
            reported_max_local_fft: None,
        }
    }

    /// Intel IvyBridge execution unit: ~2 KiB local memory and register
    /// file, 25.6 GB/s DRAM, local FFTs of 2^10 points.
    ///
    /// Core count, clock and bandwidth figures other than DRAM are
    /// representative HD 4000 numbers; nothing in the comparison reads them.
    pub fn intel_eu() -> Self {
        HardwareModel {
            name: "intel-ivybridge-eu".into(),
            gpu_cores: 16,
            alus_per_core: 8,
            fp32_flops_per_cycle_per_core: 16,
            simd_width: 8,
            max_threads_per_threadgroup: 512,
            gprs_per_thread: 128,
            register_file_bytes: 2 * 1024,
            threadgroup_memory_bytes: 2 * 1024,
            dram_bandwidth_bytes_per_sec: 25.6e9,
            clock_hz: 1150e6,
            tg_bw_sequential_bytes_per_sec: 100e9,
            tg_bw_strided_bytes_per_sec: 50e9,
            shuffle_bw_bytes_per_sec: 50e9,
            register_copy_bw_bytes_per_sec: 100e9,
            barrier_cost_cycles: 2.0,
            resident_threads: 64,
            resident_bytes_per_thread: 32,
            reported_max_local_fft: Some(1024),
        }
    }

    /// Looks up a bundled preset by name.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "m1" | "apple-m1" => Some(Self::apple_m1()),
            "intel-eu" | "intel-ivybridge-eu" => Some(Self::intel_eu()),
            _ => None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let hw: HardwareModel = toml::from_str(text).map_err(|e| FftError::InvalidHardware(e.to_string()))?;
        hw.validate()?;
        Ok(hw)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| FftError::InvalidHardware(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("hardware model serializes")
    }

    /// All parameters strictly positive and threadgroup memory no larger
    /// than the register file.
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("gpu_cores", self.gpu_cores),
            ("alus_per_core", self.alus_per_core),
            ("fp32_flops_per_cycle_per_core", self.fp32_flops_per_cycle_per_core),
            ("simd_width", self.simd_width),
            ("max_threads_per_threadgroup", self.max_threads_per_threadgroup),
            ("gprs_per_thread", self.gprs_per_thread),
            ("register_file_bytes", self.register_file_bytes),
            ("threadgroup_memory_bytes", self.threadgroup_memory_bytes),
            ("resident_threads", self.resident_threads),
            ("resident_bytes_per_thread", self.resident_bytes_per_thread),
        ];
        for (key, v) in counts {
            if v == 0 {
                return Err(FftError::InvalidHardware(format!("{key} must be positive")));
            }
        }
        let rates = [
            ("dram_bandwidth_bytes_per_sec", self.dram_bandwidth_bytes_per_sec),
            ("clock_hz", self.clock_hz),
            ("tg_bw_sequential_bytes_per_sec", self.tg_bw_sequential_bytes_per_sec),
            ("tg_bw_strided_bytes_per_sec", self.tg_bw_strided_bytes_per_sec),
            ("shuffle_bw_bytes_per_sec", self.shuffle_bw_bytes_per_sec),
            ("register_copy_bw_bytes_per_sec", self.register_copy_bw_bytes_per_sec),
            ("barrier_cost_cycles", self.barrier_cost_cycles),
        ];
        for (key, v) in rates {
            if !(v.is_finite() && v > 0.0) {
                return Err(FftError::InvalidHardware(format!("{key} must be positive and finite")));
            }
        }
        if self.threadgroup_memory_bytes > self.register_file_bytes {
            return Err(FftError::InvalidHardware(
                "threadgroup_memory_bytes exceeds register_file_bytes".into(),
            ));
        }
        if self.reported_max_local_fft == Some(0) {
            return Err(FftError::InvalidHardware("reported_max_local_fft must be positive".into()));
        }
        Ok(())
    }

    /// Peak FP32 rate in FLOP/s.
    pub fn peak_flops(&self) -> f64 {
        self.gpu_cores as f64 * self.fp32_flops_per_cycle_per_core as f64 * self.clock_hz
    }
}

impl Default for HardwareModel {
    fn default() -> Self {
        Self::apple_m1()
    }
}
