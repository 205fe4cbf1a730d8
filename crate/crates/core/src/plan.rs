//! Stockham stage schedules and their barrier accounting.

use serde::{Deserialize, Serialize};

use crate::complex::Precision;
use crate::error::{FftError, Result};

/// Smallest transform size accepted by plans and signals.
pub const MIN_SIZE: usize = 2;
/// Largest transform size accepted by plans and signals.
pub const MAX_SIZE: usize = 1 << 24;
/// Upper bound on modeled threads per threadgroup used by [`make_plan`].
pub const MAX_PLAN_THREADS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadixPolicy {
    Prefer8,
    Prefer4,
    Pure2,
}

impl RadixPolicy {
    /// The radix the policy builds its stages from.
    pub fn base_radix(self) -> usize {
        match self {
            RadixPolicy::Prefer8 => 8,
            RadixPolicy::Prefer4 => 4,
            RadixPolicy::Pure2 => 2,
        }
    }

    pub fn for_radix(radix: usize) -> Option<Self> {
        match radix {
            8 => Some(RadixPolicy::Prefer8),
            4 => Some(RadixPolicy::Prefer4),
            2 => Some(RadixPolicy::Pure2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwiddlePolicy {
    /// One sincos per butterfly, higher powers by repeated complex multiply.
    ChainedSingleSincos,
    /// One sincos per twiddle.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessClass {
    Sequential,
    Strided,
    Scattered,
}

/// Where a stage's input comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exchange {
    /// Read straight from device memory (first stage bypass).
    Device,
    /// Exchanged through threadgroup memory; needs barriers.
    Threadgroup,
    /// Exchanged between lanes of one SIMD group by shuffles; no barriers.
    SimdShuffle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BufferStrategy {
    DoubleBuffer,
    RegisterTiledSingleBuffer,
}

/// One Stockham stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StageDescriptor {
    pub radix: usize,
    /// Product of the radices of all earlier stages.
    pub span: usize,
    pub twiddle_policy: TwiddlePolicy,
    pub access_class: AccessClass,
    pub exchange: Exchange,
}

/// Index arithmetic of one Stockham DIT stage of size `n`.
///
/// Butterfly `j ∈ [0, n/radix)` reads `src[j + r·n/radix]`, applies
/// `W_{span·radix}^{r·(j mod span)}` to element `r`, and writes
/// `dst[(j / span)·span·radix + (j mod span) + r·span]`. The executor and
/// the kernel emitter both take their addressing from here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageAddressing {
    pub n: usize,
    pub radix: usize,
    pub span: usize,
}

impl StageAddressing {
    pub fn butterflies(&self) -> usize {
        self.n / self.radix
    }

    /// Distance between the elements one butterfly reads.
    pub fn read_stride(&self) -> usize {
        self.n / self.radix
    }

    /// Distance between the elements one butterfly writes.
    pub fn write_stride(&self) -> usize {
        self.span
    }

    /// Order of the twiddle roots used by this stage.
    pub fn twiddle_order(&self) -> usize {
        self.span * self.radix
    }

    #[inline(always)]
    pub fn input_index(&self, j: usize, r: usize) -> usize {
        j + r * self.read_stride()
    }

    #[inline(always)]
    pub fn output_base(&self, j: usize) -> usize {
        (j / self.span) * self.span * self.radix + j % self.span
    }

    #[inline(always)]
    pub fn output_index(&self, j: usize, r: usize) -> usize {
        self.output_base(j) + r * self.write_stride()
    }

    /// Exponent `k` of the base twiddle `W_{span·radix}^k` for butterfly `j`.
    #[inline(always)]
    pub fn twiddle_exponent(&self, j: usize) -> usize {
        j % self.span
    }

    /// [`input_index`](Self::input_index) as a shader expression in `j`.
    pub fn input_index_expr(&self, j: &str, r: usize) -> String {
        match r * self.read_stride() {
            0 => j.to_string(),
            off => format!("{j} + {off}u"),
        }
    }

    /// [`twiddle_exponent`](Self::twiddle_exponent) as a shader expression.
    pub fn twiddle_exponent_expr(&self, j: &str) -> String {
        format!("{j} % {}u", self.span)
    }

    /// [`output_base`](Self::output_base) as a shader expression, given the
    /// names of `j` and of the already computed twiddle exponent.
    pub fn output_base_expr(&self, j: &str, k: &str) -> String {
        if self.span == 1 {
            format!("{j} * {}u", self.radix)
        } else {
            format!("({j} / {}u) * {}u + {k}", self.span, self.span * self.radix)
        }
    }

    /// [`output_index`](Self::output_index) as a shader expression.
    pub fn output_index_expr(&self, base: &str, r: usize) -> String {
        match r * self.write_stride() {
            0 => base.to_string(),
            off => format!("{base} + {off}u"),
        }
    }
}

/// An ordered list of Stockham stages plus modeled execution configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FftPlan {
    pub n: usize,
    pub stages: Vec<StageDescriptor>,
    pub threads: usize,
    pub buffer_strategy: BufferStrategy,
    pub precision: Precision,
    pub threadgroup_bytes: usize,
    pub barrier_count: usize,
}

/// Validates a transform size.
pub fn check_size(n: usize) -> Result<()> {
    if n < MIN_SIZE {
        return Err(FftError::SizeTooSmall(n));
    }
    if !n.is_power_of_two() {
        return Err(FftError::NotPowerOfTwo(n));
    }
    if n > MAX_SIZE {
        return Err(FftError::SizeTooLarge(n));
    }
    Ok(())
}

/// Radices for `n` under `policy`: full stages of the base radix, then one
/// smaller remainder stage if needed.
pub fn radix_sequence(n: usize, policy: RadixPolicy) -> Vec<usize> {
    let base = policy.base_radix();
    let bits = n.trailing_zeros() as usize;
    let base_bits = base.trailing_zeros() as usize;
    let mut radices = vec![base; bits / base_bits];
    let rest = bits % base_bits;
    if rest > 0 {
        radices.push(1 << rest);
    }
    radices
}

/// Builds a plan for `n` in single precision.
pub fn make_plan(n: usize, policy: RadixPolicy) -> Result<FftPlan> {
    check_size(n)?;
    let threads = (n / policy.base_radix()).clamp(1, MAX_PLAN_THREADS);
    Ok(FftPlan::from_radices(
        n,
        &radix_sequence(n, policy),
        threads,
        BufferStrategy::RegisterTiledSingleBuffer,
        Precision::Single,
    ))
}

impl FftPlan {
    /// Assembles a plan from explicit radices. All stages after the first
    /// exchange through threadgroup memory with sequential access.
    ///
    /// Panics if the radices are not 2, 4 or 8 or do not multiply to `n`.
    pub fn from_radices(
        n: usize,
        radices: &[usize],
        threads: usize,
        buffer_strategy: BufferStrategy,
        precision: Precision,
    ) -> FftPlan {
        let exchanges: Vec<Exchange> = (0..radices.len())
            .map(|s| if s == 0 { Exchange::Device } else { Exchange::Threadgroup })
            .collect();
        let access = vec![AccessClass::Sequential; radices.len()];
        Self::assemble(n, radices, &exchanges, &access, threads, buffer_strategy, precision)
    }

    fn assemble(
        n: usize,
        radices: &[usize],
        exchanges: &[Exchange],
        access: &[AccessClass],
        threads: usize,
        buffer_strategy: BufferStrategy,
        precision: Precision,
    ) -> FftPlan {
        assert!(radices.iter().all(|r| matches!(r, 2 | 4 | 8)), "radices must be 2, 4 or 8");
        assert_eq!(radices.iter().product::<usize>(), n, "radices must multiply to n");
        let mut span = 1;
        let stages = radices
            .iter()
            .zip(exchanges)
            .zip(access)
            .map(|((&radix, &exchange), &access_class)| {
                let stage = StageDescriptor {
                    radix,
                    span,
                    twiddle_policy: TwiddlePolicy::ChainedSingleSincos,
                    access_class,
                    exchange,
                };
                span *= radix;
                stage
            })
            .collect();
        let mut plan = FftPlan {
            n,
            stages,
            threads,
            buffer_strategy,
            precision,
            threadgroup_bytes: 0,
            barrier_count: 0,
        };
        plan.refresh_accounting();
        plan
    }

    /// Recomputes `threadgroup_bytes` and `barrier_count` after an edit.
    pub fn refresh_accounting(&mut self) {
        self.threadgroup_bytes = threadgroup_bytes(self);
        self.barrier_count = count_barriers(self);
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self.refresh_accounting();
        self
    }

    pub fn with_buffer_strategy(mut self, strategy: BufferStrategy) -> Self {
        self.buffer_strategy = strategy;
        self.refresh_accounting();
        self
    }

    pub fn with_twiddle_policy(mut self, policy: TwiddlePolicy) -> Self {
        for s in &mut self.stages {
            s.twiddle_policy = policy;
        }
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn radices(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.radix).collect()
    }

    pub fn addressing(&self, stage: usize) -> StageAddressing {
        let s = &self.stages[stage];
        StageAddressing { n: self.n, radix: s.radix, span: s.span }
    }

    /// Number of stage boundaries exchanged through threadgroup memory.
    pub fn threadgroup_exchanges(&self) -> usize {
        self.stages.iter().filter(|s| s.exchange == Exchange::Threadgroup).count()
    }

    /// Threadgroup buffers declared by a kernel for this plan, each `n` long.
    pub fn threadgroup_buffers(&self) -> usize {
        if self.threadgroup_exchanges() == 0 {
            0
        } else {
            match self.buffer_strategy {
                BufferStrategy::RegisterTiledSingleBuffer => 1,
                BufferStrategy::DoubleBuffer => 2,
            }
        }
    }

    /// Checks the structural invariants: radix product, span recurrence,
    /// first-stage device read, and up-to-date accounting.
    pub fn validate(&self) -> Result<()> {
        check_size(self.n)?;
        let mut span = 1;
        for (i, s) in self.stages.iter().enumerate() {
            let ok = matches!(s.radix, 2 | 4 | 8)
                && s.span == span
                && ((i == 0) == (s.exchange == Exchange::Device));
            if !ok {
                return Err(FftError::InvalidPlan(format!("stage {i} breaks the stage recurrence")));
            }
            span *= s.radix;
        }
        if span != self.n {
            return Err(FftError::InvalidPlan(format!("radices multiply to {span}, not {}", self.n)));
        }
        if self.barrier_count != count_barriers(self) || self.threadgroup_bytes != threadgroup_bytes(self) {
            return Err(FftError::InvalidPlan("stale barrier or threadgroup accounting".into()));
        }
        Ok(())
    }
}

fn threadgroup_bytes(plan: &FftPlan) -> usize {
    plan.threadgroup_buffers() * plan.n * plan.precision.complex_bytes()
}

/// Modeled threadgroup barriers of a plan.
///
/// Every boundary exchanged through threadgroup memory costs a barrier pair
/// with a single register-tiled buffer (writes visible, then reads drained
/// before the buffer is overwritten) and one barrier with double buffering.
/// The first stage reads device memory and the last writes it, so neither
/// adds a load or store barrier; shuffle exchanges need none.
pub fn count_barriers(plan: &FftPlan) -> usize {
    let per_exchange = match plan.buffer_strategy {
        BufferStrategy::RegisterTiledSingleBuffer => 2,
        BufferStrategy::DoubleBuffer => 1,
    };
    per_exchange * plan.threadgroup_exchanges()
}

/// The SIMD-shuffle hybrid design as a plan template.
///
/// The index bits are consumed in chunks of `log2(simd_width)`; stages
/// inside a chunk exchange by SIMD shuffle, and each new chunk starts with
/// an inter-SIMD exchange through threadgroup memory with scattered access.
pub fn shuffle_hybrid_plan(n: usize, simd_width: usize) -> Result<FftPlan> {
    check_size(n)?;
    let chunk_bits = simd_width.max(2).trailing_zeros() as usize;
    let mut radices = Vec::new();
    let mut exchanges = Vec::new();
    let mut access = Vec::new();
    let mut remaining = n.trailing_zeros() as usize;
    let mut first_chunk = true;
    while remaining > 0 {
        let bits = remaining.min(chunk_bits);
        let chunk = radix_sequence(1 << bits, RadixPolicy::Prefer8);
        for (i, &r) in chunk.iter().enumerate() {
            radices.push(r);
            let (ex, acc) = match (first_chunk, i) {
                (true, 0) => (Exchange::Device, AccessClass::Sequential),
                (false, 0) => (Exchange::Threadgroup, AccessClass::Scattered),
                _ => (Exchange::SimdShuffle, AccessClass::Sequential),
            };
            exchanges.push(ex);
            access.push(acc);
        }
        remaining -= bits;
        first_chunk = false;
    }
    let threads = (n / 8).clamp(1, MAX_PLAN_THREADS);
    Ok(FftPlan::assemble(
        n,
        &radices,
        &exchanges,
        &access,
        threads,
        BufferStrategy::RegisterTiledSingleBuffer,
        Precision::Single,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_stage_shapes() {
        assert_eq!(make_plan(4096, RadixPolicy::Prefer8).unwrap().radices(), vec![8; 4]);
        assert_eq!(make_plan(4096, RadixPolicy::Prefer4).unwrap().radices(), vec![4; 6]);
        assert_eq!(make_plan(512, RadixPolicy::Prefer4).unwrap().radices(), vec![4, 4, 4, 4, 2]);
        assert_eq!(make_plan(2048, RadixPolicy::Prefer4).unwrap().radices(), vec![4, 4, 4, 4, 4, 2]);
        assert_eq!(make_plan(256, RadixPolicy::Prefer8).unwrap().radices(), vec![8, 8, 4]);
        assert_eq!(make_plan(2, RadixPolicy::Prefer8).unwrap().radices(), vec![2]);
    }

    #[test]
    fn table_threads_and_memory() {
        for (n, threads, kib) in [(256, 64, 2), (512, 128, 4), (1024, 256, 8), (2048, 512, 16), (4096, 1024, 32)] {
            let p = make_plan(n, RadixPolicy::Prefer4).unwrap();
            assert_eq!(p.threads, threads);
            assert_eq!(p.threadgroup_bytes, kib * 1024);
        }
        assert_eq!(make_plan(4096, RadixPolicy::Prefer8).unwrap().threads, 512);
    }

    #[test]
    fn spans_follow_recurrence() {
        let p = make_plan(2048, RadixPolicy::Prefer8).unwrap();
        let spans: Vec<_> = p.stages.iter().map(|s| s.span).collect();
        assert_eq!(spans, vec![1, 8, 64, 512]);
        p.validate().unwrap();
    }

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(make_plan(1, RadixPolicy::Prefer8), Err(FftError::SizeTooSmall(1)));
        assert_eq!(make_plan(0, RadixPolicy::Prefer8), Err(FftError::SizeTooSmall(0)));
        assert_eq!(make_plan(4095, RadixPolicy::Prefer4), Err(FftError::NotPowerOfTwo(4095)));
        assert_eq!(make_plan(1 << 25, RadixPolicy::Prefer4), Err(FftError::SizeTooLarge(1 << 25)));
    }

    #[test]
    fn barrier_counts() {
        assert_eq!(count_barriers(&make_plan(4096, RadixPolicy::Prefer8).unwrap()), 6);
        assert_eq!(count_barriers(&make_plan(4096, RadixPolicy::Prefer4).unwrap()), 10);
        assert_eq!(count_barriers(&make_plan(4096, RadixPolicy::Pure2).unwrap()), 22);
        assert_eq!(count_barriers(&make_plan(8, RadixPolicy::Prefer8).unwrap()), 0);
        let db = make_plan(4096, RadixPolicy::Prefer8).unwrap().with_buffer_strategy(BufferStrategy::DoubleBuffer);
        assert_eq!(db.barrier_count, 3);
        assert_eq!(db.threadgroup_bytes, 2 * 4096 * 8);
    }

    #[test]
    fn single_stage_plan_has_no_threadgroup_buffer() {
        let p = make_plan(8, RadixPolicy::Prefer8).unwrap();
        assert_eq!(p.threadgroup_bytes, 0);
        assert_eq!(p.threadgroup_buffers(), 0);
    }

    #[test]
    fn shuffle_template() {
        let p = shuffle_hybrid_plan(4096, 32).unwrap();
        assert_eq!(p.radices(), vec![8, 4, 8, 4, 4]);
        assert_eq!(p.barrier_count, 4);
        assert_eq!(p.radices().iter().product::<usize>(), 4096);
        let scattered: Vec<_> = p
            .stages
            .iter()
            .map(|s| s.access_class == AccessClass::Scattered)
            .collect();
        assert_eq!(scattered, vec![false, false, true, false, true]);
        p.validate().unwrap();
    }

    #[test]
    fn addressing_is_a_permutation() {
        let p = make_plan(512, RadixPolicy::Prefer4).unwrap();
        for s in 0..p.stages.len() {
            let a = p.addressing(s);
            let mut seen_in = vec![false; p.n];
            let mut seen_out = vec![false; p.n];
            for j in 0..a.butterflies() {
                for r in 0..a.radix {
                    assert!(!std::mem::replace(&mut seen_in[a.input_index(j, r)], true));
                    assert!(!std::mem::replace(&mut seen_out[a.output_index(j, r)], true));
                }
            }
        }
    }
}
