//! Double-buffered Stockham autosort execution.
//!
//! Each stage reads one buffer and writes the other with permuted indices;
//! the output lands in natural order without a bit-reversal pass. The
//! buffer strategy recorded in a plan only affects accounting, never the
//! arithmetic here.

use rayon::prelude::*;

use crate::butterfly::{butterfly_radix2, butterfly_radix4, butterfly_radix8_splitradix};
use crate::complex::{root_of_unity, Complex, Real};
use crate::error::{FftError, Result};
use crate::plan::{check_size, FftPlan, StageAddressing, TwiddlePolicy};

/// A power-of-two length signal, `2 ≤ N ≤ 2^24`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal<T> {
    samples: Vec<Complex<T>>,
}

impl<T: Real> Signal<T> {
    pub fn new(samples: Vec<Complex<T>>) -> Result<Self> {
        check_size(samples.len())?;
        Ok(Signal { samples })
    }

    /// Unit impulse at index 0.
    pub fn delta(n: usize) -> Result<Self> {
        let mut samples = vec![Complex::zero(); n];
        if let Some(first) = samples.first_mut() {
            *first = Complex::one();
        }
        Self::new(samples)
    }

    pub fn constant(n: usize, value: Complex<T>) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn into_inner(self) -> Vec<Complex<T>> {
        self.samples
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.to_f64().norm_sqr()).sum()
    }
}

impl<T> AsRef<[Complex<T>]> for Signal<T> {
    fn as_ref(&self) -> &[Complex<T>] {
        &self.samples
    }
}

/// Forward DFT of `input` in natural order.
pub fn execute<T: Real>(plan: &FftPlan, input: &Signal<T>) -> Result<Signal<T>> {
    if input.len() != plan.n {
        return Err(FftError::SizeMismatch { expected: plan.n, actual: input.len() });
    }
    let mut out = input.samples.clone();
    transform_in_place(plan, &mut out);
    Ok(Signal { samples: out })
}

/// Inverse DFT scaled by `1/N`: conjugate, forward, conjugate, scale.
pub fn execute_inverse<T: Real>(plan: &FftPlan, input: &Signal<T>) -> Result<Signal<T>> {
    if input.len() != plan.n {
        return Err(FftError::SizeMismatch { expected: plan.n, actual: input.len() });
    }
    let mut data: Vec<_> = input.samples.iter().map(|z| z.conj()).collect();
    transform_in_place(plan, &mut data);
    let scale = T::from_f64(1.0 / plan.n as f64);
    for z in &mut data {
        *z = z.conj().scale(scale);
    }
    Ok(Signal { samples: data })
}

/// Independent transforms of many signals; no state crosses signals.
pub fn execute_batch<T: Real>(plan: &FftPlan, inputs: &[Signal<T>]) -> Result<Vec<Signal<T>>> {
    inputs.par_iter().map(|s| execute(plan, s)).collect()
}

/// Runs the plan over `data` (length `plan.n`), leaving the spectrum in place.
/// Scratch is allocated per call.
pub(crate) fn transform_in_place<T: Real>(plan: &FftPlan, data: &mut [Complex<T>]) {
    debug_assert_eq!(data.len(), plan.n);
    let mut scratch = vec![Complex::zero(); plan.n];
    let mut in_data = true;
    for (s, stage) in plan.stages.iter().enumerate() {
        let addr = plan.addressing(s);
        let (src, dst): (&[Complex<T>], &mut [Complex<T>]) =
            if in_data { (&*data, &mut scratch) } else { (&scratch, &mut *data) };
        match stage.radix {
            2 => run_stage::<T, 2>(&addr, stage.twiddle_policy, src, dst, butterfly_radix2),
            4 => run_stage::<T, 4>(&addr, stage.twiddle_policy, src, dst, butterfly_radix4),
            8 => run_stage::<T, 8>(&addr, stage.twiddle_policy, src, dst, butterfly_radix8_splitradix),
            r => unreachable!("radix {r} in a validated plan"),
        }
        in_data = !in_data;
    }
    if !in_data {
        data.copy_from_slice(&scratch);
    }
}

fn run_stage<T: Real, const R: usize>(
    addr: &StageAddressing,
    policy: TwiddlePolicy,
    src: &[Complex<T>],
    dst: &mut [Complex<T>],
    butterfly: fn([Complex<T>; R]) -> [Complex<T>; R],
) {
    let groups = addr.butterflies() / addr.span;
    let order = addr.twiddle_order();
    let mut twiddles = [Complex::<T>::one(); R];
    // Butterflies sharing `j mod span` share twiddles; visit them together.
    for k in 0..addr.span {
        if k != 0 {
            match policy {
                TwiddlePolicy::ChainedSingleSincos => {
                    let w1 = root_of_unity::<T>(order, k);
                    let mut w = w1;
                    twiddles[1] = w;
                    for t in twiddles.iter_mut().skip(2) {
                        w *= w1;
                        *t = w;
                    }
                }
                TwiddlePolicy::Direct => {
                    for (r, t) in twiddles.iter_mut().enumerate().skip(1) {
                        *t = root_of_unity::<T>(order, r * k);
                    }
                }
            }
        }
        for g in 0..groups {
            let j = g * addr.span + k;
            let mut v: [Complex<T>; R] = std::array::from_fn(|r| src[addr.input_index(j, r)]);
            if k != 0 {
                for r in 1..R {
                    v[r] *= twiddles[r];
                }
            }
            let v = butterfly(v);
            let base = addr.output_base(j);
            for (r, z) in v.into_iter().enumerate() {
                dst[base + r * addr.span] = z;
            }
        }
    }
}
