//! Four-step execution for transforms larger than one threadgroup.
//!
//! For `N = N1·N2` the input is viewed as `N1` rows of length `N2`, row `j`
//! being the stride-`N1` subsequence `x[j], x[j + N1], …`. The steps are:
//! row FFTs of length `N2`, scaling of element `(j, k)` by `W_N^{jk}` fused
//! with a transpose to `N2×N1`, row FFTs of length `N1`, and a transposed
//! read of the result so the spectrum comes out in natural order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{root_of_unity, Complex, Real};
use crate::error::{FftError, Result};
use crate::plan::{check_size, FftPlan};
use crate::stockham::{transform_in_place, Signal};

/// The length-`N1` transforms of a four-step plan: a direct Stockham plan,
/// or another four-step level when `N1` itself exceeds the block size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterPlan {
    Direct(FftPlan),
    FourStep(Box<FourStepPlan>),
}

impl OuterPlan {
    pub fn n(&self) -> usize {
        match self {
            OuterPlan::Direct(p) => p.n,
            OuterPlan::FourStep(p) => p.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourStepPlan {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub inner_plan: FftPlan,
    pub outer_plan: OuterPlan,
}

/// Splits `n` as `n1·n2` with `n2` the largest power of two `≤ b_max`.
pub fn four_step_split(n: usize, b_max: usize) -> Result<(usize, usize)> {
    check_size(n)?;
    if b_max < 2 {
        return Err(FftError::InvalidPlan(format!("block size {b_max} is below 2")));
    }
    if n <= b_max {
        return Err(FftError::NoSplitNeeded { n, b_max });
    }
    let n2 = 1usize << (usize::BITS - 1 - b_max.leading_zeros());
    Ok((n / n2, n2))
}

impl FourStepPlan {
    /// Builds the plan for `n`, recursing on the outer size while it exceeds
    /// `b_max`. `make` supplies the direct plan for each sub-size.
    pub fn build(n: usize, b_max: usize, make: &dyn Fn(usize) -> Result<FftPlan>) -> Result<Self> {
        let (n1, n2) = four_step_split(n, b_max)?;
        let inner_plan = make(n2)?;
        let outer_plan = if n1 > b_max {
            OuterPlan::FourStep(Box::new(FourStepPlan::build(n1, b_max, make)?))
        } else {
            OuterPlan::Direct(make(n1)?)
        };
        Ok(FourStepPlan { n, n1, n2, inner_plan, outer_plan })
    }

    /// Number of four-step levels, 1 for a plain split.
    pub fn depth(&self) -> usize {
        match &self.outer_plan {
            OuterPlan::Direct(_) => 1,
            OuterPlan::FourStep(p) => 1 + p.depth(),
        }
    }

    /// `n = n1·n2`, consistent sub-plan sizes, and `n2 ≤ b_max`.
    pub fn validate(&self, b_max: usize) -> Result<()> {
        let ok = self.n == self.n1 * self.n2
            && self.n2 <= b_max
            && self.inner_plan.n == self.n2
            && self.outer_plan.n() == self.n1;
        if !ok {
            return Err(FftError::InvalidPlan(format!(
                "four-step split {}x{} of {} with b_max {b_max}",
                self.n1, self.n2, self.n
            )));
        }
        if let OuterPlan::FourStep(p) = &self.outer_plan {
            p.validate(b_max)?;
        }
        Ok(())
    }
}

/// Forward DFT of `input` via the four-step method; natural-order output.
pub fn execute_four_step<T: Real>(plan: &FourStepPlan, input: &Signal<T>) -> Result<Signal<T>> {
    if input.len() != plan.n {
        return Err(FftError::SizeMismatch { expected: plan.n, actual: input.len() });
    }
    let mut data = input.as_slice().to_vec();
    four_step_in_place(plan, &mut data);
    Signal::new(data)
}

/// Inverse DFT scaled by `1/N`.
pub fn execute_four_step_inverse<T: Real>(plan: &FourStepPlan, input: &Signal<T>) -> Result<Signal<T>> {
    if input.len() != plan.n {
        return Err(FftError::SizeMismatch { expected: plan.n, actual: input.len() });
    }
    let mut data: Vec<_> = input.as_slice().iter().map(|z| z.conj()).collect();
    four_step_in_place(plan, &mut data);
    let scale = T::from_f64(1.0 / plan.n as f64);
    for z in &mut data {
        *z = z.conj().scale(scale);
    }
    Signal::new(data)
}

pub(crate) fn four_step_in_place<T: Real>(plan: &FourStepPlan, data: &mut [Complex<T>]) {
    let (n1, n2) = (plan.n1, plan.n2);
    // Row j holds x[j + n1·i].
    let mut rows = vec![Complex::zero(); plan.n];
    for (j, row) in rows.chunks_exact_mut(n2).enumerate() {
        for (i, z) in row.iter_mut().enumerate() {
            *z = data[j + n1 * i];
        }
    }
    rows.par_chunks_exact_mut(n2).for_each(|row| transform_in_place(&plan.inner_plan, row));

    let mut cols = twiddle_transpose(&rows, n1, n2, plan.n, false);
    cols.par_chunks_exact_mut(n1).for_each(|row| match &plan.outer_plan {
        OuterPlan::Direct(p) => transform_in_place(p, row),
        OuterPlan::FourStep(p) => four_step_in_place(p, row),
    });

    // X[q + n2·p] sits at row q, column p.
    for (q, row) in cols.chunks_exact(n1).enumerate() {
        for (p, z) in row.iter().enumerate() {
            data[q + n2 * p] = *z;
        }
    }
}

/// Transposes an `n1×n2` row-major matrix to `n2×n1`, scaling element
/// `(j, k)` by `W_n^{jk}`: `out[k][j] = in[j][k]·W_n^{jk}`.
pub fn transpose_with_twiddle<T: Real>(
    matrix: &[Complex<T>],
    n1: usize,
    n2: usize,
    n: usize,
) -> Result<Vec<Complex<T>>> {
    check_dims(matrix, n1, n2, n)?;
    Ok(twiddle_transpose(matrix, n1, n2, n, false))
}

/// As [`transpose_with_twiddle`] with conjugated twiddles; undoes it when
/// applied to its `n2×n1` output.
pub fn transpose_with_conjugate_twiddle<T: Real>(
    matrix: &[Complex<T>],
    n1: usize,
    n2: usize,
    n: usize,
) -> Result<Vec<Complex<T>>> {
    check_dims(matrix, n1, n2, n)?;
    Ok(twiddle_transpose(matrix, n1, n2, n, true))
}

fn check_dims<T>(matrix: &[Complex<T>], n1: usize, n2: usize, n: usize) -> Result<()> {
    if n1 == 0 || n2 == 0 || matrix.len() != n1 * n2 || n != n1 * n2 {
        return Err(FftError::DimensionMismatch { rows: n1, cols: n2, len: matrix.len() });
    }
    Ok(())
}

fn twiddle_transpose<T: Real>(matrix: &[Complex<T>], n1: usize, n2: usize, n: usize, conj: bool) -> Vec<Complex<T>> {
    let mut out = vec![Complex::zero(); n1 * n2];
    for j in 0..n1 {
        for k in 0..n2 {
            let mut w = root_of_unity::<T>(n, (j * k) % n);
            if conj {
                w = w.conj();
            }
            out[k * n1 + j] = matrix[j * n2 + k] * w;
        }
    }
    out
}
