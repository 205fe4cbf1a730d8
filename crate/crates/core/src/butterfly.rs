//! Twiddle-free DFT kernels for radix 2, 4 and 8, the constant DFT₈ matrix,
//! and the real 8×8 decomposition of the complex DFT₈ product used by
//! matrix-multiply hardware.
//!
//! Inter-stage twiddles are applied by the executor before a butterfly runs,
//! so each kernel here is exactly an r-point DFT in natural order.

use std::ops::{Add, Sub};

use crate::complex::{root_of_unity, Complex, Real, Scalar};

/// Real additions/subtractions in [`butterfly_radix8_splitradix`].
pub const SPLIT_RADIX8_ADDS: u64 = 52;
/// Real multiplications in [`butterfly_radix8_splitradix`].
pub const SPLIT_RADIX8_MULS: u64 = 4;
/// Real FLOPs of one general complex multiply (4 mul + 2 add).
pub const COMPLEX_MUL_FLOPS: u64 = 6;
/// Inter-stage twiddle work of one radix-8 butterfly: six chain products
/// (`w2..w7` from `w1`) plus seven applications.
pub const RADIX8_TWIDDLE_FLOPS: u64 = (6 + 7) * COMPLEX_MUL_FLOPS;
/// FLOPs of one dense real 8×8×8 matrix product (multiply + accumulate).
pub const MATMUL8_FLOPS: u64 = 2 * 8 * 8 * 8;
/// FLOPs of [`mma_complex_multiply`]: four products plus one subtraction and
/// one addition of 8×8 matrices.
pub const MMA_COMPLEX_FLOPS: u64 = 4 * MATMUL8_FLOPS + 2 * 64;

#[inline(always)]
pub fn butterfly_radix2<T: Scalar>(x: [Complex<T>; 2]) -> [Complex<T>; 2] {
    [x[0] + x[1], x[0] - x[1]]
}

/// 4-point DFT: 16 real additions, no multiplications.
#[inline(always)]
pub fn butterfly_radix4<T: Scalar>(x: [Complex<T>; 4]) -> [Complex<T>; 4] {
    let a0 = x[0] + x[2];
    let a1 = x[0] - x[2];
    let a2 = x[1] + x[3];
    let a3 = (x[1] - x[3]).mul_neg_i();
    [a0 + a2, a1 + a3, a0 - a2, a1 - a3]
}

/// 8-point DFT as two 4-point DFTs over the even and odd samples, the odd
/// half rotated by `W₈^k`, merged by a final radix-2 rank.
///
/// `W₈¹` and `W₈³` cost two adds and two multiplies each against the
/// constant `1/√2`; `W₈²` is a free `−i` rotation.
#[inline(always)]
pub fn butterfly_radix8_splitradix<T: Scalar>(x: [Complex<T>; 8]) -> [Complex<T>; 8] {
    let h = T::from_literal(std::f64::consts::FRAC_1_SQRT_2);
    let e = butterfly_radix4([x[0], x[2], x[4], x[6]]);
    let o = butterfly_radix4([x[1], x[3], x[5], x[7]]);
    // (a + ib)·h(1 − i) = h((a + b) + i(b − a))
    let o1 = Complex::new(h * (o[1].re + o[1].im), h * (o[1].im - o[1].re));
    let o2 = o[2].mul_neg_i();
    // (a + ib)·h(−1 − i) = h((b − a) − i(a + b))
    let o3 = Complex::new(h * (o[3].im - o[3].re), -(h * (o[3].re + o[3].im)));
    [
        e[0] + o[0],
        e[1] + o1,
        e[2] + o2,
        e[3] + o3,
        e[0] - o[0],
        e[1] - o1,
        e[2] - o2,
        e[3] - o3,
    ]
}

/// 8×8 grid of complex entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix8<T>(pub [[Complex<T>; 8]; 8]);

/// 8×8 grid of reals; the operand shape of one simdgroup MMA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealMatrix8<T>(pub [[T; 8]; 8]);

impl<T: Scalar> ComplexMatrix8<T> {
    pub fn entry(&self, row: usize, col: usize) -> Complex<T> {
        self.0[row][col]
    }

    /// Splits into real and imaginary part matrices.
    pub fn split(&self) -> (RealMatrix8<T>, RealMatrix8<T>) {
        let mut re = RealMatrix8::zero();
        let mut im = RealMatrix8::zero();
        for r in 0..8 {
            for c in 0..8 {
                re.0[r][c] = self.0[r][c].re;
                im.0[r][c] = self.0[r][c].im;
            }
        }
        (re, im)
    }

    pub fn join(re: &RealMatrix8<T>, im: &RealMatrix8<T>) -> Self {
        ComplexMatrix8(std::array::from_fn(|r| std::array::from_fn(|c| Complex::new(re.0[r][c], im.0[r][c]))))
    }

    /// Column `c` as a butterfly vector.
    pub fn column(&self, c: usize) -> [Complex<T>; 8] {
        std::array::from_fn(|r| self.0[r][c])
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[[Complex<T>; 8]; 8]) -> Self {
        ComplexMatrix8(std::array::from_fn(|r| std::array::from_fn(|c| cols[c][r])))
    }

    /// Complex matrix-vector product.
    pub fn mul_vec(&self, x: &[Complex<T>; 8]) -> [Complex<T>; 8] {
        std::array::from_fn(|r| self.0[r].iter().zip(x).fold(Complex::zero(), |acc, (&m, &v)| acc + m * v))
    }
}

impl<T: Scalar> RealMatrix8<T> {
    pub fn zero() -> Self {
        RealMatrix8([[T::zero(); 8]; 8])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..8 {
            m.0[i][i] = T::one();
        }
        m
    }

    /// Dense product, accumulating every term from zero as MMA hardware does.
    pub fn matmul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero();
        for r in 0..8 {
            for c in 0..8 {
                let mut acc = T::zero();
                for k in 0..8 {
                    acc = acc + self.0[r][k] * rhs.0[k][c];
                }
                out.0[r][c] = acc;
            }
        }
        out
    }
}

impl<T: Scalar> Add for RealMatrix8<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        RealMatrix8(std::array::from_fn(|r| std::array::from_fn(|c| self.0[r][c] + rhs.0[r][c])))
    }
}

impl<T: Scalar> Sub for RealMatrix8<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        RealMatrix8(std::array::from_fn(|r| std::array::from_fn(|c| self.0[r][c] - rhs.0[r][c])))
    }
}

/// `F₈[j][k] = W₈^{jk}`.
pub fn dft8_matrix<T: Real>() -> ComplexMatrix8<T> {
    ComplexMatrix8(std::array::from_fn(|j| std::array::from_fn(|k| root_of_unity(8, j * k))))
}

/// Complex product `F·X` from four real products:
/// `Y_re = F_re·X_re − F_im·X_im`, `Y_im = F_re·X_im + F_im·X_re`.
pub fn mma_complex_multiply<T: Scalar>(
    f_re: &RealMatrix8<T>,
    f_im: &RealMatrix8<T>,
    x_re: &RealMatrix8<T>,
    x_im: &RealMatrix8<T>,
) -> (RealMatrix8<T>, RealMatrix8<T>) {
    let y_re = f_re.matmul(x_re) - f_im.matmul(x_im);
    let y_im = f_re.matmul(x_im) + f_im.matmul(x_re);
    (y_re, y_im)
}

/// FLOPs per 8-point column of the MMA route, amortized over the eight
/// columns of one tile.
pub const fn mma_flops_per_column() -> u64 {
    MMA_COMPLEX_FLOPS / 8
}

/// FLOPs of one scalar radix-8 butterfly step: split-radix core plus the
/// single-sincos twiddle chain and its application.
pub const fn split_radix8_step_flops() -> u64 {
    SPLIT_RADIX8_ADDS + SPLIT_RADIX8_MULS + RADIX8_TWIDDLE_FLOPS
}

/// Ratio of MMA-route FLOPs to scalar split-radix FLOPs per 8-point column.
///
/// Convention: one FLOP per real add, subtract or multiply; sign flips and
/// `±i` rotations are free. The MMA side counts the dense products as the
/// hardware executes them (no exploitation of zeros in `F₈`):
/// `(4·2·8³ + 2·64) / 8 = 528`. The scalar side counts the butterfly as a
/// Stockham stage executes it: 52 adds + 4 muls for the core and 13 complex
/// multiplies for the twiddle chain (`w2..w7`) and its application, so
/// `56 + 78 = 134`. The ratio is `528 / 134 = 264 / 67 ≈ 3.940`.
pub fn mma_flop_ratio() -> f64 {
    mma_flops_per_column() as f64 / split_radix8_step_flops() as f64
}
