//! Complex arithmetic, roots of unity and the single-sincos twiddle chain.
//!
//! Everything here is generic over [`Scalar`], the minimal ring-like surface
//! the butterflies need. [`Real`] adds the transcendental and IEEE bits the
//! executor and the oracle rely on; it is implemented for `f32` and `f64`.

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{FftError, Result};

/// Arithmetic surface used by butterflies and matrix products.
///
/// Negation is assumed free (a sign flip), everything else is a counted FLOP.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    /// Converts a constant literal into the working type.
    fn from_literal(v: f64) -> Self;
}

/// Working precision of a transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// 16-bit; planning only, nothing executes at this precision.
    Half,
    Single,
    Double,
}

impl Precision {
    /// Bytes of one real component.
    pub const fn real_bytes(self) -> usize {
        match self {
            Precision::Half => 2,
            Precision::Single => 4,
            Precision::Double => 8,
        }
    }

    /// Precision whose complex element takes `bytes` bytes.
    pub fn from_complex_bytes(bytes: usize) -> Option<Self> {
        match bytes {
            4 => Some(Precision::Half),
            8 => Some(Precision::Single),
            16 => Some(Precision::Double),
            _ => None,
        }
    }

    /// Bytes of one interleaved complex element.
    pub const fn complex_bytes(self) -> usize {
        2 * self.real_bytes()
    }
}

/// IEEE floating-point working precision.
pub trait Real: Scalar + PartialOrd + Default + Display + Send + Sync + 'static {
    const PRECISION: Precision;
    /// Machine epsilon; one "ulp" at unit magnitude throughout this crate.
    const EPSILON: Self;

    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;
    fn as_f64(self) -> f64;
    fn from_f64(v: f64) -> Self;

    /// `(cos θ, sin θ)` for `θ = (π/2)·(r/n)`, `0 ≤ r < n`.
    fn quarter_turn(r: u64, n: u64) -> (Self, Self);
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline(always)]
            fn zero() -> Self {
                0.0
            }
            #[inline(always)]
            fn one() -> Self {
                1.0
            }
            #[inline(always)]
            fn from_literal(v: f64) -> Self {
                v as $t
            }
        }
    };
}
impl_scalar!(f32);
impl_scalar!(f64);

/// `(cos, sin)` of `(π/2)·(r/n)` in double precision, reflecting about π/4
/// so the sine/cosine argument never exceeds π/4.
fn quarter_turn_f64(r: u64, n: u64) -> (f64, f64) {
    debug_assert!(r < n);
    if 2 * r <= n {
        let theta = std::f64::consts::FRAC_PI_2 * (r as f64 / n as f64);
        let (s, c) = theta.sin_cos();
        (c, s)
    } else {
        let theta = std::f64::consts::FRAC_PI_2 * ((n - r) as f64 / n as f64);
        let (s, c) = theta.sin_cos();
        (s, c)
    }
}

impl Real for f32 {
    const PRECISION: Precision = Precision::Single;
    const EPSILON: Self = f32::EPSILON;

    fn sqrt(self) -> Self {
        f32::sqrt(self)
    }
    fn abs(self) -> Self {
        f32::abs(self)
    }
    fn is_finite(self) -> bool {
        f32::is_finite(self)
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn quarter_turn(r: u64, n: u64) -> (Self, Self) {
        // Evaluated in double and rounded once: the single-precision result is
        // within half an ulp per component.
        let (c, s) = quarter_turn_f64(r, n);
        (c as f32, s as f32)
    }
}

impl Real for f64 {
    const PRECISION: Precision = Precision::Double;
    const EPSILON: Self = f64::EPSILON;

    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn as_f64(self) -> f64 {
        self
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn quarter_turn(r: u64, n: u64) -> (Self, Self) {
        quarter_turn_f64(r, n)
    }
}

/// One complex value, interleaved real/imaginary.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[repr(C)]
pub struct Complex<T> {
    pub re: T,
    pub im: T,
}

pub type Complex32 = Complex<f32>;
pub type Complex64 = Complex<f64>;

impl<T> Complex<T> {
    #[inline(always)]
    pub const fn new(re: T, im: T) -> Self {
        Complex { re, im }
    }
}

impl<T: Scalar> Complex<T> {
    #[inline(always)]
    pub fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }

    #[inline(always)]
    pub fn one() -> Self {
        Complex::new(T::one(), T::zero())
    }

    #[inline(always)]
    pub fn conj(self) -> Self {
        Complex::new(self.re, -self.im)
    }

    /// Multiplication by `-i`; a swap and a sign flip, no FLOPs.
    #[inline(always)]
    pub fn mul_neg_i(self) -> Self {
        Complex::new(self.im, -self.re)
    }

    /// Multiplication by `+i`.
    #[inline(always)]
    pub fn mul_i(self) -> Self {
        Complex::new(-self.im, self.re)
    }

    #[inline(always)]
    pub fn scale(self, k: T) -> Self {
        Complex::new(self.re * k, self.im * k)
    }

    #[inline(always)]
    pub fn norm_sqr(self) -> T {
        self.re * self.re + self.im * self.im
    }
}

impl<T: Real> Complex<T> {
    pub fn abs(self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn to_f64(self) -> Complex64 {
        Complex::new(self.re.as_f64(), self.im.as_f64())
    }

    pub fn from_c64(c: Complex64) -> Self {
        Complex::new(T::from_f64(c.re), T::from_f64(c.im))
    }
}

impl<T: Scalar> Add for Complex<T> {
    type Output = Self;
    #[inline(always)]
    fn add(self, rhs: Self) -> Self {
        Complex::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl<T: Scalar> Sub for Complex<T> {
    type Output = Self;
    #[inline(always)]
    fn sub(self, rhs: Self) -> Self {
        Complex::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl<T: Scalar> Mul for Complex<T> {
    type Output = Self;
    #[inline(always)]
    fn mul(self, rhs: Self) -> Self {
        Complex::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}

impl<T: Scalar> Neg for Complex<T> {
    type Output = Self;
    #[inline(always)]
    fn neg(self) -> Self {
        Complex::new(-self.re, -self.im)
    }
}

impl<T: Scalar> AddAssign for Complex<T> {
    #[inline(always)]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Scalar> SubAssign for Complex<T> {
    #[inline(always)]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Scalar> MulAssign for Complex<T> {
    #[inline(always)]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

/// Component-wise sum.
#[inline(always)]
pub fn cadd<T: Scalar>(a: Complex<T>, b: Complex<T>) -> Complex<T> {
    a + b
}

/// Complex product `(a.re·b.re − a.im·b.im, a.re·b.im + a.im·b.re)`.
#[inline(always)]
pub fn cmul<T: Scalar>(a: Complex<T>, b: Complex<T>) -> Complex<T> {
    a * b
}

/// `W_n^k = exp(−2πik/n)`, periodic in `k` modulo `n`.
///
/// The index is reduced to a quadrant and an in-quadrant angle, so quarter
/// and half turns come out exact.
pub fn twiddle<T: Real>(n: usize, k: i64) -> Result<Complex<T>> {
    if n == 0 {
        return Err(FftError::ZeroOrder);
    }
    Ok(root_of_unity(n, k.rem_euclid(n as i64) as usize))
}

/// Infallible `W_n^k` for `n ≥ 1`; `k` is reduced modulo `n`.
#[inline]
pub(crate) fn root_of_unity<T: Real>(n: usize, k: usize) -> Complex<T> {
    debug_assert!(n > 0);
    let n = n as u64;
    let k = k as u64 % n;
    // exp(−iφ), φ = q·π/2 + θ with θ ∈ [0, π/2).
    let quarter = 4 * k / n;
    let rem = 4 * k - quarter * n;
    let (c, s) = T::quarter_turn(rem, n);
    match quarter {
        0 => Complex::new(c, -s),
        1 => Complex::new(-s, -c),
        2 => Complex::new(-c, s),
        _ => Complex::new(s, c),
    }
}

/// `[w1, w1², …, w1^count]`, each entry the previous one times `w1`.
///
/// Only `w1` needs a transcendental evaluation; chained entries are not
/// renormalized, so error grows linearly with the chain length.
pub fn twiddle_chain<T: Scalar>(w1: Complex<T>, count: usize) -> Vec<Complex<T>> {
    let mut chain = Vec::with_capacity(count);
    let mut w = w1;
    for i in 0..count {
        if i > 0 {
            w *= w1;
        }
        chain.push(w);
    }
    chain
}
