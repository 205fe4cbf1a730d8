//! Brute-force DFT reference and error metrics.
//!
//! The oracle always sums in double precision straight from the defining
//! formula, whatever precision the checked output was produced in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{root_of_unity, Complex, Complex64, Real};
use crate::error::{FftError, Result};

/// Error of a result against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// `‖a − b‖₂ / ‖b‖₂` with `b` the reference; `0/0` counts as 0.
    pub relative_l2: f64,
    pub max_abs_componentwise: f64,
    pub n: usize,
}

impl ErrorReport {
    /// The worse of two reports, by relative L2.
    pub fn worst(self, other: ErrorReport) -> ErrorReport {
        if other.relative_l2 > self.relative_l2 {
            other
        } else {
            self
        }
    }
}

/// `X[k] = Σ x[n]·W_N^{nk}` for any length `N ≥ 1`, in natural order.
pub fn naive_dft<T: Real>(input: &[Complex<T>]) -> Vec<Complex64> {
    naive(input, false)
}

/// Inverse of [`naive_dft`], scaled by `1/N`.
pub fn naive_idft<T: Real>(input: &[Complex<T>]) -> Vec<Complex64> {
    let n = input.len() as f64;
    naive(input, true).into_iter().map(|z| z.scale(1.0 / n)).collect()
}

fn naive<T: Real>(input: &[Complex<T>], inverse: bool) -> Vec<Complex64> {
    let n = input.len();
    if n == 0 {
        return Vec::new();
    }
    let x: Vec<Complex64> = input.iter().map(|z| z.to_f64()).collect();
    // W_N^m for every residue m; (j·k) mod N indexes it exactly.
    let roots: Vec<Complex64> = (0..n)
        .map(|m| {
            let w = root_of_unity::<f64>(n, m);
            if inverse {
                w.conj()
            } else {
                w
            }
        })
        .collect();
    (0..n)
        .map(|k| {
            let mut re = 0.0;
            let mut im = 0.0;
            let mut idx = 0usize;
            for xj in &x {
                let w = roots[idx];
                re += xj.re * w.re - xj.im * w.im;
                im += xj.re * w.im + xj.im * w.re;
                idx += k;
                if idx >= n {
                    idx -= n;
                }
            }
            Complex::new(re, im)
        })
        .collect()
}

/// Compares `a` against the reference `b`.
pub fn compare<A: Real, B: Real>(a: &[Complex<A>], b: &[Complex<B>]) -> Result<ErrorReport> {
    if a.len() != b.len() {
        return Err(FftError::SizeMismatch { expected: b.len(), actual: a.len() });
    }
    let mut diff = 0.0;
    let mut norm = 0.0;
    let mut max_abs: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (x.to_f64(), y.to_f64());
        let d = x - y;
        diff += d.norm_sqr();
        norm += y.norm_sqr();
        max_abs = max_abs.max(d.re.abs()).max(d.im.abs());
    }
    let relative_l2 = if diff == 0.0 { 0.0 } else { (diff / norm).sqrt() };
    Ok(ErrorReport { relative_l2, max_abs_componentwise: max_abs, n: a.len() })
}

/// Seeded samples uniform on `[−1, 1]²`.
pub fn random_samples<T: Real>(n: usize, seed: u64) -> Vec<Complex<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let re: f64 = rng.gen_range(-1.0..=1.0);
            let im: f64 = rng.gen_range(-1.0..=1.0);
            Complex::new(T::from_f64(re), T::from_f64(im))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_and_two_point() {
        let mut x = vec![Complex64::zero(); 5];
        x[0] = Complex::one();
        assert!(naive_dft(&x).iter().all(|z| *z == Complex::one()));
        let y = naive_dft(&[Complex::new(1.0f64, 0.0), Complex::new(-1.0, 0.0)]);
        assert_eq!(y, vec![Complex::new(0.0, 0.0), Complex::new(2.0, 0.0)]);
    }

    #[test]
    fn idft_inverts_dft() {
        for n in [1usize, 3, 7, 16, 100] {
            let x = random_samples::<f64>(n, 11 + n as u64);
            let back = naive_dft(&naive_idft(&x));
            assert!(compare(&back, &x).unwrap().relative_l2 < 1e-12, "n={n}");
        }
    }

    #[test]
    fn compare_examples() {
        let x = random_samples::<f64>(16, 3);
        assert_eq!(compare(&x, &x).unwrap().relative_l2, 0.0);
        let neg: Vec<_> = x.iter().map(|z| -*z).collect();
        assert!((compare(&neg, &x).unwrap().relative_l2 - 2.0).abs() < 1e-15);
        let zero = vec![Complex64::zero(); 4];
        assert_eq!(compare(&zero, &zero).unwrap().relative_l2, 0.0);
        assert!(compare(&x[..4], &x).is_err());
    }

    #[test]
    fn max_abs_is_symmetric() {
        let a = random_samples::<f64>(32, 1);
        let b = random_samples::<f64>(32, 2);
        assert_eq!(
            compare(&a, &b).unwrap().max_abs_componentwise,
            compare(&b, &a).unwrap().max_abs_componentwise
        );
    }

    #[test]
    fn seeded_samples_are_reproducible_and_bounded() {
        let a = random_samples::<f32>(64, 9);
        assert_eq!(a, random_samples::<f32>(64, 9));
        assert!(a.iter().all(|z| z.re.abs() <= 1.0 && z.im.abs() <= 1.0));
    }
}
