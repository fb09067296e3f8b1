//! Dense kernels shared by the rank computations: a small real-scalar
//! abstraction over `f64` and [`DoubleDouble`], sup-norm equilibration and
//! one-sided Jacobi singular values.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::dd::{self, DoubleDouble};

/// Arithmetic needed by the rank kernels.
pub trait Real:
    Copy
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const ZERO: Self;
    const ONE: Self;
    /// Unit roundoff of the format.
    const UNIT_ROUNDOFF: f64;
    const NAME: &'static str;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn ldexp(self, e: i32) -> Self;
    /// `sin(π·p/q)` correctly reduced before evaluation.
    fn sin_pi_ratio(p: i64, q: u64) -> Self;
}

impl Real for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;
    const NAME: &'static str = "binary64";

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> Self {
        libm::fabs(self)
    }
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    fn ldexp(self, e: i32) -> Self {
        libm::scalbn(self, e)
    }
    fn sin_pi_ratio(p: i64, q: u64) -> Self {
        sin_pi_ratio(p, q)
    }
}

impl Real for DoubleDouble {
    const ZERO: Self = DoubleDouble::ZERO;
    const ONE: Self = DoubleDouble::ONE;
    const UNIT_ROUNDOFF: f64 = dd::EPSILON;
    const NAME: &'static str = "double-double";

    fn from_f64(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    fn ldexp(self, e: i32) -> Self {
        DoubleDouble::ldexp(self, e)
    }
    fn sin_pi_ratio(p: i64, q: u64) -> Self {
        dd::sin_pi_ratio(p, q)
    }
}

/// `sin(π·p/q)` in binary64 after exact reduction to `[0, π/4]`.
pub fn sin_pi_ratio(p: i64, q: u64) -> f64 {
    let red = dd::reduce_sin_pi(p, q);
    let x = core::f64::consts::PI * red.num as f64 / red.den as f64;
    let v = if red.use_cos { libm::cos(x) } else { libm::sin(x) };
    if red.negative {
        -v
    } else {
        v
    }
}

/// `cos(π·p/q)` in binary64.
pub fn cos_pi_ratio(p: i64, q: u64) -> f64 {
    sin_pi_ratio(q as i64 + 2 * p, 2 * q)
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::ZERO; rows * cols] }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Divides each row, then each column, by its largest magnitude;
    /// `rounds` passes. All-zero rows and columns are left alone.
    pub fn equilibrate(&mut self, rounds: usize) {
        for _ in 0..rounds {
            for i in 0..self.rows {
                let m = self.row(i).iter().fold(T::ZERO, |m, &x| max(m, x.abs()));
                if m > T::ZERO {
                    for x in &mut self.data[i * self.cols..(i + 1) * self.cols] {
                        *x = *x / m;
                    }
                }
            }
            for j in 0..self.cols {
                let m = (0..self.rows).fold(T::ZERO, |m, i| max(m, self.get(i, j).abs()));
                if m > T::ZERO {
                    for i in 0..self.rows {
                        let v = self.get(i, j) / m;
                        self.set(i, j, v);
                    }
                }
            }
        }
    }
}

fn max<T: Real>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

/// Singular values from one-sided (Hestenes) Jacobi, sorted descending.
#[derive(Debug, Clone)]
pub struct SingularValues<T> {
    pub values: Vec<T>,
    pub sweeps: usize,
    pub converged: bool,
}

const MAX_SWEEPS: usize = 80;

/// Computes all singular values of `a`.
///
/// One-sided Jacobi keeps high relative accuracy on column-graded matrices,
/// which is what the sine-product blocks are after equilibration.
pub fn singular_values<T: Real>(a: &Matrix<T>) -> SingularValues<T> {
    // orthogonalise the shorter dimension's vectors of the longer length
    let (len, count, mut vecs) = if a.rows >= a.cols {
        let cols: Vec<Vec<T>> = (0..a.cols).map(|j| (0..a.rows).map(|i| a.get(i, j)).collect()).collect();
        (a.rows, a.cols, cols)
    } else {
        let rows: Vec<Vec<T>> = (0..a.rows).map(|i| a.row(i).to_vec()).collect();
        (a.cols, a.rows, rows)
    };
    let threshold = T::from_f64(T::UNIT_ROUNDOFF * len as f64);
    let mut sweeps = 0;
    let mut converged = count < 2;
    let mut norms: Vec<T> = vecs.iter().map(|v| dot(v, v)).collect();
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..count {
            for q in p + 1..count {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha == T::ZERO || beta == T::ZERO {
                    continue;
                }
                let gamma = dot(&vecs[p], &vecs[q]);
                if gamma.abs() <= threshold * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::from_f64(2.0) * gamma);
                let t = {
                    let mag = T::ONE / (zeta.abs() + (T::ONE + zeta * zeta).sqrt());
                    if zeta < T::ZERO {
                        -mag
                    } else {
                        mag
                    }
                };
                let c = T::ONE / (T::ONE + t * t).sqrt();
                let s = c * t;
                let (left, right) = vecs.split_at_mut(q);
                let (vp, vq) = (&mut left[p], &mut right[0]);
                for k in 0..len {
                    let x = vp[k];
                    let y = vq[k];
                    vp[k] = c * x - s * y;
                    vq[k] = s * x + c * y;
                }
                norms[p] = dot(&vecs[p], &vecs[p]);
                norms[q] = dot(&vecs[q], &vecs[q]);
            }
        }
        converged = !rotated;
    }
    let mut values: Vec<T> = norms.into_iter().map(|n| n.sqrt()).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    SingularValues { values, sweeps, converged }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::ZERO, |acc, (&x, &y)| acc + x * y)
}
