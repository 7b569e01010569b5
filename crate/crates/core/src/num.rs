//! Scalar abstraction and numeric kernels.
//!
//! Classifier training, metrics, and information gain are generic over any
//! floating-point type; the rest of the crate uses the [`crate::Scalar`]
//! alias. Tests occasionally instantiate `f32` to check nothing depends on
//! double precision. Entropies and information gain are measured in bits.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar usable by the classifiers and metrics.
pub trait Real:
    Float
    + FromPrimitive
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from a usize count (exact for the dataset sizes here).
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + Debug
        + Display
        + Serialize
        + DeserializeOwned
        + Send
        + Sync
        + 'static
{
}

/// Arithmetic mean; 0 for an empty slice.
pub fn mean<T: Real>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    let sum = values.iter().fold(T::zero(), |acc, &v| acc + v);
    sum / T::from_count(values.len())
}

/// Population variance (divides by N) around the given mean; 0 when empty.
pub fn population_variance<T: Real>(values: &[T], mean: T) -> T {
    if values.is_empty() {
        return T::zero();
    }
    let sum = values.iter().fold(T::zero(), |acc, &v| {
        let d = v - mean;
        acc + d * d
    });
    sum / T::from_count(values.len())
}

/// Median of an already-sorted slice: middle element, or the mean of the two
/// middles for even lengths. `None` when empty.
pub fn median_of_sorted<T: Real>(sorted: &[T]) -> Option<T> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    if n % 2 == 1 {
        Some(sorted[n / 2])
    } else {
        Some((sorted[n / 2 - 1] + sorted[n / 2]) / T::from_count(2))
    }
}

/// Entropy in bits of a two-class count pair; 0 · log 0 counts as 0.
pub fn entropy2<T: Real>(a: usize, b: usize) -> T {
    let n = a + b;
    if n == 0 {
        return T::zero();
    }
    let term = |c: usize| {
        if c == 0 {
            T::zero()
        } else {
            let p = T::from_count(c) / T::from_count(n);
            -(p * p.log2())
        }
    };
    term(a) + term(b)
}

/// Information gain in bits of splitting `parent` counts into `left` and
/// `right`: parent entropy minus the size-weighted child entropies.
pub fn split_gain<T: Real>(
    parent: (usize, usize),
    left: (usize, usize),
    right: (usize, usize),
) -> T {
    let n = parent.0 + parent.1;
    if n == 0 {
        return T::zero();
    }
    let weight = |c: (usize, usize)| T::from_count(c.0 + c.1) / T::from_count(n);
    entropy2::<T>(parent.0, parent.1)
        - weight(left) * entropy2(left.0, left.1)
        - weight(right) * entropy2(right.0, right.1)
}

/// Split information in bits for a two-way partition of sizes `nl`/`nr`
/// (the denominator of the gain ratio).
pub fn split_info<T: Real>(nl: usize, nr: usize) -> T {
    let n = nl + nr;
    if n == 0 {
        return T::zero();
    }
    let term = |c: usize| {
        if c == 0 {
            T::zero()
        } else {
            let p = T::from_count(c) / T::from_count(n);
            -(p * p.log2())
        }
    };
    term(nl) + term(nr)
}

/// Natural log of the Gaussian density at `x`. The caller guarantees a
/// positive variance (see the classifier's variance floor).
pub fn log_gaussian<T: Real>(x: T, mean: T, variance: T) -> T {
    let two = T::from_count(2);
    let tau = two * T::from_f64(std::f64::consts::PI).expect("pi representable");
    let d = x - mean;
    -(tau * variance).ln() / two - d * d / (two * variance)
}

/// log(exp(a) + exp(b)) without overflow.
pub fn log_sum_exp2<T: Real>(a: T, b: T) -> T {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == T::neg_infinity() {
        return hi;
    }
    hi + (T::one() + (lo - hi).exp()).ln()
}
