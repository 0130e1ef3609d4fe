//! Scalar fields the pipeline can run over.
//!
//! Every table in the crate is generic over [`Scalar`]. Two families are
//! provided: `Complex<F>` for any `num_traits::Float` (f32 / f64), and the
//! exact cyclotomic field [`Cyclotomic`](crate::Cyclotomic), where all values
//! produced by root-of-unity masks live and identities hold with zero error.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::{Complex, Complex64};
use num_traits::{Float, FloatConst, One, Zero};

/// A field with complex conjugation that contains the p-th roots of unity.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// `true` when arithmetic is exact and comparisons need no tolerance.
    const EXACT: bool;

    /// `exp(2πi e / p)`.
    fn root_of_unity(p: u32, e: u32) -> Self;

    /// The rational number `num / den`.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Embeds an arbitrary complex number; exact fields return `None`.
    fn from_complex(c: Complex64) -> Option<Self>;

    fn conj(&self) -> Self;

    fn to_c64(&self) -> Complex64;

    /// `|self|^2` as an element of the field.
    fn norm_sqr(&self) -> Self {
        self.clone() * self.conj()
    }

    /// Distance to `other` in the complex embedding.
    fn distance(&self, other: &Self) -> f64 {
        (self.clone() - other.clone()).to_c64().norm()
    }

    /// Exact equality for exact fields, `|a - b| <= tol` otherwise.
    fn close_to(&self, other: &Self, tol: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            self.distance(other) <= tol
        }
    }
}

/// `p^e` for any integer exponent.
pub fn p_pow<S: Scalar>(p: u32, e: i32) -> S {
    let magnitude = (p as i64).pow(e.unsigned_abs());
    if e >= 0 {
        S::from_ratio(magnitude, 1)
    } else {
        S::from_ratio(1, magnitude)
    }
}

/// Precomputed `exp(2πi e / p)` for `e = 0..p`.
#[derive(Clone, Debug)]
pub struct RootTable<S> {
    roots: Vec<S>,
}

impl<S: Scalar> RootTable<S> {
    pub fn new(p: u32) -> Self {
        RootTable {
            roots: (0..p).map(|e| S::root_of_unity(p, e)).collect(),
        }
    }

    /// Root for an exponent already reduced or not; reduces modulo p.
    #[inline]
    pub fn get(&self, e: u64) -> &S {
        &self.roots[(e % self.roots.len() as u64) as usize]
    }
}

impl<F> Scalar for Complex<F>
where
    F: Float + FloatConst + Debug + Send + Sync,
{
    const EXACT: bool = false;

    fn root_of_unity(p: u32, e: u32) -> Self {
        let e = e % p;
        // snap the exact axes so that real masks stay real
        if e == 0 {
            return Complex::one();
        }
        if 2 * e == p {
            return -Complex::one();
        }
        let angle = F::TAU() * F::from(e).unwrap() / F::from(p).unwrap();
        Complex::new(angle.cos(), angle.sin())
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(F::from(num).unwrap() / F::from(den).unwrap(), F::zero())
    }

    fn from_complex(c: Complex64) -> Option<Self> {
        Some(Complex::new(F::from(c.re)?, F::from(c.im)?))
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}
