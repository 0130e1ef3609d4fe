//! Exact arithmetic in the cyclotomic field Q(ω), ω = exp(2πi/p), p prime.
//!
//! Elements are stored as rational coefficient vectors over the powers
//! `1, ω, …, ω^{p-1}`, reduced with `1 + ω + … + ω^{p-1} = 0` so that the
//! coefficient of `ω^{p-1}` is always zero. The reduced form is unique, which
//! makes `==` an exact field comparison.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::scalar::Scalar;

pub type Rational = Ratio<i128>;

/// Element of Q(exp(2πi/p)).
///
/// `p == 0` marks a plain rational that has not met a root of unity yet;
/// it is promoted on first contact with an element of a concrete field.
#[derive(Clone)]
pub struct Cyclotomic {
    p: u32,
    coeffs: Vec<Rational>,
}

impl Cyclotomic {
    pub fn rational(value: Rational) -> Self {
        Cyclotomic {
            p: 0,
            coeffs: vec![value],
        }
    }

    /// `ω^e` in Q(ω_p).
    pub fn root(p: u32, e: u32) -> Self {
        assert!(p >= 2, "cyclotomic field needs p >= 2");
        let mut coeffs = vec![Rational::zero(); p as usize];
        coeffs[(e % p) as usize] = Rational::one();
        let mut out = Cyclotomic { p, coeffs };
        out.reduce();
        out
    }

    /// The field order, or `None` for a bare rational.
    pub fn modulus(&self) -> Option<u32> {
        (self.p != 0).then_some(self.p)
    }

    /// Reduced coefficients of `1, ω, …, ω^{p-2}`.
    pub fn coefficients(&self) -> &[Rational] {
        if self.p == 0 {
            &self.coeffs
        } else {
            &self.coeffs[..self.coeffs.len() - 1]
        }
    }

    /// Returns the value as a rational when it lies in Q.
    pub fn as_rational(&self) -> Option<Rational> {
        let cs = self.coefficients();
        if cs.iter().skip(1).all(Zero::is_zero) {
            Some(cs[0])
        } else {
            None
        }
    }

    fn reduce(&mut self) {
        if self.p == 0 {
            return;
        }
        let last = self.coeffs[self.p as usize - 1];
        if !last.is_zero() {
            for c in self.coeffs.iter_mut() {
                *c -= last;
            }
        }
    }

    fn promoted(&self, p: u32) -> Cyclotomic {
        if self.p == p {
            return self.clone();
        }
        assert!(
            self.p == 0,
            "mixing elements of different cyclotomic fields (p = {} and p = {p})",
            self.p
        );
        let mut coeffs = vec![Rational::zero(); p as usize];
        coeffs[0] = self.coeffs[0];
        Cyclotomic { p, coeffs }
    }

    fn common(a: &Cyclotomic, b: &Cyclotomic) -> u32 {
        match (a.p, b.p) {
            (0, q) | (q, 0) => q,
            (x, y) if x == y => x,
            (x, y) => {
                panic!("mixing elements of different cyclotomic fields (p = {x} and p = {y})")
            }
        }
    }

    fn zip_with(self, rhs: Cyclotomic, f: impl Fn(Rational, Rational) -> Rational) -> Cyclotomic {
        let p = Self::common(&self, &rhs);
        let (a, b) = (self.promoted(p), rhs.promoted(p));
        let mut out = Cyclotomic {
            p,
            coeffs: a
                .coeffs
                .into_iter()
                .zip(b.coeffs)
                .map(|(x, y)| f(x, y))
                .collect(),
        };
        out.reduce();
        out
    }
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        match (self.p, other.p) {
            (x, y) if x == y => self.coeffs == other.coeffs,
            (0, q) => self.promoted(q).coeffs == other.coeffs,
            (q, 0) => self.coeffs == other.promoted(q).coeffs,
            _ => false,
        }
    }
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (k, c) in self.coefficients().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            terms.push(match k {
                0 => format!("{c}"),
                1 => format!("({c})w"),
                _ => format!("({c})w^{k}"),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl Add for Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: Cyclotomic) -> Cyclotomic {
        self.zip_with(rhs, |x, y| x + y)
    }
}

impl Sub for Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: Cyclotomic) -> Cyclotomic {
        self.zip_with(rhs, |x, y| x - y)
    }
}

impl Neg for Cyclotomic {
    type Output = Cyclotomic;
    fn neg(mut self) -> Cyclotomic {
        for c in self.coeffs.iter_mut() {
            *c = -*c;
        }
        self
    }
}

impl Mul for Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: Cyclotomic) -> Cyclotomic {
        let p = Self::common(&self, &rhs);
        if p == 0 {
            return Cyclotomic::rational(self.coeffs[0] * rhs.coeffs[0]);
        }
        let (a, b) = (self.promoted(p), rhs.promoted(p));
        let n = p as usize;
        let mut coeffs = vec![Rational::zero(); n];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                coeffs[(i + j) % n] += x * y;
            }
        }
        let mut out = Cyclotomic { p, coeffs };
        out.reduce();
        out
    }
}

impl Zero for Cyclotomic {
    fn zero() -> Self {
        Cyclotomic::rational(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

impl One for Cyclotomic {
    fn one() -> Self {
        Cyclotomic::rational(Rational::one())
    }
}

impl Scalar for Cyclotomic {
    const EXACT: bool = true;

    fn root_of_unity(p: u32, e: u32) -> Self {
        Cyclotomic::root(p, e)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Cyclotomic::rational(Rational::new(num as i128, den as i128))
    }

    fn from_complex(_: Complex64) -> Option<Self> {
        None
    }

    fn conj(&self) -> Self {
        if self.p == 0 {
            return self.clone();
        }
        let n = self.p as usize;
        let mut coeffs = vec![Rational::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[(n - k) % n] = *c;
        }
        let mut out = Cyclotomic { p: self.p, coeffs };
        out.reduce();
        out
    }

    fn to_c64(&self) -> Complex64 {
        let n = self.coeffs.len().max(1) as f64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let v = c.to_f64().unwrap_or(f64::NAN);
                if self.p == 0 {
                    Complex64::new(v, 0.0)
                } else {
                    Complex64::from_polar(v, std::f64::consts::TAU * k as f64 / n)
                }
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(p: u32, e: u32) -> Cyclotomic {
        Cyclotomic::root(p, e)
    }

    #[test]
    fn roots_sum_to_zero() {
        for p in [2u32, 3, 5, 7] {
            let s = (0..p)
                .map(|e| w(p, e))
                .fold(Cyclotomic::zero(), |a, b| a + b);
            assert!(s.is_zero(), "p={p}");
        }
    }

    #[test]
    fn multiplication_adds_exponents() {
        assert_eq!(w(5, 3) * w(5, 4), w(5, 2));
        assert_eq!(w(3, 1) * w(3, 2), Cyclotomic::one());
    }

    #[test]
    fn conjugate_inverts_roots() {
        assert_eq!(w(7, 3).conj(), w(7, 4));
        assert_eq!(w(7, 3) * w(7, 3).conj(), Cyclotomic::one());
    }

    #[test]
    fn rational_promotes() {
        let half = Cyclotomic::from_ratio(1, 2);
        let x = half.clone() * w(3, 1) + half;
        // (1 + w)/2 = -w^2/2
        assert_eq!(x, -(w(3, 2) * Cyclotomic::from_ratio(1, 2)));
        assert_eq!(Cyclotomic::from_ratio(2, 4), Cyclotomic::from_ratio(1, 2));
    }

    #[test]
    fn p_two_is_rational() {
        assert_eq!(w(2, 1), -Cyclotomic::one());
        assert_eq!(w(2, 1).as_rational(), Some(Rational::from_integer(-1)));
    }

    #[test]
    fn complex_embedding() {
        let z = (w(3, 1) + Cyclotomic::from_ratio(1, 3)).to_c64();
        let expect = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0) + 1.0 / 3.0;
        assert!((z - expect).norm() < 1e-14);
    }
}
