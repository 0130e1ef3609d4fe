//! Dense tables over finite digit windows.
//!
//! A window `[lo, hi)` of digit (or exponent) indices is flattened with the
//! digit at index `lo` as the most significant position. On the group side a
//! [`StepFunction`] is supported on `G_lo` and constant on cosets of `G_hi`;
//! on the dual side a [`CharTable`] is supported on `G_hi^⊥` and constant on
//! cosets of `G_lo^⊥`. The two are exchanged by [`fourier`] and
//! [`inverse_fourier`], which run a separable p-point transform per digit.

use crate::error::{Error, Result};
use crate::group::{CharCoset, Character, GroupElement, GroupParams};
use crate::scalar::{p_pow, RootTable, Scalar};

/// Number of words of length `len` over `Z_p`.
pub fn word_count(p: u32, len: usize) -> usize {
    (p as usize).pow(len as u32)
}

/// Word with `word[0]` most significant.
pub fn decode(mut index: usize, p: u32, len: usize) -> Vec<u32> {
    let mut word = vec![0; len];
    for slot in word.iter_mut().rev() {
        *slot = (index % p as usize) as u32;
        index /= p as usize;
    }
    word
}

pub fn encode(word: &[u32], p: u32) -> usize {
    word.iter()
        .fold(0usize, |acc, &d| acc * p as usize + d as usize)
}

/// All words of length `len` in index order.
pub fn all_words(p: u32, len: usize) -> impl Iterator<Item = Vec<u32>> {
    (0..word_count(p, len)).map(move |i| decode(i, p, len))
}

/// Renders a word as a base-p digit string (`p <= 10`) or a dotted list.
pub fn word_string(word: &[u32], p: u32) -> String {
    if p <= 10 {
        word.iter()
            .map(|d| char::from_digit(*d, 10).unwrap())
            .collect()
    } else {
        word.iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(".")
    }
}

pub fn parse_word(s: &str, p: u32) -> Result<Vec<u32>> {
    let digits: Result<Vec<u32>> = if s.contains('.') || p > 10 {
        s.split('.')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|e| Error::Parse(format!("digit `{t}`: {e}")))
            })
            .collect()
    } else {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .ok_or_else(|| Error::Parse(format!("digit `{c}` in `{s}`")))
            })
            .collect()
    };
    let digits = digits?;
    if let Some(&d) = digits.iter().find(|&&d| d >= p) {
        return Err(Error::Parse(format!(
            "digit {d} in `{s}` is not below p = {p}"
        )));
    }
    Ok(digits)
}

#[derive(Clone, Debug, PartialEq)]
struct Grid<S> {
    p: u32,
    lo: i32,
    hi: i32,
    values: Vec<S>,
}

impl<S: Scalar> Grid<S> {
    fn new(p: u32, lo: i32, hi: i32, values: Vec<S>) -> Result<Self> {
        if hi < lo {
            return Err(Error::Shape(format!("empty window [{lo}, {hi})")));
        }
        let expect = word_count(p, (hi - lo) as usize);
        if values.len() != expect {
            return Err(Error::Shape(format!(
                "window [{lo}, {hi}) over Z_{p} needs {expect} values, got {}",
                values.len()
            )));
        }
        Ok(Grid { p, lo, hi, values })
    }

    fn len(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    fn from_fn(p: u32, lo: i32, hi: i32, mut f: impl FnMut(&[u32]) -> S) -> Self {
        let len = (hi - lo).max(0) as usize;
        let values = all_words(p, len).map(|w| f(&w)).collect();
        Grid { p, lo, hi, values }
    }

    fn at(&self, word: &[u32]) -> &S {
        &self.values[encode(word, self.p)]
    }
}

/// Step function supported on `G_lo`, constant on cosets of `G_hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction<S> {
    grid: Grid<S>,
}

impl<S: Scalar> StepFunction<S> {
    pub fn new(p: u32, lo: i32, hi: i32, values: Vec<S>) -> Result<Self> {
        Ok(StepFunction {
            grid: Grid::new(p, lo, hi, values)?,
        })
    }

    pub fn zeros(p: u32, lo: i32, hi: i32) -> Self {
        Self::from_fn(p, lo, hi, |_| S::zero())
    }

    /// Builds the table from a function of the digit word on `lo..hi`.
    pub fn from_fn(p: u32, lo: i32, hi: i32, f: impl FnMut(&[u32]) -> S) -> Self {
        StepFunction {
            grid: Grid::from_fn(p, lo, hi, f),
        }
    }

    /// Indicator of `G_n` sampled at resolution `G_hi`.
    pub fn indicator(p: u32, n: i32, hi: i32) -> Self {
        Self::from_fn(p, n, hi, |_| S::one())
    }

    pub fn p(&self) -> u32 {
        self.grid.p
    }

    /// Support subgroup index: the function vanishes off `G_lo`.
    pub fn lo(&self) -> i32 {
        self.grid.lo
    }

    /// Resolution: the function is constant on cosets of `G_hi`.
    pub fn hi(&self) -> i32 {
        self.grid.hi
    }

    pub fn values(&self) -> &[S] {
        &self.grid.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.grid.values
    }

    /// Value on the coset with digit word `word` on `lo..hi`.
    pub fn at_word(&self, word: &[u32]) -> &S {
        self.grid.at(word)
    }

    /// `(word, value)` pairs in index order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<u32>, &S)> + '_ {
        let (p, len) = (self.grid.p, self.grid.len());
        self.grid
            .values
            .iter()
            .enumerate()
            .map(move |(i, v)| (decode(i, p, len), v))
    }

    pub fn eval(&self, x: &GroupElement) -> S {
        if !x.in_subgroup(self.grid.lo) {
            return S::zero();
        }
        self.grid.at(&x.word(self.grid.lo, self.grid.hi)).clone()
    }

    /// Same function on a larger support / finer resolution window.
    pub fn resample(&self, lo: i32, hi: i32) -> Result<Self> {
        if lo > self.grid.lo || hi < self.grid.hi {
            return Err(Error::Shape(format!(
                "cannot shrink window [{}, {}) to [{lo}, {hi})",
                self.grid.lo, self.grid.hi
            )));
        }
        if lo == self.grid.lo && hi == self.grid.hi {
            return Ok(self.clone());
        }
        let head = (self.grid.lo - lo) as usize;
        let keep = self.grid.len();
        Ok(Self::from_fn(self.grid.p, lo, hi, |w| {
            if w[..head].iter().any(|&d| d != 0) {
                S::zero()
            } else {
                self.grid.at(&w[head..head + keep]).clone()
            }
        }))
    }

    /// `x ↦ f(x ∸ h)`. Digits of `h` at indices `>= hi` do not matter.
    pub fn translate(&self, h: &GroupElement) -> Result<Self> {
        if h.params().p() != self.grid.p {
            return Err(Error::ParamMismatch(self.grid.p, h.params().p()));
        }
        let lo = h
            .lowest_index()
            .map_or(self.grid.lo, |k| k.min(self.grid.lo));
        let hi = self.grid.hi;
        let shift = h.word(lo, hi);
        let p = self.grid.p;
        let base = self.resample(lo, hi)?;
        Ok(Self::from_fn(p, lo, hi, |w| {
            let y: Vec<u32> = w.iter().zip(&shift).map(|(a, b)| (a + p - b) % p).collect();
            base.grid.at(&y).clone()
        }))
    }

    /// `x ↦ f(𝒜x)`: support and resolution indices both move up by one.
    pub fn compose_dilation(&self) -> Self {
        let mut out = self.clone();
        out.grid.lo += 1;
        out.grid.hi += 1;
        out
    }

    /// `x ↦ f(𝒜^{-1}x)`.
    pub fn compose_dilation_inv(&self) -> Self {
        let mut out = self.clone();
        out.grid.lo -= 1;
        out.grid.hi -= 1;
        out
    }

    /// Brings both functions onto their common window.
    pub fn align(&self, other: &Self) -> Result<(Self, Self)> {
        if self.grid.p != other.grid.p {
            return Err(Error::ParamMismatch(self.grid.p, other.grid.p));
        }
        let lo = self.grid.lo.min(other.grid.lo);
        let hi = self.grid.hi.max(other.grid.hi);
        Ok((self.resample(lo, hi)?, other.resample(lo, hi)?))
    }

    /// `⟨f, g⟩ = ∫ f conj(g) dμ`, with weight `p^{-hi}` per sample.
    pub fn inner(&self, other: &Self) -> Result<S> {
        fn dot<S: Scalar>(a: &Grid<S>, b: &Grid<S>) -> S {
            let mut acc = S::zero();
            for (x, y) in a.values.iter().zip(&b.values) {
                if x.is_zero() || y.is_zero() {
                    continue;
                }
                acc = acc + x.clone() * y.conj();
            }
            acc * p_pow(a.p, -a.hi)
        }
        if self.grid.p == other.grid.p
            && self.grid.lo == other.grid.lo
            && self.grid.hi == other.grid.hi
        {
            return Ok(dot(&self.grid, &other.grid));
        }
        let (a, b) = self.align(other)?;
        Ok(dot(&a.grid, &b.grid))
    }

    pub fn norm_sqr(&self) -> S {
        self.inner(self).expect("same window")
    }

    /// `∫ f dμ`.
    pub fn integral(&self) -> S {
        let sum = self
            .grid
            .values
            .iter()
            .fold(S::zero(), |acc, v| acc + v.clone());
        sum * p_pow(self.grid.p, -self.grid.hi)
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = self.clone();
        for v in out.grid.values.iter_mut() {
            *v = v.clone() * c.clone();
        }
        out
    }

    /// `self + c·other` on the common window.
    pub fn add_scaled(&self, c: &S, other: &Self) -> Result<Self> {
        let (mut a, b) = self.align(other)?;
        for (x, y) in a.grid.values.iter_mut().zip(b.grid.values) {
            if !y.is_zero() {
                *x = x.clone() + c.clone() * y;
            }
        }
        Ok(a)
    }

    pub fn max_distance(&self, other: &Self) -> Result<f64> {
        let (a, b) = self.align(other)?;
        Ok(a.grid
            .values
            .iter()
            .zip(&b.grid.values)
            .map(|(x, y)| x.distance(y))
            .fold(0.0, f64::max))
    }

    /// Exact equality for exact scalars, `max |f - g| <= tol` otherwise.
    pub fn close_to(&self, other: &Self, tol: f64) -> Result<bool> {
        let (a, b) = self.align(other)?;
        Ok(a.grid
            .values
            .iter()
            .zip(&b.grid.values)
            .all(|(x, y)| x.close_to(y, tol)))
    }

    /// Applies `f` entrywise, e.g. to move between scalar fields.
    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> StepFunction<T> {
        StepFunction {
            grid: Grid {
                p: self.grid.p,
                lo: self.grid.lo,
                hi: self.grid.hi,
                values: self.grid.values.iter().map(f).collect(),
            },
        }
    }
}

/// Function on characters supported on `G_hi^⊥`, constant on `G_lo^⊥` cosets.
#[derive(Clone, Debug, PartialEq)]
pub struct CharTable<S> {
    grid: Grid<S>,
}

impl<S: Scalar> CharTable<S> {
    pub fn new(p: u32, lo: i32, hi: i32, values: Vec<S>) -> Result<Self> {
        Ok(CharTable {
            grid: Grid::new(p, lo, hi, values)?,
        })
    }

    pub fn from_fn(p: u32, lo: i32, hi: i32, f: impl FnMut(&[u32]) -> S) -> Self {
        CharTable {
            grid: Grid::from_fn(p, lo, hi, f),
        }
    }

    pub fn p(&self) -> u32 {
        self.grid.p
    }

    pub fn lo(&self) -> i32 {
        self.grid.lo
    }

    pub fn hi(&self) -> i32 {
        self.grid.hi
    }

    pub fn values(&self) -> &[S] {
        &self.grid.values
    }

    pub fn at_word(&self, word: &[u32]) -> &S {
        self.grid.at(word)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Vec<u32>, &S)> + '_ {
        let (p, len) = (self.grid.p, self.grid.len());
        self.grid
            .values
            .iter()
            .enumerate()
            .map(move |(i, v)| (decode(i, p, len), v))
    }

    /// Value on a coset of `G_{-depth}^⊥` with `-depth == lo`.
    pub fn at_coset(&self, coset: &CharCoset) -> S {
        debug_assert_eq!(-(coset.depth() as i32), self.grid.lo);
        match coset.top_index() {
            Some(top) if top >= self.grid.hi => S::zero(),
            _ => self.grid.at(&coset.word(self.grid.len())).clone(),
        }
    }

    pub fn eval(&self, chi: &Character) -> S {
        if !chi.in_annihilator(self.grid.hi) {
            return S::zero();
        }
        self.grid.at(&chi.word(self.grid.lo, self.grid.hi)).clone()
    }

    pub fn max_distance(&self, other: &Self) -> f64 {
        self.grid
            .values
            .iter()
            .zip(&other.grid.values)
            .map(|(x, y)| x.distance(y))
            .fold(0.0, f64::max)
    }
}

/// In-place separable transform over `Z_p^len` with kernel `ω^{±ab}` per digit.
pub fn chrestenson<S: Scalar>(values: &mut [S], p: u32, inverse_sign: bool) {
    let n = values.len();
    let roots = RootTable::<S>::new(p);
    let pu = p as usize;
    let mut stride = 1usize;
    let mut scratch = vec![S::zero(); pu];
    while stride < n {
        let block = stride * pu;
        for start in (0..n).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (a, slot) in scratch.iter_mut().enumerate() {
                    let mut acc = S::zero();
                    for b in 0..pu {
                        let v = &values[base + b * stride];
                        if v.is_zero() {
                            continue;
                        }
                        let e = (a * b) % pu;
                        let e = if inverse_sign { (pu - e) % pu } else { e };
                        acc = acc + v.clone() * roots.get(e as u64).clone();
                    }
                    *slot = acc;
                }
                for (a, v) in scratch.iter_mut().enumerate() {
                    values[base + a * stride] = std::mem::replace(v, S::zero());
                }
            }
        }
        stride = block;
    }
}

/// `f̂(χ) = ∫ f(x) conj((χ, x)) dμ(x)` for a step function on `[lo, hi)`.
pub fn fourier<S: Scalar>(f: &StepFunction<S>) -> CharTable<S> {
    let p = f.p();
    let mut values = f.values().to_vec();
    chrestenson(&mut values, p, true);
    let w = p_pow::<S>(p, -f.hi());
    for v in values.iter_mut() {
        *v = v.clone() * w.clone();
    }
    CharTable {
        grid: Grid {
            p,
            lo: f.lo(),
            hi: f.hi(),
            values,
        },
    }
}

/// `f(x) = ∫ f̂(χ) (χ, x) dν(χ)`; inverse of [`fourier`].
pub fn inverse_fourier<S: Scalar>(hat: &CharTable<S>) -> StepFunction<S> {
    let p = hat.p();
    let mut values = hat.values().to_vec();
    chrestenson(&mut values, p, false);
    let w = p_pow::<S>(p, hat.lo());
    for v in values.iter_mut() {
        *v = v.clone() * w.clone();
    }
    StepFunction {
        grid: Grid {
            p,
            lo: hat.lo(),
            hi: hat.hi(),
            values,
        },
    }
}

/// Group element with digit word `word` on `lo..`.
pub fn element_of(params: GroupParams, lo: i32, word: &[u32]) -> Result<GroupElement> {
    GroupElement::from_word(params, lo, word)
}
