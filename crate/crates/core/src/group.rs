//! Finite model of the p-adic Vilenkin group and its character group.
//!
//! An element `x = Σ a_k g_k` is a finitely supported digit word; addition is
//! digitwise modulo `p` without carries. A character `χ = Π r_k^{α_k}` is a
//! finitely supported exponent word and pairs with `x` as
//! `exp(2πi/p · Σ α_k a_k)`.
//!
//! Subgroups: `x ∈ G_n` iff every digit below index `n` vanishes; `χ ∈ G_n^⊥`
//! iff every exponent at index `>= n` vanishes.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{p_pow, Scalar};

/// Default bounds of the digit index window, inclusive.
pub const DEFAULT_WINDOW: (i32, i32) = (-16, 16);

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime modulus plus the index window digits may occupy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupParams {
    p: u32,
    lo: i32,
    hi: i32,
}

impl GroupParams {
    pub fn new(p: u32) -> Result<Self> {
        Self::with_window(p, DEFAULT_WINDOW.0, DEFAULT_WINDOW.1)
    }

    pub fn with_window(p: u32, lo: i32, hi: i32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if lo > hi {
            return Err(Error::Parameter(format!("empty index window [{lo}, {hi}]")));
        }
        Ok(GroupParams { p, lo, hi })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Inclusive index window.
    pub fn window(&self) -> (i32, i32) {
        (self.lo, self.hi)
    }

    /// `p = 2` works but sits outside the usual `p >= 3` setting and is flagged.
    pub fn outside_default_range(&self) -> bool {
        self.p == 2
    }

    fn check(&self, index: i32, digit: u32) -> Result<()> {
        if digit >= self.p {
            return Err(Error::DigitRange {
                index,
                digit,
                p: self.p,
            });
        }
        if index < self.lo || index > self.hi {
            return Err(Error::OutsideWindow {
                index,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(())
    }

    fn same(&self, other: &GroupParams) -> Result<()> {
        if self.p != other.p {
            return Err(Error::ParamMismatch(self.p, other.p));
        }
        Ok(())
    }
}

/// Sparse word over `Z_p` with canonical zero trimming.
fn build_word(
    params: &GroupParams,
    entries: impl IntoIterator<Item = (i32, u32)>,
) -> Result<BTreeMap<i32, u32>> {
    let mut out = BTreeMap::new();
    for (k, a) in entries {
        params.check(k, a)?;
        if a != 0 {
            out.insert(k, a);
        } else {
            out.remove(&k);
        }
    }
    Ok(out)
}

fn shift_word(
    params: &GroupParams,
    word: &BTreeMap<i32, u32>,
    by: i32,
) -> Result<BTreeMap<i32, u32>> {
    build_word(params, word.iter().map(|(&k, &a)| (k + by, a)))
}

/// Element `x = Σ a_k g_k` of the Vilenkin group.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    params: GroupParams,
    digits: BTreeMap<i32, u32>,
}

impl GroupElement {
    pub fn zero(params: GroupParams) -> Self {
        GroupElement {
            params,
            digits: BTreeMap::new(),
        }
    }

    /// `g_k`: the word with a single digit 1 at index `k`.
    pub fn basis(params: GroupParams, k: i32) -> Result<Self> {
        Self::from_digits(params, [(k, 1)])
    }

    pub fn from_digits(
        params: GroupParams,
        digits: impl IntoIterator<Item = (i32, u32)>,
    ) -> Result<Self> {
        Ok(GroupElement {
            params,
            digits: build_word(&params, digits)?,
        })
    }

    /// Digits `word[i]` at index `lo + i`.
    pub fn from_word(params: GroupParams, lo: i32, word: &[u32]) -> Result<Self> {
        Self::from_digits(
            params,
            word.iter().enumerate().map(|(i, &a)| (lo + i as i32, a)),
        )
    }

    pub fn params(&self) -> &GroupParams {
        &self.params
    }

    pub fn digit(&self, k: i32) -> u32 {
        self.digits.get(&k).copied().unwrap_or(0)
    }

    /// Nonzero digits in increasing index order.
    pub fn digits(&self) -> impl Iterator<Item = (i32, u32)> + '_ {
        self.digits.iter().map(|(&k, &a)| (k, a))
    }

    /// Digits on indices `lo..hi` as a dense word.
    pub fn word(&self, lo: i32, hi: i32) -> Vec<u32> {
        (lo..hi).map(|k| self.digit(k)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Lowest index carrying a nonzero digit.
    pub fn lowest_index(&self) -> Option<i32> {
        self.digits.keys().next().copied()
    }

    pub fn highest_index(&self) -> Option<i32> {
        self.digits.keys().next_back().copied()
    }

    /// `x ∈ G_n`.
    pub fn in_subgroup(&self, n: i32) -> bool {
        self.lowest_index().is_none_or(|k| k >= n)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(&self, other: &GroupElement) -> Result<GroupElement> {
        self.combine(other, |a, b, p| (a + b) % p)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(&self, other: &GroupElement) -> Result<GroupElement> {
        self.combine(other, |a, b, p| (a + p - b) % p)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(&self) -> GroupElement {
        let p = self.params.p;
        GroupElement {
            params: self.params,
            digits: self.digits.iter().map(|(&k, &a)| (k, p - a)).collect(),
        }
    }

    fn combine(
        &self,
        other: &GroupElement,
        op: impl Fn(u32, u32, u32) -> u32,
    ) -> Result<GroupElement> {
        self.params.same(&other.params)?;
        let p = self.params.p;
        let mut digits = self.digits.clone();
        for (&k, &b) in &other.digits {
            let a = digits.get(&k).copied().unwrap_or(0);
            let c = op(a, b, p);
            if c == 0 {
                digits.remove(&k);
            } else {
                digits.insert(k, c);
            }
        }
        // digits only present in `self` still need op(a, 0)
        for (k, a) in digits.iter_mut() {
            if !other.digits.contains_key(k) {
                *a = op(*a, 0, p);
            }
        }
        digits.retain(|_, a| *a != 0);
        Ok(GroupElement {
            params: self.params,
            digits,
        })
    }

    /// `𝒜x = Σ a_n g_{n-1}`: every digit index moves down by one.
    pub fn dilate(&self) -> Result<GroupElement> {
        Ok(GroupElement {
            params: self.params,
            digits: shift_word(&self.params, &self.digits, -1)?,
        })
    }

    /// `𝒜^{-1}x`: every digit index moves up by one.
    pub fn dilate_inv(&self) -> Result<GroupElement> {
        Ok(GroupElement {
            params: self.params,
            digits: shift_word(&self.params, &self.digits, 1)?,
        })
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.digits.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .digits
            .iter()
            .map(|(k, a)| format!("{a}g[{k}]"))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Character `χ = Π r_k^{α_k}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Character {
    params: GroupParams,
    exponents: BTreeMap<i32, u32>,
}

impl Character {
    pub fn trivial(params: GroupParams) -> Self {
        Character {
            params,
            exponents: BTreeMap::new(),
        }
    }

    /// Rademacher function `r_k`.
    pub fn rademacher(params: GroupParams, k: i32) -> Result<Self> {
        Self::from_exponents(params, [(k, 1)])
    }

    pub fn from_exponents(
        params: GroupParams,
        exponents: impl IntoIterator<Item = (i32, u32)>,
    ) -> Result<Self> {
        Ok(Character {
            params,
            exponents: build_word(&params, exponents)?,
        })
    }

    /// Exponents `word[i]` at index `lo + i`.
    pub fn from_word(params: GroupParams, lo: i32, word: &[u32]) -> Result<Self> {
        Self::from_exponents(
            params,
            word.iter().enumerate().map(|(i, &a)| (lo + i as i32, a)),
        )
    }

    pub fn params(&self) -> &GroupParams {
        &self.params
    }

    pub fn exponent(&self, k: i32) -> u32 {
        self.exponents.get(&k).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> impl Iterator<Item = (i32, u32)> + '_ {
        self.exponents.iter().map(|(&k, &a)| (k, a))
    }

    pub fn word(&self, lo: i32, hi: i32) -> Vec<u32> {
        (lo..hi).map(|k| self.exponent(k)).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Highest index carrying a nonzero exponent.
    pub fn top_index(&self) -> Option<i32> {
        self.exponents.keys().next_back().copied()
    }

    /// `χ ∈ G_n^⊥`.
    pub fn in_annihilator(&self, n: i32) -> bool {
        self.top_index().is_none_or(|k| k < n)
    }

    /// Pointwise product `χψ`.
    pub fn mul(&self, other: &Character) -> Result<Character> {
        self.params.same(&other.params)?;
        let p = self.params.p;
        let mut exps = self.exponents.clone();
        for (&k, &b) in &other.exponents {
            let c = (exps.get(&k).copied().unwrap_or(0) + b) % p;
            if c == 0 {
                exps.remove(&k);
            } else {
                exps.insert(k, c);
            }
        }
        Ok(Character {
            params: self.params,
            exponents: exps,
        })
    }

    /// `χ^e`; negative powers give the conjugate character.
    pub fn pow(&self, e: i64) -> Character {
        let p = self.params.p as i64;
        let exps = self
            .exponents
            .iter()
            .map(|(&k, &a)| (k, ((a as i64 * e).rem_euclid(p)) as u32))
            .filter(|&(_, a)| a != 0)
            .collect();
        Character {
            params: self.params,
            exponents: exps,
        }
    }

    /// `χ𝒜^{-1}`: exponent indices move down by one, so `r_n 𝒜^{-1} = r_{n-1}`.
    pub fn dilate_inv(&self) -> Result<Character> {
        Ok(Character {
            params: self.params,
            exponents: shift_word(&self.params, &self.exponents, -1)?,
        })
    }

    /// `χ𝒜`: exponent indices move up by one.
    pub fn dilate(&self) -> Result<Character> {
        Ok(Character {
            params: self.params,
            exponents: shift_word(&self.params, &self.exponents, 1)?,
        })
    }

    /// `(χ, x) = exp(2πi/p · Σ α_k a_k)`.
    pub fn pair(&self, x: &GroupElement) -> Result<RootScalar> {
        self.params.same(&x.params)?;
        Ok(RootScalar::Root(pair_exponent(
            self.params.p,
            &self.exponents,
            &x.digits,
        )))
    }
}

impl fmt::Debug for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "1");
        }
        let terms: Vec<String> = self
            .exponents
            .iter()
            .map(|(k, a)| format!("r[{k}]^{a}"))
            .collect();
        write!(f, "{}", terms.join(" "))
    }
}

fn pair_exponent(p: u32, exps: &BTreeMap<i32, u32>, digits: &BTreeMap<i32, u32>) -> u32 {
    let (small, large) = if exps.len() <= digits.len() {
        (exps, digits)
    } else {
        (digits, exps)
    };
    let total: u64 = small
        .iter()
        .filter_map(|(k, &a)| large.get(k).map(|&b| a as u64 * b as u64))
        .sum();
    (total % p as u64) as u32
}

/// Free function form of [`Character::pair`].
pub fn pair(chi: &Character, x: &GroupElement) -> Result<RootScalar> {
    chi.pair(x)
}

/// Coset `𝔊_{-N}^⊥ ζ`, identified by the exponents of `ζ` on indices
/// `-N, -N+1, …` with trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharCoset {
    depth: u32,
    exps: Vec<u32>,
}

impl CharCoset {
    /// `word[i]` is the exponent at index `-depth + i`.
    pub fn from_word(depth: u32, word: &[u32]) -> Self {
        let mut exps = word.to_vec();
        while exps.last() == Some(&0) {
            exps.pop();
        }
        CharCoset { depth, exps }
    }

    pub fn trivial(depth: u32) -> Self {
        CharCoset {
            depth,
            exps: Vec::new(),
        }
    }

    /// The coset of `𝔊_{-depth}^⊥` containing `χ`.
    pub fn containing(chi: &Character, depth: u32) -> Self {
        let lo = -(depth as i32);
        let top = chi.top_index().unwrap_or(lo - 1);
        if top < lo {
            return Self::trivial(depth);
        }
        Self::from_word(depth, &chi.word(lo, top + 1))
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn exponent(&self, k: i32) -> u32 {
        let i = k + self.depth as i32;
        if i < 0 {
            return 0;
        }
        self.exps.get(i as usize).copied().unwrap_or(0)
    }

    /// Exponents on `-depth .. -depth + len`, zero padded.
    pub fn word(&self, len: usize) -> Vec<u32> {
        (0..len)
            .map(|i| self.exps.get(i).copied().unwrap_or(0))
            .collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.is_empty()
    }

    /// Index of the highest nonzero exponent; `None` for the trivial coset.
    pub fn top_index(&self) -> Option<i32> {
        (!self.exps.is_empty()).then(|| self.exps.len() as i32 - 1 - self.depth as i32)
    }

    /// `ξ`: exponents on `-N..-1`.
    pub fn prefix(&self) -> Vec<u32> {
        self.word(self.depth as usize)
    }

    /// Canonical representative `ζ` (no exponents below `-N`).
    pub fn representative(&self, params: GroupParams) -> Result<Character> {
        Character::from_word(params, -(self.depth as i32), &self.exps)
    }

    pub fn contains(&self, chi: &Character) -> bool {
        CharCoset::containing(chi, self.depth) == *self
    }
}

/// Exact carrier for pairings and mask entries: zero, a p-th root of unity
/// `exp(2πi e/p)`, or an arbitrary unimodular phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootScalar {
    Zero,
    Root(u32),
    Phase(Complex64),
}

/// Maximum departure from `|z| = 1` accepted for arbitrary phases.
pub const PHASE_TOLERANCE: f64 = 1e-12;

impl RootScalar {
    pub fn one() -> Self {
        RootScalar::Root(0)
    }

    /// Checked unimodular phase.
    pub fn phase(z: Complex64) -> Result<Self> {
        if (z.norm() - 1.0).abs() > PHASE_TOLERANCE {
            return Err(Error::Mask(format!("phase {z} is not unimodular")));
        }
        Ok(RootScalar::Phase(z))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, RootScalar::Zero)
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, RootScalar::Phase(_))
    }

    /// `|value|^2`, which is 0 or 1 by construction.
    pub fn abs_sqr(&self) -> u32 {
        u32::from(!self.is_zero())
    }

    pub fn to_c64(&self, p: u32) -> Complex64 {
        match *self {
            RootScalar::Zero => Complex64::new(0.0, 0.0),
            RootScalar::Root(e) => Complex64::root_of_unity(p, e),
            RootScalar::Phase(z) => z,
        }
    }

    /// Embeds into a scalar field; exact fields reject arbitrary phases.
    pub fn to_scalar<S: Scalar>(&self, p: u32) -> Result<S> {
        match *self {
            RootScalar::Zero => Ok(S::zero()),
            RootScalar::Root(e) => Ok(S::root_of_unity(p, e)),
            RootScalar::Phase(z) => S::from_complex(z)
                .ok_or_else(|| Error::NotExact(format!("phase {z} in an exact field"))),
        }
    }

    pub fn mul(&self, other: &RootScalar, p: u32) -> RootScalar {
        match (*self, *other) {
            (RootScalar::Zero, _) | (_, RootScalar::Zero) => RootScalar::Zero,
            (RootScalar::Root(a), RootScalar::Root(b)) => RootScalar::Root((a + b) % p),
            (a, b) => RootScalar::Phase(a.to_c64(p) * b.to_c64(p)),
        }
    }

    pub fn conj(&self, p: u32) -> RootScalar {
        match *self {
            RootScalar::Zero => RootScalar::Zero,
            RootScalar::Root(e) => RootScalar::Root((p - e % p) % p),
            RootScalar::Phase(z) => RootScalar::Phase(z.conj()),
        }
    }
}

/// Closed-form value `p^{scale} · value` of a Haar or character integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledRoot {
    pub scale: i32,
    pub value: RootScalar,
}

impl ScaledRoot {
    pub fn to_scalar<S: Scalar>(&self, p: u32) -> Result<S> {
        Ok(p_pow::<S>(p, self.scale) * self.value.to_scalar(p)?)
    }
}

/// Haar measure normalisation: `μ(G_n) = p^{-n}`, `ν(G_n^⊥) = p^n`.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeasureConvention;

impl MeasureConvention {
    /// `μ(G_n)` (and of any coset of it).
    pub fn subgroup<S: Scalar>(p: u32, n: i32) -> S {
        p_pow(p, -n)
    }

    /// `ν(G_n^⊥)` (and of any coset of it).
    pub fn annihilator<S: Scalar>(p: u32, n: i32) -> S {
        p_pow(p, n)
    }
}

/// `∫_{G_n^⊥ χ} (ψ, x) dν(ψ) = p^n (χ, x) 1_{G_n}(x)`.
///
/// Covers the trivial coset (`χ = 1`) as well; never integrates numerically.
pub fn integrate_char_over_coset(n: i32, rep: &Character, x: &GroupElement) -> Result<ScaledRoot> {
    if !x.in_subgroup(n) {
        rep.params.same(&x.params)?;
        return Ok(ScaledRoot {
            scale: n,
            value: RootScalar::Zero,
        });
    }
    Ok(ScaledRoot {
        scale: n,
        value: rep.pair(x)?,
    })
}

/// `∫_{G_n ∔ h} (χ, x) dμ(x) = p^{-n} (χ, h) 1_{G_n^⊥}(χ)`.
pub fn integrate_over_group_coset(n: i32, h: &GroupElement, chi: &Character) -> Result<ScaledRoot> {
    let value = if chi.in_annihilator(n) {
        chi.pair(h)?
    } else {
        chi.params.same(&h.params)?;
        RootScalar::Zero
    };
    Ok(ScaledRoot { scale: -n, value })
}
