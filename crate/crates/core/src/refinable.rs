//! Support sets, the refinable function `φ` and its Fourier transform, and
//! the orthonormality and refinement checks.
//!
//! Dual-side words cover exponent indices `-N..M` with `β_{-N}` first, so a
//! word is also a coset of `G_{-N}^⊥` inside `G_M^⊥`.

use std::collections::{BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    all_words, encode, fourier, inverse_fourier, word_count, word_string, CharTable, StepFunction,
};
use crate::group::{CharCoset, Character, GroupElement, GroupParams, RootScalar};
use crate::mask::{CoefficientTable, Mask, ROUND_TRIP_TOLERANCE};
use crate::report::{Check, Report};
use crate::scalar::Scalar;

/// Entry-wise tolerance for Gram matrices in complex arithmetic.
pub const GRAM_TOLERANCE: f64 = 1e-10;

/// A union of `p^N` cosets of `G_{-N}^⊥` inside `G_M^⊥`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementarySet {
    p: u32,
    #[serde(rename = "N")]
    n: u32,
    #[serde(rename = "M")]
    m: u32,
    words: BTreeSet<Vec<u32>>,
}

impl ElementarySet {
    pub fn new(p: u32, n: u32, m: u32, words: BTreeSet<Vec<u32>>) -> Result<Self> {
        let len = (n + m) as usize;
        if let Some(w) = words
            .iter()
            .find(|w| w.len() != len || w.iter().any(|&d| d >= p))
        {
            return Err(Error::Shape(format!(
                "word {w:?} does not fit p = {p}, N + M = {len}"
            )));
        }
        Ok(ElementarySet { p, n, m, words })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Words `(β_{-N}, …, β_{M-1})`.
    pub fn words(&self) -> &BTreeSet<Vec<u32>> {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn cosets(&self) -> Vec<CharCoset> {
        self.words
            .iter()
            .map(|w| CharCoset::from_word(self.n, w))
            .collect()
    }

    /// Whether the coset `G_{-N}^⊥ χ` belongs to the set.
    pub fn contains(&self, chi: &Character) -> bool {
        chi.in_annihilator(self.m as i32)
            && self
                .words
                .contains(&chi.word(-(self.n as i32), self.m as i32))
    }
}

fn top_index(word: &[u32], n: u32) -> Option<i32> {
    word.iter()
        .rposition(|&d| d != 0)
        .map(|i| i as i32 - n as i32)
}

/// Count, trivial coset, distinct prefixes and one coset in every shell
/// `G_{-N+l+1}^⊥ \ G_{-N+l}^⊥`, `l = 0, …, M+N-1`.
pub fn is_elementary(e: &ElementarySet) -> Report {
    let mut report = Report::new("elementary set");
    for c in tiling_checks(e) {
        report.push(c);
    }
    let mut trivial = Check::new(
        "elementary.trivial",
        "the trivial coset G_{-N}^perp belongs to E",
    );
    let zero = vec![0u32; (e.n + e.m) as usize];
    trivial.record(e.words.contains(&zero), 0.0, || {
        "trivial coset missing".into()
    });
    report.push(trivial);

    let mut shells = Check::new(
        "elementary.shells",
        "for every l = 0..M+N-1 some coset has its top nonzero exponent at index -N+l",
    );
    let tops: BTreeSet<i32> = e.words.iter().filter_map(|w| top_index(w, e.n)).collect();
    for l in 0..(e.m + e.n) as i32 {
        let index = l - e.n as i32;
        shells.record(tops.contains(&index), 0.0, || {
            format!("no coset in the shell with top index {index}")
        });
    }
    report.push(shells);
    report
}

/// Count and distinct-prefix conditions only: the cosets tile `G_0^⊥`.
pub fn tiling_report(e: &ElementarySet) -> Report {
    let mut report = Report::new("tiling set");
    for c in tiling_checks(e) {
        report.push(c);
    }
    report
}

fn tiling_checks(e: &ElementarySet) -> Vec<Check> {
    let expect = word_count(e.p, e.n as usize);
    let mut count = Check::new(
        "elementary.count",
        "E is a union of exactly p^N cosets of G_{-N}^perp",
    );
    count.record(
        e.words.len() == expect,
        (e.words.len() as f64 - expect as f64).abs(),
        || format!("{} cosets, expected {expect}", e.words.len()),
    );
    let mut prefixes = Check::new(
        "elementary.prefixes",
        "the prefixes (beta_-N..beta_-1) are pairwise distinct, so they tile G_0^perp",
    );
    let mut seen = BTreeSet::new();
    for w in &e.words {
        let prefix = &w[..e.n as usize];
        let fresh = seen.insert(prefix.to_vec());
        prefixes.record(fresh, 0.0, || {
            format!("prefix {} repeated", word_string(prefix, e.p))
        });
    }
    vec![count, prefixes]
}

/// `E` from the window walk: a word belongs to `E` iff every `(N+1)`-window
/// of the root-side string `0^N β_{M-1} … β_{-N}` is a nonzero mask index.
pub fn support_set(mask: &Mask) -> Result<ElementarySet> {
    let check = mask.check();
    if !check.passed {
        return Err(Error::MaskNotOrthogonal(check.to_string()));
    }
    let p = mask.p();
    let n = mask.n() as usize;
    let states = word_count(p, n);
    // BFS over root-side N-words; the self-loop at 0^N is the zero extension
    let mut depth_path: Vec<Option<Vec<u32>>> = vec![None; states];
    depth_path[0] = Some(Vec::new());
    let mut reached = 1usize;
    let mut queue = VecDeque::from([vec![0u32; n]]);
    while let Some(state) = queue.pop_front() {
        let path = depth_path[encode(&state, p)].clone().expect("visited");
        for c in 0..p {
            let mut window: Vec<u32> = state.clone();
            window.push(c);
            let index: Vec<u32> = window.iter().rev().copied().collect();
            if mask.at_word(&index).is_zero() {
                continue;
            }
            let next = window[1..].to_vec();
            let slot = encode(&next, p);
            if depth_path[slot].is_some() {
                continue;
            }
            let mut q = path.clone();
            q.push(c);
            depth_path[slot] = Some(q);
            reached += 1;
            queue.push_back(next);
        }
    }
    if reached != states {
        return Err(Error::MaskNotOrthogonal(format!(
            "the window walk reaches {reached} of {states} words, so |E| != p^N"
        )));
    }
    let paths: Vec<Vec<u32>> = depth_path.into_iter().map(Option::unwrap).collect();
    let max_depth = paths.iter().map(Vec::len).max().unwrap_or(0);
    let m = max_depth.saturating_sub(n) as u32;
    let len = n + m as usize;
    let words = paths
        .iter()
        .map(|path| {
            let mut w = vec![0u32; len];
            for (i, &c) in path.iter().rev().enumerate() {
                w[i] = c;
            }
            w
        })
        .collect();
    let e = ElementarySet::new(p, mask.n(), m, words)?;
    let report = is_elementary(&e);
    if !report.passed {
        return Err(Error::MaskNotOrthogonal(report.to_string()));
    }
    Ok(e)
}

/// Word over `-N..top` evaluated at factor `n` of the infinite product:
/// `m_0(χ𝒜^{-n})` reads the exponents at indices `-N+n ..= n`.
fn factor(mask: &Mask, word: &[u32], shift: usize) -> RootScalar {
    let len = mask.n() as usize + 1;
    let index: Vec<u32> = (0..len)
        .map(|i| word.get(shift + i).copied().unwrap_or(0))
        .collect();
    mask.at_word(&index)
}

/// `Π_{n=0}^{last} m_0(χ𝒜^{-n})` for the coset with the given word.
fn product(mask: &Mask, word: &[u32], last: usize) -> RootScalar {
    let p = mask.p();
    let mut acc = RootScalar::one();
    for shift in 0..=last {
        acc = acc.mul(&factor(mask, word, shift), p);
        if acc.is_zero() {
            break;
        }
    }
    acc
}

/// All cosets of `G_{-N}^⊥` in `G_{M+1}^⊥` surviving the finite intersection
/// `∩_{n=0}^{M+1} X 𝒜^n`, where `X` is the nonzero set of the mask.
/// Fails when a coset survives in the outer shell `G_{M+1}^⊥ \ G_M^⊥`, or
/// when the mask is admissible and the result differs from [`support_set`].
pub fn support_set_bruteforce(mask: &Mask, m: u32) -> Result<ElementarySet> {
    let p = mask.p();
    let n = mask.n() as usize;
    let len = n + m as usize + 1;
    let mut inside = BTreeSet::new();
    let mut outer = Vec::new();
    for w in all_words(p, len) {
        let keep = (0..=(m as usize + 1)).all(|shift| !factor(mask, &w, shift).is_zero());
        if !keep {
            continue;
        }
        if w[len - 1] != 0 {
            outer.push(word_string(&w, p));
        } else {
            inside.insert(w[..len - 1].to_vec());
        }
    }
    if !outer.is_empty() {
        return Err(Error::Consistency(format!(
            "cosets survive in the outer shell: {}",
            outer.join(" ")
        )));
    }
    let brute = ElementarySet::new(p, mask.n(), m, inside)?;
    if let Ok(walk) = support_set(mask) {
        let fitted: BTreeSet<Vec<u32>> = walk
            .words
            .iter()
            .filter(|w| top_index(w, walk.n).is_none_or(|t| t < m as i32))
            .map(|w| {
                let mut v = w.clone();
                v.resize(n + m as usize, 0);
                v
            })
            .collect();
        if walk.m > m || fitted != brute.words {
            return Err(Error::Consistency(format!(
                "window walk and finite intersection disagree (M = {} vs bound {m})",
                walk.m
            )));
        }
    }
    Ok(brute)
}

/// `φ̂` on the cosets of `G_{-N}^⊥` in `G_M^⊥`: the finite product
/// `Π_{n=0}^{M+N} m_0(ζ𝒜^{-n})` on `E`, zero elsewhere.
pub fn phi_hat<S: Scalar>(mask: &Mask, e: &ElementarySet) -> Result<CharTable<S>> {
    let p = mask.p();
    let n = mask.n() as i32;
    let last = (e.m + e.n) as usize;
    let mut values = vec![S::zero(); word_count(p, (e.n + e.m) as usize)];
    for w in &e.words {
        values[encode(w, p)] = product(mask, w, last).to_scalar(p)?;
    }
    CharTable::new(p, -n, e.m as i32, values)
}

/// `φ(x) = p^{-N} Σ_{ζ∈E} φ̂(ζ)(ζ, x)` on `G_{-N}`, constant on `G_M` cosets.
pub fn phi_values<S: Scalar>(hat: &CharTable<S>) -> StepFunction<S> {
    inverse_fourier(hat)
}

/// The refinable function of a mask, on both sides of the Fourier transform.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiTable<S> {
    p: u32,
    n: u32,
    m: u32,
    support: Option<ElementarySet>,
    hat: CharTable<S>,
    values: StepFunction<S>,
}

impl<S: Scalar> PhiTable<S> {
    /// Window walk, product formula, inverse transform, and the check that
    /// transforming back reproduces `φ̂`.
    pub fn from_mask(mask: &Mask) -> Result<Self> {
        let e = support_set(mask)?;
        let hat = phi_hat::<S>(mask, &e)?;
        let values = phi_values(&hat);
        let back = fourier(&values);
        if !back
            .values()
            .iter()
            .zip(hat.values())
            .all(|(a, b)| a.close_to(b, ROUND_TRIP_TOLERANCE))
        {
            return Err(Error::Consistency(format!(
                "Fourier round trip of phi deviates by {:e}",
                back.max_distance(&hat)
            )));
        }
        Ok(PhiTable {
            p: mask.p(),
            n: mask.n(),
            m: e.m,
            support: Some(e),
            hat,
            values,
        })
    }

    /// Truncated product `Π_{n=0}^{M+N} m_0(χ𝒜^{-n})` on every coset of
    /// `G_{-N}^⊥` in `G_M^⊥`, with no admissibility requirement. Used to
    /// examine masks that do not come from an N-valid tree.
    pub fn truncated(mask: &Mask, m: u32) -> Result<Self> {
        let p = mask.p();
        let n = mask.n();
        let len = (n + m) as usize;
        let last = len;
        let values: Vec<S> = all_words(p, len)
            .map(|w| product(mask, &w, last).to_scalar(p))
            .collect::<Result<_>>()?;
        let hat = CharTable::new(p, -(n as i32), m as i32, values)?;
        let values = phi_values(&hat);
        Ok(PhiTable {
            p,
            n,
            m,
            support: None,
            hat,
            values,
        })
    }

    /// Assembles a table from stored parts, e.g. a bundle read from disk.
    pub fn from_parts(
        support: Option<ElementarySet>,
        hat: CharTable<S>,
        values: StepFunction<S>,
    ) -> Result<Self> {
        let (p, lo, hi) = (hat.p(), hat.lo(), hat.hi());
        if lo > 0 || hi < 0 || values.lo() != lo || values.hi() != hi || values.p() != p {
            return Err(Error::Shape(
                "phi and its transform must share the window [-N, M)".into(),
            ));
        }
        Ok(PhiTable {
            p,
            n: (-lo) as u32,
            m: hi as u32,
            support,
            hat,
            values,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn support(&self) -> Option<&ElementarySet> {
        self.support.as_ref()
    }

    pub fn hat(&self) -> &CharTable<S> {
        &self.hat
    }

    pub fn values(&self) -> &StepFunction<S> {
        &self.values
    }

    /// `φ̂` at a word over `-N..M+k`; zero outside `G_M^⊥`.
    fn hat_at_extended(&self, word: &[u32]) -> S {
        let len = (self.n + self.m) as usize;
        if word[len..].iter().any(|&d| d != 0) {
            S::zero()
        } else {
            self.hat.at_word(&word[..len]).clone()
        }
    }

    pub fn params(&self) -> GroupParams {
        let (lo, hi) = crate::group::DEFAULT_WINDOW;
        GroupParams::with_window(self.p, lo, hi).expect("prime p")
    }
}

/// `x ↦ f(𝒜x ∸ h)`.
pub fn dilated_shift<S: Scalar>(f: &StepFunction<S>, h: &GroupElement) -> Result<StepFunction<S>> {
    Ok(f.translate(h)?.compose_dilation())
}

/// Elements of `H_0^{(s)}`: digits at indices `-1 … -s`, in word order
/// over `[-s, 0)`.
pub fn shifts(params: GroupParams, s: u32) -> Vec<GroupElement> {
    all_words(params.p(), s as usize)
        .map(|w| GroupElement::from_word(params, -(s as i32), &w).expect("digits below p"))
        .collect()
}

fn delta<S: Scalar>(same: bool) -> S {
    if same {
        S::one()
    } else {
        S::zero()
    }
}

/// Gram entries `⟨f_i, f_j⟩` against `δ_{ij}`, filed under the check chosen
/// by `classify(i, j)`; `None` skips the pair.
pub(crate) fn gram_checks<S: Scalar>(
    functions: &[StepFunction<S>],
    labels: &[String],
    checks: &mut [Check],
    classify: impl Fn(usize, usize) -> Option<usize> + Sync,
    tol: f64,
) -> Result<()> {
    let count = functions.len();
    let partial: Vec<Vec<Check>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut local: Vec<Check> = checks
                .iter()
                .map(|c| Check::new(c.name.clone(), c.condition.clone()))
                .collect();
            for j in 0..count {
                let Some(slot) = classify(i, j) else { continue };
                let value = functions[i].inner(&functions[j])?;
                let expect = delta::<S>(i == j);
                let dev = value.distance(&expect);
                let ok = value.close_to(&expect, tol);
                local[slot].record(ok, dev, || {
                    format!("<{}, {}> = {:?}", labels[i], labels[j], value.to_c64())
                });
            }
            Ok(local)
        })
        .collect::<Result<_>>()?;
    for local in partial {
        for (c, l) in checks.iter_mut().zip(local) {
            c.absorb(l);
        }
    }
    Ok(())
}

/// Fourier-side row sums and the time-side Gram matrix of the shifts
/// `φ(· ∸ h)`, `h ∈ H_0^{(s)}`.
pub fn verify_shift_orthonormality<S: Scalar>(
    ph: &PhiTable<S>,
    s: u32,
    tol: f64,
) -> Result<Report> {
    let p = ph.p;
    let n = ph.n as usize;
    let m = ph.m as usize;
    let mut report = Report::new("shift orthonormality");

    let mut rows = Check::new(
        "orthonormality.rows",
        "for every (alpha_-N..alpha_-1): sum over (alpha_0..alpha_M-1) of |phi_hat|^2 = 1",
    );
    for row in all_words(p, n) {
        let mut sum = S::zero();
        for tail in all_words(p, m) {
            let mut w = row.clone();
            w.extend(tail);
            sum = sum + ph.hat.at_word(&w).norm_sqr();
        }
        let dev = sum.distance(&S::one());
        rows.record(sum.close_to(&S::one(), tol), dev, || {
            format!("row {}: sum = {:?}", word_string(&row, p), sum.to_c64())
        });
    }
    report.push(rows);

    let params = ph.params();
    let hs = shifts(params, s);
    let lo = -(ph.n as i32) - s as i32;
    let base = ph.values.resample(lo, ph.values.hi())?;
    let functions: Vec<StepFunction<S>> = hs
        .iter()
        .map(|h| base.translate(h))
        .collect::<Result<_>>()?;
    let labels: Vec<String> = hs.iter().map(|h| format!("phi(.-{h:?})")).collect();
    let mut gram = [Check::new(
        "orthonormality.gram",
        format!("<phi(.-h), phi(.-g)> = delta_hg for h, g in H_0^({s})"),
    )];
    gram_checks(&functions, &labels, &mut gram, |_, _| Some(0), tol)?;
    let [gram] = gram;
    report.push(gram);
    Ok(report)
}

/// Fourier-side refinement, the vanishing product on the outer shell, and
/// the time-side refinement equation.
pub fn verify_refinement<S: Scalar>(
    ph: &PhiTable<S>,
    mask: &Mask,
    beta: &CoefficientTable<S>,
    tol: f64,
) -> Result<Report> {
    let p = ph.p;
    if mask.p() != p || beta.p() != p {
        return Err(Error::ParamMismatch(p, mask.p()));
    }
    if mask.n() != ph.n || beta.n() != ph.n {
        return Err(Error::Shape(
            "mask, coefficients and phi disagree on N".into(),
        ));
    }
    let n = ph.n as usize;
    let m = ph.m as usize;
    let len = n + m + 1;
    let mut report = Report::new("refinement");

    let mut fourier_side = Check::new(
        "refinement.fourier",
        "phi_hat(chi) = m_0(chi) phi_hat(chi A^-1) on every coset of G_-N^perp in G_M+1^perp",
    );
    let mut shell = Check::new(
        "refinement.shell",
        "prod_n m_0(chi A^-n) = 0 on the shell G_M+1^perp minus G_M^perp",
    );
    for w in all_words(p, len) {
        let lhs = ph.hat_at_extended(&w);
        let mut shifted: Vec<u32> = w[1..].to_vec();
        shifted.push(0);
        let m0 = mask.at_word(&w[..n + 1]).to_scalar::<S>(p)?;
        let rhs = m0 * ph.hat_at_extended(&shifted);
        fourier_side.record(lhs.close_to(&rhs, tol), lhs.distance(&rhs), || {
            format!(
                "coset {}: {:?} vs {:?}",
                word_string(&w, p),
                lhs.to_c64(),
                rhs.to_c64()
            )
        });
        if w[len - 1] != 0 {
            let prod = product(mask, &w, n + m);
            shell.record(prod.is_zero(), prod.abs_sqr() as f64, || {
                format!("coset {}: product is nonzero", word_string(&w, p))
            });
        }
    }
    report.push(fourier_side);
    report.push(shell);

    let mut time = Check::new(
        "refinement.time",
        "phi(x) = sum_h beta_h phi(A x - h) on the value grid",
    );
    let rebuilt = synthesize_refinement(&ph.values, beta, ph.params())?;
    let target = ph.values.resample(ph.values.lo(), ph.values.hi() + 1)?;
    let (a, b) = target.align(&rebuilt)?;
    for ((word, x), (_, y)) in a.entries().zip(b.entries()) {
        time.record(x.close_to(y, tol), x.distance(y), || {
            format!(
                "x = {}: {:?} vs {:?}",
                word_string(&word, p),
                x.to_c64(),
                y.to_c64()
            )
        });
    }
    report.push(time);
    Ok(report)
}

/// `Σ_h β_h f(𝒜x ∸ h)`.
pub fn synthesize_refinement<S: Scalar>(
    f: &StepFunction<S>,
    beta: &CoefficientTable<S>,
    params: GroupParams,
) -> Result<StepFunction<S>> {
    let lo = f.lo().min(-(beta.n() as i32) - 1);
    let base = f.resample(lo, f.hi())?;
    let mut acc = StepFunction::zeros(f.p(), lo + 1, f.hi() + 1);
    for (h, b) in beta.shifts(params)? {
        if b.is_zero() {
            continue;
        }
        acc = acc.add_scaled(&b, &dilated_shift(&base, &h)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::Cyclotomic;
    use crate::group::integrate_char_over_coset;
    use crate::mask::solve_coefficients;
    use crate::tree::fixtures::{fig1, fig1_with_repeat, haar};
    use num_complex::Complex64;
    use num_traits::{One, Zero};

    fn fig1_mask() -> Mask {
        Mask::from_tree(&fig1(), None).unwrap()
    }

    /// Words listed top index first, as `(β_1, β_0, β_-1, β_-2)`.
    fn from_top_first(list: &[[u32; 4]]) -> BTreeSet<Vec<u32>> {
        list.iter()
            .map(|w| w.iter().rev().copied().collect())
            .collect()
    }

    #[test]
    fn fig1_support() {
        let e = support_set(&fig1_mask()).unwrap();
        assert_eq!(e.m(), 2);
        assert_eq!(e.m(), fig1().height() as u32 - 4);
        let expect = from_top_first(&[
            [0, 0, 0, 0],
            [0, 0, 0, 2],
            [0, 0, 2, 0],
            [0, 0, 2, 1],
            [0, 0, 2, 2],
            [0, 2, 0, 1],
            [0, 2, 1, 0],
            [2, 0, 1, 1],
            [2, 0, 1, 2],
        ]);
        assert_eq!(e.words(), &expect);
        let r = is_elementary(&e);
        assert!(r.passed, "{r}");
        assert_eq!(r.check("elementary.shells").unwrap().evaluated, 4);
        assert_eq!(support_set_bruteforce(&fig1_mask(), 2).unwrap(), e);
    }

    #[test]
    fn haar_support() {
        let m = Mask::from_tree(&haar(3), None).unwrap();
        let e = support_set(&m).unwrap();
        assert_eq!(e.m(), 0);
        let expect: BTreeSet<Vec<u32>> = [vec![0], vec![1], vec![2]].into_iter().collect();
        assert_eq!(e.words(), &expect);
        let brute = support_set_bruteforce(&m, 1).unwrap();
        assert_eq!(brute.len(), 3);
        assert!(brute.words().contains(&vec![0, 0]));
    }

    #[test]
    fn delta_mask_fails_walk() {
        assert!(matches!(
            support_set(&Mask::delta(3, 1)),
            Err(Error::MaskNotOrthogonal(_))
        ));
        let brute = support_set_bruteforce(&Mask::delta(3, 1), 1).unwrap();
        assert_eq!(brute.len(), 1);
    }

    #[test]
    fn elementary_violations() {
        let e = support_set(&fig1_mask()).unwrap();
        let mut words = e.words().clone();
        words.remove(&vec![2, 1, 0, 0]);
        words.insert(vec![2, 1, 1, 0]);
        let r = is_elementary(&ElementarySet::new(3, 2, 2, words).unwrap());
        assert!(!r.check("elementary.prefixes").unwrap().passed);
        let mut words = e.words().clone();
        words.retain(|w| w[3] == 0);
        let r = is_elementary(&ElementarySet::new(3, 2, 2, words).unwrap());
        assert!(!r.check("elementary.shells").unwrap().passed);
        assert!(!r.check("elementary.count").unwrap().passed);
    }

    #[test]
    fn fig1_phi() {
        let ph = PhiTable::<Cyclotomic>::from_mask(&fig1_mask()).unwrap();
        assert_eq!(ph.values().values().len(), 81);
        for w in ph.support().unwrap().words() {
            assert_eq!(*ph.hat().at_word(w), Cyclotomic::one());
        }
        assert_eq!(ph.values().norm_sqr(), Cyclotomic::one());
        assert_eq!(*ph.values().at_word(&[0, 0, 0, 0]), Cyclotomic::one());
    }

    // Oracle: φ(x) = Σ_ζ φ̂(ζ) p^{-N} (ζ, x), evaluated pointwise with the
    // closed-form coset integrals of the group module.
    #[test]
    fn phi_matches_coset_integrals() {
        let m = fig1_mask();
        let ph = PhiTable::<Complex64>::from_mask(&m).unwrap();
        let params = ph.params();
        for (word, v) in ph.values().entries() {
            let x = GroupElement::from_word(params, -2, &word).unwrap();
            let mut acc = Complex64::zero();
            for coset in ph.support().unwrap().cosets() {
                let rep = coset.representative(params).unwrap();
                let c = integrate_char_over_coset(-2, &rep, &x).unwrap();
                acc += c.to_scalar::<Complex64>(3).unwrap() * ph.hat().at_coset(&coset);
            }
            assert!((acc - v).norm() < 1e-12, "{word:?}");
        }
        let outside = GroupElement::basis(params, -3).unwrap();
        assert!(ph.values().eval(&outside).is_zero());
    }

    #[test]
    fn haar_phi_is_indicator() {
        let m = Mask::from_tree(&haar(3), None).unwrap();
        let ph = PhiTable::<Cyclotomic>::from_mask(&m).unwrap();
        assert_eq!(ph.values().lo(), -1);
        assert_eq!(ph.values().hi(), 0);
        let params = ph.params();
        assert_eq!(
            ph.values().eval(&GroupElement::zero(params)),
            Cyclotomic::one()
        );
        assert!(ph
            .values()
            .eval(&GroupElement::basis(params, -1).unwrap())
            .is_zero());
        assert!(ph
            .values()
            .eval(&GroupElement::basis(params, 3).unwrap())
            .is_one());
    }

    #[test]
    fn fig1_orthonormality_exact() {
        let ph = PhiTable::<Cyclotomic>::from_mask(&fig1_mask()).unwrap();
        let r = verify_shift_orthonormality(&ph, 3, 0.0).unwrap();
        assert!(r.passed, "{r}");
        assert_eq!(r.check("orthonormality.gram").unwrap().evaluated, 27 * 27);
        assert_eq!(r.max_deviation(), 0.0);
    }

    #[test]
    fn fig1_refinement_exact() {
        let m = fig1_mask();
        let ph = PhiTable::<Cyclotomic>::from_mask(&m).unwrap();
        let beta = solve_coefficients::<Cyclotomic>(&m).unwrap();
        let r = verify_refinement(&ph, &m, &beta, 0.0).unwrap();
        assert!(r.passed, "{r}");
        assert_eq!(r.check("refinement.fourier").unwrap().evaluated, 243);
        assert_eq!(r.check("refinement.shell").unwrap().evaluated, 162);
        let mut broken = beta.clone();
        broken.set(&[1, 0, 2], Cyclotomic::from_ratio(1, 2));
        let r = verify_refinement(&ph, &m, &broken, 0.0).unwrap();
        assert!(!r.check("refinement.time").unwrap().passed);
        assert!(r.check("refinement.fourier").unwrap().passed);
    }

    #[test]
    fn haar_refinement_closed_form() {
        let m = Mask::from_tree(&haar(3), None).unwrap();
        let ph = PhiTable::<Cyclotomic>::from_mask(&m).unwrap();
        let params = ph.params();
        let mut sum = StepFunction::<Cyclotomic>::zeros(3, -1, 1);
        for a in 0..3 {
            let h = GroupElement::from_digits(params, [(-1, a)]).unwrap();
            sum = sum
                .add_scaled(&Cyclotomic::one(), &dilated_shift(ph.values(), &h).unwrap())
                .unwrap();
        }
        assert!(sum.close_to(ph.values(), 0.0).unwrap());
        let beta = solve_coefficients::<Cyclotomic>(&m).unwrap();
        assert!(verify_refinement(&ph, &m, &beta, 0.0).unwrap().passed);
        assert!(verify_shift_orthonormality(&ph, 2, 0.0).unwrap().passed);
    }

    #[test]
    fn duplicated_window_breaks_orthonormality() {
        let t = fig1_with_repeat();
        let m = Mask::from_windows(3, 2, &t.raw_windows()).unwrap();
        assert!(!m.check().passed);
        let ph = PhiTable::<Cyclotomic>::truncated(&m, t.height() as u32 - 4).unwrap();
        let r = verify_shift_orthonormality(&ph, 3, 0.0).unwrap();
        assert!(!r.check("orthonormality.rows").unwrap().passed);
        assert!(!r.check("orthonormality.gram").unwrap().passed);
        let num = PhiTable::<Complex64>::truncated(&m, 2).unwrap();
        let r = verify_shift_orthonormality(&num, 3, GRAM_TOLERANCE).unwrap();
        assert!(r.max_deviation() > 0.1);
    }
}
