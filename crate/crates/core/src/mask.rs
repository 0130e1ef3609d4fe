//! Masks `m_0` with values in `{0} ∪ S^1`, constant on cosets of
//! `G_{-N}^⊥` and periodic in the exponents at indices `>= 1`.
//!
//! A mask is a table `λ` over `Z_p^{N+1}` indexed by `(α_{-N}, …, α_0)`
//! (word order, `α_{-N}` first). A tree window read root side first,
//! `(w_0, …, w_N)`, lands at index `(w_N, …, w_0)`.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{all_words, chrestenson, decode, encode, word_count, word_string};
use crate::group::{Character, GroupElement, GroupParams, RootScalar, PHASE_TOLERANCE};
use crate::io::{complex_cells, parse_complex, read_csv, write_csv};
use crate::report::{Check, Report};
use crate::scalar::{p_pow, RootTable, Scalar};
use crate::tree::{PTree, Window};

/// Entry-wise tolerance for round trips in complex arithmetic.
pub const ROUND_TRIP_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mask {
    p: u32,
    #[serde(rename = "N")]
    n: u32,
    lambda: Vec<RootScalar>,
}

fn reversed(w: &[u32]) -> Vec<u32> {
    w.iter().rev().copied().collect()
}

impl Mask {
    /// Shape check only; see [`Mask::check`] for the mask conditions.
    pub fn from_table(p: u32, n: u32, lambda: Vec<RootScalar>) -> Result<Self> {
        let expect = word_count(p, n as usize + 1);
        if lambda.len() != expect {
            return Err(Error::Shape(format!(
                "mask over Z_{p}^{} needs {expect} entries, got {}",
                n + 1,
                lambda.len()
            )));
        }
        for v in &lambda {
            match v {
                RootScalar::Root(e) if *e >= p => {
                    return Err(Error::Mask(format!(
                        "root exponent {e} is not below p = {p}"
                    )))
                }
                RootScalar::Phase(z) if (z.norm() - 1.0).abs() > PHASE_TOLERANCE => {
                    return Err(Error::Mask(format!("phase {z} is not unimodular")))
                }
                _ => {}
            }
        }
        Ok(Mask { p, n, lambda })
    }

    /// Only `λ_{0,…,0} = 1`.
    pub fn delta(p: u32, n: u32) -> Self {
        let mut lambda = vec![RootScalar::Zero; word_count(p, n as usize + 1)];
        lambda[0] = RootScalar::one();
        Mask { p, n, lambda }
    }

    /// Value 1 on every window of `windows` (root side first), no checks on
    /// the window set beyond shape.
    pub fn from_windows(p: u32, n: u32, windows: &BTreeSet<Window>) -> Result<Self> {
        let mut lambda = vec![RootScalar::Zero; word_count(p, n as usize + 1)];
        for w in windows {
            if w.0.len() != n as usize + 1 || w.0.iter().any(|&l| l >= p) {
                return Err(Error::Shape(format!(
                    "window {w} does not fit p = {p}, N = {n}"
                )));
            }
            lambda[encode(&reversed(&w.0), p)] = RootScalar::one();
        }
        Ok(Mask { p, n, lambda })
    }

    /// The mask generated by an N-valid tree. `phases` may assign a
    /// unimodular value to allowed windows; unlisted windows get 1 and the
    /// zero window must stay 1.
    pub fn from_tree(tree: &PTree, phases: Option<&BTreeMap<Window, RootScalar>>) -> Result<Self> {
        let report = tree.validate();
        if !report.valid {
            return Err(Error::InvalidTree(report.to_string()));
        }
        let windows = tree.allowed_windows()?;
        let mut mask = Mask::from_windows(tree.p(), tree.n(), &windows)?;
        if let Some(phases) = phases {
            for (w, v) in phases {
                if !windows.contains(w) {
                    return Err(Error::Mask(format!(
                        "phase given for {w}, which is not an allowed window"
                    )));
                }
                if v.is_zero() {
                    return Err(Error::Mask(format!("phase for {w} is zero")));
                }
                let v = normalise_phase(*v, tree.p())?;
                if w.0.iter().all(|&l| l == 0) && v != RootScalar::one() {
                    return Err(Error::Mask("the all-zero window must carry phase 1".into()));
                }
                mask.lambda[encode(&reversed(&w.0), tree.p())] = v;
            }
        }
        Ok(mask)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn lambda(&self) -> &[RootScalar] {
        &self.lambda
    }

    pub fn at_word(&self, index: &[u32]) -> RootScalar {
        self.lambda[encode(index, self.p)]
    }

    pub fn at_index(&self, i: usize) -> RootScalar {
        self.lambda[i]
    }

    /// Every entry is zero or a p-th root of unity.
    pub fn is_exact(&self) -> bool {
        self.lambda.iter().all(RootScalar::is_exact)
    }

    pub fn nonzero_count(&self) -> usize {
        self.lambda.iter().filter(|v| !v.is_zero()).count()
    }

    /// Nonzero indices as tree windows (root side first).
    pub fn support_windows(&self) -> BTreeSet<Window> {
        let len = self.n as usize + 1;
        self.lambda
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, _)| Window(reversed(&decode(i, self.p, len))))
            .collect()
    }

    /// `m_0(χ)`: exponents below `-N` and from `1` up are ignored.
    pub fn value(&self, chi: &Character) -> RootScalar {
        self.at_word(&chi.word(-(self.n as i32), 1))
    }

    /// `m_l(χ) = m_0(χ r_0^{-l})`, as a table.
    pub fn shifted(&self, l: u32) -> Mask {
        let len = self.n as usize + 1;
        let lambda = (0..self.lambda.len())
            .map(|i| {
                let mut w = decode(i, self.p, len);
                w[len - 1] = (w[len - 1] + self.p - l % self.p) % self.p;
                self.at_word(&w)
            })
            .collect();
        Mask {
            p: self.p,
            n: self.n,
            lambda,
        }
    }

    /// The masks `m_1, …, m_{p-1}`; asserts `m_l m_k = 0` for `l != k`.
    pub fn wavelet_shift_masks(&self) -> Result<Vec<Mask>> {
        let all: Vec<Mask> = (0..self.p).map(|l| self.shifted(l)).collect();
        for i in 0..self.lambda.len() {
            let hits: Vec<u32> = (0..self.p)
                .filter(|&l| !all[l as usize].lambda[i].is_zero())
                .collect();
            if hits.len() > 1 {
                let w = decode(i, self.p, self.n as usize + 1);
                return Err(Error::Mask(format!(
                    "shifted masks {hits:?} overlap at index {}",
                    word_string(&w, self.p)
                )));
            }
        }
        Ok(all.into_iter().skip(1).collect())
    }

    /// `λ_{0…0} = 1`, unimodular nonzero values, one nonzero entry per row.
    pub fn check(&self) -> Report {
        let p = self.p;
        let len = self.n as usize + 1;
        let mut report = Report::new("mask");
        let mut origin = Check::new("mask.origin", "lambda_{0,...,0} = 1");
        let dev = (self.lambda[0].to_c64(p) - Complex64::new(1.0, 0.0)).norm();
        origin.record(
            self.lambda[0] == RootScalar::one() || dev <= PHASE_TOLERANCE,
            dev,
            || format!("lambda_0 = {:?}", self.lambda[0]),
        );
        report.push(origin);

        let mut unimodular = Check::new("mask.unimodular", "|lambda| = 1 on every nonzero entry");
        for (i, v) in self.lambda.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let dev = (v.to_c64(p).norm() - 1.0).abs();
            unimodular.record(v.is_exact() || dev <= PHASE_TOLERANCE, dev, || {
                format!(
                    "index {}: |lambda| = {}",
                    word_string(&decode(i, p, len), p),
                    v.to_c64(p).norm()
                )
            });
        }
        report.push(unimodular);

        let mut rows = Check::new(
            "mask.rows",
            "sum over alpha_0 of |lambda_{alpha_-N..alpha_-1, alpha_0}|^2 = 1 for every row",
        );
        for row in all_words(p, len - 1) {
            let base = encode(&row, p) * p as usize;
            let count: u32 = (0..p as usize)
                .map(|a| self.lambda[base + a].abs_sqr())
                .sum();
            rows.record(count == 1, (count as f64 - 1.0).abs(), || {
                format!("row {}: {count} nonzero entries", word_string(&row, p))
            });
        }
        report.push(rows);
        report
    }

    pub fn to_csv(&self) -> String {
        let len = self.n as usize + 1;
        let mut header: Vec<String> = (0..len)
            .map(|i| format!("alpha_{}", i as i32 - self.n as i32))
            .collect();
        header.push("re".into());
        header.push("im".into());
        let rows = self.lambda.iter().enumerate().map(|(i, v)| {
            let mut cells: Vec<String> =
                decode(i, self.p, len).iter().map(u32::to_string).collect();
            cells.extend(complex_cells(v.to_c64(self.p)));
            cells
        });
        write_csv(&header, rows)
    }

    /// Reads the CSV layout of [`Mask::to_csv`]; values that are p-th roots
    /// of unity within tolerance are stored exactly.
    pub fn from_csv(p: u32, text: &str) -> Result<Self> {
        let (header, rows) = read_csv(text)?;
        if header.len() < 3 {
            return Err(Error::Parse(
                "mask CSV needs alpha columns plus re,im".into(),
            ));
        }
        let len = header.len() - 2;
        let n = (len - 1) as u32;
        let mut lambda = vec![None; word_count(p, len)];
        for row in rows {
            let word: Vec<u32> = row[..len]
                .iter()
                .map(|c| {
                    c.trim()
                        .parse::<u32>()
                        .map_err(|e| Error::Parse(format!("digit `{c}`: {e}")))
                })
                .collect::<Result<_>>()?;
            if word.iter().any(|&d| d >= p) {
                return Err(Error::Parse(format!("index {word:?} has a digit >= p")));
            }
            let z = parse_complex(&row[len], &row[len + 1])?;
            lambda[encode(&word, p)] = Some(snap_root(z, p)?);
        }
        let lambda: Option<Vec<RootScalar>> = lambda.into_iter().collect();
        let lambda =
            lambda.ok_or_else(|| Error::Parse("mask CSV does not list every index".into()))?;
        Mask::from_table(p, n, lambda)
    }
}

/// Stores values that equal a p-th root of unity exactly.
pub fn snap_root(z: Complex64, p: u32) -> Result<RootScalar> {
    if z.norm() <= PHASE_TOLERANCE {
        return Ok(RootScalar::Zero);
    }
    for e in 0..p {
        if (z - RootScalar::Root(e).to_c64(p)).norm() <= PHASE_TOLERANCE {
            return Ok(RootScalar::Root(e));
        }
    }
    RootScalar::phase(z)
}

fn normalise_phase(v: RootScalar, p: u32) -> Result<RootScalar> {
    match v {
        RootScalar::Phase(z) => snap_root(z, p),
        RootScalar::Root(e) => Ok(RootScalar::Root(e % p)),
        RootScalar::Zero => Ok(RootScalar::Zero),
    }
}

/// Refinement coefficients `β_h`, `h ∈ H_0^{(N+1)}`, indexed by the digit
/// word `(a_{-1}, …, a_{-N-1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable<S> {
    p: u32,
    n: u32,
    beta: Vec<S>,
}

impl<S: Scalar> CoefficientTable<S> {
    pub fn new(p: u32, n: u32, beta: Vec<S>) -> Result<Self> {
        let expect = word_count(p, n as usize + 1);
        if beta.len() != expect {
            return Err(Error::Shape(format!(
                "coefficient table needs {expect} entries, got {}",
                beta.len()
            )));
        }
        Ok(CoefficientTable { p, n, beta })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn values(&self) -> &[S] {
        &self.beta
    }

    pub fn at_word(&self, word: &[u32]) -> &S {
        &self.beta[encode(word, self.p)]
    }

    pub fn set(&mut self, word: &[u32], value: S) {
        let i = encode(word, self.p);
        self.beta[i] = value;
    }

    /// `(h, β_h)` with `h` as a group element.
    pub fn shifts(&self, params: GroupParams) -> Result<Vec<(GroupElement, S)>> {
        let len = self.n as usize + 1;
        self.beta
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let word = decode(i, self.p, len);
                let h = GroupElement::from_digits(
                    params,
                    word.iter().enumerate().map(|(k, &d)| (-(k as i32) - 1, d)),
                )?;
                Ok((h, b.clone()))
            })
            .collect()
    }

    /// `Σ_h |β_h|^2`.
    pub fn energy(&self) -> S {
        self.beta
            .iter()
            .fold(S::zero(), |acc, b| acc + b.norm_sqr())
    }

    /// `β_h^{(l)} = β_h exp(2πi l a_{-1} / p)`.
    pub fn modulated(&self, l: u32) -> CoefficientTable<S> {
        let roots = RootTable::<S>::new(self.p);
        let len = self.n as usize + 1;
        let beta = self
            .beta
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let a1 = decode(i, self.p, len)[0];
                b.clone() * roots.get(u64::from(l) * u64::from(a1)).clone()
            })
            .collect();
        CoefficientTable {
            p: self.p,
            n: self.n,
            beta,
        }
    }

    /// `m(χ) = (1/p) Σ_h β_h conj((χ, 𝒜^{-1} h))` as a table in mask order.
    pub fn mask_values(&self) -> Vec<S> {
        let p = self.p;
        let len = self.n as usize + 1;
        // position i pairs a_{-i-1} with α_{-i}
        let mut values = self.beta.clone();
        chrestenson(&mut values, p, true);
        let inv_p = p_pow::<S>(p, -1);
        (0..values.len())
            .map(|i| {
                let idx = decode(i, p, len);
                values[encode(&reversed(&idx), p)].clone() * inv_p.clone()
            })
            .collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> CoefficientTable<T> {
        CoefficientTable {
            p: self.p,
            n: self.n,
            beta: self.beta.iter().map(f).collect(),
        }
    }

    pub fn max_distance(&self, other: &Self) -> f64 {
        self.beta
            .iter()
            .zip(&other.beta)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let len = self.n as usize + 1;
        let mut header: Vec<String> = (1..=len).map(|k| format!("a_-{k}")).collect();
        header.push("re".into());
        header.push("im".into());
        let rows = self.beta.iter().enumerate().map(|(i, b)| {
            let mut cells: Vec<String> =
                decode(i, self.p, len).iter().map(u32::to_string).collect();
            cells.extend(complex_cells(b.to_c64()));
            cells
        });
        write_csv(&header, rows)
    }
}

impl CoefficientTable<Complex64> {
    pub fn from_csv(p: u32, text: &str) -> Result<Self> {
        let (header, rows) = read_csv(text)?;
        if header.len() < 3 {
            return Err(Error::Parse(
                "coefficient CSV needs digit columns plus re,im".into(),
            ));
        }
        let len = header.len() - 2;
        let mut beta = vec![None; word_count(p, len)];
        for row in rows {
            let word: Vec<u32> = row[..len]
                .iter()
                .map(|c| {
                    c.trim()
                        .parse::<u32>()
                        .map_err(|e| Error::Parse(format!("digit `{c}`: {e}")))
                })
                .collect::<Result<_>>()?;
            if word.iter().any(|&d| d >= p) {
                return Err(Error::Parse(format!("shift {word:?} has a digit >= p")));
            }
            beta[encode(&word, p)] = Some(parse_complex(&row[len], &row[len + 1])?);
        }
        let beta: Option<Vec<Complex64>> = beta.into_iter().collect();
        let beta =
            beta.ok_or_else(|| Error::Parse("coefficient CSV does not list every shift".into()))?;
        CoefficientTable::new(p, (len - 1) as u32, beta)
    }
}

/// Solves `m_0(χ_k) = (1/p) Σ_j β_j conj((χ_k, 𝒜^{-1} h_j))` by character
/// orthogonality, `β_j = p^{-N} Σ_k m_0(χ_k) (χ_k, 𝒜^{-1} h_j)`, and checks
/// that the solution reproduces the mask.
pub fn solve_coefficients<S: Scalar>(mask: &Mask) -> Result<CoefficientTable<S>> {
    let p = mask.p;
    let len = mask.n as usize + 1;
    let size = word_count(p, len);
    let roots = RootTable::<S>::new(p);
    let scale = p_pow::<S>(p, -(mask.n as i32));
    let support: Vec<(Vec<u32>, RootScalar)> = mask
        .lambda
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(i, v)| (reversed(&decode(i, p, len)), *v))
        .collect();
    let mut exact_values = Vec::with_capacity(support.len());
    for (_, v) in &support {
        exact_values.push(match v {
            RootScalar::Root(e) => Some(*e),
            _ => None,
        });
    }
    let all_roots = exact_values.iter().all(Option::is_some);
    let phases: Vec<S> = support
        .iter()
        .map(|(_, v)| v.to_scalar::<S>(p))
        .collect::<Result<_>>()?;

    let mut beta = Vec::with_capacity(size);
    for j in 0..size {
        let a = decode(j, p, len);
        let value = if all_roots {
            // integer bookkeeping of root exponents, one field operation per root
            let mut counts = vec![0i64; p as usize];
            for ((alpha, _), e0) in support.iter().zip(&exact_values) {
                let e: u64 = alpha
                    .iter()
                    .zip(&a)
                    .map(|(&x, &y)| u64::from(x) * u64::from(y))
                    .sum();
                counts[((e + u64::from(e0.unwrap())) % u64::from(p)) as usize] += 1;
            }
            counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .fold(S::zero(), |acc, (e, &c)| {
                    acc + S::from_ratio(c, 1) * roots.get(e as u64).clone()
                })
        } else {
            support
                .iter()
                .zip(&phases)
                .fold(S::zero(), |acc, ((alpha, _), v)| {
                    let e: u64 = alpha
                        .iter()
                        .zip(&a)
                        .map(|(&x, &y)| u64::from(x) * u64::from(y))
                        .sum();
                    acc + v.clone() * roots.get(e).clone()
                })
        };
        beta.push(value * scale.clone());
    }
    let table = CoefficientTable { p, n: mask.n, beta };

    let back = table.mask_values();
    for (i, (got, want)) in back.iter().zip(&mask.lambda).enumerate() {
        let want = want.to_scalar::<S>(p)?;
        if !got.close_to(&want, ROUND_TRIP_TOLERANCE) {
            return Err(Error::Consistency(format!(
                "coefficient round trip differs at mask index {}: {:?} vs {:?}",
                word_string(&decode(i, p, len), p),
                got,
                want
            )));
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::Cyclotomic;
    use crate::tree::enumerate_nvalid;
    use crate::tree::fixtures::{fig1, haar};
    use num_traits::{One, Zero};

    fn w(v: &[u32]) -> Window {
        Window(v.to_vec())
    }

    #[test]
    fn fig1_mask_support() {
        let m = Mask::from_tree(&fig1(), None).unwrap();
        assert_eq!(m.nonzero_count(), 9);
        assert_eq!(m.lambda().len(), 27);
        assert_eq!(m.support_windows(), fig1().allowed_windows().unwrap());
        // window (0,2,1) root side first sits at (α_-2, α_-1, α_0) = (1, 2, 0)
        assert_eq!(m.at_word(&[1, 2, 0]), RootScalar::one());
        assert_eq!(m.at_word(&[0, 2, 1]), RootScalar::Zero);
        assert!(m.check().passed);
    }

    #[test]
    fn haar_mask_is_indicator_of_alpha0_zero() {
        let m = Mask::from_tree(&haar(3), None).unwrap();
        for a1 in 0..3 {
            for a0 in 0..3 {
                assert_eq!(!m.at_word(&[a1, a0]).is_zero(), a0 == 0);
            }
        }
    }

    #[test]
    fn mask_value_reduction() {
        let params = GroupParams::new(3).unwrap();
        let m = Mask::from_tree(&fig1(), None).unwrap();
        let trivial = Character::trivial(params);
        assert_eq!(m.value(&trivial), RootScalar::one());
        let chi = Character::from_exponents(params, [(-2, 1), (-1, 2)]).unwrap();
        let far = chi
            .mul(&Character::rademacher(params, 5).unwrap().pow(2))
            .unwrap();
        let fine = chi
            .mul(&Character::rademacher(params, -5).unwrap())
            .unwrap();
        assert_eq!(m.value(&far), m.value(&chi));
        assert_eq!(m.value(&fine), m.value(&chi));
        assert_eq!(m.value(&chi), RootScalar::one());
    }

    #[test]
    fn check_reports_violations() {
        let mut bad = Mask::from_tree(&haar(3), None).unwrap();
        bad.lambda[encode(&[1, 1], 3)] = RootScalar::one();
        let r = bad.check();
        assert!(!r.passed);
        let rows = r.check("mask.rows").unwrap();
        assert_eq!(rows.failed, 1);
        assert!(rows.failures[0].contains("row 1"));
        bad.lambda[0] = RootScalar::Zero;
        let r = bad.check();
        assert!(!r.check("mask.origin").unwrap().passed);
    }

    #[test]
    fn phases_are_validated() {
        let t = haar(3);
        let mut phases = BTreeMap::new();
        phases.insert(w(&[0, 1]), RootScalar::Root(2));
        let m = Mask::from_tree(&t, Some(&phases)).unwrap();
        assert_eq!(m.at_word(&[1, 0]), RootScalar::Root(2));
        phases.insert(w(&[1, 1]), RootScalar::one());
        assert!(Mask::from_tree(&t, Some(&phases)).is_err());
        let mut zero_phase = BTreeMap::new();
        zero_phase.insert(w(&[0, 0]), RootScalar::Root(1));
        assert!(Mask::from_tree(&t, Some(&zero_phase)).is_err());
    }

    #[test]
    fn delta_mask_coefficients() {
        for (p, n) in [(3u32, 1u32), (3, 2), (2, 2)] {
            let beta = solve_coefficients::<Cyclotomic>(&Mask::delta(p, n)).unwrap();
            for b in beta.values() {
                assert_eq!(*b, p_pow::<Cyclotomic>(p, -(n as i32)));
            }
        }
    }

    #[test]
    fn haar_coefficients() {
        let m = Mask::from_tree(&haar(3), None).unwrap();
        let beta = solve_coefficients::<Cyclotomic>(&m).unwrap();
        for a1 in 0..3 {
            for a2 in 0..3 {
                let expect = if a2 == 0 {
                    Cyclotomic::one()
                } else {
                    Cyclotomic::zero()
                };
                assert_eq!(*beta.at_word(&[a1, a2]), expect);
            }
        }
        assert_eq!(beta.energy(), Cyclotomic::from_ratio(3, 1));
        let l1 = beta.modulated(1);
        for a1 in 0..3 {
            assert_eq!(*l1.at_word(&[a1, 0]), Cyclotomic::root(3, a1));
        }
        assert_eq!(beta.modulated(0), beta);
    }

    // Oracle: the direct double sum over group elements and characters,
    // using the pairing from the group module.
    fn direct_solve(m: &Mask) -> Vec<Complex64> {
        let p = m.p();
        let n = m.n() as i32;
        let params = GroupParams::new(p).unwrap();
        let len = m.n() as usize + 1;
        all_words(p, len)
            .map(|a| {
                let h = GroupElement::from_digits(
                    params,
                    a.iter().enumerate().map(|(k, &d)| (-(k as i32) - 1, d)),
                )
                .unwrap();
                let h_up = h.dilate_inv().unwrap();
                let mut acc = Complex64::new(0.0, 0.0);
                for alpha in all_words(p, len) {
                    let chi = Character::from_word(params, -n, &alpha).unwrap();
                    acc += m.value(&chi).to_c64(p) * chi.pair(&h_up).unwrap().to_c64(p);
                }
                acc / (p as f64).powi(n)
            })
            .collect()
    }

    #[test]
    fn solve_matches_direct_character_sum() {
        for tree in enumerate_nvalid(3, 2, Some(40)).unwrap() {
            let m = Mask::from_tree(&tree, None).unwrap();
            let exact = solve_coefficients::<Cyclotomic>(&m).unwrap();
            let direct = direct_solve(&m);
            for (x, y) in exact.values().iter().zip(&direct) {
                assert!((x.to_c64() - y).norm() < 1e-12);
            }
            assert_eq!(exact.energy(), Cyclotomic::from_ratio(3, 1));
        }
    }

    #[test]
    fn phased_masks_in_both_fields() {
        let mut phases = BTreeMap::new();
        phases.insert(w(&[0, 2, 1]), RootScalar::Root(1));
        phases.insert(
            w(&[2, 0, 1]),
            RootScalar::Phase(Complex64::from_polar(1.0, 0.3)),
        );
        let m = Mask::from_tree(&fig1(), Some(&phases)).unwrap();
        assert!(!m.is_exact());
        assert!(matches!(
            solve_coefficients::<Cyclotomic>(&m),
            Err(Error::NotExact(_))
        ));
        let beta = solve_coefficients::<Complex64>(&m).unwrap();
        assert!((beta.energy() - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        let direct = direct_solve(&m);
        for (x, y) in beta.values().iter().zip(&direct) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn shifted_masks() {
        let m = Mask::from_tree(&haar(3), None).unwrap();
        let shifted = m.wavelet_shift_masks().unwrap();
        assert_eq!(shifted.len(), 2);
        for a1 in 0..3 {
            for a0 in 0..3 {
                assert_eq!(!shifted[0].at_word(&[a1, a0]).is_zero(), a0 == 1);
            }
        }
        assert!(shifted
            .iter()
            .all(|s| s.check().check("mask.rows").unwrap().passed));
        let beta = solve_coefficients::<Cyclotomic>(&m).unwrap();
        for l in 1..3u32 {
            let expect: Vec<Cyclotomic> = m
                .shifted(l)
                .lambda()
                .iter()
                .map(|v| v.to_scalar(3).unwrap())
                .collect();
            assert_eq!(beta.modulated(l).mask_values(), expect);
        }
    }

    #[test]
    fn csv_round_trips() {
        let mut phases = BTreeMap::new();
        phases.insert(w(&[0, 1, 1]), RootScalar::Root(2));
        let m = Mask::from_tree(&fig1(), Some(&phases)).unwrap();
        let csv = m.to_csv();
        assert!(csv.starts_with("alpha_-2,alpha_-1,alpha_0,re,im"));
        assert_eq!(Mask::from_csv(3, &csv).unwrap(), m);
        let beta = solve_coefficients::<Complex64>(&m).unwrap();
        let csv = beta.to_csv();
        assert!(csv.starts_with("a_-1,a_-2,a_-3,re,im"));
        assert!(
            CoefficientTable::from_csv(3, &csv)
                .unwrap()
                .max_distance(&beta)
                < 1e-15
        );
    }
}
