//! Finite multilevel wavelet transform on the window `G_{-R} / G_S`.
//!
//! Coefficients are stored unnormalised, `c_j(g) = ⟨f, φ(𝒜^j · ∸ g)⟩` and
//! `d_{j,l}(g) = ⟨f, ψ_l(𝒜^j · ∸ g)⟩` for levels `j = 0, -1, …`, so the
//! level recursion `c_{j-1}(g) = Σ_h conj(β_h) c_j(𝒜g ∔ h)` stays in the
//! scalar field. The orthonormal coefficients are `p^{j/2} c_j`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{decode, encode, parse_word, word_count, word_string, StepFunction};
use crate::io::{complex_cells, parse_complex, read_csv, write_csv};
use crate::mask::CoefficientTable;
use crate::refinable::PhiTable;
use crate::report::{Check, Report};
use crate::scalar::{p_pow, Scalar};
use crate::wavelet::WaveletBank;
use num_complex::Complex64;

/// Samples of a function supported on `G_{-R}` and constant on `G_S` cosets.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSignal<S> {
    samples: StepFunction<S>,
}

impl<S: Scalar> FiniteSignal<S> {
    pub fn new(p: u32, r: u32, s: u32, samples: Vec<S>) -> Result<Self> {
        Ok(FiniteSignal {
            samples: StepFunction::new(p, -(r as i32), s as i32, samples)?,
        })
    }

    pub fn zeros(p: u32, r: u32, s: u32) -> Self {
        FiniteSignal {
            samples: StepFunction::zeros(p, -(r as i32), s as i32),
        }
    }

    /// Any step function on a window `[-R, S)` with `R, S >= 0`.
    pub fn from_function(f: StepFunction<S>) -> Result<Self> {
        if f.lo() > 0 || f.hi() < 0 {
            return Err(Error::Shape(format!(
                "window [{}, {}) does not contain index 0",
                f.lo(),
                f.hi()
            )));
        }
        Ok(FiniteSignal { samples: f })
    }

    pub fn p(&self) -> u32 {
        self.samples.p()
    }

    pub fn r(&self) -> u32 {
        (-self.samples.lo()) as u32
    }

    pub fn s(&self) -> u32 {
        self.samples.hi() as u32
    }

    pub fn samples(&self) -> &StepFunction<S> {
        &self.samples
    }

    pub fn energy(&self) -> S {
        self.samples.norm_sqr()
    }

    pub fn max_distance(&self, other: &Self) -> Result<f64> {
        self.samples.max_distance(&other.samples)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(FiniteSignal {
            samples: self.samples.add_scaled(&-S::one(), &other.samples)?,
        })
    }

    /// `digits,re,im` rows, digits as a base-p string with index `-R` first.
    pub fn to_csv(&self) -> String {
        let p = self.p();
        let header = ["digits".to_string(), "re".into(), "im".into()];
        let rows = self.samples.entries().map(|(w, v)| {
            let [re, im] = complex_cells(v.to_c64());
            vec![word_string(&w, p), re, im]
        });
        write_csv(&header, rows)
    }
}

impl FiniteSignal<Complex64> {
    pub fn from_csv(p: u32, r: u32, s: u32, text: &str) -> Result<Self> {
        let (header, rows) = read_csv(text)?;
        if header != ["digits", "re", "im"] {
            return Err(Error::Parse(format!(
                "signal CSV header must be digits,re,im, got {}",
                header.join(",")
            )));
        }
        let len = (r + s) as usize;
        let mut values = vec![None; word_count(p, len)];
        for row in rows {
            let word = parse_word(&row[0], p)?;
            if word.len() != len {
                return Err(Error::Parse(format!(
                    "`{}` has {} digits, R + S = {len}",
                    row[0],
                    word.len()
                )));
            }
            values[encode(&word, p)] = Some(parse_complex(&row[1], &row[2])?);
        }
        let values: Option<Vec<Complex64>> = values.into_iter().collect();
        let values =
            values.ok_or_else(|| Error::Parse("signal CSV does not list every sample".into()))?;
        FiniteSignal::new(p, r, s, values)
    }

    /// Infers `R` from the digit count, given `S`.
    pub fn from_csv_auto(p: u32, s: u32, text: &str) -> Result<Self> {
        let (_, rows) = read_csv(text)?;
        let first = rows
            .first()
            .ok_or_else(|| Error::Parse("empty signal CSV".into()))?;
        let len = parse_word(&first[0], p)?.len() as u32;
        if len < s {
            return Err(Error::Parse(format!("{len} digits cannot cover S = {s}")));
        }
        Self::from_csv(p, len - s, s, text)
    }

    /// Random combination of `φ(𝒜· ∸ h)`, `h ∈ H_0^{(R+1)}`: an element of
    /// the truncated `V_1`.
    pub fn random_in_span<G: Rng>(
        phi: &PhiTable<Complex64>,
        r: u32,
        s: u32,
        rng: &mut G,
    ) -> Result<Self> {
        let p = phi.p();
        let coeffs: Vec<Complex64> = (0..word_count(p, r as usize + 1))
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        v1_signal(phi, &coeffs, r, s)
    }

    pub fn random<G: Rng>(p: u32, r: u32, s: u32, rng: &mut G) -> Self {
        let values = (0..word_count(p, (r + s) as usize))
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        FiniteSignal::new(p, r, s, values).expect("shape")
    }
}

/// `Σ_h coeffs[h] φ(𝒜x ∸ h)` for `h ∈ H_0^{(R+1)}` in word order over
/// `[-R-1, 0)`.
pub fn v1_signal<S: Scalar>(
    phi: &PhiTable<S>,
    coeffs: &[S],
    r: u32,
    s: u32,
) -> Result<FiniteSignal<S>> {
    let p = phi.p();
    check_window(phi, r, s, 1)?;
    if coeffs.len() != word_count(p, r as usize + 1) {
        return Err(Error::Shape(format!(
            "V_1 coefficients need p^(R+1) = {} entries",
            word_count(p, r as usize + 1)
        )));
    }
    // φ(𝒜x ∸ h) = φ(𝒜(x ∸ 𝒜^{-1}h)): the dilated φ shifted by 𝒜^{-1}h
    let dilated = phi.values().compose_dilation();
    let layout = Layout::new(p, -(r as i32), s as i32);
    let mut out = vec![S::zero(); word_count(p, (r + s) as usize)];
    layout.spread(&dilated, -(r as i32), 1, coeffs, &mut out)?;
    FiniteSignal::new(p, r, s, out)
}

fn check_window<S: Scalar>(phi: &PhiTable<S>, r: u32, s: u32, levels: u32) -> Result<()> {
    if r < phi.n() + levels {
        return Err(Error::Parameter(format!(
            "window R = {r} must be at least N + levels = {}",
            phi.n() + levels
        )));
    }
    if s < phi.m() + 1 {
        return Err(Error::Parameter(format!(
            "resolution S = {s} must be at least M + 1 = {}",
            phi.m() + 1
        )));
    }
    Ok(())
}

/// Index bookkeeping for `x = y ∔ g` on the sample window `[lo, hi)`.
struct Layout {
    p: u32,
    lo: i32,
    hi: i32,
}

impl Layout {
    fn new(p: u32, lo: i32, hi: i32) -> Self {
        Layout { p, lo, hi }
    }

    /// Sample-window index of `y ∔ g` with `y` a word on `[ylo, ..)` and
    /// `g` a word on `[glo, ..)`, both inside the window; digits below
    /// `res` only (coarse index at resolution `res`).
    fn sum_index(&self, y: &[u32], ylo: i32, g: &[u32], glo: i32, res: i32) -> usize {
        let p = self.p;
        let mut idx = 0usize;
        for k in self.lo..res {
            let a = usize::try_from(k - ylo)
                .ok()
                .and_then(|i| y.get(i))
                .copied()
                .unwrap_or(0);
            let b = usize::try_from(k - glo)
                .ok()
                .and_then(|i| g.get(i))
                .copied()
                .unwrap_or(0);
            idx = idx * p as usize + ((a + b) % p) as usize;
        }
        idx
    }

    /// `out += Σ_g coeffs[g] basis(· ∸ g)` for shift words on `[glo, ghi)`.
    fn spread<S: Scalar>(
        &self,
        basis: &StepFunction<S>,
        glo: i32,
        ghi: i32,
        coeffs: &[S],
        out: &mut [S],
    ) -> Result<()> {
        let p = self.p;
        let res = basis.hi().max(ghi);
        if basis.lo() < self.lo || glo < self.lo || res > self.hi {
            return Err(Error::Shape(
                "basis function does not fit the sample window".into(),
            ));
        }
        let fine = word_count(p, (self.hi - res) as usize);
        let support: Vec<(Vec<u32>, S)> = basis
            .entries()
            .filter(|(_, v)| !v.is_zero())
            .map(|(w, v)| (w, v.clone()))
            .collect();
        let glen = (ghi - glo) as usize;
        for (gi, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let g = decode(gi, p, glen);
            for (y, v) in &support {
                let base = self.sum_index(y, basis.lo(), &g, glo, res) * fine;
                let add = c.clone() * v.clone();
                for slot in &mut out[base..base + fine] {
                    *slot = slot.clone() + add.clone();
                }
            }
        }
        Ok(())
    }

    /// `⟨f, basis(· ∸ g)⟩` for every shift word on `[glo, ghi)`.
    fn correlate<S: Scalar>(
        &self,
        f: &[S],
        basis: &StepFunction<S>,
        glo: i32,
        ghi: i32,
    ) -> Result<Vec<S>> {
        let p = self.p;
        let res = basis.hi().max(ghi);
        if basis.lo() < self.lo || glo < self.lo || res > self.hi {
            return Err(Error::Shape(
                "basis function does not fit the sample window".into(),
            ));
        }
        let fine = word_count(p, (self.hi - res) as usize);
        let coarse: Vec<S> = f
            .chunks(fine)
            .map(|chunk| chunk.iter().fold(S::zero(), |acc, v| acc + v.clone()))
            .collect();
        let support: Vec<(Vec<u32>, S)> = basis
            .entries()
            .filter(|(_, v)| !v.is_zero())
            .map(|(w, v)| (w, v.conj()))
            .collect();
        let weight = p_pow::<S>(p, -self.hi);
        let glen = (ghi - glo) as usize;
        Ok((0..word_count(p, glen))
            .map(|gi| {
                let g = decode(gi, p, glen);
                let acc = support.iter().fold(S::zero(), |acc, (y, v)| {
                    let x = &coarse[self.sum_index(y, basis.lo(), &g, glo, res)];
                    if x.is_zero() {
                        acc
                    } else {
                        acc + x.clone() * v.clone()
                    }
                });
                acc * weight.clone()
            })
            .collect())
    }
}

/// Output of [`analyze`]: details at levels `0, -1, …, -(J-1)` and the
/// approximation at level `-(J-1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis<S> {
    pub p: u32,
    pub r: u32,
    pub s: u32,
    pub levels: u32,
    /// `c_{-(J-1)}(g)`, `g` in word order over `[-(R-J+1), 0)`.
    pub approx: Vec<S>,
    /// `details[j][l-1][g] = d_{-j,l}(g)`, `g` over `[-(R-j), 0)`.
    pub details: Vec<Vec<Vec<S>>>,
}

impl<S: Scalar> Analysis<S> {
    /// `Σ_j p^{j} (Σ|d_j|^2) + p^{-(J-1)} Σ|c_{-(J-1)}|^2`.
    pub fn energy(&self) -> S {
        let sq = |v: &[S]| v.iter().fold(S::zero(), |acc, x| acc + x.norm_sqr());
        let mut total = p_pow::<S>(self.p, -(self.levels as i32 - 1)) * sq(&self.approx);
        for (j, level) in self.details.iter().enumerate() {
            let w = p_pow::<S>(self.p, -(j as i32));
            for d in level {
                total = total + w.clone() * sq(d);
            }
        }
        total
    }

    pub fn max_distance(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (a, b) in self.approx.iter().zip(&other.approx) {
            worst = worst.max(a.distance(b));
        }
        for (x, y) in self.details.iter().zip(&other.details) {
            for (u, v) in x.iter().zip(y) {
                for (a, b) in u.iter().zip(v) {
                    worst = worst.max(a.distance(b));
                }
            }
        }
        worst
    }

    pub fn detail_count(&self) -> usize {
        self.details.iter().flatten().map(Vec::len).sum()
    }
}

impl Analysis<Complex64> {
    /// Orthonormal coefficients `p^{j/2} c_j`, `p^{j/2} d_j`.
    pub fn orthonormal(&self) -> Analysis<Complex64> {
        let scale = |j: i32| (self.p as f64).powf(j as f64 / 2.0);
        let top = scale(-(self.levels as i32 - 1));
        Analysis {
            p: self.p,
            r: self.r,
            s: self.s,
            levels: self.levels,
            approx: self.approx.iter().map(|c| c * top).collect(),
            details: self
                .details
                .iter()
                .enumerate()
                .map(|(j, level)| {
                    let w = scale(-(j as i32));
                    level
                        .iter()
                        .map(|d| d.iter().map(|c| c * w).collect())
                        .collect()
                })
                .collect(),
        }
    }
}

/// One level of the coefficient recursion: from `c_j` on `H_0^{(D)}` to
/// `c_{j-1}` and `d_{j-1,l}` on `H_0^{(D-1)}`.
pub fn analysis_step<S: Scalar>(
    c: &[S],
    beta: &CoefficientTable<S>,
    bank: &WaveletBank<S>,
) -> Result<(Vec<S>, Vec<Vec<S>>)> {
    let p = beta.p();
    let depth = level_depth(c.len(), p)?;
    let hlen = beta.n() as usize + 1;
    if depth < hlen + 1 {
        return Err(Error::Parameter(format!(
            "cannot descend from H_0^({depth}) with N = {}",
            beta.n()
        )));
    }
    let filters: Vec<&CoefficientTable<S>> = std::iter::once(beta).chain(bank.betas()).collect();
    let conj: Vec<Vec<S>> = filters
        .iter()
        .map(|f| f.values().iter().map(Scalar::conj).collect())
        .collect();
    let mut outs: Vec<Vec<S>> = vec![vec![S::zero(); word_count(p, depth - 1)]; filters.len()];
    for gi in 0..word_count(p, depth - 1) {
        let g = decode(gi, p, depth - 1);
        for hi in 0..word_count(p, hlen) {
            let k = child_index(&g, hi, p, depth, hlen);
            let ck = &c[k];
            if ck.is_zero() {
                continue;
            }
            for (out, cf) in outs.iter_mut().zip(&conj) {
                if !cf[hi].is_zero() {
                    out[gi] = out[gi].clone() + cf[hi].clone() * ck.clone();
                }
            }
        }
    }
    let approx = outs.remove(0);
    Ok((approx, outs))
}

/// Inverse of [`analysis_step`] on the span of the level-`j` shifts.
pub fn synthesis_step<S: Scalar>(
    approx: &[S],
    details: &[Vec<S>],
    beta: &CoefficientTable<S>,
    bank: &WaveletBank<S>,
) -> Result<Vec<S>> {
    let p = beta.p();
    let depth = level_depth(approx.len(), p)? + 1;
    let hlen = beta.n() as usize + 1;
    if details.len() != bank.betas().len() || details.iter().any(|d| d.len() != approx.len()) {
        return Err(Error::Shape(
            "detail vectors do not match the approximation".into(),
        ));
    }
    let inv_p = p_pow::<S>(p, -1);
    let filters: Vec<&CoefficientTable<S>> = std::iter::once(beta).chain(bank.betas()).collect();
    let inputs: Vec<&[S]> = std::iter::once(approx)
        .chain(details.iter().map(Vec::as_slice))
        .collect();
    let mut out = vec![S::zero(); word_count(p, depth)];
    for gi in 0..approx.len() {
        let g = decode(gi, p, depth - 1);
        for hi in 0..word_count(p, hlen) {
            let k = child_index(&g, hi, p, depth, hlen);
            let mut add = S::zero();
            for (f, x) in filters.iter().zip(&inputs) {
                let b = &f.values()[hi];
                if !b.is_zero() && !x[gi].is_zero() {
                    add = add + b.clone() * x[gi].clone();
                }
            }
            if !add.is_zero() {
                out[k] = out[k].clone() + add * inv_p.clone();
            }
        }
    }
    Ok(out)
}

fn level_depth(len: usize, p: u32) -> Result<usize> {
    let mut depth = 0usize;
    let mut n = 1usize;
    while n < len {
        n *= p as usize;
        depth += 1;
    }
    if n != len {
        return Err(Error::Shape(format!(
            "{len} coefficients is not a power of p = {p}"
        )));
    }
    Ok(depth)
}

/// Index of `𝒜g ∔ h` in word order over `[-depth, 0)`, where `g` is a word
/// over `[-(depth-1), 0)` and `h` has digits `(a_{-1}, …, a_{-hlen})`.
fn child_index(g: &[u32], h_index: usize, p: u32, depth: usize, hlen: usize) -> usize {
    let h = decode(h_index, p, hlen);
    let mut word: Vec<u32> = g.to_vec();
    word.push(0);
    for (k, &a) in h.iter().enumerate() {
        let pos = depth - 1 - k;
        word[pos] = (word[pos] + a) % p;
    }
    encode(&word, p)
}

/// `J`-level analysis of a signal on `G_{-R} / G_S`; needs `R >= N + J`
/// and `S >= M + 1`.
pub fn analyze<S: Scalar>(
    f: &FiniteSignal<S>,
    phi: &PhiTable<S>,
    beta: &CoefficientTable<S>,
    bank: &WaveletBank<S>,
    levels: u32,
) -> Result<Analysis<S>> {
    if levels == 0 {
        return Err(Error::Parameter("at least one level is required".into()));
    }
    let (r, s) = (f.r(), f.s());
    check_window(phi, r, s, levels)?;
    let p = f.p();
    let layout = Layout::new(p, -(r as i32), s as i32);
    let data = f.samples.values();
    let mut c = layout.correlate(data, phi.values(), -(r as i32), 0)?;
    let mut details = vec![bank
        .psi()
        .iter()
        .map(|psi| layout.correlate(data, psi, -(r as i32), 0))
        .collect::<Result<Vec<_>>>()?];
    for _ in 1..levels {
        let (next, d) = analysis_step(&c, beta, bank)?;
        details.push(d);
        c = next;
    }
    Ok(Analysis {
        p,
        r,
        s,
        levels,
        approx: c,
        details,
    })
}

/// `Σ_g c_0(g) φ(· ∸ g) + Σ_{l,g} d_{0,l}(g) ψ_l(· ∸ g)` after undoing the
/// deeper levels.
pub fn synthesize<S: Scalar>(
    a: &Analysis<S>,
    phi: &PhiTable<S>,
    beta: &CoefficientTable<S>,
    bank: &WaveletBank<S>,
) -> Result<FiniteSignal<S>> {
    check_window(phi, a.r, a.s, a.levels)?;
    if a.details.len() != a.levels as usize {
        return Err(Error::Shape(format!(
            "{} detail levels for J = {}",
            a.details.len(),
            a.levels
        )));
    }
    for (j, level) in a.details.iter().enumerate() {
        let expect = word_count(a.p, a.r as usize - j);
        if level.len() != bank.psi().len() || level.iter().any(|d| d.len() != expect) {
            return Err(Error::Shape(format!(
                "details at level -{j} need {} vectors of {expect}",
                bank.psi().len()
            )));
        }
    }
    if a.approx.len() != word_count(a.p, (a.r + 1 - a.levels) as usize) {
        return Err(Error::Shape("approximation has the wrong length".into()));
    }
    let mut c = a.approx.clone();
    for j in (1..a.levels as usize).rev() {
        c = synthesis_step(&c, &a.details[j], beta, bank)?;
    }
    let layout = Layout::new(a.p, -(a.r as i32), a.s as i32);
    let mut out = vec![S::zero(); word_count(a.p, (a.r + a.s) as usize)];
    layout.spread(phi.values(), -(a.r as i32), 0, &c, &mut out)?;
    for (psi, d) in bank.psi().iter().zip(&a.details[0]) {
        layout.spread(psi, -(a.r as i32), 0, d, &mut out)?;
    }
    FiniteSignal::new(a.p, a.r, a.s, out)
}

/// Orthogonal projection onto the truncated `V_1`.
pub fn projection<S: Scalar>(
    f: &FiniteSignal<S>,
    phi: &PhiTable<S>,
    beta: &CoefficientTable<S>,
    bank: &WaveletBank<S>,
    levels: u32,
) -> Result<FiniteSignal<S>> {
    synthesize(&analyze(f, phi, beta, bank, levels)?, phi, beta, bank)
}

/// Energies in the complex embedding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    pub signal: f64,
    pub coefficients: f64,
    pub residual: f64,
}

/// `‖f‖^2`, coefficient energy and `‖f - Pf‖^2`, with Bessel's inequality
/// and the Pythagorean split checked; `in_span` adds Parseval's equality.
pub fn energy_report<S: Scalar>(
    f: &FiniteSignal<S>,
    a: &Analysis<S>,
    reconstruction: &FiniteSignal<S>,
    in_span: bool,
    tol: f64,
) -> Result<(Energy, Report)> {
    let signal = f.energy();
    let coeff = a.energy();
    let residual = f.sub(reconstruction)?.energy();
    let energy = Energy {
        signal: signal.to_c64().re,
        coefficients: coeff.to_c64().re,
        residual: residual.to_c64().re,
    };
    let mut report = Report::new("energy");
    let mut bessel = Check::new("energy.bessel", "coefficient energy <= ||f||^2");
    bessel.record(
        energy.coefficients <= energy.signal + tol,
        (energy.coefficients - energy.signal).max(0.0),
        || format!("{} > {}", energy.coefficients, energy.signal),
    );
    report.push(bessel);
    let mut split = Check::new(
        "energy.pythagoras",
        "||f||^2 = coefficient energy + ||f - Pf||^2",
    );
    let total = coeff.clone() + residual.clone();
    split.record(
        total.close_to(&signal, tol),
        total.distance(&signal),
        || {
            format!(
                "{} + {} != {}",
                energy.coefficients, energy.residual, energy.signal
            )
        },
    );
    report.push(split);
    if in_span {
        let mut parseval = Check::new(
            "energy.parseval",
            "coefficient energy = ||f||^2 for f in the truncated V_1",
        );
        parseval.record(
            coeff.close_to(&signal, tol),
            coeff.distance(&signal),
            || format!("{} != {}", energy.coefficients, energy.signal),
        );
        report.push(parseval);
    }
    Ok((energy, report))
}
