//! Wavelets `ψ_l(x) = Σ_h β_h^{(l)} φ(𝒜x ∸ h)`, `l = 1, …, p-1`, built from
//! the shifted masks `m_l(χ) = m_0(χ r_0^{-l})`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::grid::{all_words, word_string, StepFunction};
use crate::mask::{CoefficientTable, Mask, ROUND_TRIP_TOLERANCE};
use crate::refinable::{
    gram_checks, shifts, synthesize_refinement, tiling_report, ElementarySet, PhiTable,
};
use crate::report::{Check, Report};
use crate::scalar::Scalar;

/// `β_h^{(l)} = β_h exp(2πi l a_{-1} / p)`; `l = 0` returns `β`.
pub fn wavelet_coefficients<S: Scalar>(
    beta: &CoefficientTable<S>,
    l: u32,
) -> Result<CoefficientTable<S>> {
    if l >= beta.p() {
        return Err(Error::Parameter(format!(
            "wavelet index {l} must be below p = {}",
            beta.p()
        )));
    }
    Ok(beta.modulated(l))
}

/// `Σ_h β_h φ(𝒜x ∸ h)` on `G_{-N}` at `G_{M+1}` resolution.
pub fn psi_values<S: Scalar>(
    beta_l: &CoefficientTable<S>,
    phi: &PhiTable<S>,
) -> Result<StepFunction<S>> {
    let out = synthesize_refinement(phi.values(), beta_l, phi.params())?;
    let (lo, hi) = (-(phi.n() as i32), phi.m() as i32 + 1);
    if out.lo() != lo || out.hi() != hi {
        return Err(Error::Consistency(format!(
            "psi landed on [{}, {}) instead of [{lo}, {hi})",
            out.lo(),
            out.hi()
        )));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveletBank<S> {
    p: u32,
    n: u32,
    m: u32,
    betas: Vec<CoefficientTable<S>>,
    psi: Vec<StepFunction<S>>,
}

impl<S: Scalar> WaveletBank<S> {
    pub fn new(phi: &PhiTable<S>, beta: &CoefficientTable<S>) -> Result<Self> {
        let betas: Vec<CoefficientTable<S>> = (1..phi.p())
            .map(|l| wavelet_coefficients(beta, l))
            .collect::<Result<_>>()?;
        let psi = betas
            .iter()
            .map(|b| psi_values(b, phi))
            .collect::<Result<_>>()?;
        Ok(WaveletBank {
            p: phi.p(),
            n: phi.n(),
            m: phi.m(),
            betas,
            psi,
        })
    }

    /// Assembles a bank from stored tables.
    pub fn from_parts(
        n: u32,
        m: u32,
        betas: Vec<CoefficientTable<S>>,
        psi: Vec<StepFunction<S>>,
    ) -> Result<Self> {
        let p = psi
            .first()
            .map(StepFunction::p)
            .ok_or_else(|| Error::Shape("empty wavelet bank".into()))?;
        if psi.len() != p as usize - 1 || betas.len() != psi.len() {
            return Err(Error::Shape(format!(
                "a bank over Z_{p} has {} wavelets",
                p - 1
            )));
        }
        if psi
            .iter()
            .any(|f| f.lo() != -(n as i32) || f.hi() != m as i32 + 1)
        {
            return Err(Error::Shape("wavelets must live on [-N, M+1)".into()));
        }
        Ok(WaveletBank {
            p,
            n,
            m,
            betas,
            psi,
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

    /// `β^{(l)}` for `l = 1, …, p-1` at position `l - 1`.
    pub fn betas(&self) -> &[CoefficientTable<S>] {
        &self.betas
    }

    /// `ψ_l` for `l = 1, …, p-1` at position `l - 1`.
    pub fn psi(&self) -> &[StepFunction<S>] {
        &self.psi
    }
}

/// The cosets of `G_{-N}^⊥` in `G_{M+1}^⊥` lying in `E𝒜 ∩ X_0 r_0^l`:
/// words `(γ_{-N}, …, γ_M)` with `(γ_{-N+1}, …, γ_M) ∈ E` and
/// `m_0(γ r_0^{-l}) != 0`.
pub fn wavelet_set(mask: &Mask, e: &ElementarySet, l: u32) -> Result<ElementarySet> {
    let p = mask.p();
    let n = mask.n() as usize;
    if e.p() != p || e.n() != mask.n() {
        return Err(Error::Shape(
            "support set and mask disagree on p or N".into(),
        ));
    }
    let shifted = mask.shifted(l);
    let mut words = BTreeSet::new();
    for zeta in e.words() {
        for g in 0..p {
            let mut w = Vec::with_capacity(zeta.len() + 1);
            w.push(g);
            w.extend_from_slice(zeta);
            if !shifted.at_word(&w[..n + 1]).is_zero() {
                words.insert(w);
            }
        }
    }
    ElementarySet::new(p, mask.n(), e.m() + 1, words)
}

/// Orthogonality of the shifted `φ` and `ψ_l` over `H_0^{(s)}`, zero means,
/// the mask identities behind the construction, and the tiling property of
/// every `E𝒜 ∩ X_0 r_0^l`.
pub fn verify_wavelets<S: Scalar>(
    bank: &WaveletBank<S>,
    phi: &PhiTable<S>,
    e: &ElementarySet,
    mask: &Mask,
    s: u32,
    tol: f64,
) -> Result<Report> {
    let p = bank.p;
    let mut report = Report::new("wavelet basis");
    let params = phi.params();
    let hs = shifts(params, s);
    let count = hs.len();
    let lo = -(bank.n as i32) - s as i32;
    let hi = bank.m as i32 + 1;

    let mut bases = vec![phi.values().resample(lo, hi)?];
    for f in &bank.psi {
        bases.push(f.resample(lo, hi)?);
    }
    let mut functions = Vec::with_capacity(bases.len() * count);
    let mut labels = Vec::with_capacity(bases.len() * count);
    for (k, base) in bases.iter().enumerate() {
        for h in &hs {
            functions.push(base.translate(h)?);
            let name = if k == 0 {
                "phi".to_string()
            } else {
                format!("psi_{k}")
            };
            labels.push(format!("{name}(.-{h:?})"));
        }
    }
    let mut checks = [
        Check::new(
            "wavelet.phi-psi",
            format!("<phi(.-g), psi_l(.-h)> = 0 for g, h in H_0^({s}), l = 1..p-1"),
        ),
        Check::new(
            "wavelet.cross",
            format!("<psi_k(.-g), psi_l(.-h)> = 0 for k != l, g, h in H_0^({s})"),
        ),
        Check::new(
            "wavelet.orthonormal",
            format!("<psi_l(.-g), psi_l(.-h)> = delta_gh for g, h in H_0^({s})"),
        ),
    ];
    gram_checks(
        &functions,
        &labels,
        &mut checks,
        |i, j| {
            let (ki, kj) = (i / count, j / count);
            match (ki, kj) {
                (0, 0) => None,
                (0, _) => Some(0),
                (_, 0) => None,
                (a, b) if a < b => Some(1),
                (a, b) if a == b => Some(2),
                _ => None,
            }
        },
        tol,
    )?;
    for c in checks {
        report.push(c);
    }

    let mut mean = Check::new("wavelet.zero-mean", "integral of psi_l = 0 for l = 1..p-1");
    for (i, f) in bank.psi.iter().enumerate() {
        let v = f.integral();
        mean.record(v.close_to(&S::zero(), tol), v.distance(&S::zero()), || {
            format!("psi_{} has mean {:?}", i + 1, v.to_c64())
        });
    }
    report.push(mean);

    let mut masks = Check::new(
        "wavelet.masks",
        "beta^(l) reproduces m_l(chi) = m_0(chi r_0^-l) through (1/p) sum_h beta_h^(l) conj((chi, A^-1 h))",
    );
    for (i, b) in bank.betas.iter().enumerate() {
        let l = i as u32 + 1;
        let expect = mask.shifted(l);
        for (j, got) in b.mask_values().iter().enumerate() {
            let want = expect.at_index(j).to_scalar::<S>(p)?;
            let tol = if S::EXACT {
                0.0
            } else {
                tol.max(ROUND_TRIP_TOLERANCE)
            };
            masks.record(got.close_to(&want, tol), got.distance(&want), || {
                format!(
                    "m_{l} at index {j}: {:?} vs {:?}",
                    got.to_c64(),
                    want.to_c64()
                )
            });
        }
    }
    report.push(masks);

    let mut supports = Check::new(
        "wavelet.mask-supports",
        "|m_l| = 1 on X_0 r_0^l and m_l = 0 on X_0 r_0^nu for nu != l",
    );
    let len = mask.n() as usize + 1;
    for alpha in all_words(p, len) {
        for nu in 0..p {
            let mut back = alpha.clone();
            back[len - 1] = (back[len - 1] + p - nu) % p;
            if mask.at_word(&back).is_zero() {
                continue;
            }
            for l in 0..p {
                let value = mask.shifted(l).at_word(&alpha);
                let ok = value.is_zero() != (l == nu);
                supports.record(ok, 0.0, || {
                    format!(
                        "m_{l} at {} in X_0 r_0^{nu}: {value:?}",
                        word_string(&alpha, p)
                    )
                });
            }
        }
    }
    report.push(supports);

    for l in 1..p {
        let set = wavelet_set(mask, e, l)?;
        for mut c in tiling_report(&set).checks {
            c.name = c
                .name
                .replacen("elementary", &format!("wavelet.set.l{l}"), 1);
            c.condition = format!("E A cap X_0 r_0^{l}: {}", c.condition);
            report.push(c);
        }
    }
    Ok(report)
}
