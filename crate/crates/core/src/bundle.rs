//! JSON bundles written and read by the command-line tool.
//!
//! Tables are stored as maps from digit words to `[re, im]`, with the lowest
//! group index first in every word. Masks keep their exact root exponents.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::grid::{all_words, parse_word, word_count, word_string, CharTable, StepFunction};
use crate::io::{parse_complex, read_csv};
use crate::mask::{snap_root, CoefficientTable, Mask};
use crate::pipeline::{verify_mra_parts, Pipeline};
use crate::refinable::{ElementarySet, PhiTable};
use crate::report::{Check, Report};
use crate::scalar::Scalar;
use crate::transform::Analysis;
use crate::tree::{PTree, TreeFile, Window};
use crate::wavelet::{verify_wavelets, WaveletBank};

pub const MRA_FORMAT: &str = "vilenkin-mra/1";
pub const WAVELET_FORMAT: &str = "vilenkin-wavelets/1";
pub const COEFFICIENT_FORMAT: &str = "vilenkin-coefficients/1";

/// Values keyed by digit word; `index` names the digit positions in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordTable {
    pub index: String,
    pub values: BTreeMap<String, [f64; 2]>,
}

impl WordTable {
    fn new<'a, S: Scalar + 'a>(
        p: u32,
        index: String,
        entries: impl Iterator<Item = (Vec<u32>, &'a S)>,
    ) -> Self {
        WordTable {
            index,
            values: entries
                .map(|(w, v)| {
                    let z = v.to_c64();
                    (word_string(&w, p), [z.re, z.im])
                })
                .collect(),
        }
    }

    fn dense(&self, p: u32, len: usize, what: &str) -> Result<Vec<Complex64>> {
        if self.values.len() != word_count(p, len) {
            return Err(Error::Shape(format!(
                "{what}: {} entries, expected {}",
                self.values.len(),
                word_count(p, len)
            )));
        }
        all_words(p, len)
            .map(|w| {
                let key = word_string(&w, p);
                self.values
                    .get(&key)
                    .map(|[re, im]| Complex64::new(*re, *im))
                    .ok_or_else(|| Error::Shape(format!("{what}: no entry for {key}")))
            })
            .collect()
    }
}

fn index_label(lo: i32, hi: i32) -> String {
    format!("x_{lo} .. x_{}", hi - 1)
}

const BETA_INDEX: &str = "a_-1 .. a_-(N+1)";

/// Mask, support set, `φ̂`, `φ` and `β` for one tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MraBundle {
    pub format: String,
    pub p: u32,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeFile>,
    pub mask: Mask,
    /// Words `(β_{-N}, …, β_{M-1})` of the cosets of `G_{-N}^⊥` forming `E`.
    pub support: Vec<String>,
    pub phi_hat: WordTable,
    pub phi: WordTable,
    pub beta: WordTable,
}

impl MraBundle {
    pub fn from_pipeline<S: Scalar>(pipe: &Pipeline<S>, tree: Option<&PTree>) -> Self {
        let p = pipe.mask.p();
        let (lo, hi) = (pipe.phi.hat().lo(), pipe.phi.hat().hi());
        let beta_entries = all_words(p, pipe.beta.n() as usize + 1).zip(pipe.beta.values());
        MraBundle {
            format: MRA_FORMAT.into(),
            p,
            n: pipe.mask.n(),
            m: pipe.phi.m(),
            tree: tree.map(PTree::to_file),
            mask: pipe.mask.clone(),
            support: pipe
                .support
                .words()
                .iter()
                .map(|w| word_string(w, p))
                .collect(),
            phi_hat: WordTable::new(p, index_label(lo, hi), pipe.phi.hat().entries()),
            phi: WordTable::new(p, index_label(lo, hi), pipe.phi.values().entries()),
            beta: WordTable::new(p, BETA_INDEX.into(), beta_entries),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let b: MraBundle = serde_json::from_str(text)?;
        if b.format != MRA_FORMAT {
            return Err(Error::Parse(format!(
                "expected format {MRA_FORMAT}, found {}",
                b.format
            )));
        }
        if b.mask.p() != b.p || b.mask.n() != b.n {
            return Err(Error::Shape(format!(
                "bundle header p={}, N={} but mask has p={}, N={}",
                b.p,
                b.n,
                b.mask.p(),
                b.mask.n()
            )));
        }
        Mask::from_table(b.p, b.n, b.mask.lambda().to_vec())?;
        Ok(b)
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn support_set(&self) -> Result<ElementarySet> {
        let words: BTreeSet<Vec<u32>> = self
            .support
            .iter()
            .map(|w| parse_word(w, self.p))
            .collect::<Result<_>>()?;
        ElementarySet::new(self.p, self.n, self.m, words)
    }

    /// The stored `φ̂`, `φ` and `β` as complex tables.
    pub fn stored(&self) -> Result<(PhiTable<Complex64>, CoefficientTable<Complex64>)> {
        let (p, n, m) = (self.p, self.n as i32, self.m as i32);
        let len = (n + m) as usize;
        let hat = CharTable::new(p, -n, m, self.phi_hat.dense(p, len, "phi_hat")?)?;
        let values = StepFunction::new(p, -n, m, self.phi.dense(p, len, "phi")?)?;
        let phi = PhiTable::from_parts(Some(self.support_set()?), hat, values)?;
        let beta = CoefficientTable::new(p, self.n, self.beta.dense(p, n as usize + 1, "beta")?)?;
        Ok((phi, beta))
    }

    /// Rebuilt from the mask alone, in the complex embedding.
    pub fn rebuild(&self) -> Result<Pipeline<Complex64>> {
        if self.mask.is_exact() {
            Ok(Pipeline::<Cyclotomic>::from_mask(self.mask.clone())?.to_c64())
        } else {
            Pipeline::<Complex64>::from_mask(self.mask.clone())
        }
    }

    /// The suite run twice: on a fresh derivation from the mask (exactly
    /// when the mask is exact) and on the stored tables with tolerance `tol`,
    /// plus agreement of the two.
    pub fn verify(&self, depth: u32, tol: f64) -> Result<Report> {
        let mut report = Report::new("multiresolution analysis bundle");
        report.extend(rederived_mra(&self.mask, depth, tol)?);
        let (phi, beta) = match self.stored() {
            Ok(parts) => parts,
            Err(e) => {
                report.push(
                    Check::new("bundle.tables", "stored tables are complete").fail(e.to_string()),
                );
                return Ok(report);
            }
        };
        let stored = verify_mra_parts(
            &self.mask,
            phi.support().expect("stored support"),
            &phi,
            &beta,
            depth,
            tol,
        )?;
        for mut c in stored.checks {
            c.name = format!("stored.{}", c.name);
            report.push(c);
        }
        let fresh = self.rebuild();
        let mut agree = Check::new(
            "bundle.consistency",
            "stored tables equal the tables derived from the mask",
        );
        match fresh {
            Ok(fresh) => {
                agree.record(
                    fresh.support.words() == phi.support().unwrap().words(),
                    0.0,
                    || "support set differs".into(),
                );
                if fresh.phi.m() == phi.m() {
                    let d = fresh.phi.values().max_distance(phi.values())?;
                    agree.record(d <= tol, d, || format!("phi differs by {d:e}"));
                    let d = fresh.phi.hat().max_distance(phi.hat());
                    agree.record(d <= tol, d, || format!("phi_hat differs by {d:e}"));
                } else {
                    agree.record(false, f64::INFINITY, || {
                        format!("M = {} stored, {} derived", phi.m(), fresh.phi.m())
                    });
                }
                let d = fresh.beta.max_distance(&beta);
                agree.record(d <= tol, d, || format!("beta differs by {d:e}"));
            }
            Err(e) => agree.record(false, f64::INFINITY, || e.to_string()),
        }
        report.push(agree);
        Ok(report)
    }
}

fn rederived_mra(mask: &Mask, depth: u32, tol: f64) -> Result<Report> {
    let mut report = Report::new("derived");
    let outcome = if mask.is_exact() {
        Pipeline::<Cyclotomic>::from_mask(mask.clone()).and_then(|p| p.verify_mra(depth, 0.0))
    } else {
        Pipeline::<Complex64>::from_mask(mask.clone()).and_then(|p| p.verify_mra(depth, tol))
    };
    match outcome {
        Ok(r) => report.extend(r),
        Err(e) => {
            report.extend(mask.check());
            report.push(
                Check::new("derivation", "the mask yields an admissible support set")
                    .fail(e.to_string()),
            );
        }
    }
    Ok(report)
}

/// An MRA bundle together with the `p - 1` wavelet coefficient tables and
/// `ψ_l` value tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveletBundle {
    pub format: String,
    pub mra: MraBundle,
    /// Entry `l - 1` holds `β^{(l)}`.
    pub betas: Vec<WordTable>,
    /// Entry `l - 1` holds `ψ_l` on `G_{-N} / G_{M+1}`.
    pub psi: Vec<WordTable>,
}

impl WaveletBundle {
    pub fn from_pipeline<S: Scalar>(pipe: &Pipeline<S>, mra: MraBundle) -> Self {
        let p = pipe.mask.p();
        let betas = pipe
            .bank
            .betas()
            .iter()
            .map(|b| {
                WordTable::new(
                    p,
                    BETA_INDEX.into(),
                    all_words(p, b.n() as usize + 1).zip(b.values()),
                )
            })
            .collect();
        let psi = pipe
            .bank
            .psi()
            .iter()
            .map(|f| WordTable::new(p, index_label(f.lo(), f.hi()), f.entries()))
            .collect();
        WaveletBundle {
            format: WAVELET_FORMAT.into(),
            mra,
            betas,
            psi,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let b: WaveletBundle = serde_json::from_str(text)?;
        if b.format != WAVELET_FORMAT {
            return Err(Error::Parse(format!(
                "expected format {WAVELET_FORMAT}, found {}",
                b.format
            )));
        }
        MraBundle::from_json(&serde_json::to_string(&b.mra)?)?;
        Ok(b)
    }

    pub fn stored_bank(&self) -> Result<WaveletBank<Complex64>> {
        let (p, n, m) = (self.mra.p, self.mra.n, self.mra.m);
        let betas = self
            .betas
            .iter()
            .map(|t| CoefficientTable::new(p, n, t.dense(p, n as usize + 1, "wavelet beta")?))
            .collect::<Result<Vec<_>>>()?;
        let len = (n + m + 1) as usize;
        let psi = self
            .psi
            .iter()
            .map(|t| StepFunction::new(p, -(n as i32), m as i32 + 1, t.dense(p, len, "psi")?))
            .collect::<Result<Vec<_>>>()?;
        WaveletBank::from_parts(n, m, betas, psi)
    }

    /// Orthogonality suite on a fresh derivation and on the stored tables.
    pub fn verify(&self, depth: u32, tol: f64) -> Result<Report> {
        let mask = &self.mra.mask;
        let mut report = Report::new("wavelet bundle");
        let fresh = if mask.is_exact() {
            Pipeline::<Cyclotomic>::from_mask(mask.clone())
                .and_then(|p| p.verify_wavelets(depth, 0.0))
        } else {
            Pipeline::<Complex64>::from_mask(mask.clone())
                .and_then(|p| p.verify_wavelets(depth, tol))
        };
        match fresh {
            Ok(r) => report.extend(r),
            Err(e) => report.push(
                Check::new("derivation", "the mask yields an admissible support set")
                    .fail(e.to_string()),
            ),
        }
        let stored = self
            .mra
            .stored()
            .and_then(|(phi, _)| Ok((phi, self.stored_bank()?)));
        match stored {
            Ok((phi, bank)) => {
                let e = phi.support().expect("stored support").clone();
                for mut c in verify_wavelets(&bank, &phi, &e, mask, depth, tol)?.checks {
                    c.name = format!("stored.{}", c.name);
                    report.push(c);
                }
                let mut agree = Check::new(
                    "bundle.consistency",
                    "stored wavelets equal the wavelets derived from the mask",
                );
                match self.mra.rebuild() {
                    Ok(pipe) => {
                        for (l, (a, b)) in pipe.bank.psi().iter().zip(bank.psi()).enumerate() {
                            let d = a.max_distance(b)?;
                            agree.record(d <= tol, d, || format!("psi_{} differs by {d:e}", l + 1));
                        }
                        for (l, (a, b)) in pipe.bank.betas().iter().zip(bank.betas()).enumerate() {
                            let d = a.max_distance(b);
                            agree.record(d <= tol, d, || {
                                format!("beta^({}) differs by {d:e}", l + 1)
                            });
                        }
                    }
                    Err(e) => agree.record(false, f64::INFINITY, || e.to_string()),
                }
                report.push(agree);
            }
            Err(e) => report.push(
                Check::new("bundle.tables", "stored tables are complete").fail(e.to_string()),
            ),
        }
        Ok(report)
    }
}

/// Either bundle kind; transforms accept both.
pub fn load_mra_or_wavelets(text: &str) -> Result<MraBundle> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    match v.get("format").and_then(|f| f.as_str()) {
        Some(MRA_FORMAT) => MraBundle::from_json(text),
        Some(WAVELET_FORMAT) => Ok(WaveletBundle::from_json(text)?.mra),
        other => Err(Error::Parse(format!(
            "unrecognised bundle format {other:?}"
        ))),
    }
}

/// One coefficient vector in a [`CoefficientBundle`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBlock {
    /// Level `j <= 0`.
    pub level: i32,
    /// `0` for the approximation `c_j`, `l >= 1` for `d_{j,l}`.
    pub l: u32,
    /// Shift digits per entry; entries follow word order over `[-depth, 0)`.
    pub depth: u32,
    pub values: Vec<[f64; 2]>,
}

/// The result of a multilevel analysis, keyed by level and `l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBundle {
    pub format: String,
    pub p: u32,
    #[serde(rename = "R")]
    pub r: u32,
    #[serde(rename = "S")]
    pub s: u32,
    pub levels: u32,
    pub normalization: String,
    pub blocks: Vec<CoefficientBlock>,
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

impl CoefficientBundle {
    pub fn from_analysis(a: &Analysis<Complex64>) -> Self {
        let mut blocks = Vec::new();
        let top = a.levels as i32 - 1;
        blocks.push(CoefficientBlock {
            level: -top,
            l: 0,
            depth: a.r - top as u32,
            values: pairs(&a.approx),
        });
        for (j, level) in a.details.iter().enumerate() {
            for (l, d) in level.iter().enumerate() {
                blocks.push(CoefficientBlock {
                    level: -(j as i32),
                    l: l as u32 + 1,
                    depth: a.r - j as u32,
                    values: pairs(d),
                });
            }
        }
        CoefficientBundle {
            format: COEFFICIENT_FORMAT.into(),
            p: a.p,
            r: a.r,
            s: a.s,
            levels: a.levels,
            normalization: "c_j(g) = <f, phi(A^j x - g)>; orthonormal coefficients are p^(j/2) c_j"
                .into(),
            blocks,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let b: CoefficientBundle = serde_json::from_str(text)?;
        if b.format != COEFFICIENT_FORMAT {
            return Err(Error::Parse(format!(
                "expected format {COEFFICIENT_FORMAT}, found {}",
                b.format
            )));
        }
        Ok(b)
    }

    pub fn to_analysis(&self) -> Result<Analysis<Complex64>> {
        if self.levels == 0 || self.levels > self.r {
            return Err(Error::Shape(format!(
                "{} levels with R = {}",
                self.levels, self.r
            )));
        }
        let top = self.levels as i32 - 1;
        let mut approx = None;
        let mut details = vec![vec![None; self.p as usize - 1]; self.levels as usize];
        for b in &self.blocks {
            let j = -b.level;
            if !(0..=top).contains(&j) || b.l >= self.p {
                return Err(Error::Shape(format!(
                    "block level {} l {} outside the analysis",
                    b.level, b.l
                )));
            }
            let depth = self.r - j as u32;
            if b.depth != depth || b.values.len() != word_count(self.p, depth as usize) {
                return Err(Error::Shape(format!(
                    "block level {} l {} has the wrong length",
                    b.level, b.l
                )));
            }
            let v: Vec<Complex64> = b
                .values
                .iter()
                .map(|[re, im]| Complex64::new(*re, *im))
                .collect();
            let slot = if b.l == 0 {
                if j != top {
                    return Err(Error::Shape(format!(
                        "approximation stored at level {}, expected {}",
                        b.level, -top
                    )));
                }
                &mut approx
            } else {
                &mut details[j as usize][b.l as usize - 1]
            };
            if slot.replace(v).is_some() {
                return Err(Error::Shape(format!(
                    "duplicate block level {} l {}",
                    b.level, b.l
                )));
            }
        }
        let approx = approx.ok_or_else(|| Error::Shape("missing approximation block".into()))?;
        let details = details
            .into_iter()
            .map(|level| level.into_iter().collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Shape("missing detail block".into()))?;
        Ok(Analysis {
            p: self.p,
            r: self.r,
            s: self.s,
            levels: self.levels,
            approx,
            details,
        })
    }
}

/// Phase table CSV: `window,re,im`, window digits root-side first.
pub fn read_phases(text: &str, p: u32) -> Result<BTreeMap<Window, crate::group::RootScalar>> {
    let (header, rows) = read_csv(text)?;
    if header != ["window", "re", "im"] {
        return Err(Error::Parse(format!(
            "phase CSV header must be window,re,im, got {}",
            header.join(",")
        )));
    }
    rows.iter()
        .map(|r| {
            Ok((
                Window(parse_word(&r[0], p)?),
                snap_root(parse_complex(&r[1], &r[2])?, p)?,
            ))
        })
        .collect()
}
