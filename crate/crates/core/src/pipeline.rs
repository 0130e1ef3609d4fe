//! The full construction from a mask: support set, refinable function,
//! coefficients and wavelet bank, plus the combined verification suites.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{CharTable, StepFunction};
use crate::mask::{solve_coefficients, CoefficientTable, Mask};
use crate::refinable::{
    is_elementary, verify_refinement, verify_shift_orthonormality, ElementarySet, PhiTable,
};
use crate::report::{Check, Report};
use crate::scalar::Scalar;
use crate::tree::{PTree, Window};
use crate::wavelet::{verify_wavelets, WaveletBank};

#[derive(Clone, Debug, PartialEq)]
pub struct Pipeline<S> {
    pub mask: Mask,
    pub support: ElementarySet,
    pub phi: PhiTable<S>,
    pub beta: CoefficientTable<S>,
    pub bank: WaveletBank<S>,
}

impl<S: Scalar> Pipeline<S> {
    pub fn from_mask(mask: Mask) -> Result<Self> {
        let phi = PhiTable::<S>::from_mask(&mask)?;
        let support = phi
            .support()
            .cloned()
            .expect("from_mask records the support");
        let beta = solve_coefficients::<S>(&mask)?;
        let bank = WaveletBank::new(&phi, &beta)?;
        Ok(Pipeline {
            mask,
            support,
            phi,
            beta,
            bank,
        })
    }

    pub fn from_tree(tree: &PTree) -> Result<Self> {
        Self::from_mask(Mask::from_tree(tree, None)?)
    }

    /// Mask conditions, elementarity, Fourier-side row sums, the Gram matrix over
    /// `H_0^{(depth)}`, refinement and the coefficient identities.
    pub fn verify_mra(&self, depth: u32, tol: f64) -> Result<Report> {
        verify_mra_parts(&self.mask, &self.support, &self.phi, &self.beta, depth, tol)
    }

    pub fn verify_wavelets(&self, depth: u32, tol: f64) -> Result<Report> {
        verify_wavelets(&self.bank, &self.phi, &self.support, &self.mask, depth, tol)
    }

    pub fn to_c64(&self) -> Pipeline<Complex64> {
        Pipeline {
            mask: self.mask.clone(),
            support: self.support.clone(),
            phi: phi_to_c64(&self.phi),
            beta: self.beta.map(Scalar::to_c64),
            bank: WaveletBank::from_parts(
                self.bank.n(),
                self.bank.m(),
                self.bank
                    .betas()
                    .iter()
                    .map(|b| b.map(Scalar::to_c64))
                    .collect(),
                self.bank
                    .psi()
                    .iter()
                    .map(|f| f.map(Scalar::to_c64))
                    .collect(),
            )
            .expect("same shapes"),
        }
    }
}

pub fn phi_to_c64<S: Scalar>(phi: &PhiTable<S>) -> PhiTable<Complex64> {
    let hat = phi.hat();
    let hat = CharTable::new(
        hat.p(),
        hat.lo(),
        hat.hi(),
        hat.values().iter().map(Scalar::to_c64).collect(),
    )
    .expect("same shape");
    let values: StepFunction<Complex64> = phi.values().map(Scalar::to_c64);
    PhiTable::from_parts(phi.support().cloned(), hat, values).expect("same shape")
}

/// The MRA suite on explicit parts, so stored tables can be checked as-is.
pub fn verify_mra_parts<S: Scalar>(
    mask: &Mask,
    support: &ElementarySet,
    phi: &PhiTable<S>,
    beta: &CoefficientTable<S>,
    depth: u32,
    tol: f64,
) -> Result<Report> {
    let mut report = Report::new("multiresolution analysis");
    report.extend(mask.check());
    report.extend(is_elementary(support));
    report.extend(verify_shift_orthonormality(phi, depth, tol)?);
    report.extend(verify_refinement(phi, mask, beta, tol)?);
    report.extend(coefficient_checks(mask, beta, tol));
    Ok(report)
}

/// `β` reproduces the mask table and `Σ|β_h|^2 = p`.
pub fn coefficient_checks<S: Scalar>(mask: &Mask, beta: &CoefficientTable<S>, tol: f64) -> Report {
    let p = mask.p();
    let mut report = Report::new("coefficients");
    let mut round = Check::new(
        "coefficients.round-trip",
        "m_0(χ_k) = p^{-1} Σ_j β_j conj((χ_k, 𝒜^{-1}h_j))",
    );
    for (i, (b, lam)) in beta.mask_values().iter().zip(mask.lambda()).enumerate() {
        match lam.to_scalar::<S>(p) {
            Ok(target) => round.record(b.close_to(&target, tol), b.distance(&target), || {
                format!("mask index {i}")
            }),
            Err(e) => round.record(false, f64::INFINITY, || e.to_string()),
        }
    }
    report.push(round);
    let mut energy = Check::new("coefficients.energy", "Σ_h |β_h|^2 = p");
    let total = beta.energy();
    let target = S::from_ratio(p as i64, 1);
    energy.record(
        total.close_to(&target, tol),
        total.distance(&target),
        || format!("sum is {}", total.to_c64()),
    );
    report.push(energy);
    report
}

/// Orthonormality diagnostics for a window set that need not come from an
/// N-valid tree: the lenient mask, its rows, and the Gram matrix of the
/// truncated product over `H_0^{(depth)}`.
pub fn diagnose_windows(
    p: u32,
    n: u32,
    windows: &BTreeSet<Window>,
    m: u32,
    depth: u32,
    tol: f64,
) -> Result<Report> {
    let mask = Mask::from_windows(p, n, windows)?;
    let mut report = Report::new("orthonormality diagnostics");
    let rows = mask.check();
    report.extend(rows);
    let phi = PhiTable::<Complex64>::truncated(&mask, m)?;
    report.extend(verify_shift_orthonormality(&phi, depth, tol)?);
    Ok(report)
}

/// The diagnostics for a tree that failed N-validity, with `M = H - 2N`.
pub fn diagnose_tree(tree: &PTree, depth: u32, tol: f64) -> Result<Report> {
    let (p, n) = (tree.p(), tree.n());
    let m = (tree.height() as u32).saturating_sub(2 * n).max(1);
    let mut report = Report::new("tree diagnostics");
    let validation = tree.validate();
    let mut valid = Check::new(
        "tree.nvalid",
        "every length-N word occurs exactly once along root-to-leaf paths",
    );
    valid.record(validation.valid, 0.0, || validation.to_string());
    for w in &validation.missing {
        valid
            .failures
            .push(format!("missing {}", Window(w.clone())));
    }
    for (w, count) in &validation.repeated {
        valid
            .failures
            .push(format!("{} occurs {count} times", Window(w.clone())));
    }
    report.push(valid);
    report.extend(diagnose_windows(p, n, &tree.raw_windows(), m, depth, tol)?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::Cyclotomic;
    use crate::tree::fixtures::{fig1, fig1_with_repeat, haar};

    #[test]
    fn fig1_suites_pass_exactly() {
        let pipe = Pipeline::<Cyclotomic>::from_tree(&fig1()).unwrap();
        assert_eq!(pipe.support.len(), 9);
        assert_eq!(pipe.phi.m(), 2);
        let r = pipe.verify_mra(3, 0.0).unwrap();
        assert!(r.passed, "{r}");
        let w = pipe.verify_wavelets(2, 0.0).unwrap();
        assert!(w.passed, "{w}");
    }

    #[test]
    fn complex_embedding_passes_with_tolerance() {
        let pipe = Pipeline::<Cyclotomic>::from_tree(&haar(3))
            .unwrap()
            .to_c64();
        assert!(pipe.verify_mra(3, 1e-10).unwrap().passed);
        assert!(pipe.verify_wavelets(2, 1e-10).unwrap().passed);
    }

    #[test]
    fn repeated_window_is_diagnosed() {
        let t = fig1_with_repeat();
        let r = diagnose_tree(&t, 3, 1e-10).unwrap();
        assert!(!r.passed);
        for name in [
            "tree.nvalid",
            "mask.rows",
            "orthonormality.rows",
            "orthonormality.gram",
        ] {
            assert!(!r.check(name).unwrap().passed, "{name} should fail\n{r}");
        }
    }
}
