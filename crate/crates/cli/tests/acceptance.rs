//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p vilenkin-cli --test acceptance -- --nocapture`.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vilenkin::grid::{all_words, word_string};
use vilenkin::refinable::{is_elementary, verify_refinement, verify_shift_orthonormality};
use vilenkin::tree::fixtures::{fig1, fig1_with_repeat, haar};
use vilenkin::wavelet::wavelet_set;
use vilenkin::{
    allowed_windows, analyze, diagnose_tree, enumerate_nvalid, projection, solve_coefficients,
    support_set, support_set_bruteforce, synthesize, tree_from_support, ComplexPipeline,
    ComplexSignal, Cyclotomic, ExactPhi, ExactPipeline, Mask, PTree, Report, Scalar,
};

/// Comparisons in the cyclotomic field are equalities.
const EXACT: f64 = 0.0;
/// Floating point tolerance for every numeric criterion.
const NUMERIC: f64 = 1e-10;

const FIG1_SUPPORT: [&str; 9] = [
    "0000", "0120", "0200", "1020", "1102", "1200", "2000", "2102", "2200",
];

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn passed(report: &Report, context: &str) -> Result<(), String> {
    ensure(report.passed, || {
        let failing: Vec<String> = report.failing().map(|c| c.name.clone()).collect();
        format!("{context}: {}", failing.join(", "))
    })
}

fn small_trees() -> Vec<PTree> {
    [(2, 1), (2, 2), (3, 1), (3, 2)]
        .into_iter()
        .flat_map(|(p, n)| enumerate_nvalid(p, n, None).unwrap())
        .collect()
}

fn c1_fig1() -> Outcome {
    let t = fig1();
    let v = t.validate();
    ensure(v.valid, || format!("validator rejects: {v}"))?;
    ensure(t.height() == 6, || format!("height {}", t.height()))?;
    let w = allowed_windows(&t).map_err(|e| e.to_string())?;
    ensure(w.len() == 9, || format!("{} allowed windows", w.len()))?;
    Ok(format!("{v}"))
}

fn c2_support_oracle() -> Outcome {
    let mut trees = small_trees();
    trees.push(fig1());
    for t in &trees {
        let mask = Mask::from_tree(t, None).map_err(|e| e.to_string())?;
        let walk = support_set(&mask).map_err(|e| e.to_string())?;
        let brute = support_set_bruteforce(&mask, walk.m()).map_err(|e| e.to_string())?;
        ensure(walk == brute, || format!("sets differ for {}", t.to_json()))?;
    }
    let e = support_set(&Mask::from_tree(&fig1(), None).unwrap()).unwrap();
    let words: Vec<String> = e.words().iter().map(|w| word_string(w, 3)).collect();
    ensure(words == FIG1_SUPPORT, || format!("fig1 set {words:?}"))?;
    ensure((e.n(), e.m()) == (2, 2), || {
        format!("({}, {})-elementary", e.n(), e.m())
    })?;
    passed(&is_elementary(&e), "elementarity")?;
    Ok(format!(
        "{} trees, fig1 set has {} cosets",
        trees.len(),
        e.len()
    ))
}

fn c3_orthonormality() -> Outcome {
    let mut trees = small_trees();
    trees.extend([fig1(), haar(2), haar(3), haar(5)]);
    for t in &trees {
        let mask = Mask::from_tree(t, None).map_err(|e| e.to_string())?;
        passed(&mask.check(), "mask rows")?;
    }
    let mut fourier = 0;
    for t in [fig1(), haar(2), haar(3), haar(5)]
        .iter()
        .chain(trees.iter().filter(|t| t.p().pow(t.n()) <= 4))
    {
        let pipe = ExactPipeline::from_tree(t).map_err(|e| e.to_string())?;
        passed(
            &verify_shift_orthonormality(&pipe.phi, t.n(), EXACT).map_err(|e| e.to_string())?,
            "Fourier rows",
        )?;
        fourier += 1;
    }
    let exact = ExactPipeline::from_tree(&fig1()).unwrap();
    let r = verify_shift_orthonormality(&exact.phi, 3, EXACT).unwrap();
    passed(&r, "exact Gram")?;
    let gram = r.check("orthonormality.gram").unwrap();
    ensure(gram.evaluated == 27 * 27, || {
        format!("{} Gram entries", gram.evaluated)
    })?;
    let numeric = ComplexPipeline::from_tree(&fig1()).unwrap();
    let r = verify_shift_orthonormality(&numeric.phi, 3, NUMERIC).unwrap();
    passed(&r, "complex Gram")?;
    Ok(format!(
        "{} mask row sets, {fourier} Fourier row sets; 27x27 Gram exact, complex deviation {:.1e}",
        trees.len(),
        r.max_deviation()
    ))
}

fn c4_refinement() -> Outcome {
    let mut trees: Vec<PTree> = small_trees()
        .into_iter()
        .filter(|t| t.p().pow(t.n()) <= 4)
        .collect();
    trees.extend([fig1(), haar(3), haar(5)]);
    for t in &trees {
        let mask = Mask::from_tree(t, None).map_err(|e| e.to_string())?;
        let phi = ExactPhi::from_mask(&mask).map_err(|e| e.to_string())?;
        let beta = solve_coefficients::<Cyclotomic>(&mask).map_err(|e| e.to_string())?;
        let r = verify_refinement(&phi, &mask, &beta, EXACT).map_err(|e| e.to_string())?;
        passed(&r, "refinement")?;
    }
    let pipe = ExactPipeline::from_tree(&fig1()).unwrap();
    let r = verify_refinement(&pipe.phi, &pipe.mask, &pipe.beta, EXACT).unwrap();
    let fourier = r.check("refinement.fourier").unwrap().evaluated;
    let shell = r.check("refinement.shell").unwrap().evaluated;
    Ok(format!(
        "{} functions; fig1: {fourier} cosets, {shell} shell cosets",
        trees.len()
    ))
}

fn c5_coefficients() -> Outcome {
    let mut trees = small_trees();
    trees.push(fig1());
    for t in &trees {
        let mask = Mask::from_tree(t, None).map_err(|e| e.to_string())?;
        let beta = solve_coefficients::<Cyclotomic>(&mask).map_err(|e| e.to_string())?;
        let p = mask.p();
        for (i, (b, lam)) in beta.mask_values().iter().zip(mask.lambda()).enumerate() {
            let want: Cyclotomic = lam.to_scalar(p).unwrap();
            ensure(*b == want, || format!("mask index {i} not reproduced"))?;
        }
        ensure(beta.energy() == Cyclotomic::from_ratio(p as i64, 1), || {
            "sum |beta|^2 != p".into()
        })?;
    }
    let haar = ExactPipeline::from_tree(&haar(3)).unwrap();
    for (w, b) in all_words(3, 2).zip(haar.beta.values()) {
        let want = Cyclotomic::from_ratio(i64::from(w[1] == 0), 1);
        ensure(*b == want, || format!("Haar beta at {w:?}"))?;
    }
    Ok(format!(
        "{} masks reproduced; Haar beta = 1 on {{0, g_-1, 2g_-1}}",
        trees.len()
    ))
}

fn c6_wavelets() -> Outcome {
    let mut summary = Vec::new();
    for (name, t) in [("Haar p=3", haar(3)), ("fig1", fig1())] {
        let exact = ExactPipeline::from_tree(&t).unwrap();
        passed(&exact.verify_wavelets(2, EXACT).unwrap(), name)?;
        let numeric = exact.to_c64();
        let r = numeric.verify_wavelets(2, NUMERIC).unwrap();
        passed(&r, name)?;
        for l in 1..3 {
            let set = wavelet_set(&exact.mask, &exact.support, l).map_err(|e| e.to_string())?;
            ensure(set.len() == 9usize.min(3usize.pow(t.n())), || {
                format!("{name}: l = {l} set has {} cosets", set.len())
            })?;
        }
        summary.push(format!("{name} dev {:.1e}", r.max_deviation()));
    }
    Ok(summary.join(", "))
}

fn c7_inverse() -> Outcome {
    let mut count = 0;
    for (p, n) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)] {
        for t in enumerate_nvalid(p, n, None).unwrap() {
            let w = allowed_windows(&t).unwrap();
            let back = tree_from_support(&w, p, n).map_err(|e| e.to_string())?;
            ensure(allowed_windows(&back).unwrap() == w, || {
                format!("windows differ for {}", t.to_json())
            })?;
            count += 1;
        }
    }
    Ok(format!("{count} trees"))
}

fn c8_bound() -> Outcome {
    let mut parts = Vec::new();
    for p in [3u32, 5] {
        let mut count = 0;
        let mut worst = 0;
        for t in enumerate_nvalid(p, 1, None).unwrap() {
            let m = support_set(&Mask::from_tree(&t, None).unwrap())
                .unwrap()
                .m() as usize;
            ensure(m == t.height() - 2, || {
                format!("M = {m}, H = {}", t.height())
            })?;
            ensure(m <= p as usize - 2, || {
                format!("p = {p}: M = {m} exceeds p - 2")
            })?;
            worst = worst.max(m);
            count += 1;
        }
        parts.push(format!("p = {p}: {count} trees, max M = {worst}"));
    }
    Ok(parts.join("; "))
}

fn c9_transform() -> Outcome {
    let mut summary = Vec::new();
    for (name, t) in [
        ("Haar p=2", haar(2)),
        ("Haar p=3", haar(3)),
        ("fig1", fig1()),
    ] {
        let pipe = ExactPipeline::from_tree(&t).unwrap().to_c64();
        let (r, s, levels) = (t.n() + 2, pipe.phi.m() + 1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let f = ComplexSignal::random_in_span(&pipe.phi, r, s, &mut rng).unwrap();
            let a = analyze(&f, &pipe.phi, &pipe.beta, &pipe.bank, levels).unwrap();
            let back = synthesize(&a, &pipe.phi, &pipe.beta, &pipe.bank).unwrap();
            let err = back.max_distance(&f).unwrap();
            ensure(err <= NUMERIC, || {
                format!("{name}: reconstruction error {err:e}")
            })?;
            let energy = f.energy().re;
            let gap = (a.energy().re - energy).abs();
            ensure(gap <= NUMERIC * energy.max(1.0), || {
                format!("{name}: Parseval gap {gap:e}")
            })?;
            worst = worst.max(err);
        }
        for _ in 0..10 {
            let f = ComplexSignal::random(t.p(), r, s, &mut rng);
            let pf = projection(&f, &pipe.phi, &pipe.beta, &pipe.bank, levels).unwrap();
            let ppf = projection(&pf, &pipe.phi, &pipe.beta, &pipe.bank, levels).unwrap();
            let err = pf.max_distance(&ppf).unwrap();
            ensure(err <= NUMERIC, || {
                format!("{name}: projection not idempotent ({err:e})")
            })?;
            ensure(pf.energy().re <= f.energy().re + NUMERIC, || {
                format!("{name}: projection raised the energy")
            })?;
        }
        summary.push(format!("{name} max error {worst:.1e}"));
    }
    Ok(summary.join(", "))
}

fn data(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(file)
}

fn c10_negative_control() -> Outcome {
    let t = fig1_with_repeat();
    ensure(!t.is_nvalid(), || {
        "the repeated-window tree validates".into()
    })?;
    let r = diagnose_tree(&t, 3, NUMERIC).map_err(|e| e.to_string())?;
    for name in ["orthonormality.rows", "orthonormality.gram"] {
        let c = r.check(name).ok_or_else(|| format!("{name} missing"))?;
        ensure(!c.passed, || {
            format!("{name} passes on the negative control")
        })?;
    }
    let out = Command::new(env!("CARGO_BIN_EXE_vilenkin"))
        .args(["mra", "verify"])
        .arg(data("fig1_repeat.json"))
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(2), || {
        format!("exit status {:?}", out.status.code())
    })?;
    let gram = r.check("orthonormality.gram").unwrap();
    Ok(format!(
        "exit 2; Gram deviation {:.3}, {} failing entries",
        gram.max_deviation, gram.failed
    ))
}

/// Written to the process stdout so the lines show without `--nocapture`.
fn report(line: std::fmt::Arguments) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("1 fig1 fixture", 1, c1_fig1),
        ("2 support-set oracle", 1, c2_support_oracle),
        ("3 orthonormality", 5, c3_orthonormality),
        ("4 refinement", 5, c4_refinement),
        ("5 coefficient solve", 5, c5_coefficients),
        ("6 wavelet orthogonality", 30, c6_wavelets),
        ("7 tree from support", 5, c7_inverse),
        ("8 N=1 support bound", 5, c8_bound),
        ("9 transform", 60, c9_transform),
        ("10 negative control", 5, c10_negative_control),
    ];
    let mut failures = Vec::new();
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > Duration::from_secs(budget) => {
                Err(format!("{msg}; took {elapsed:.2?}, budget {budget} s"))
            }
            other => other,
        };
        match outcome {
            Ok(msg) => report(format_args!(
                "PASS  criterion {name} ({elapsed:.2?}): {msg}"
            )),
            Err(msg) => {
                report(format_args!(
                    "FAIL  criterion {name} ({elapsed:.2?}): {msg}"
                ));
                failures.push(name);
            }
        }
    }
    assert!(failures.is_empty(), "failing criteria: {failures:?}");
}
