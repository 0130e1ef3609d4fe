use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vilenkin::bundle::{load_mra_or_wavelets, read_phases, MRA_FORMAT, WAVELET_FORMAT};
use vilenkin::tree::TreeFile;
use vilenkin::{
    analyze, build_nvalid, diagnose_tree, energy_report, enumerate_nvalid, synthesize,
    tree_from_support, Check, CoefficientBundle, Complex64, ComplexSignal, Cyclotomic, Error, Mask,
    MraBundle, PTree, Pipeline, Report, WaveletBundle,
};

use crate::{CheckArgs, Command, MraCmd, TransformCmd, TreeCmd, WaveletCmd};

pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn code(&self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 2,
        }
    }

    fn from(passed: bool) -> Self {
        if passed {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// 2 for failed mathematical conditions, 1 for everything else.
pub fn error_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::MalformedTree { .. }
            | Error::InvalidTree(_)
            | Error::InvalidSupport(_)
            | Error::Mask(_)
            | Error::MaskNotOrthogonal(_)
            | Error::Consistency(_),
        ) => 2,
        _ => 1,
    }
}

pub fn run(command: Command) -> Result<Status> {
    match command {
        Command::Tree(cmd) => tree(cmd),
        Command::Mra(cmd) => mra(cmd),
        Command::Wavelet(cmd) => wavelet(cmd),
        Command::Transform(cmd) => transform(cmd),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes to `path`, or to standard output without one.
fn emit(output: Option<&PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => out(text),
    }
}

/// Standard output; a closed pipe ends the output quietly.
fn out(text: &str) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{}", text.trim_end()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        bail!("--tol must be a positive number, got {tol}");
    }
    Ok(())
}

/// Prints the JSON report and a summary line per failing check.
fn finish(report: &Report) -> Result<Status> {
    out(&report.to_json())?;
    for c in &report.checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        eprintln!(
            "{mark} {} ({} checked, max deviation {:.2e})",
            c.name, c.evaluated, c.max_deviation
        );
        if !c.passed {
            for why in c.failures.iter().take(5) {
                eprintln!("       {why}");
            }
        }
    }
    eprintln!(
        "{}: {}",
        report.title,
        if report.passed { "PASS" } else { "FAIL" }
    );
    Ok(Status::from(report.passed))
}

fn read_tree(path: &Path) -> Result<PTree> {
    Ok(PTree::from_json(&read(path)?)?)
}

fn tree(cmd: TreeCmd) -> Result<Status> {
    match cmd {
        TreeCmd::Build {
            p,
            n,
            strategy,
            seed,
            output,
        } => {
            let t = build_nvalid(p, n, strategy, seed)?;
            eprintln!("built tree: {}", t.validate());
            emit(output.as_ref(), &t.to_json())?;
            Ok(Status::Pass)
        }
        TreeCmd::Validate { tree } => {
            let t = read_tree(&tree)?;
            let v = t.validate();
            out(&serde_json::to_string_pretty(&v)?)?;
            eprintln!("{v}");
            for w in &v.missing {
                eprintln!("  missing window {}", vilenkin::Window(w.clone()));
            }
            for (w, count) in &v.repeated {
                eprintln!(
                    "  window {} occurs {count} times",
                    vilenkin::Window(w.clone())
                );
            }
            Ok(Status::from(v.valid))
        }
        TreeCmd::Enumerate {
            p,
            n,
            limit,
            output,
        } => {
            let trees: Vec<TreeFile> = enumerate_nvalid(p, n, limit)?
                .map(|t| t.to_file())
                .collect();
            eprintln!("{} N-valid trees for p = {p}, N = {n}", trees.len());
            emit(output.as_ref(), &serde_json::to_string_pretty(&trees)?)?;
            Ok(Status::Pass)
        }
        TreeCmd::FromMask { mask, p, output } => {
            let text = read(&mask)?;
            let mask = if text.trim_start().starts_with('{') {
                load_mra_or_wavelets(&text)?.mask
            } else {
                let Some(p) = p else {
                    bail!("--p is required for mask CSV input")
                };
                Mask::from_csv(p, &text)?
            };
            let t = tree_from_support(&mask.support_windows(), mask.p(), mask.n())?;
            eprintln!("rebuilt tree: {}", t.validate());
            emit(output.as_ref(), &t.to_json())?;
            Ok(Status::Pass)
        }
        TreeCmd::Export {
            tree,
            format,
            output,
        } => {
            let t = read_tree(&tree)?;
            emit(output.as_ref(), &t.export(&format)?)?;
            Ok(Status::Pass)
        }
    }
}

fn mask_for(t: &PTree, phases: Option<&PathBuf>) -> Result<Mask> {
    let table = phases
        .map(|path| -> Result<_> { Ok(read_phases(&read(path)?, t.p())?) })
        .transpose()?;
    Ok(Mask::from_tree(t, table.as_ref())?)
}

/// Invalid trees get the orthonormality diagnostics and status 2.
fn diagnose(t: &PTree, check: &CheckArgs) -> Result<Status> {
    eprintln!("tree is not N-valid: {}", t.validate());
    let report = diagnose_tree(t, check.depth.unwrap_or(3), check.tol)?;
    finish(&report)
}

fn mra(cmd: MraCmd) -> Result<Status> {
    match cmd {
        MraCmd::Derive {
            tree,
            phases,
            output,
            check,
        } => {
            check_tol(check.tol)?;
            let t = read_tree(&tree)?;
            if !t.is_nvalid() {
                return diagnose(&t, &check);
            }
            let mask = mask_for(&t, phases.as_ref())?;
            let bundle = if mask.is_exact() {
                MraBundle::from_pipeline(&Pipeline::<Cyclotomic>::from_mask(mask)?, Some(&t))
            } else {
                MraBundle::from_pipeline(&Pipeline::<Complex64>::from_mask(mask)?, Some(&t))
            };
            eprintln!("|E| = {}, M = {}", bundle.support.len(), bundle.m);
            emit(output.as_ref(), &bundle.to_json())?;
            Ok(Status::Pass)
        }
        MraCmd::Verify {
            input,
            phases,
            check,
        } => {
            check_tol(check.tol)?;
            let depth = check.depth.unwrap_or(3);
            let text = read(&input)?;
            let v: serde_json::Value = serde_json::from_str(&text).context("input is not JSON")?;
            let report = match v.get("format").and_then(|f| f.as_str()) {
                Some(MRA_FORMAT) => MraBundle::from_json(&text)?.verify(depth, check.tol)?,
                Some(WAVELET_FORMAT) => WaveletBundle::from_json(&text)?
                    .mra
                    .verify(depth, check.tol)?,
                Some(other) => bail!("unrecognised bundle format `{other}`"),
                None => {
                    let t = PTree::from_json(&text)?;
                    if !t.is_nvalid() {
                        return diagnose(&t, &check);
                    }
                    let mask = mask_for(&t, phases.as_ref())?;
                    if mask.is_exact() {
                        Pipeline::<Cyclotomic>::from_mask(mask)?.verify_mra(depth, 0.0)?
                    } else {
                        Pipeline::<Complex64>::from_mask(mask)?.verify_mra(depth, check.tol)?
                    }
                }
            };
            finish(&report)
        }
    }
}

fn wavelet(cmd: WaveletCmd) -> Result<Status> {
    match cmd {
        WaveletCmd::Derive {
            bundle,
            output,
            csv_dir,
        } => {
            let mra = load_mra_or_wavelets(&read(&bundle)?)?;
            let mask = mra.mask.clone();
            let w = if mask.is_exact() {
                WaveletBundle::from_pipeline(&Pipeline::<Cyclotomic>::from_mask(mask)?, mra)
            } else {
                WaveletBundle::from_pipeline(&Pipeline::<Complex64>::from_mask(mask)?, mra)
            };
            eprintln!(
                "{} wavelets on G_-{} / G_{}",
                w.psi.len(),
                w.mra.n,
                w.mra.m + 1
            );
            if let Some(dir) = csv_dir {
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                let bank = w.stored_bank()?;
                for (l, (beta, psi)) in bank.betas().iter().zip(bank.psi()).enumerate() {
                    let l = l + 1;
                    fs::write(dir.join(format!("beta_{l}.csv")), beta.to_csv())?;
                    let psi = ComplexSignal::from_function(psi.clone())?;
                    fs::write(dir.join(format!("psi_{l}.csv")), psi.to_csv())?;
                }
            }
            emit(output.as_ref(), &w.to_json())?;
            Ok(Status::Pass)
        }
        WaveletCmd::Verify { bundle, check } => {
            check_tol(check.tol)?;
            let depth = check.depth.unwrap_or(2);
            let text = read(&bundle)?;
            let v: serde_json::Value = serde_json::from_str(&text).context("input is not JSON")?;
            let report = if v.get("format").and_then(|f| f.as_str()) == Some(WAVELET_FORMAT) {
                WaveletBundle::from_json(&text)?.verify(depth, check.tol)?
            } else {
                let mra = load_mra_or_wavelets(&text)?;
                if mra.mask.is_exact() {
                    Pipeline::<Cyclotomic>::from_mask(mra.mask)?.verify_wavelets(depth, 0.0)?
                } else {
                    Pipeline::<Complex64>::from_mask(mra.mask)?.verify_wavelets(depth, check.tol)?
                }
            };
            finish(&report)
        }
    }
}

fn transform(cmd: TransformCmd) -> Result<Status> {
    match cmd {
        TransformCmd::Analyze {
            bundle,
            signal,
            levels,
            resolution,
            expect_in_span,
            tol,
            output,
        } => {
            check_tol(tol)?;
            let pipe = load_mra_or_wavelets(&read(&bundle)?)?.rebuild()?;
            let s = resolution.unwrap_or(pipe.phi.m() + 1);
            let f = ComplexSignal::from_csv_auto(pipe.mask.p(), s, &read(&signal)?)?;
            let a = analyze(&f, &pipe.phi, &pipe.beta, &pipe.bank, levels)?;
            let back = synthesize(&a, &pipe.phi, &pipe.beta, &pipe.bank)?;
            let (energy, mut report) = energy_report(&f, &a, &back, expect_in_span, tol)?;
            report.title = "transform".into();
            eprintln!(
                "signal energy {:.12}, coefficient energy {:.12}, residual {:.3e}",
                energy.signal, energy.coefficients, energy.residual
            );
            let p = f.p() as usize;
            let mut count = Check::new(
                "transform.finite-level-completeness",
                "coefficient count equals the dimension p^(R+1) of the truncated V_1",
            );
            let total = a.approx.len() + a.detail_count();
            count.record(total == p.pow(f.r() + 1), 0.0, || {
                format!("{total} coefficients")
            });
            report.push(count);
            if expect_in_span {
                let err = back.max_distance(&f)?;
                let mut rec = Check::new("transform.reconstruction", "synthesize(analyze(f)) = f");
                rec.record(err <= tol, err, || format!("max error {err:e}"));
                report.push(rec);
            }
            let bundle = CoefficientBundle::from_analysis(&a);
            match output {
                Some(path) => {
                    fs::write(&path, bundle.to_json())
                        .with_context(|| format!("writing {}", path.display()))?;
                    finish(&report)
                }
                None => {
                    out(&bundle.to_json())?;
                    eprintln!("{report}");
                    Ok(Status::from(report.passed))
                }
            }
        }
        TransformCmd::Synthesize {
            bundle,
            coefficients,
            output,
        } => {
            let pipe = load_mra_or_wavelets(&read(&bundle)?)?.rebuild()?;
            let a = CoefficientBundle::from_json(&read(&coefficients)?)?.to_analysis()?;
            if a.p != pipe.mask.p() {
                bail!(
                    "coefficients are over Z_{}, the bundle over Z_{}",
                    a.p,
                    pipe.mask.p()
                );
            }
            let f = synthesize(&a, &pipe.phi, &pipe.beta, &pipe.bank)?;
            emit(output.as_ref(), &f.to_csv())?;
            Ok(Status::Pass)
        }
        TransformCmd::Random {
            bundle,
            r,
            resolution,
            in_span,
            seed,
            output,
        } => {
            let pipe = load_mra_or_wavelets(&read(&bundle)?)?.rebuild()?;
            let s = resolution.unwrap_or(pipe.phi.m() + 1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = if in_span {
                ComplexSignal::random_in_span(&pipe.phi, r, s, &mut rng)?
            } else {
                ComplexSignal::random(pipe.mask.p(), r, s, &mut rng)
            };
            emit(output.as_ref(), &f.to_csv())?;
            Ok(Status::Pass)
        }
    }
}
