use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use serde_json::{json, Value};

use dpsampler::analysis::{
    accuracy_sweep, audit_mechanism, composition_count, exact_marginal_output, mc_marginal_output,
    sweep_to_csv, MechanismKind, EXACT_LIMIT,
};
use dpsampler::baseline::{complexity_comparison, LaplaceMechanism, LaplaceParams};
use dpsampler::dsroo::{build_schedule, DsRoo};
use dpsampler::io::{fmt_lossless, load_dataset, load_distribution, write_json};
use dpsampler::roo::{roo_q_for_epsilon, Roo, RooParams};
use dpsampler::{tv_distance, CategoricalDistribution, PrivacyBudget, RandomStream, Sampler};

use crate::config::{require, usage, ExperimentConfig};
use crate::{AccuracyArgs, AuditArgs, ComplexityArgs, DistArgs, SampleArgs, ScheduleArgs};

pub const EXIT_AUDIT_FAIL: u8 = 1;

/// Where a command's results go: files under `--out`, or stdout.
struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).with_context(|| format!("cannot create {}", d.display()))?;
        }
        Ok(Self { dir })
    }

    fn emit(&self, name: &str, text: &str) -> Result<()> {
        match &self.dir {
            Some(d) => write_text(&d.join(name), text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn manifest(&self, command: &str, config: Value, results: Value) -> Result<()> {
        if let Some(d) = &self.dir {
            let m = json!({
                "command": command,
                "version": dpsampler::VERSION,
                "config": config,
                "results": results,
            });
            write_json(&d.join("manifest.json"), &m)?;
        }
        Ok(())
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| {
        dpsampler::Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    Ok(())
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

pub fn sample(args: SampleArgs, cfg: &ExperimentConfig) -> Result<ExitCode> {
    let mech: MechanismKind = require(args.mech, cfg.mech.clone(), "mech")?.parse()?;
    let epsilon = require(args.epsilon, cfg.single_epsilon()?, "epsilon")?;
    let input = require(args.input, cfg.input.clone(), "input")?;
    let seed = require(args.seed, cfg.seed, "seed")?;
    let count = args.count.or(cfg.count).unwrap_or(1);
    let k = args.k.or(cfg.k);
    let q_override = args.q.or(cfg.q);
    let scale_override = args.scale.or(cfg.scale);
    PrivacyBudget::new(epsilon)?;
    if q_override.is_some() && mech != MechanismKind::Roo {
        return Err(usage("--q only applies to --mech roo"));
    }
    if scale_override.is_some() && mech != MechanismKind::Laplace {
        return Err(usage("--scale only applies to --mech laplace"));
    }
    let data = load_dataset(&input, k)?;
    let (n, k) = (data.n(), data.k());

    let mut details = json!({});
    let sampler: Box<dyn Sampler> = match mech {
        MechanismKind::Roo => {
            let q = match q_override {
                Some(q) => q,
                None => roo_q_for_epsilon(epsilon, n, k)?,
            };
            details["q"] = json!(q);
            Box::new(RooParams::new(q, k, n)?)
        }
        MechanismKind::Dsroo => {
            let mech = DsRoo::new(Arc::new(build_schedule(epsilon, n, k)?));
            details["m"] = json!(data.min_count());
            details["q_m"] = json!(mech.q_for(&data));
            details["q_0"] = json!(mech.schedule().q(0));
            Box::new(mech)
        }
        MechanismKind::Laplace => {
            let params = match scale_override {
                Some(s) => LaplaceParams::new(s, epsilon)?,
                None => LaplaceParams::calibrated(epsilon, n)?,
            };
            details["scale"] = json!(params.scale());
            Box::new(LaplaceMechanism { params })
        }
    };

    let mut csv = String::from("release,letter\n");
    for i in 0..count {
        let mut rng = RandomStream::new(seed, i);
        let y = sampler.sample(&data, &mut rng)?;
        writeln!(csv, "{i},{y}").unwrap();
    }
    let sink = Sink::new(args.out.or(cfg.out.clone()))?;
    sink.emit("samples.csv", &csv)?;
    details["mechanism"] = json!(mech.as_str());
    details["n"] = json!(n);
    details["k"] = json!(k);
    sink.manifest(
        "sample",
        json!({
            "mech": mech.as_str(),
            "epsilon": epsilon,
            "input": path_str(&input),
            "k": k,
            "seed": seed,
            "count": count,
            "q": q_override,
            "scale": scale_override,
        }),
        details,
    )?;
    Ok(ExitCode::SUCCESS)
}

pub fn schedule(args: ScheduleArgs, cfg: &ExperimentConfig) -> Result<ExitCode> {
    let epsilon = require(args.epsilon, cfg.single_epsilon()?, "epsilon")?;
    let n = require(args.n, cfg.n, "n")?;
    let k = require(args.k, cfg.k, "k")?;
    let s = build_schedule(epsilon, n, k)?;
    let sink = Sink::new(args.out.or(cfg.out.clone()))?;
    sink.emit("schedule.csv", &s.to_csv())?;
    sink.manifest(
        "schedule",
        json!({ "epsilon": epsilon, "n": n, "k": k }),
        json!({
            "rows": s.values().len(),
            "q_0": s.q(0),
            "first_zero": s.first_zero(),
        }),
    )?;
    Ok(ExitCode::SUCCESS)
}

pub fn audit(args: AuditArgs, cfg: &ExperimentConfig) -> Result<ExitCode> {
    let mech: MechanismKind = require(args.mech, cfg.mech.clone(), "mech")?.parse()?;
    let epsilon = require(args.epsilon, cfg.single_epsilon()?, "epsilon")?;
    let n = require(args.n, cfg.n, "n")?;
    let k = require(args.k, cfg.k, "k")?;
    let tol = args
        .tol
        .or(cfg.tol)
        .unwrap_or(PrivacyBudget::DEFAULT_RATIO_TOLERANCE);
    let q_override = args.q.or(cfg.q);
    let budget = PrivacyBudget::with_tolerance(epsilon, tol)?;
    let report =
        match mech {
            MechanismKind::Roo => {
                let q = match q_override {
                    Some(q) => q,
                    None => roo_q_for_epsilon(epsilon, n, k)?,
                };
                audit_mechanism(&Roo { q }, n, k, &budget)?
            }
            MechanismKind::Dsroo => {
                if q_override.is_some() {
                    return Err(usage("--q only applies to --mech roo"));
                }
                let mech = DsRoo::new(Arc::new(build_schedule(epsilon, n, k)?));
                audit_mechanism(&mech, n, k, &budget)?
            }
            MechanismKind::Laplace => return Err(usage(
                "the laplace sampler has no closed-form output law; audit supports roo and dsroo",
            )),
        };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    let out = args.out.or(cfg.out.clone());
    let sink = Sink::new(out.clone())?;
    sink.emit("audit.json", &text)?;
    sink.manifest(
        "audit",
        json!({ "mech": mech.as_str(), "epsilon": epsilon, "n": n, "k": k, "tol": tol, "q": q_override }),
        json!({ "pass": report.pass, "pairs_checked": report.pairs_checked }),
    )?;
    if out.is_some() {
        eprintln!(
            "{}: max ratio {} vs bound {} over {} pairs",
            if report.pass { "PASS" } else { "FAIL" },
            fmt_lossless(report.max_ratio),
            fmt_lossless(report.bound),
            report.pairs_checked
        );
    }
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_AUDIT_FAIL)
    })
}

fn mechanism_list(flag: Vec<String>, file: Option<&String>) -> Result<Vec<MechanismKind>> {
    let raw: Vec<String> = if !flag.is_empty() {
        flag
    } else if let Some(s) = file {
        s.split(',').map(|t| t.trim().to_string()).collect()
    } else {
        return Ok(MechanismKind::ALL.to_vec());
    };
    let mut out = Vec::new();
    for r in raw {
        let m: MechanismKind = r.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

pub fn accuracy(args: AccuracyArgs, cfg: &ExperimentConfig) -> Result<ExitCode> {
    let dist_path = require(args.dist, cfg.dist.clone(), "dist")?;
    let n = require(args.n, cfg.n, "n")?;
    let epsilons = if args.epsilon.is_empty() {
        require(None, cfg.epsilon.clone(), "epsilon")?.into_vec()
    } else {
        args.epsilon
    };
    for &e in &epsilons {
        PrivacyBudget::new(e)?;
    }
    let mechs = mechanism_list(args.mech, cfg.mech.as_ref())?;
    let trials = args.trials.or(cfg.trials).unwrap_or(10_000);
    let seed = require(args.seed, cfg.seed, "seed")?;
    let p = load_distribution(&dist_path, args.k.or(cfg.k))?;
    let points = accuracy_sweep(
        &p,
        n,
        &epsilons,
        &mechs,
        trials,
        &RandomStream::new(seed, 0),
    )?;
    let sink = Sink::new(args.out.or(cfg.out.clone()))?;
    sink.emit("sweep.csv", &sweep_to_csv(&points))?;
    sink.manifest(
        "accuracy",
        json!({
            "dist": path_str(&dist_path),
            "k": p.k(),
            "n": n,
            "epsilon": epsilons,
            "mech": mechs.iter().map(|m| m.as_str()).collect::<Vec<_>>(),
            "trials": trials,
            "seed": seed,
        }),
        json!({ "rows": points.len(), "exact": composition_count(n, p.k()) <= EXACT_LIMIT }),
    )?;
    Ok(ExitCode::SUCCESS)
}

pub fn complexity(args: ComplexityArgs, cfg: &ExperimentConfig) -> Result<ExitCode> {
    let k = require(args.k, cfg.k, "k")?;
    let alpha = require(args.alpha, cfg.alpha, "alpha")?;
    let epsilon = require(args.epsilon, cfg.single_epsilon()?, "epsilon")?;
    let c = complexity_comparison(k, alpha, epsilon)?;
    let table = format!(
        "{:<12}{:>14}\n{:<12}{:>14}\n{:<12}{:>14}\n{:<12}{:>14}\n{:<12}{:>14}\n",
        "k",
        k,
        "alpha",
        sig6(alpha),
        "epsilon",
        sig6(epsilon),
        "n_roo",
        sig6(c.n_roo),
        "n_subrr",
        sig6(c.n_subrr),
    ) + &format!(
        "{:<12}{:>14}\n{:<12}{:>14}\n",
        "n_baseline",
        sig6(c.n_baseline),
        "ordering_ok",
        c.ordering_ok
    );
    print!("{table}");
    if let Some(dir) = args.out.or(cfg.out.clone()) {
        let sink = Sink::new(Some(dir.clone()))?;
        write_json(&dir.join("complexity.json"), &c)?;
        sink.manifest(
            "complexity",
            json!({ "k": k, "alpha": alpha, "epsilon": epsilon }),
            json!({ "ordering_ok": c.ordering_ok }),
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

/// Six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Exact,
    Mc,
    Auto,
}

impl std::str::FromStr for Mode {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "mc" => Ok(Mode::Mc),
            "auto" => Ok(Mode::Auto),
            other => Err(usage(format!(
                "unknown mode `{other}` (expected exact, mc or auto)"
            ))),
        }
    }
}

pub fn dist(args: DistArgs, cfg: &ExperimentConfig) -> Result<ExitCode> {
    let mech: MechanismKind = require(args.mech, cfg.mech.clone(), "mech")?.parse()?;
    let epsilon = require(args.epsilon, cfg.single_epsilon()?, "epsilon")?;
    let dist_path = require(args.dist, cfg.dist.clone(), "dist")?;
    let n = require(args.n, cfg.n, "n")?;
    let mode: Mode = args
        .mode
        .or(cfg.mode.clone())
        .as_deref()
        .unwrap_or("auto")
        .parse()?;
    let q_override = args.q.or(cfg.q);
    PrivacyBudget::new(epsilon)?;
    if q_override.is_some() && mech != MechanismKind::Roo {
        return Err(usage("--q only applies to --mech roo"));
    }
    let p = load_distribution(&dist_path, args.k.or(cfg.k))?;
    let k = p.k();
    let exact = match mode {
        Mode::Exact if mech == MechanismKind::Laplace => {
            return Err(usage("the laplace sampler only supports --mode mc"))
        }
        Mode::Exact => true,
        Mode::Mc => false,
        Mode::Auto => mech != MechanismKind::Laplace && composition_count(n, k) <= EXACT_LIMIT,
    };
    let (seed, trials) = if exact {
        (None, None)
    } else {
        (
            Some(require(args.seed, cfg.seed, "seed")?),
            Some(args.trials.or(cfg.trials).unwrap_or(10_000)),
        )
    };

    let (q_marg, stderr): (CategoricalDistribution, Vec<f64>) = match mech {
        MechanismKind::Roo => {
            let q = match q_override {
                Some(q) => q,
                None => roo_q_for_epsilon(epsilon, n, k)?,
            };
            marginal(&p, n, &Roo { q }, exact, seed, trials)?
        }
        MechanismKind::Dsroo => {
            let m = DsRoo::new(Arc::new(build_schedule(epsilon, n, k)?));
            marginal(&p, n, &m, exact, seed, trials)?
        }
        MechanismKind::Laplace => {
            let m = LaplaceMechanism {
                params: LaplaceParams::calibrated(epsilon, n)?,
            };
            let est = mc_marginal_output(
                &p,
                n,
                &m,
                trials.unwrap(),
                &RandomStream::new(seed.unwrap(), 0),
            )?;
            (est.distribution, est.stderr)
        }
    };
    let tv = tv_distance(&q_marg, &p)?;
    let mut csv = String::from("letter,probability,stderr\n");
    for (i, (pr, se)) in q_marg.probs().iter().zip(&stderr).enumerate() {
        writeln!(csv, "{},{},{}", i + 1, fmt_lossless(*pr), fmt_lossless(*se)).unwrap();
    }
    let sink = Sink::new(args.out.or(cfg.out.clone()))?;
    sink.emit("marginal.csv", &csv)?;
    eprintln!("tv = {}", sig6(tv));
    sink.manifest(
        "dist",
        json!({
            "mech": mech.as_str(),
            "epsilon": epsilon,
            "dist": path_str(&dist_path),
            "n": n,
            "k": k,
            "mode": if exact { "exact" } else { "mc" },
            "q": q_override,
            "seed": seed,
            "trials": trials,
        }),
        json!({ "tv": tv }),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn marginal<M: dpsampler::OutputLaw>(
    p: &CategoricalDistribution,
    n: u64,
    mech: &M,
    exact: bool,
    seed: Option<u64>,
    trials: Option<u64>,
) -> Result<(CategoricalDistribution, Vec<f64>)> {
    if exact {
        let q = exact_marginal_output(p, n, mech)?;
        let k = q.k();
        Ok((q, vec![0.0; k]))
    } else {
        let est = mc_marginal_output(
            p,
            n,
            mech,
            trials.unwrap(),
            &RandomStream::new(seed.unwrap(), 0),
        )?;
        Ok((est.distribution, est.stderr))
    }
}
