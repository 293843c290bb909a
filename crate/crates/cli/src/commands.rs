use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use dsopt::dataset::{
    binarize, kfold_split, load_csv, sanitize, BinarizeOptions, SanitizeMode,
};
use dsopt::encoder::{build, lam_to_cost, EncodeMode};
use dsopt::model::{evaluate, EvalMode, EvalReport};
use dsopt::optimizer::{default_sparse_n0, learn as learn_set, Mode, RoundRecord, ScopeChoice};
use dsopt::sat::dimacs::emit_dimacs;
use dsopt::{BinDataset, Binarizer, DecisionSet, Scope, SearchLimits, SolveOutcome, SolveStatus};

use crate::args::{
    CvArgs, EncodeArgs, EvalArgs, LearnArgs, ModeArg, ModelArgs, ScopeArg, SearchArgs,
};

/// Exit code when the search ends without any decision set.
const EXIT_NO_RESULT: u8 = 2;

/// Default node bound of the bounded model and of `encode`.
const DEFAULT_N0: usize = 10;

fn load(path: &Path, bins: usize) -> Result<(Binarizer, BinDataset)> {
    let raw = load_csv(path).with_context(|| format!("reading {}", path.display()))?;
    let binarizer = Binarizer::fit(
        &raw,
        BinarizeOptions {
            bins,
            ..Default::default()
        },
    )?;
    let ds = binarizer.transform(&raw)?;
    Ok((binarizer, ds))
}

fn mode_of(m: &ModelArgs, num_features: usize) -> Result<Mode> {
    if m.step == 0 {
        bail!("--step must be at least 1");
    }
    if m.n0 == Some(0) {
        bail!("--n0 must be at least 1");
    }
    match (m.mode, m.lambda) {
        (ModeArg::Sparse, None) => bail!("--mode sparse requires --lambda"),
        (ModeArg::Sparse, Some(l)) if !(l.is_finite() && l >= 0.0) => {
            bail!("--lambda must be a non-negative number")
        }
        (ModeArg::Opt | ModeArg::Mopt, Some(_)) => bail!("--lambda applies to --mode sparse only"),
        _ => {}
    }
    Ok(match m.mode {
        ModeArg::Opt => Mode::Perfect,
        ModeArg::Mopt => Mode::Bounded {
            n0: m.n0.unwrap_or(DEFAULT_N0),
            step: m.step,
        },
        ModeArg::Sparse => Mode::Sparse {
            lambda: m.lambda.unwrap(),
            n0: Some(m.n0.unwrap_or_else(|| default_sparse_n0(num_features))),
            step: m.step,
        },
    })
}

fn scope_of(s: ScopeArg) -> ScopeChoice {
    match s {
        ScopeArg::Aggregated => ScopeChoice::Aggregated,
        ScopeArg::PerClass => ScopeChoice::PerClass,
    }
}

fn seconds(name: &str, s: f64) -> Result<Duration> {
    if !(s.is_finite() && s > 0.0) {
        bail!("{name} must be a positive number of seconds");
    }
    Ok(Duration::from_secs_f64(s))
}

fn limits_of(s: &SearchArgs, max_n: usize, fold: Option<usize>) -> Result<SearchLimits> {
    if max_n == 0 {
        bail!("--max-n must be at least 1");
    }
    let progress = s.verbose.then(|| {
        Arc::new(move |r: &RoundRecord| {
            let mut v = serde_json::to_value(r).expect("records serialize");
            if let Some(f) = fold {
                v["fold"] = f.into();
            }
            eprintln!("{v}");
        }) as Arc<dyn Fn(&RoundRecord) + Send + Sync>
    });
    Ok(SearchLimits {
        total: seconds("--time-limit", s.time_limit)?,
        per_solve: seconds("--solve-limit", s.solve_limit)?,
        max_n,
        progress,
    })
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    if jobs == Some(0) {
        bail!("--jobs must be at least 1");
    }
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()?)
}

/// Merges duplicates; perfect modes also need contradiction-free data.
fn prepare_training(ds: &BinDataset, mode: ModeArg, drop: bool, quiet: bool) -> Result<BinDataset> {
    let (merged, _) = sanitize(ds, SanitizeMode::Sparse);
    if mode == ModeArg::Sparse || !merged.has_contradictions() {
        return Ok(merged);
    }
    if !drop {
        bail!(
            "the data has identical feature vectors with different classes, so no perfect \
             decision set exists; rerun with --drop-contradictions or use --mode sparse"
        );
    }
    let (clean, report) = sanitize(&merged, SanitizeMode::Perfect);
    if !quiet {
        eprintln!(
            "dropped {} contradictory groups ({} examples)",
            report.contradictory_groups, report.removed
        );
    }
    Ok(clean)
}

fn print_outcome(out: &SolveOutcome) {
    println!("status: {}", out.status);
    if let Some(d) = &out.decision_set {
        println!("total size: {}", d.total_size);
        if d.normalized_size() != d.total_size {
            println!("normalized size: {}", d.normalized_size());
        }
    }
    if let Some(obj) = out.objective {
        println!("objective: {obj}");
    }
    let s = &out.stats;
    println!(
        "solver: {} calls, {} conflicts, {:.3} s",
        s.solve_calls,
        s.conflicts,
        s.elapsed.as_secs_f64()
    );
    if let Some(d) = &out.decision_set {
        println!("rules:");
        for r in &d.rules {
            println!("  {}", d.rule_string(r));
        }
    }
}

pub fn learn(a: LearnArgs) -> Result<ExitCode> {
    let (binarizer, ds) = load(&a.data, a.model.bins)?;
    let mode = mode_of(&a.model, ds.num_features())?;
    let limits = limits_of(&a.search, a.model.max_n, None)?;
    let train = prepare_training(&ds, a.model.mode, a.model.drop_contradictions, false)?;
    let scope = scope_of(a.model.scope);
    let out = pool(a.search.jobs)?.install(|| learn_set(&train, mode, scope, &limits))?;
    print_outcome(&out);
    let Some(mut d) = out.decision_set else {
        eprintln!(
            "no decision set found ({}); raise --time-limit or --max-n",
            out.status
        );
        return Ok(ExitCode::from(EXIT_NO_RESULT));
    };
    d.encoding = Some(binarizer);
    if let Some(path) = &a.out {
        fs::write(path, d.to_json()).with_context(|| format!("writing {}", path.display()))?;
        println!("model written to {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn print_report(r: &EvalReport) {
    println!("examples: {}", r.m);
    println!("misclassified: {}", r.e);
    println!("accuracy: {:.1}", r.accuracy);
    if let Some(s) = r.separated_misclass {
        println!("separated misclassifications: {s}");
    }
}

pub fn eval(a: EvalArgs) -> Result<ExitCode> {
    let text =
        fs::read_to_string(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let d = DecisionSet::from_json(&text)?;
    let raw = load_csv(&a.data).with_context(|| format!("reading {}", a.data.display()))?;
    let ds = match &d.encoding {
        Some(b) => b.transform(&raw)?,
        None => binarize(&raw, a.bins)?,
    };
    if d.encoding.is_none() && d.features.len() == ds.num_features() && d.features != ds.feature_names
    {
        eprintln!("warning: model feature names differ from the data's");
    }
    let mode = if a.separated {
        EvalMode::Separated
    } else {
        EvalMode::Standard
    };
    let r = evaluate(&d, &ds, mode)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&r)?);
    } else {
        print_report(&r);
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct FoldResult {
    fold: usize,
    train: usize,
    test: usize,
    status: SolveStatus,
    total_size: Option<usize>,
    objective: Option<u64>,
    accuracy: Option<f64>,
}

#[derive(Debug, Serialize)]
struct CvReport {
    folds: Vec<FoldResult>,
    mean_accuracy: Option<f64>,
    mean_total_size: Option<f64>,
}

fn mean(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = xs.collect();
    v.filter(|v| !v.is_empty())
        .map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn cv(a: CvArgs) -> Result<ExitCode> {
    let (_, ds) = load(&a.data, a.model.bins)?;
    let mode = mode_of(&a.model, ds.num_features())?;
    limits_of(&a.search, a.model.max_n, None)?;
    // Fail early instead of once per fold.
    prepare_training(&ds, a.model.mode, a.model.drop_contradictions, true)?;
    let plan = kfold_split(&ds, a.folds, a.seed)?;
    let scope = scope_of(a.model.scope);
    let folds: Vec<FoldResult> = pool(a.search.jobs)?.install(|| {
        (0..a.folds)
            .into_par_iter()
            .map(|f| -> Result<FoldResult> {
                let (train, test) = plan.split(&ds, f);
                let train =
                    prepare_training(&train, a.model.mode, a.model.drop_contradictions, true)?;
                let limits = limits_of(&a.search, a.model.max_n, Some(f))?;
                let out = learn_set(&train, mode, scope, &limits)?;
                let accuracy = match &out.decision_set {
                    Some(d) => Some(evaluate(d, &test, EvalMode::Standard)?.accuracy),
                    None => None,
                };
                Ok(FoldResult {
                    fold: f,
                    train: train.total_weight() as usize,
                    test: test.len(),
                    status: out.status,
                    total_size: out.decision_set.as_ref().map(|d| d.total_size),
                    objective: out.objective,
                    accuracy,
                })
            })
            .collect::<Result<_>>()
    })?;
    let report = CvReport {
        mean_accuracy: mean(folds.iter().map(|f| f.accuracy)),
        mean_total_size: mean(folds.iter().map(|f| f.total_size.map(|s| s as f64))),
        folds,
    };
    for f in &report.folds {
        let acc = f.accuracy.map_or("-".to_string(), |x| format!("{x:.1}"));
        let size = f.total_size.map_or("-".to_string(), |x| x.to_string());
        println!(
            "fold {}: accuracy {acc}, total size {size}, status {}",
            f.fold + 1,
            f.status
        );
    }
    match (report.mean_accuracy, report.mean_total_size) {
        (Some(acc), Some(size)) => {
            println!("mean accuracy: {acc:.2}");
            println!("mean total size: {size:.2}");
        }
        _ => println!("mean accuracy: -"),
    }
    if let Some(path) = &a.out {
        fs::write(path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if report.mean_accuracy.is_none() {
        eprintln!("some folds produced no decision set; raise --time-limit or --max-n");
        return Ok(ExitCode::from(EXIT_NO_RESULT));
    }
    Ok(ExitCode::SUCCESS)
}

fn safe_label(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// `out.cnf` becomes `out.class-<label>.cnf`.
fn class_path(base: &Path, label: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}.class-{}.{}", safe_label(label), ext.to_string_lossy()),
        None => format!("{stem}.class-{}", safe_label(label)),
    };
    base.with_file_name(name)
}

pub fn sidecar_path(formula: &Path) -> PathBuf {
    let mut name = formula.as_os_str().to_owned();
    name.push(".varmap.json");
    PathBuf::from(name)
}

pub fn encode(a: EncodeArgs) -> Result<ExitCode> {
    let (_, ds) = load(&a.data, a.model.bins)?;
    let mode = mode_of(&a.model, ds.num_features())?;
    let ds = prepare_training(&ds, a.model.mode, a.model.drop_contradictions, false)?;
    let (enc_mode, n, node_cost) = match mode {
        Mode::Perfect => (EncodeMode::Perfect, a.model.n0.unwrap_or(DEFAULT_N0), 0),
        Mode::Bounded { n0, .. } => (EncodeMode::Bounded, n0, 0),
        Mode::Sparse { lambda, n0, .. } => (
            EncodeMode::Sparse,
            n0.unwrap(),
            lam_to_cost(lambda, ds.total_weight()),
        ),
    };
    let targets: Vec<(Scope, PathBuf)> = match a.model.scope {
        ScopeArg::Aggregated => vec![(Scope::Aggregated, a.dimacs.clone())],
        ScopeArg::PerClass => ds
            .classes
            .iter()
            .enumerate()
            .map(|(c, label)| (Scope::PerClass(c), class_path(&a.dimacs, label)))
            .collect(),
    };
    for (scope, path) in targets {
        let b = build(&ds, enc_mode, n, node_cost, scope)?;
        emit_dimacs(&b.formula, &path).with_context(|| format!("writing {}", path.display()))?;
        let side = sidecar_path(&path);
        fs::write(&side, serde_json::to_string_pretty(&b.sidecar(ds.schema()))?)
            .with_context(|| format!("writing {}", side.display()))?;
        println!(
            "{}: {} variables, {} hard, {} soft clauses (varmap: {})",
            path.display(),
            b.formula.num_vars,
            b.formula.hard.len(),
            b.formula.soft.len(),
            side.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}
