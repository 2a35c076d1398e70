use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use fmrbench_core::data::{load_csv, Dataset, GroupIndex, Schema};
use fmrbench_core::mmcl::{mmcl_fit, GroupedData, Init, MmclConfig, MmclResult};
use fmrbench_core::regress::{fit, FitConfig};
use fmrbench_core::synth::nmi;
use serde::Serialize;

use crate::output::{parse_list, write_atomic};

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitArg {
    Mmclpp,
    Random,
}

impl From<InitArg> for Init {
    fn from(a: InitArg) -> Init {
        match a {
            InitArg::Mmclpp => Init::MmclPp,
            InitArg::Random => Init::Random,
        }
    }
}

#[derive(clap::Args)]
pub struct Args {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    group_col: String,
    /// Comma-separated; a model per cluster is written for each.
    #[arg(long)]
    response_cols: String,
    /// Comma-separated; defaults to every unclaimed column.
    #[arg(long)]
    feature_cols: Option<String>,
    /// Response driving the clustering; defaults to the first.
    #[arg(long)]
    cluster_on: Option<String>,
    /// Row-level ground truth, scored by NMI when given.
    #[arg(long)]
    truth_col: Option<String>,
    /// Extra columns to tolerate in the input without treating them as features.
    #[arg(long, default_value = "")]
    passthrough_cols: String,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Candidate K values scored by held-out R^2; K=1 is always scored too.
    #[arg(long)]
    k_sweep: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long)]
    lambda_sweep: Option<String>,
    #[arg(long, value_enum, default_value_t = InitArg::Mmclpp)]
    init: InitArg,
    #[arg(long, default_value_t = 0.25)]
    holdout: f64,
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    #[arg(long, default_value_t = 10)]
    max_iter: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Serialize)]
struct RunInfo<'a> {
    group_col: &'a str,
    feature_names: &'a [String],
    response_names: &'a [String],
    cluster_on: &'a str,
    k: usize,
    lambda: f64,
    init: InitArg,
    holdout: f64,
    seed: u64,
    heldout_r2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    nmi: Option<f64>,
}

struct Candidate {
    k: usize,
    lambda: f64,
    result: MmclResult,
    r2: f64,
}

pub fn run(args: &Args) -> Result<()> {
    let truth: Vec<String> = args.truth_col.iter().cloned().collect();
    let mut passthrough: Vec<String> = parse_list(&args.passthrough_cols)?;
    passthrough.extend(truth.iter().cloned());
    let schema = Schema {
        group_col: args.group_col.clone(),
        response_cols: parse_list(&args.response_cols)?,
        feature_cols: args.feature_cols.as_deref().map(parse_list).transpose()?,
        passthrough_cols: passthrough,
    };
    let (ds, gi) = load_csv(&args.input, &schema)?;
    ds.require_complete().context("cluster needs a complete table; run `fmrbench impute` first")?;
    let cluster_on = args.cluster_on.clone().unwrap_or_else(|| ds.response_names[0].clone());
    let y = ds.responses.column(ds.response_index(&cluster_on)?);

    let mut ks: Vec<usize> = match &args.k_sweep {
        Some(s) => parse_list(s)?,
        None => vec![args.k],
    };
    ks.push(1);
    ks.sort_unstable();
    ks.dedup();
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > gi.m()) {
        bail!("K = {k} is invalid for {} groups", gi.m());
    }
    let lambdas: Vec<f64> = match &args.lambda_sweep {
        Some(s) => parse_list(s)?,
        None => vec![args.lambda],
    };
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l >= 0.0)) {
        bail!("lambda values must be >= 0");
    }

    let mut candidates = Vec::new();
    for &k in &ks {
        for &lambda in &lambdas {
            let cfg = MmclConfig {
                k,
                epsilon: args.epsilon,
                max_iter: args.max_iter,
                init: args.init.into(),
                holdout_fraction: args.holdout,
                fit: FitConfig::for_lambda(lambda),
                seed: args.seed,
            };
            let result = mmcl_fit(ds.x.view(), y, &gi, &cfg)?;
            let r2 = {
                let data = GroupedData { x: ds.x.view(), y: y.view(), gi: &gi, split: &result.split };
                result.heldout_r2(&data)?
            };
            candidates.push(Candidate { k, lambda, result, r2 });
        }
    }
    // Highest held-out R^2; ties keep the earlier (smaller K, then smaller lambda).
    let best = candidates
        .iter()
        .reduce(|a, b| if b.r2 > a.r2 { b } else { a })
        .expect("at least one candidate");

    let mut sweep = String::from("k,lambda,heldout_r2,overall_aic,iterations,converged,selected\n");
    for c in &candidates {
        let _ = writeln!(
            sweep,
            "{},{},{},{},{},{},{}",
            c.k,
            c.lambda,
            c.r2,
            c.result.overall_aic_trace.last().copied().unwrap_or(f64::NAN),
            c.result.iterations,
            c.result.converged,
            std::ptr::eq(c, best)
        );
    }

    let out = &args.out_dir;
    write_atomic(&out.join("sweep.csv"), sweep)?;
    let report = best.result.report(&gi);
    write_atomic(&out.join("mmcl.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    for (name, json) in cluster_models(&ds, &gi, &best.result.assignment, best.k, best.lambda)? {
        write_atomic(&out.join(name), json)?;
    }

    let nmi_score = match &args.truth_col {
        Some(col) => Some(truth_nmi(&ds, &gi, &best.result.assignment, col)?),
        None => None,
    };
    let info = RunInfo {
        group_col: &args.group_col,
        feature_names: &ds.feature_names,
        response_names: &ds.response_names,
        cluster_on: &cluster_on,
        k: best.k,
        lambda: best.lambda,
        init: args.init,
        holdout: args.holdout,
        seed: args.seed,
        heldout_r2: best.r2,
        nmi: nmi_score,
    };
    write_atomic(&out.join("run.json"), serde_json::to_string_pretty(&info)? + "\n")?;
    println!("selected K = {} (lambda = {}), held-out R^2 = {:.4}", best.k, best.lambda, best.r2);
    if let Some(v) = nmi_score {
        println!("NMI vs `{}` = {v:.4}", args.truth_col.as_deref().unwrap_or_default());
    }
    Ok(())
}

/// One model per (cluster, response), fit on every row of the member groups.
fn cluster_models(
    ds: &Dataset,
    gi: &GroupIndex,
    assignment: &[usize],
    k: usize,
    lambda: f64,
) -> Result<Vec<(String, String)>> {
    let cfg = FitConfig::for_lambda(lambda);
    let mut files = Vec::new();
    for c in 0..k {
        let rows: Vec<usize> = (0..gi.m())
            .filter(|&g| assignment[g] == c)
            .flat_map(|g| gi.groups[g].rows.iter().copied())
            .collect();
        for (r, name) in ds.response_names.iter().enumerate() {
            let (x, y) = ds.subset(&rows, r);
            let model = fit(x.view(), y.view(), &cfg)
                .with_context(|| format!("fitting `{name}` on cluster {c}"))?
                .with_feature_names(ds.feature_names.clone());
            files.push((format!("cluster_{c}_{name}.json"), model.to_json()? + "\n"));
        }
    }
    Ok(files)
}

fn truth_nmi(ds: &Dataset, gi: &GroupIndex, assignment: &[usize], col: &str) -> Result<f64> {
    let labels = ds.passthrough_column(col).context("truth column missing")?;
    let mut codes = BTreeMap::new();
    let truth: Vec<usize> = labels
        .iter()
        .map(|l| {
            let next = codes.len();
            *codes.entry(l.clone()).or_insert(next)
        })
        .collect();
    Ok(nmi(&truth, &gi.expand(assignment))?)
}
