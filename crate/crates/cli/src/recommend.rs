use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fmrbench_core::data::{load_csv, Schema, Standardization};
use fmrbench_core::moo::{fit_collinearity, pareto_sweep, recommend, MooProblem};
use fmrbench_core::regress::{FitConfig, LinearModel};
use ndarray::Axis;
use serde::Deserialize;

use crate::output::{parse_list, parse_range, sidecar_path, write_atomic};

#[derive(clap::Args)]
pub struct Args {
    /// Output directory of `fmrbench cluster`.
    #[arg(long)]
    models: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    /// Cluster to solve for; every cluster when omitted.
    #[arg(long)]
    cluster: Option<usize>,
    #[arg(long)]
    objective: String,
    #[arg(long)]
    constraint: String,
    /// SE floors to sweep, `start:stop:step`.
    #[arg(long, allow_hyphen_values = true)]
    se_grid: Option<String>,
    /// Floor for the single recommendation.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    se_floor: f64,
    #[arg(long, default_value_t = 1.0)]
    k_slack: f64,
    /// Non-actionable features, held at the store's (or cluster's) mean.
    #[arg(long, default_value = "")]
    freeze: String,
    /// Group id whose current levels anchor frozen features.
    #[arg(long)]
    store: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    svg: bool,
}

#[derive(Deserialize)]
struct RunInfo {
    group_col: String,
    feature_names: Vec<String>,
    response_names: Vec<String>,
    k: usize,
}

#[derive(Deserialize)]
struct Assignment {
    assignment: BTreeMap<String, usize>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn run(args: &Args) -> Result<()> {
    let info: RunInfo = read_json(&args.models.join("run.json"))?;
    let assignment: Assignment = read_json(&args.models.join("mmcl.json"))?;
    for r in [&args.objective, &args.constraint] {
        if !info.response_names.contains(r) {
            bail!("`{r}` is not one of the clustered responses {:?}", info.response_names);
        }
    }
    let schema = Schema {
        group_col: info.group_col.clone(),
        response_cols: info.response_names.clone(),
        feature_cols: Some(info.feature_names.clone()),
        passthrough_cols: Vec::new(),
    };
    let (ds, gi) = load_csv(&args.input, &schema)?;
    ds.require_complete()?;
    let sidecar = sidecar_path(&args.input);
    let standardization = if sidecar.exists() { Some(Standardization::read(&sidecar)?) } else { None };

    let frozen: Vec<usize> = parse_list::<String>(&args.freeze)?
        .iter()
        .map(|f| ds.feature_index(f))
        .collect::<fmrbench_core::Result<_>>()?;
    let store_rows = match &args.store {
        Some(id) => {
            let g = gi.position(id).with_context(|| format!("unknown store `{id}`"))?;
            Some(gi.groups[g].rows.clone())
        }
        None => None,
    };
    let grid = args.se_grid.as_deref().map(parse_range).transpose()?;

    let clusters: Vec<usize> = match args.cluster {
        Some(c) if c >= info.k => bail!("cluster {c} does not exist (K = {})", info.k),
        Some(c) => vec![c],
        None => (0..info.k).collect(),
    };
    for c in clusters {
        let rows: Vec<usize> = gi
            .groups
            .iter()
            .filter(|g| assignment.assignment.get(&g.id) == Some(&c))
            .flat_map(|g| g.rows.iter().copied())
            .collect();
        if rows.is_empty() {
            bail!("cluster {c} has no rows in {}", args.input.display());
        }
        let load = |resp: &str| -> Result<LinearModel> {
            read_json(&args.models.join(format!("cluster_{c}_{resp}.json")))
        };
        let objective = load(&args.objective)?;
        let constraint = load(&args.constraint)?;
        if objective.p() != ds.p() || constraint.p() != ds.p() {
            bail!("model feature count does not match the input table");
        }

        let x = ds.x.select(Axis(0), &rows);
        let bounds = x
            .axis_iter(Axis(1))
            .map(|col| col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))))
            .collect();
        let mut prob = MooProblem::new(objective, constraint, bounds);
        prob.feature_names = ds.feature_names.clone();
        prob.k_slack = args.k_slack;
        prob.se_floor = args.se_floor;
        if ds.p() >= 2 {
            prob.collinearity = Some(fit_collinearity(x.view(), &ds.feature_names, &FitConfig::ols())?);
        }
        let anchor = match &store_rows {
            Some(r) => ds.x.select(Axis(0), r),
            None => x.clone(),
        };
        for &i in &frozen {
            prob.freeze(i, anchor.column(i).mean().expect("non-empty rows"));
        }

        let rec = recommend(&prob, standardization.as_ref())?;
        write_atomic(&args.out_dir.join(format!("recommendation_cluster_{c}.json")), rec.to_json()? + "\n")?;
        println!("cluster {c}: {} at SE floor {}, P* = {}", rec.status, prob.se_floor, rec.predicted_p);
        if let Some(grid) = &grid {
            let frontier = pareto_sweep(&prob, grid)?;
            write_atomic(&args.out_dir.join(format!("frontier_cluster_{c}.csv")), frontier.to_csv())?;
            if args.svg {
                write_atomic(&args.out_dir.join(format!("frontier_cluster_{c}.svg")), frontier.to_svg())?;
            }
        }
    }
    Ok(())
}
