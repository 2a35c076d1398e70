use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use fmrbench_core::data::{
    format_value, soft_impute_scaled, standardize_columns, write_table, ColumnScale, ImputeOptions, RawTable, Role, Standardization,
};

use crate::output::{parse_list, sidecar_path, write_atomic};

#[derive(clap::Args)]
pub struct Args {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Singular-value shrinkage.
    #[arg(long, default_value_t = 0.0)]
    lambda_svd: f64,
    /// Rank cap of the completion; 0 keeps every singular value.
    #[arg(long, default_value_t = 2)]
    rank_max: usize,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Standardize numeric columns and write a sidecar with the moments.
    #[arg(long)]
    standardize: bool,
    /// Identifier column, left untouched.
    #[arg(long, default_value = "group")]
    group_col: String,
    /// Columns recorded with the response role in the sidecar.
    #[arg(long, default_value = "")]
    response_cols: String,
    /// Further non-numeric columns to carry through.
    #[arg(long, default_value = "")]
    passthrough_cols: String,
}

pub fn run(args: &Args) -> Result<()> {
    if args.input == args.out {
        bail!("--in and --out must differ");
    }
    let table = RawTable::read(&args.input)?;
    let group = table.column_index(&args.group_col)?;
    let responses: Vec<String> = parse_list(&args.response_cols)?;
    let passthrough: Vec<String> = parse_list(&args.passthrough_cols)?;
    let skip: Vec<usize> = std::iter::once(Ok(group))
        .chain(passthrough.iter().map(|c| table.column_index(c)))
        .collect::<fmrbench_core::Result<_>>()?;
    for r in &responses {
        table.column_index(r)?;
    }
    let numeric: Vec<usize> = (0..table.header.len()).filter(|c| !skip.contains(c)).collect();
    // Surfaces the first unparseable cell with its row and column.
    let (values, observed) = table.numeric_block(&numeric)?;

    let opts = ImputeOptions {
        lambda: args.lambda_svd,
        rank_max: (args.rank_max > 0).then_some(args.rank_max),
        tol: args.tol,
        max_iter: args.max_iter,
    };
    let outcome = soft_impute_scaled(&values, &observed, &opts).map_err(|e| match e {
        fmrbench_core::Error::AllMissingColumn(j) => {
            anyhow::anyhow!("column `{}` has no observed values", table.header[numeric[j]])
        }
        e => e.into(),
    })?;
    if !outcome.converged {
        eprintln!("warning: soft-impute stopped after {} iterations without converging", outcome.iterations);
    }

    let mut buf = Vec::new();
    if !args.standardize {
        let mut filled = table.clone();
        for (i, row) in filled.rows.iter_mut().enumerate() {
            for (j, &c) in numeric.iter().enumerate() {
                if row[c].is_none() {
                    row[c] = Some(format_value(outcome.matrix[[i, j]]));
                }
            }
        }
        write_table(&mut buf, &filled, &[], &outcome.matrix)?;
    } else {
        let (z, moments) = standardize_columns(outcome.matrix.view()).map_err(|j| {
            anyhow::anyhow!("column `{}` has zero variance", table.header[numeric[j]])
        })?;
        let columns = numeric
            .iter()
            .zip(moments)
            .map(|(&c, (mean, sd))| {
                let name = table.header[c].clone();
                let role = if responses.contains(&name) { Role::Response } else { Role::Feature };
                ColumnScale { name, role, mean, sd }
            })
            .collect();
        let record = Standardization { columns };
        write_atomic(&sidecar_path(&args.out), record.to_json()? + "\n")?;
        write_table(&mut buf, &table, &numeric, &z)?;
    }
    write_atomic(&args.out, buf).with_context(|| format!("writing {}", args.out.display()))
}
