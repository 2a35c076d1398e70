use std::path::PathBuf;

use anyhow::Result;
use fmrbench_core::synth::{gen_sample, run_monte_carlo, InitMode, SynthSpec};

use crate::cluster::InitArg;
use crate::output::{parse_list, write_atomic};

#[derive(clap::Args)]
pub struct Args {
    /// Rows per generating cluster.
    #[arg(long, default_value = "300,300")]
    n: String,
    /// Groups per generating cluster.
    #[arg(long, default_value = "5,15")]
    s: String,
    #[arg(long, default_value = "0.5,1,2,4,6")]
    noise: String,
    #[arg(long, default_value = "0.2,0.6,1.8")]
    d2: String,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    svg: bool,
    #[arg(long, value_enum, default_value_t = InitArg::Random)]
    init: InitArg,
    /// Also write one draw at the first noise and d2 level as sample.csv.
    #[arg(long)]
    emit_sample: bool,
}

pub fn run(args: &Args) -> Result<()> {
    let spec = SynthSpec {
        n: parse_list(&args.n)?,
        s: parse_list(&args.s)?,
        noise_levels: parse_list(&args.noise)?,
        d2_levels: parse_list(&args.d2)?,
        runs: args.runs,
        seed: args.seed,
        init_mode: match args.init {
            InitArg::Mmclpp => InitMode::MmclPp,
            InitArg::Random => InitMode::Random,
        },
        ..SynthSpec::default()
    };
    spec.validate()?;
    let result = run_monte_carlo(&spec)?;
    let out = &args.out_dir;
    write_atomic(&out.join("runs.csv"), result.runs_csv())?;
    write_atomic(&out.join("aggregate.csv"), result.aggregate_csv())?;
    if args.svg {
        write_atomic(&out.join("mean_nmi.svg"), result.mean_nmi_svg())?;
    }
    if args.emit_sample {
        let sample = gen_sample(&spec, spec.d2_levels[0], spec.noise_levels[0], spec.seed)?;
        let mut buf = Vec::new();
        sample.dataset.write_csv(&mut buf, "group")?;
        write_atomic(&out.join("sample.csv"), buf)?;
    }
    for c in &result.cells {
        println!("noise {:>4} d2 {:>4}: mean NMI {:.3}, mean iterations {:.2}", c.noise, c.d2, c.mean_nmi, c.mean_iters);
    }
    Ok(())
}
