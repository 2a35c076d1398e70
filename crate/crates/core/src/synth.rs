//! Monte-Carlo validation harness: two-cluster grouped regression data at a
//! controlled coefficient separation and noise level, clustered with MMCL
//! and scored with NMI against the generating labels.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, GroupIndex};
use crate::error::{Error, Result};
use crate::mmcl::{mmcl_fit, Init, MmclConfig};
use crate::plot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    Random,
    #[serde(rename = "mmclpp")]
    MmclPp,
}

impl From<InitMode> for Init {
    fn from(m: InitMode) -> Init {
        match m {
            InitMode::Random => Init::Random,
            InitMode::MmclPp => Init::MmclPp,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthSpec {
    /// Observations per generating cluster.
    pub n: Vec<usize>,
    /// Group count per generating cluster.
    pub s: Vec<usize>,
    pub dim: usize,
    pub noise_levels: Vec<f64>,
    pub d2_levels: Vec<f64>,
    pub runs: usize,
    pub seed: u64,
    pub init_mode: InitMode,
    /// Template for the clustering run; `k`, `init` and `seed` are overridden.
    pub mmcl: MmclConfig,
}

impl Default for SynthSpec {
    /// Two clusters of 300 rows split into 5 and 15 groups, over the
    /// 5 x 3 grid of noise levels and squared coefficient distances.
    fn default() -> Self {
        SynthSpec {
            n: vec![300, 300],
            s: vec![5, 15],
            dim: 2,
            noise_levels: vec![0.5, 1.0, 2.0, 4.0, 6.0],
            d2_levels: vec![0.2, 0.6, 1.8],
            runs: 100,
            seed: 0,
            init_mode: InitMode::Random,
            mmcl: MmclConfig::default(),
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n.len() != 2 || self.s.len() != 2 {
            return Err(Error::InvalidArgument("exactly two clusters are generated".into()));
        }
        for (&n, &s) in self.n.iter().zip(&self.s) {
            if s == 0 || n % s != 0 || n / s < 1 {
                return Err(Error::InvalidArgument(format!("N = {n} is not divisible into S = {s} groups")));
            }
        }
        if self.dim < 2 {
            return Err(Error::InvalidArgument("dim must be >= 2".into()));
        }
        if let Some(d) = self.d2_levels.iter().find(|d| !(**d > 0.0 && **d < 4.0)) {
            return Err(Error::InvalidArgument(format!("d2 = {d} outside (0, 4)")));
        }
        if let Some(e) = self.noise_levels.iter().find(|e| !(**e > 0.0)) {
            return Err(Error::InvalidArgument(format!("noise level {e} must be > 0")));
        }
        Ok(())
    }
}

/// Rows of the lower Cholesky factor of `[[1, r], [r, 1]]` with
/// `r = 1 - d2 / 2`, padded with zeros to `dim`.
pub fn gen_betas(d2: f64, dim: usize) -> Result<(Array1<f64>, Array1<f64>)> {
    if !(d2 > 0.0 && d2 < 4.0) {
        return Err(Error::InvalidArgument(format!("d2 = {d2} outside (0, 4)")));
    }
    let r = 1.0 - d2 / 2.0;
    let mut b1 = Array1::zeros(dim.max(2));
    let mut b2 = Array1::zeros(dim.max(2));
    b1[0] = 1.0;
    b2[0] = r;
    b2[1] = (1.0 - r * r).sqrt();
    Ok((b1, b2))
}

#[derive(Debug, Clone)]
pub struct SynthSample {
    pub dataset: Dataset,
    pub groups: GroupIndex,
    /// Generating cluster per group.
    pub true_labels: Vec<usize>,
    pub betas: (Array1<f64>, Array1<f64>),
}

impl SynthSample {
    pub fn true_row_labels(&self) -> Vec<usize> {
        self.groups.expand(&self.true_labels)
    }
}

/// Standard-normal covariates, `y = x . beta_k + noise * z`, rows of each
/// cluster cut into equal contiguous groups.
pub fn gen_sample(spec: &SynthSpec, d2: f64, noise: f64, seed: u64) -> Result<SynthSample> {
    spec.validate()?;
    let betas = gen_betas(d2, spec.dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: usize = spec.n.iter().sum();
    let mut x = Array2::zeros((total, spec.dim));
    let mut y = Array2::zeros((total, 1));
    let mut group_of = Vec::with_capacity(total);
    let mut truth = Vec::with_capacity(total);
    let mut true_labels = Vec::new();
    let mut row = 0;
    for (cluster, (&n, &s)) in spec.n.iter().zip(&spec.s).enumerate() {
        let beta = if cluster == 0 { &betas.0 } else { &betas.1 };
        let per_group = n / s;
        for g in 0..s {
            true_labels.push(cluster);
            for _ in 0..per_group {
                for j in 0..spec.dim {
                    x[[row, j]] = rng.sample::<f64, _>(StandardNormal);
                }
                let z: f64 = rng.sample(StandardNormal);
                y[[row, 0]] = x.row(row).dot(beta) + noise * z;
                group_of.push(format!("c{cluster}g{g}"));
                truth.push(cluster.to_string());
                row += 1;
            }
        }
    }
    let groups = GroupIndex::from_labels(&group_of);
    let dataset = Dataset {
        x,
        responses: y,
        group_of,
        feature_names: (1..=spec.dim).map(|j| format!("x{j}")).collect(),
        response_names: vec!["y".into()],
        passthrough: vec![("truth".into(), truth)],
        observed: None,
        standardization: None,
    };
    Ok(SynthSample { dataset, groups, true_labels, betas })
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|c| *c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information `I(A;B) / sqrt(H(A) H(B))`, natural logs.
/// Two single-cluster partitions score 1; exactly one scores 0.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("nmi of empty labelings".into()));
    }
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut ca: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cb: BTreeMap<usize, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
    }
    let n = a.len() as f64;
    let ha = entropy(ca.values().copied(), n);
    let hb = entropy(cb.values().copied(), n);
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    if ha == 0.0 || hb == 0.0 {
        return Ok(0.0);
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(x, y), &c)| {
            let c = c as f64;
            c / n * (n * c / (ca[&x] as f64 * cb[&y] as f64)).ln()
        })
        .sum();
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

/// SplitMix64 finalizer over the combined inputs.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    let mut h = seed;
    for &p in parts {
        h = h.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(p.wrapping_mul(0xbf58_476d_1ce4_e5b9));
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub noise: f64,
    pub d2: f64,
    pub run: usize,
    pub nmi: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub noise: f64,
    pub d2: f64,
    pub mean_nmi: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub mean_iters: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub runs: Vec<RunRecord>,
    pub cells: Vec<CellSummary>,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn summarize(noise: f64, d2: f64, runs: &[&RunRecord]) -> CellSummary {
    let mut nmis: Vec<f64> = runs.iter().map(|r| r.nmi).collect();
    nmis.sort_by(f64::total_cmp);
    let n = runs.len() as f64;
    CellSummary {
        noise,
        d2,
        mean_nmi: nmis.iter().sum::<f64>() / n,
        q25: quantile(&nmis, 0.25),
        q50: quantile(&nmis, 0.5),
        q75: quantile(&nmis, 0.75),
        mean_iters: runs.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
    }
}

/// One replication: generate, cluster, score on row labels.
pub fn run_once(spec: &SynthSpec, noise_idx: usize, d2_idx: usize, run: usize) -> Result<RunRecord> {
    let noise = spec.noise_levels[noise_idx];
    let d2 = spec.d2_levels[d2_idx];
    let run_seed = derive_seed(spec.seed, &[noise_idx as u64, d2_idx as u64, run as u64]);
    let sample = gen_sample(spec, d2, noise, run_seed)?;
    let cfg = MmclConfig {
        k: 2,
        init: spec.init_mode.into(),
        seed: derive_seed(run_seed, &[1]),
        ..spec.mmcl.clone()
    };
    let ds = &sample.dataset;
    let result = mmcl_fit(ds.x.view(), ds.responses.column(0), &sample.groups, &cfg)?;
    let predicted = sample.groups.expand(&result.assignment);
    Ok(RunRecord {
        noise,
        d2,
        run,
        nmi: nmi(&sample.true_row_labels(), &predicted)?,
        iterations: result.iterations,
        converged: result.converged,
    })
}

/// Every (noise, d2) cell replicated `runs` times; replications execute in
/// parallel but each depends only on its own derived seed.
pub fn run_monte_carlo(spec: &SynthSpec) -> Result<MonteCarloResult> {
    spec.validate()?;
    let jobs: Vec<(usize, usize, usize)> = (0..spec.noise_levels.len())
        .flat_map(|e| (0..spec.d2_levels.len()).flat_map(move |d| (0..spec.runs).map(move |r| (e, d, r))))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(e, d, r)| run_once(spec, e, d, r))
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    for &noise in &spec.noise_levels {
        for &d2 in &spec.d2_levels {
            let members: Vec<&RunRecord> = runs.iter().filter(|r| r.noise == noise && r.d2 == d2).collect();
            cells.push(summarize(noise, d2, &members));
        }
    }
    Ok(MonteCarloResult { runs, cells })
}

impl MonteCarloResult {
    pub fn cell(&self, noise: f64, d2: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.noise == noise && c.d2 == d2)
    }

    pub fn runs_csv(&self) -> String {
        let mut out = String::from("noise,d2,run,nmi,iterations,converged\n");
        for r in &self.runs {
            let _ = writeln!(out, "{},{},{},{},{},{}", r.noise, r.d2, r.run, r.nmi, r.iterations, r.converged);
        }
        out
    }

    pub fn aggregate_csv(&self) -> String {
        let mut out = String::from("noise,d2,mean_nmi,q25,q50,q75,mean_iters\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.noise, c.d2, c.mean_nmi, c.q25, c.q50, c.q75, c.mean_iters
            );
        }
        out
    }

    /// Mean NMI against noise, one line per d2.
    pub fn mean_nmi_svg(&self) -> String {
        let mut d2s: Vec<f64> = self.cells.iter().map(|c| c.d2).collect();
        d2s.sort_by(f64::total_cmp);
        d2s.dedup();
        let series: Vec<plot::Series> = d2s
            .iter()
            .map(|&d2| plot::Series {
                label: format!("d2 = {d2}"),
                points: self.cells.iter().filter(|c| c.d2 == d2).map(|c| (c.noise, c.mean_nmi)).collect(),
            })
            .collect();
        plot::line_chart("Mean NMI by noise level", "noise", "mean NMI", &series, true)
    }
}

/// Segment coefficients for the packaged dealership-like dataset, over
/// six KPIs; one row per segment for profitability and one for sales.
const SEGMENT_P: [[f64; 6]; 3] = [
    [0.9, 0.0, 0.6, 0.0, -0.5, 0.2],
    [-0.6, 0.7, 0.0, 0.5, 0.3, 0.0],
    [0.1, -0.5, -0.8, 0.0, 0.6, 0.6],
];
const SEGMENT_SE: [[f64; 6]; 3] = [
    [0.5, 0.4, 0.0, -0.3, 0.0, 0.5],
    [0.0, -0.4, 0.7, 0.4, 0.2, -0.3],
    [0.6, 0.0, 0.3, -0.6, -0.4, 0.0],
];
pub const DEALERSHIP_KPIS: [&str; 6] =
    ["sales_staff", "staff_tenure", "inventory_units", "inventory_age", "ad_spend", "service_bays"];

/// Monthly store panel with three latent segments, correlated KPIs and a
/// fraction of feature cells knocked out.
pub fn dealership_like(dealers_per_segment: usize, months: usize, missing_rate: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 3 * dealers_per_segment * months;
    let p = DEALERSHIP_KPIS.len();
    let mut x = Array2::zeros((n, p));
    let mut responses = Array2::zeros((n, 2));
    let mut group_of = Vec::with_capacity(n);
    let mut segment = Vec::with_capacity(n);
    let mut row = 0;
    for seg in 0..3 {
        for d in 0..dealers_per_segment {
            let offsets: Vec<f64> = (0..p).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
            let id = format!("D{:03}", seg * dealers_per_segment + d);
            for _ in 0..months {
                for j in 0..p {
                    x[[row, j]] = offsets[j] + rng.sample::<f64, _>(StandardNormal);
                }
                // inventory tracks staffing
                x[[row, 2]] = 0.6 * x[[row, 0]] + 0.8 * x[[row, 2]];
                let xr = x.row(row);
                let base_p = 10.0 + xr.dot(&Array1::from(SEGMENT_P[seg].to_vec()));
                let base_se = 100.0 + 10.0 * xr.dot(&Array1::from(SEGMENT_SE[seg].to_vec()));
                responses[[row, 0]] = base_p + 0.5 * rng.sample::<f64, _>(StandardNormal);
                responses[[row, 1]] = base_se + 5.0 * rng.sample::<f64, _>(StandardNormal);
                group_of.push(id.clone());
                segment.push(seg.to_string());
                row += 1;
            }
        }
    }
    // Raw-unit scaling so the columns look like business quantities.
    let scales = [4.0, 12.0, 40.0, 15.0, 2500.0, 3.0];
    let centers = [20.0, 60.0, 250.0, 45.0, 20000.0, 12.0];
    for j in 0..p {
        x.column_mut(j).mapv_inplace(|v| (centers[j] + scales[j] * v).round().max(0.0));
    }
    let mut observed = Array2::from_elem((n, p + 2), true);
    for i in 0..n {
        for j in 0..p {
            if rng.gen::<f64>() < missing_rate {
                observed[[i, j]] = false;
            }
        }
    }
    let complete = observed.iter().all(|o| *o);
    Dataset {
        x,
        responses,
        group_of,
        feature_names: DEALERSHIP_KPIS.iter().map(|s| s.to_string()).collect(),
        response_names: vec!["P".into(), "SE".into()],
        passthrough: vec![("segment".into(), segment)],
        observed: if complete { None } else { Some(observed) },
        standardization: None,
    }
}
