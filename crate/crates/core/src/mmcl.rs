//! Competitive-learning clustering of observation groups into K regression
//! components. Each iteration fits one model per cluster (learning), then
//! moves every group to the model that scores it with the smallest AIC
//! (competition). Groups are never split, so must-link blocks stay intact.

use std::collections::BTreeMap;

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{grouped_holdout, GroupIndex, HoldoutSplit};
use crate::error::{Error, Result};
use crate::regress::{self, FitConfig, LinearModel};

/// Initial overall AIC before the first iteration.
pub const INITIAL_AIC: f64 = 1e10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    Random,
    #[serde(rename = "mmclpp")]
    MmclPp,
    /// A full group -> cluster assignment to start from.
    Given(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct MmclConfig {
    pub k: usize,
    pub epsilon: f64,
    pub max_iter: usize,
    pub init: Init,
    pub holdout_fraction: f64,
    pub fit: FitConfig,
    pub seed: u64,
}

impl Default for MmclConfig {
    fn default() -> Self {
        MmclConfig {
            k: 2,
            epsilon: 0.001,
            max_iter: 10,
            init: Init::Random,
            holdout_fraction: 0.25,
            fit: FitConfig::ols(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MmclResult {
    /// Cluster label per group, in `GroupIndex` order.
    pub assignment: Vec<usize>,
    pub models: Vec<LinearModel>,
    pub overall_aic_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub split: HoldoutSplit,
}

/// Serialized form of a result, keyed by group id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmclReport {
    pub assignment: BTreeMap<String, usize>,
    pub models: Vec<LinearModel>,
    pub overall_aic_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl MmclResult {
    pub fn report(&self, gi: &GroupIndex) -> MmclReport {
        MmclReport {
            assignment: gi
                .groups
                .iter()
                .zip(&self.assignment)
                .map(|(g, c)| (g.id.clone(), *c))
                .collect(),
            models: self.models.clone(),
            overall_aic_trace: self.overall_aic_trace.clone(),
            iterations: self.iterations,
            converged: self.converged,
        }
    }

    /// Pooled R^2 over held-out rows (all rows when nothing is held out),
    /// each row predicted by its group's cluster model.
    pub fn heldout_r2(&self, data: &GroupedData) -> Result<f64> {
        let mut ys = Vec::new();
        let mut preds = Vec::new();
        for g in 0..data.gi.m() {
            let rows = if self.split.test_rows.iter().all(Vec::is_empty) {
                &data.gi.groups[g].rows
            } else {
                &self.split.test_rows[g]
            };
            if rows.is_empty() {
                continue;
            }
            let (x, y) = data.rows(rows);
            let yhat = self.models[self.assignment[g]].predict(x.view())?;
            ys.extend(y);
            preds.extend(yhat);
        }
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let tss: f64 = ys.iter().map(|v| (v - mean).powi(2)).sum();
        let rss: f64 = ys.iter().zip(&preds).map(|(a, b)| (a - b).powi(2)).sum();
        Ok(1.0 - rss / tss)
    }
}

/// A design matrix and one response, grouped and split.
#[derive(Debug, Clone, Copy)]
pub struct GroupedData<'a> {
    pub x: ArrayView2<'a, f64>,
    pub y: ArrayView1<'a, f64>,
    pub gi: &'a GroupIndex,
    pub split: &'a HoldoutSplit,
}

impl<'a> GroupedData<'a> {
    pub fn rows(&self, rows: &[usize]) -> (ndarray::Array2<f64>, Array1<f64>) {
        (self.x.select(Axis(0), rows), self.y.select(Axis(0), rows))
    }

    fn train_rows_of(&self, groups: &[usize]) -> Vec<usize> {
        let mut rows: Vec<usize> = groups
            .iter()
            .flat_map(|&g| self.split.train_rows[g].iter().copied())
            .collect();
        rows.sort_unstable();
        rows
    }

    /// Fits on the train rows of `groups`. A single row yields an
    /// intercept-only model.
    pub fn fit_groups(&self, groups: &[usize], cfg: &FitConfig) -> Result<LinearModel> {
        let rows = self.train_rows_of(groups);
        let (x, y) = self.rows(&rows);
        match rows.len() {
            0 => Err(Error::InvalidArgument("cannot fit a cluster with no train rows".into())),
            1 => {
                let mut m = LinearModel::new(y[0], vec![0.0; self.x.ncols()], 0.0);
                m.lambda = cfg.lambda;
                Ok(m)
            }
            _ => regress::fit(x.view(), y.view(), cfg),
        }
    }
}

/// AIC of `model` on the evaluation rows of group `g`.
pub fn group_aic(model: &LinearModel, data: &GroupedData, g: usize) -> f64 {
    let rows = data.split.eval_rows(data.gi, g);
    let (x, y) = data.rows(rows);
    model.aic(x.view(), y.view()).expect("groups are non-empty and dimensions fixed")
}

fn argmin(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (j, v) in values.into_iter().enumerate() {
        if v < best.1 {
            best = (j, v);
        }
    }
    best.0
}

/// Assigns every group to the model with the smallest AIC; ties go to the
/// smallest cluster index.
pub fn competition_step(models: &[LinearModel], data: &GroupedData) -> Vec<usize> {
    (0..data.gi.m())
        .map(|g| argmin(models.iter().map(|m| group_aic(m, data, g))))
        .collect()
}

/// Sum over clusters of the AIC of each member group under its cluster model.
pub fn overall_aic(models: &[LinearModel], assignment: &[usize], data: &GroupedData) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(g, &c)| group_aic(&models[c], data, g))
        .sum()
}

fn members(assignment: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); k];
    for (g, &c) in assignment.iter().enumerate() {
        out[c].push(g);
    }
    out
}

/// Refits the K cluster models. Empty clusters are first given the group
/// that scores worst under its own cluster (taken only from clusters that
/// keep at least one group).
pub fn learn_step(
    assignment: &mut [usize],
    k: usize,
    data: &GroupedData,
    fit_cfg: &FitConfig,
) -> Result<Vec<LinearModel>> {
    loop {
        let clusters = members(assignment, k);
        let Some(empty) = clusters.iter().position(Vec::is_empty) else {
            break;
        };
        let mut worst: Option<(usize, f64)> = None;
        for cluster in clusters.iter().filter(|c| c.len() >= 2) {
            let model = data.fit_groups(cluster, fit_cfg)?;
            for &g in cluster {
                let a = group_aic(&model, data, g);
                if worst.is_none_or(|(wg, wa)| a > wa || (a == wa && g < wg)) {
                    worst = Some((g, a));
                }
            }
        }
        let (g, _) = worst.ok_or_else(|| Error::InvalidArgument("K exceeds number of groups".into()))?;
        assignment[g] = empty;
    }
    members(assignment, k)
        .iter()
        .map(|groups| data.fit_groups(groups, fit_cfg))
        .collect()
}

/// Grows each seed cluster with random unused groups until it has at least
/// two train rows.
fn make_trainable(seeds: &mut [Vec<usize>], data: &GroupedData, rng: &mut ChaCha8Rng) {
    let mut used: Vec<bool> = vec![false; data.gi.m()];
    for s in seeds.iter() {
        for &g in s {
            used[g] = true;
        }
    }
    let mut pool: Vec<usize> = (0..data.gi.m()).filter(|g| !used[*g]).collect();
    pool.shuffle(rng);
    for seed in seeds.iter_mut() {
        while seed.iter().map(|&g| data.split.train_rows[g].len()).sum::<usize>() < 2 {
            match pool.pop() {
                Some(g) => seed.push(g),
                None => break,
            }
        }
    }
}

/// K distinct seed groups chosen uniformly at random.
pub fn random_init(data: &GroupedData, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    check_k(k, data.gi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds: Vec<Vec<usize>> = index::sample(&mut rng, data.gi.m(), k)
        .into_iter()
        .map(|g| vec![g])
        .collect();
    make_trainable(&mut seeds, data, &mut rng);
    Ok(seeds)
}

/// k-means++ style seeding: after a uniform first pick, repeatedly fit on the
/// latest seed and take the unselected group it predicts worst.
pub fn mmclpp_init(data: &GroupedData, k: usize, seed: u64, fit_cfg: &FitConfig) -> Result<Vec<Vec<usize>>> {
    check_k(k, data.gi)?;
    let m = data.gi.m();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut selected = vec![rng.gen_range(0..m)];
    while selected.len() < k {
        let last = *selected.last().expect("non-empty");
        let mut seed_groups = vec![vec![last]];
        make_trainable(&mut seed_groups, data, &mut rng);
        let model = data.fit_groups(&seed_groups[0], fit_cfg)?;
        let mut best: Option<(usize, f64)> = None;
        for g in (0..m).filter(|g| !selected.contains(g)) {
            let a = group_aic(&model, data, g);
            if best.is_none_or(|(_, ba)| a > ba) {
                best = Some((g, a));
            }
        }
        selected.push(best.expect("k <= m leaves a candidate").0);
    }
    let mut seeds: Vec<Vec<usize>> = selected.into_iter().map(|g| vec![g]).collect();
    make_trainable(&mut seeds, data, &mut rng);
    Ok(seeds)
}

fn check_k(k: usize, gi: &GroupIndex) -> Result<()> {
    if k == 0 || k > gi.m() {
        return Err(Error::InvalidArgument(format!(
            "K = {k} must be in 1..={} (number of groups)",
            gi.m()
        )));
    }
    Ok(())
}

/// Runs the competitive-learning loop until the relative change of the
/// overall AIC drops below `epsilon` or `max_iter` is reached.
pub fn mmcl_fit(x: ArrayView2<f64>, y: ArrayView1<f64>, gi: &GroupIndex, cfg: &MmclConfig) -> Result<MmclResult> {
    check_k(cfg.k, gi)?;
    if !(cfg.epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be > 0".into()));
    }
    if cfg.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
    }
    if x.nrows() != y.len() || gi.n_rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: x.nrows() });
    }
    let split = grouped_holdout(gi, cfg.holdout_fraction, cfg.seed)?;
    if let Some(g) = split.train_rows.iter().position(Vec::is_empty) {
        return Err(Error::InvalidArgument(format!("group `{}` has no train rows", gi.groups[g].id)));
    }
    let data = GroupedData { x: x.view(), y: y.view(), gi, split: &split };
    let init_seed = cfg.seed ^ 0x9e37_79b9_7f4a_7c15;

    let mut assignment: Vec<usize>;
    // With one cluster every group ends up in it, so seeding is moot.
    let init = if cfg.k == 1 { Init::Given(vec![0; gi.m()]) } else { cfg.init.clone() };
    let mut models = match &init {
        Init::Given(a) => {
            if a.len() != gi.m() || a.iter().any(|&c| c >= cfg.k) {
                return Err(Error::InvalidArgument("given assignment does not match groups/K".into()));
            }
            assignment = a.clone();
            learn_step(&mut assignment, cfg.k, &data, &cfg.fit)?
        }
        init => {
            let seeds = match init {
                Init::Random => random_init(&data, cfg.k, init_seed)?,
                _ => mmclpp_init(&data, cfg.k, init_seed, &cfg.fit)?,
            };
            assignment = vec![0; gi.m()];
            seeds
                .iter()
                .map(|groups| data.fit_groups(groups, &cfg.fit))
                .collect::<Result<Vec<_>>>()?
        }
    };

    let mut trace = Vec::with_capacity(cfg.max_iter);
    let mut aic_old = INITIAL_AIC;
    let mut converged = false;
    for iter in 0..cfg.max_iter {
        if iter > 0 {
            models = learn_step(&mut assignment, cfg.k, &data, &cfg.fit)?;
        }
        assignment = competition_step(&models, &data);
        let aic = overall_aic(&models, &assignment, &data);
        trace.push(aic);
        if ((aic - aic_old) / aic_old).abs() < cfg.epsilon {
            converged = true;
            break;
        }
        aic_old = aic;
    }
    let models = learn_step(&mut assignment, cfg.k, &data, &cfg.fit)?;
    Ok(MmclResult {
        assignment,
        models,
        iterations: trace.len(),
        overall_aic_trace: trace,
        converged,
        split,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    /// Two groups per law, `rows` rows each, y = x . beta exactly.
    pub(crate) fn two_law_data(rows: usize, seed: u64) -> (Array2<f64>, Array1<f64>, GroupIndex, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let laws = [[1.0, 0.0], [0.0, 1.0]];
        let truth = vec![0, 1, 0, 1];
        let n = rows * truth.len();
        let x = Array2::from_shape_fn((n, 2), |_| rng.gen_range(-1.0..1.0));
        let mut labels = Vec::new();
        let mut y = Array1::zeros(n);
        for (g, &law) in truth.iter().enumerate() {
            for r in 0..rows {
                let i = g * rows + r;
                y[i] = x[[i, 0]] * laws[law][0] + x[[i, 1]] * laws[law][1];
                labels.push(format!("g{g}"));
            }
        }
        (x, y, GroupIndex::from_labels(&labels), truth)
    }

    fn no_holdout(gi: &GroupIndex) -> HoldoutSplit {
        grouped_holdout(gi, 0.0, 0).unwrap()
    }

    #[test]
    fn group_aic_matches_direct_call() {
        let (x, y, gi, _) = two_law_data(6, 1);
        let split = no_holdout(&gi);
        let data = GroupedData { x: x.view(), y: y.view(), gi: &gi, split: &split };
        let m = data.fit_groups(&[1], &FitConfig::ols()).unwrap();
        let (xs, ys) = data.rows(&gi.groups[1].rows);
        assert_eq!(group_aic(&m, &data, 1), m.aic(xs.view(), ys.view()).unwrap());
    }

    #[test]
    fn group_aic_hand_computed() {
        let x = array![[0.0], [1.0], [0.0], [1.0]];
        let y = array![1.0, 2.0, 0.0, 3.0];
        let gi = GroupIndex::from_labels(&["a", "a", "b", "b"]);
        let split = no_holdout(&gi);
        let data = GroupedData { x: x.view(), y: y.view(), gi: &gi, split: &split };
        let m0 = LinearModel::new(0.0, vec![1.0], 0.0);
        let m1 = LinearModel::new(1.0, vec![0.0], 0.0);
        // m0 on a: residuals (-1,-1) -> RSS 2; m0 on b: (0,-2) -> 4
        // m1 on a: (0,-1) -> 1; m1 on b: (1,-2) -> 5. p_eff: m0 = 2, m1 = 1.
        let expect = |rss: f64, p: f64| 2.0 * (rss / 2.0_f64).ln() + 2.0 * p;
        assert!((group_aic(&m0, &data, 0) - expect(2.0, 2.0)).abs() < 1e-12);
        assert!((group_aic(&m0, &data, 1) - expect(4.0, 2.0)).abs() < 1e-12);
        assert!((group_aic(&m1, &data, 0) - expect(1.0, 1.0)).abs() < 1e-12);
        assert!((group_aic(&m1, &data, 1) - expect(5.0, 1.0)).abs() < 1e-12);
        let total = overall_aic(&[m0.clone(), m1.clone()], &[1, 0], &data);
        assert!((total - expect(1.0, 1.0) - expect(4.0, 2.0)).abs() < 1e-12);
        assert_eq!(competition_step(&[m0, m1], &data), vec![1, 1]);
    }

    #[test]
    fn larger_rss_gives_larger_aic() {
        let (x, y, gi, _) = two_law_data(6, 2);
        let split = no_holdout(&gi);
        let data = GroupedData { x: x.view(), y: y.view(), gi: &gi, split: &split };
        let good = LinearModel::new(0.5, vec![1.0, 0.0], 0.0);
        let bad = LinearModel::new(0.5 * 10f64.sqrt(), vec![1.0, 0.0], 0.0);
        assert!(group_aic(&bad, &data, 0) > group_aic(&good, &data, 0));
    }

    #[test]
    fn competition_cases() {
        let (x, y, gi, truth) = two_law_data(6, 3);
        let split = no_holdout(&gi);
        let data = GroupedData { x: x.view(), y: y.view(), gi: &gi, split: &split };
        let law_a = LinearModel::new(0.0, vec![1.0, 0.0], 0.0);
        let law_b = LinearModel::new(0.0, vec![0.0, 1.0], 0.0);
        assert_eq!(competition_step(&[law_a.clone()], &data), vec![0; 4]);
        assert_eq!(competition_step(&[law_a.clone(), law_b.clone()], &data), truth);
        assert_eq!(competition_step(&[law_b.clone(), law_b], &data), vec![0; 4]);
    }

    #[test]
    fn learn_step_recovers_laws() {
        let (x, y, gi, truth) = two_law_data(6, 4);
        let split = no_holdout(&gi);
        let data = GroupedData { x: x.view(), y: y.view(), gi: &gi, split: &split };
        let mut a = truth.clone();
        let models = learn_step(&mut a, 2, &data, &FitConfig::ols()).unwrap();
        assert!((models[0].coefficients[0] - 1.0).abs() < 1e-6 && models[0].coefficients[1].abs() < 1e-6);
        assert!((models[1].coefficients[1] - 1.0).abs() < 1e-6 && models[1].coefficients[0].abs() < 1e-6);
        let again = learn_step(&mut a, 2, &data, &FitConfig::ols()).unwrap();
        assert_eq!(models, again);

        let mut single = vec![0; 4];
        let one = learn_step(&mut single, 1, &data, &FitConfig::ols()).unwrap();
        let all = data.fit_groups(&[0, 1, 2, 3], &FitConfig::ols()).unwrap();
        assert_eq!(one[0], all);
    }

    #[test]
    fn empty_cluster_repair_moves_worst_group() {
        let (x, y, gi, _) = two_law_data(6, 5);
        let split = no_holdout(&gi);
        let data = GroupedData { x: x.view(), y: y.view(), gi: &gi, split: &split };
        let mut a = vec![0, 0, 0, 0];
        let models = learn_step(&mut a, 2, &data, &FitConfig::ols()).unwrap();
        assert_eq!(models.len(), 2);
        assert_eq!(a.iter().filter(|&&c| c == 1).count(), 1);
        let pooled = data.fit_groups(&[0, 1, 2, 3], &FitConfig::ols()).unwrap();
        let moved = a.iter().position(|&c| c == 1).unwrap();
        let worst = (0..4)
            .max_by(|&i, &j| group_aic(&pooled, &data, i).total_cmp(&group_aic(&pooled, &data, j)))
            .unwrap();
        assert_eq!(moved, worst);
    }

    #[test]
    fn competition_never_increases_overall_aic() {
        let (x, mut y, gi, _) = two_law_data(8, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        y.mapv_inplace(|v| v + rng.gen_range(-0.3..0.3));
        let split = no_holdout(&gi);
        let data = GroupedData { x: x.view(), y: y.view(), gi: &gi, split: &split };
        for start in [[0, 0, 1, 1], [1, 0, 0, 1], [0, 1, 1, 1]] {
            let mut a = start.to_vec();
            let models = learn_step(&mut a, 2, &data, &FitConfig::ols()).unwrap();
            let before = overall_aic(&models, &a, &data);
            let next = competition_step(&models, &data);
            assert!(overall_aic(&models, &next, &data) <= before + 1e-12);
            let swapped: Vec<usize> = a.iter().map(|c| 1 - c).collect();
            let rev: Vec<LinearModel> = models.iter().rev().cloned().collect();
            assert!((overall_aic(&rev, &swapped, &data) - before).abs() < 1e-12);
        }
    }

    #[test]
    fn random_init_properties() {
        let (x, y, gi, _) = two_law_data(6, 7);
        let split = no_holdout(&gi);
        let data = GroupedData { x: x.view(), y: y.view(), gi: &gi, split: &split };
        assert_eq!(random_init(&data, 2, 9).unwrap(), random_init(&data, 2, 9).unwrap());
        let mut all = random_init(&data, 4, 1).unwrap().concat();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
        assert!(random_init(&data, 5, 1).is_err());
    }

    #[test]
    fn random_init_merges_untrainable_seed() {
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let y = array![0.0, 1.0, 2.0, 3.0];
        let gi = GroupIndex::from_labels(&["a", "b", "c", "d"]);
        let split = no_holdout(&gi);
        let data = GroupedData { x: x.view(), y: y.view(), gi: &gi, split: &split };
        let seeds = random_init(&data, 2, 3).unwrap();
        assert!(seeds.iter().all(|s| s.len() == 2));
    }

    #[test]
    fn first_seed_is_uniform() {
        let labels: Vec<String> = (0..5).flat_map(|g| vec![format!("g{g}"); 3]).collect();
        let gi = GroupIndex::from_labels(&labels);
        let x = Array2::zeros((15, 1));
        let y = Array1::zeros(15);
        let split = no_holdout(&gi);
        let data = GroupedData { x: x.view(), y: y.view(), gi: &gi, split: &split };
        let mut counts = [0usize; 5];
        for s in 0..1000 {
            counts[random_init(&data, 2, s).unwrap()[0][0]] += 1;
        }
        for c in counts {
            assert!((c as f64 / 1000.0 - 0.2).abs() < 0.05, "{counts:?}");
        }
    }

    #[test]
    fn mmclpp_picks_other_law() {
        let (x, y, gi, truth) = two_law_data(6, 8);
        let split = no_holdout(&gi);
        let data = GroupedData { x: x.view(), y: y.view(), gi: &gi, split: &split };
        for s in 0..20 {
            let seeds = mmclpp_init(&data, 2, s, &FitConfig::ols()).unwrap();
            assert_ne!(truth[seeds[0][0]], truth[seeds[1][0]]);
        }
        let single = mmclpp_init(&data, 1, 3, &FitConfig::ols()).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn mmclpp_two_groups_selects_both() {
        let (x, y, _, _) = two_law_data(6, 9);
        let labels: Vec<&str> = (0..24).map(|i| if i < 12 { "a" } else { "b" }).collect();
        let gi = GroupIndex::from_labels(&labels);
        let split = no_holdout(&gi);
        let data = GroupedData { x: x.view(), y: y.view(), gi: &gi, split: &split };
        let mut picked: Vec<usize> = mmclpp_init(&data, 2, 4, &FitConfig::ols()).unwrap().concat();
        picked.sort_unstable();
        assert_eq!(picked, vec![0, 1]);
    }

    #[test]
    fn k_one_converges_fast_to_pooled_fit() {
        let (x, y, gi, _) = two_law_data(6, 10);
        let cfg = MmclConfig { k: 1, holdout_fraction: 0.0, ..Default::default() };
        let r = mmcl_fit(x.view(), y.view(), &gi, &cfg).unwrap();
        assert!(r.iterations <= 2 && r.converged);
        assert_eq!(r.assignment, vec![0; 4]);
        assert_eq!(r.overall_aic_trace.len(), r.iterations);
        let pooled = regress::fit(x.view(), y.view(), &FitConfig::ols()).unwrap();
        assert!((r.models[0].intercept - pooled.intercept).abs() < 1e-12);
    }

    #[test]
    fn mmcl_rejects_bad_config() {
        let (x, y, gi, _) = two_law_data(6, 11);
        let bad_k = MmclConfig { k: 5, ..Default::default() };
        assert!(mmcl_fit(x.view(), y.view(), &gi, &bad_k).is_err());
        let bad_eps = MmclConfig { epsilon: 0.0, ..Default::default() };
        assert!(mmcl_fit(x.view(), y.view(), &gi, &bad_eps).is_err());
        let bad_iter = MmclConfig { max_iter: 0, ..Default::default() };
        assert!(mmcl_fit(x.view(), y.view(), &gi, &bad_iter).is_err());
    }

    #[test]
    fn given_init_is_respected() {
        let (x, y, gi, truth) = two_law_data(6, 12);
        let cfg = MmclConfig { init: Init::Given(truth.clone()), holdout_fraction: 0.0, ..Default::default() };
        let r = mmcl_fit(x.view(), y.view(), &gi, &cfg).unwrap();
        assert_eq!(r.assignment, truth);
    }
}
