//! Monte Carlo sweeps over `(n, trial)` with deterministic per-trial seeds.
//!
//! Trial `i` at size `n` uses seed
//! `mix(mix(mix(master_seed) ^ n) ^ i)` where `mix` is the SplitMix64
//! output function (increment `0x9E3779B97F4A7C15`, multipliers
//! `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`). Trials never share an RNG,
//! so the record sequence does not depend on how many threads run them.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    lemma1_prob_bound, lemma2_violation_bound, meets_node_bound, node_count_lower_bound,
};
use crate::error::{Error, Result};
use crate::instance::{generate_instance, GeneratorConfig, Rounding};
use crate::oracles::{beta_in_window, check_property1_topm, mitm_feasible, MITM_MAX_N};
use crate::params::{Constants, Exponent, Ratio};
use crate::solver::{solve, SolveConfig, Verdict};

pub const DEFAULT_NODE_CAP: u64 = 1 << 26;

fn default_epsilon() -> Exponent {
    Exponent::new(9, 10).unwrap()
}

fn default_k() -> Exponent {
    Exponent::new(1, 2).unwrap()
}

fn default_node_cap() -> Option<u64> {
    Some(DEFAULT_NODE_CAP)
}

fn default_parallelism() -> usize {
    1
}

fn default_r() -> Ratio {
    Ratio::new(1, 2)
}

mod ratio_str {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::params::{parse_unit_ratio, Ratio};

    pub fn serialize<S: Serializer>(r: &Ratio, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio, D::Error> {
        let s = String::deserialize(d)?;
        parse_unit_ratio(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    #[serde(with = "ratio_str", default = "default_r")]
    pub r: Ratio,
    #[serde(default = "default_epsilon")]
    pub epsilon: Exponent,
    #[serde(default = "default_k")]
    pub k: Exponent,
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// `None` runs every search to completion.
    #[serde(default = "default_node_cap")]
    pub node_cap: Option<u64>,
    #[serde(default)]
    pub rounding: Rounding,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Adds solve wall time to each record. Off by default because timings
    /// make the record stream non-reproducible.
    #[serde(default)]
    pub record_timings: bool,
}

impl ExperimentConfig {
    pub fn new(n_values: Vec<usize>, trials: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            n_values,
            r: default_r(),
            epsilon: default_epsilon(),
            k: default_k(),
            trials,
            master_seed,
            node_cap: default_node_cap(),
            rounding: Rounding::Floor,
            parallelism: 1,
            record_timings: false,
        }
    }

    pub fn constants(&self) -> Result<Constants> {
        Constants::new(self.epsilon, self.k)
    }

    pub fn validate(&self) -> Result<()> {
        self.constants()?;
        crate::params::check_open_unit(self.r)?;
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(Error::param(
                "n_values must be a nonempty list of positive sizes",
            ));
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        if self.parallelism == 0 {
            return Err(Error::param("parallelism must be at least 1"));
        }
        if let Some(cap) = self.node_cap {
            if cap == 0 || cap > crate::solver::MAX_NODE_CAP {
                return Err(Error::param(format!("node cap {cap} out of range")));
            }
        }
        Ok(())
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `index` at size `n`.
pub fn trial_seed(master_seed: u64, n: usize, index: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ n as u64) ^ index as u64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial_index: usize,
    pub trial_seed: u64,
    /// Oracle verdict; absent when `n` exceeds the oracle guard.
    pub feasible: Option<bool>,
    /// Solver verdict; absent when the search was capped.
    pub solver_feasible: Option<bool>,
    pub p1_topm: bool,
    pub window: bool,
    pub nodes_created: u64,
    pub min_prune_depth: Option<usize>,
    pub capped: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve_wall_time_us: Option<u64>,
}

impl TrialRecord {
    /// The feasibility verdict the record stands for: the oracle's, or the
    /// solver's when no oracle ran.
    pub fn verdict(&self) -> Option<bool> {
        self.feasible.or(self.solver_feasible)
    }

    /// Property 1, the β window and infeasibility all hold on an uncapped run.
    pub fn meets_lemma3_hypotheses(&self) -> bool {
        !self.capped && self.p1_topm && self.window && self.verdict() == Some(false)
    }

    /// For qualifying records, whether no node with at most `⌊n^{1−ε}⌋`
    /// fixed variables was pruned and the node count reached `2^{n^{1−ε}}`.
    pub fn lemma3_holds(&self, consts: &Constants) -> Option<bool> {
        if !self.meets_lemma3_hypotheses() {
            return None;
        }
        let m = consts.m(self.n);
        let deep_enough = self.min_prune_depth.is_none_or(|d| d > m);
        Some(deep_enough && meets_node_bound(self.nodes_created, self.n as u64, consts.epsilon))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serialization")
    }
}

pub fn run_trial(
    cfg: &ExperimentConfig,
    consts: &Constants,
    n: usize,
    index: usize,
) -> Result<TrialRecord> {
    let seed = trial_seed(cfg.master_seed, n, index);
    let gen = GeneratorConfig::new(n, cfg.r, seed).with_rounding(cfg.rounding);
    let inst = generate_instance(&gen)?;
    let feasible = if n <= MITM_MAX_N {
        Some(mitm_feasible(&inst)?.is_some())
    } else {
        None
    };
    let p1_topm = check_property1_topm(&inst, consts)?;
    let window = beta_in_window(&inst, consts.k);
    let start = Instant::now();
    let report = solve(
        &inst,
        &SolveConfig {
            node_cap: cfg.node_cap,
            ..Default::default()
        },
    )?;
    let elapsed = start.elapsed();
    if let Verdict::Feasible(w) = &report.verdict {
        debug_assert!(inst.is_witness(w));
    }
    Ok(TrialRecord {
        n,
        trial_index: index,
        trial_seed: seed,
        feasible,
        solver_feasible: report.verdict.decided(),
        p1_topm,
        window,
        nodes_created: report.nodes_created,
        min_prune_depth: report.min_prune_depth,
        capped: report.verdict == Verdict::Capped,
        solve_wall_time_us: cfg.record_timings.then_some(elapsed.as_micros() as u64),
    })
}

/// Runs the sweep and hands records to `sink` in `(n, trial_index)` order as
/// batches complete.
pub fn run_experiment_with<F>(cfg: &ExperimentConfig, mut sink: F) -> Result<()>
where
    F: FnMut(&TrialRecord) -> Result<()>,
{
    cfg.validate()?;
    let consts = cfg.constants()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::param(format!("thread pool: {e}")))?;
    let batch = (cfg.parallelism * 8).max(1);
    for &n in &cfg.n_values {
        let mut next = 0;
        while next < cfg.trials {
            let end = (next + batch).min(cfg.trials);
            let records: Vec<Result<TrialRecord>> = pool.install(|| {
                (next..end)
                    .into_par_iter()
                    .map(|i| run_trial(cfg, &consts, n, i))
                    .collect()
            });
            for rec in records {
                sink(&rec?)?;
            }
            next = end;
        }
    }
    Ok(())
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::with_capacity(cfg.n_values.len() * cfg.trials);
    run_experiment_with(cfg, |r| {
        out.push(r.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Writes records as JSON Lines.
pub fn write_jsonl<W: Write>(mut w: W, records: &[TrialRecord]) -> Result<()> {
    for r in records {
        writeln!(w, "{}", r.to_json())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub trials: usize,
    pub frac_infeasible: f64,
    pub frac_p1: f64,
    pub frac_window: f64,
    /// Uncapped trials with Property 1, the window, and infeasibility.
    pub frac_hyp: f64,
    /// Among the `frac_hyp` trials, those meeting the node bound.
    pub frac_node_bound: Option<f64>,
    /// Node statistics over uncapped infeasible trials.
    pub median_nodes: Option<f64>,
    pub min_nodes: Option<u64>,
    pub max_nodes: Option<u64>,
    pub capped: usize,
    pub lemma1_bound: f64,
    pub lemma1_ln: f64,
    pub lemma1_vacuous: bool,
    pub lemma2_bound: f64,
    pub node_lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub rows: Vec<SummaryRow>,
}

pub const SUMMARY_CSV_HEADER: &str = "n,trials,frac_infeasible,frac_p1,frac_window,frac_hyp,frac_node_bound,median_nodes,min_nodes,max_nodes,lemma1_bound,lemma1_vacuous,lemma2_bound,node_lower_bound";

fn fraction(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

/// Midpoint median of an unsorted slice.
pub fn median(values: &mut [u64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid] as f64
    } else {
        (values[mid - 1] as f64 + values[mid] as f64) / 2.0
    })
}

/// Aggregates records per `n`, in `cfg.n_values` order.
pub fn summarize(records: &[TrialRecord], cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let consts = cfg.constants()?;
    if records.is_empty() {
        return Err(Error::EmptyGroup("no records".into()));
    }
    let mut rows = Vec::with_capacity(cfg.n_values.len());
    for &n in &cfg.n_values {
        let group: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n).collect();
        if group.is_empty() {
            return Err(Error::EmptyGroup(format!("no records for n = {n}")));
        }
        let decided = group.iter().filter(|r| r.verdict().is_some()).count();
        let infeasible = group.iter().filter(|r| r.verdict() == Some(false)).count();
        let hyp: Vec<&&TrialRecord> = group
            .iter()
            .filter(|r| r.meets_lemma3_hypotheses())
            .collect();
        let meeting = hyp
            .iter()
            .filter(|r| meets_node_bound(r.nodes_created, n as u64, consts.epsilon))
            .count();
        let mut nodes: Vec<u64> = group
            .iter()
            .filter(|r| !r.capped && r.verdict() == Some(false))
            .map(|r| r.nodes_created)
            .collect();
        let lemma1 = lemma1_prob_bound(n as u64, cfg.epsilon.to_f64(), cfg.k.to_f64())?;
        rows.push(SummaryRow {
            n,
            trials: group.len(),
            frac_infeasible: fraction(infeasible, decided),
            frac_p1: fraction(group.iter().filter(|r| r.p1_topm).count(), group.len()),
            frac_window: fraction(group.iter().filter(|r| r.window).count(), group.len()),
            frac_hyp: fraction(hyp.len(), group.len()),
            frac_node_bound: (!hyp.is_empty()).then(|| fraction(meeting, hyp.len())),
            min_nodes: nodes.iter().copied().min(),
            max_nodes: nodes.iter().copied().max(),
            median_nodes: median(&mut nodes),
            capped: group.iter().filter(|r| r.capped).count(),
            lemma1_bound: lemma1.value,
            lemma1_ln: lemma1.ln_value,
            lemma1_vacuous: lemma1.vacuous,
            lemma2_bound: lemma2_violation_bound(n as u64, cfg.r)?.value,
            node_lower_bound: node_count_lower_bound(n as u64, cfg.epsilon.to_f64())?.value,
        });
    }
    Ok(ExperimentSummary { rows })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentSummary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SUMMARY_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{:e},{},{:e},{}\n",
                r.n,
                r.trials,
                r.frac_infeasible,
                r.frac_p1,
                r.frac_window,
                r.frac_hyp,
                opt(r.frac_node_bound),
                opt(r.median_nodes),
                opt(r.min_nodes),
                opt(r.max_nodes),
                r.lemma1_bound,
                r.lemma1_vacuous,
                r.lemma2_bound,
                r.node_lower_bound,
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(n: usize, nodes: u64, feasible: bool) -> TrialRecord {
        TrialRecord {
            n,
            trial_index: 0,
            trial_seed: 0,
            feasible: Some(feasible),
            solver_feasible: Some(feasible),
            p1_topm: true,
            window: true,
            nodes_created: nodes,
            min_prune_depth: Some(3),
            capped: false,
            solve_wall_time_us: None,
        }
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..100).map(|i| trial_seed(1, 8, i)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_ne!(trial_seed(1, 8, 0), trial_seed(1, 9, 0));
        assert_ne!(trial_seed(1, 8, 0), trial_seed(2, 8, 0));
        // SplitMix64 reference value: first output of the generator seeded with 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&mut [9, 5, 7]), Some(7.0));
        assert_eq!(median(&mut [5, 7, 9, 11]), Some(8.0));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn summarize_fractions() {
        let cfg = ExperimentConfig::new(vec![8], 3, 1);
        let recs = vec![
            record(8, 5, false),
            record(8, 7, false),
            record(8, 9, false),
        ];
        let s = summarize(&recs, &cfg).unwrap();
        let row = &s.rows[0];
        assert_eq!(row.frac_infeasible, 1.0);
        assert_eq!(row.median_nodes, Some(7.0));
        assert_eq!(row.min_nodes, Some(5));
        assert_eq!(row.max_nodes, Some(9));
        assert_eq!(row.frac_hyp, 1.0);
        assert_eq!(row.frac_node_bound, Some(1.0));
        let csv = s.to_csv();
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().next().unwrap(), SUMMARY_CSV_HEADER);
    }

    #[test]
    fn summarize_rejects_missing_group() {
        let cfg = ExperimentConfig::new(vec![8, 10], 1, 1);
        assert!(matches!(
            summarize(&[record(8, 5, false)], &cfg),
            Err(Error::EmptyGroup(_))
        ));
        assert!(summarize(&[], &cfg).is_err());
    }

    #[test]
    fn lemma3_check_on_records() {
        let consts = Constants::new("0.5".parse().unwrap(), "0.25".parse().unwrap()).unwrap();
        // n = 16: m = 4, bound 2^4 = 16
        let mut r = record(16, 31, false);
        r.min_prune_depth = Some(5);
        assert_eq!(r.lemma3_holds(&consts), Some(true));
        r.min_prune_depth = Some(4);
        assert_eq!(r.lemma3_holds(&consts), Some(false));
        r.min_prune_depth = None;
        r.nodes_created = 15;
        assert_eq!(r.lemma3_holds(&consts), Some(false));
        r.capped = true;
        assert_eq!(r.lemma3_holds(&consts), None);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::new(vec![8], 1, 1);
        assert!(cfg.validate().is_ok());
        cfg.k = "0.95".parse().unwrap();
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::new(vec![], 1, 1);
        assert!(cfg.validate().is_err());
        cfg.n_values = vec![4];
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_defaults() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"n_values":[8],"trials":3,"epsilon":0.9,"r":"1/3"}"#).unwrap();
        assert_eq!(cfg.epsilon, "9/10".parse().unwrap());
        assert_eq!(cfg.r, Ratio::new(1, 3));
        assert_eq!(cfg.node_cap, Some(DEFAULT_NODE_CAP));
        assert!(serde_json::from_str::<ExperimentConfig>(
            r#"{"n_values":[8],"trials":3,"r":"0.5"}"#
        )
        .is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(
            r#"{"n_values":[8],"trials":3,"bogus":1}"#
        )
        .is_err());
    }
}
