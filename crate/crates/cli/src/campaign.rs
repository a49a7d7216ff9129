//! Multi-graph experiment campaigns with resumable per-cell output.
//!
//! Layout of a results directory:
//! - `config.json`: the validated configuration
//! - `cells/n16_k04_g00_triangle_p1.{json,csv}`: one sweep per graph, method and depth
//! - `aggregate.csv`, `summary.json`, `*.svg`: derived from the cell files only

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::{bail, Context, Result};
use phantom_qaoa::analytic::AnalyticMode;
use phantom_qaoa::graph::{random_regular_graph, Graph};
use phantom_qaoa::optimize::{alpha_sweep, p2_second_pass, AlphaSweepResult, Backend, OptimizerSettings, SweepSettings};
use phantom_qaoa::{PhantomGraph, PhantomMethod};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charts::{bar_chart, line_chart};
use crate::config::{ExperimentConfig, P1Backend};
use crate::output::{fmt_f64, mean, std_dev, sweep_csv, write_atomic, write_json, Provenance};

const TAG_GRAPH: u64 = 1;
const TAG_SWEEP: u64 = 2;

/// Seed for one task: the first word of the ChaCha8 stream `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.next_u64()
}

// tag:4 | n:8 | k:8 | index:16 | method:4 | p:4
fn stream_id(tag: u64, n: usize, k: usize, index: usize, method: PhantomMethod, p: usize) -> u64 {
    let method = match method {
        PhantomMethod::Full => 1,
        PhantomMethod::Triangle => 2,
        PhantomMethod::Cycle3 => 3,
        PhantomMethod::Custom => 4,
    };
    tag << 40 | (n as u64 & 0xff) << 32 | (k as u64 & 0xff) << 24 | (index as u64 & 0xffff) << 8 | method << 4 | p as u64 & 0xf
}

#[derive(Debug, Clone)]
pub struct SampledGraph {
    pub id: usize,
    pub seed: u64,
    pub graph: Graph,
}

/// Up to `count` pairwise non-isomorphic (by fingerprint) `k`-regular graphs
/// on `n` vertices, trying at most `attempts` seeds.
pub fn sample_graphs(n: usize, k: usize, count: usize, attempts: usize, master: u64) -> Vec<SampledGraph> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for attempt in 0..attempts {
        if out.len() == count {
            break;
        }
        let seed = derive_seed(master, stream_id(TAG_GRAPH, n, k, attempt, PhantomMethod::Custom, 0));
        let Ok(graph) = random_regular_graph(n, k, seed) else { continue };
        if seen.insert(graph.fingerprint()) {
            out.push(SampledGraph { id: out.len(), seed, graph });
        }
    }
    out
}

/// Result of one sweep on one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRecord {
    pub config_sha256: String,
    pub n: usize,
    pub k: usize,
    pub graph_id: usize,
    pub graph_seed: u64,
    pub method: PhantomMethod,
    pub p: usize,
    pub sweep_seed: u64,
    pub max_cut: usize,
    pub edges: Vec<[usize; 2]>,
    pub alpha_max: f64,
    /// Ratio at α = 0, the standard ansatz.
    pub ratio_standard: f64,
    /// Ratio at α_max.
    pub ratio_modified: f64,
    pub improvement: f64,
    pub sweep: AlphaSweepResult,
}

impl CampaignRecord {
    fn file_stem(n: usize, k: usize, graph_id: usize, method: PhantomMethod, p: usize) -> String {
        format!("n{n:02}_k{k:02}_g{graph_id:02}_{method}_p{p}")
    }

    fn new(
        hash: &str,
        (n, k): (usize, usize),
        sample: &SampledGraph,
        method: PhantomMethod,
        sweep_seed: u64,
        max_cut: usize,
        sweep: AlphaSweepResult,
    ) -> Result<Self> {
        let zero = sweep.at_alpha(0.0).context("α grid lacks 0")?.result.value;
        let best = sweep.best().result.value;
        let ratio = |v: f64| v / max_cut as f64;
        Ok(Self {
            config_sha256: hash.to_string(),
            n,
            k,
            graph_id: sample.id,
            graph_seed: sample.seed,
            method,
            p: sweep.p,
            sweep_seed,
            max_cut,
            edges: sample.graph.edges().iter().map(|&(u, v)| [u, v]).collect(),
            alpha_max: sweep.alpha_max,
            ratio_standard: ratio(zero),
            ratio_modified: ratio(best),
            improvement: ratio(best) - ratio(zero),
            sweep,
        })
    }
}

/// Means and sample standard deviations over the graphs of one `(n, k, method, p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub n: usize,
    pub k: usize,
    pub method: PhantomMethod,
    pub p: usize,
    pub graphs: usize,
    pub mean_ratio_standard: f64,
    pub std_ratio_standard: f64,
    pub mean_ratio_modified: f64,
    pub std_ratio_modified: f64,
    pub mean_improvement: f64,
    pub std_improvement: f64,
    pub mean_alpha_max: f64,
    pub std_alpha_max: f64,
}

/// Means over every graph of every `(n, k)` for one method and depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverallRow {
    pub method: PhantomMethod,
    pub p: usize,
    pub graphs: usize,
    pub mean_ratio_standard: f64,
    pub mean_ratio_modified: f64,
    pub mean_improvement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub config_sha256: String,
    pub seed: u64,
    pub overall: Vec<OverallRow>,
    pub rows: Vec<AggregateRow>,
}

impl CampaignSummary {
    pub fn row(&self, n: usize, k: usize, method: PhantomMethod, p: usize) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| (r.n, r.k, r.method, r.p) == (n, k, method, p))
    }

    pub fn overall(&self, method: PhantomMethod, p: usize) -> Option<&OverallRow> {
        self.overall.iter().find(|r| (r.method, r.p) == (method, p))
    }
}

#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    pub computed: usize,
    pub reused: usize,
    pub records: Vec<CampaignRecord>,
    pub summary: CampaignSummary,
}

pub struct CampaignOptions {
    pub max_qubits: usize,
    pub progress: bool,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        Self { max_qubits: phantom_qaoa::sim::DEFAULT_MAX_QUBITS, progress: false }
    }
}

struct Unit {
    n: usize,
    k: usize,
    sample: SampledGraph,
    method: PhantomMethod,
}

fn load_record(path: &Path, hash: &str) -> Option<CampaignRecord> {
    let text = std::fs::read_to_string(path).ok()?;
    let rec: CampaignRecord = serde_json::from_str(&text).ok()?;
    (rec.config_sha256 == hash).then_some(rec)
}

/// Runs (or resumes) a campaign into `dir`.
pub fn run_campaign(config: &ExperimentConfig, dir: &Path, options: &CampaignOptions) -> Result<CampaignOutcome> {
    config.validate()?;
    if config.alpha_start != 0.0 {
        bail!("campaigns need α = 0 on the grid to measure improvement");
    }
    let hash = config.sha256();
    let config_path = dir.join("config.json");
    if let Ok(existing) = std::fs::read_to_string(&config_path) {
        let existing: ExperimentConfig = serde_json::from_str(&existing).context("unreadable config.json in results dir")?;
        if existing.sha256() != hash {
            bail!("{} holds results for a different configuration", dir.display());
        }
    } else {
        write_json(&config_path, config)?;
    }
    let cells_dir = dir.join("cells");
    std::fs::create_dir_all(&cells_dir)?;

    let mut units = Vec::new();
    for (n, k) in config.cells() {
        let samples = sample_graphs(n, k, config.graphs_per_cell, config.sampling_attempts, config.seed);
        if options.progress && samples.len() < config.graphs_per_cell {
            eprintln!("n={n} k={k}: only {} distinct graphs found", samples.len());
        }
        for sample in samples {
            for &method in &config.methods {
                units.push(Unit { n, k, sample: sample.clone(), method });
            }
        }
    }

    let computed = AtomicUsize::new(0);
    let reused = AtomicUsize::new(0);
    let total = units.len();
    let done = AtomicUsize::new(0);
    let results: Vec<Vec<CampaignRecord>> = units
        .par_iter()
        .map(|unit| {
            let recs = run_unit(config, &hash, &cells_dir, unit, options.max_qubits, &computed, &reused)?;
            if options.progress {
                let d = done.fetch_add(1, Ordering::Relaxed) + 1;
                eprintln!("[{d}/{total}] n={} k={} graph={} {}", unit.n, unit.k, unit.sample.id, unit.method);
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;

    let records: Vec<CampaignRecord> = results.into_iter().flatten().collect();
    let summary = write_aggregate(config, &hash, dir, &records)?;
    Ok(CampaignOutcome { computed: computed.into_inner(), reused: reused.into_inner(), records, summary })
}

fn run_unit(
    config: &ExperimentConfig,
    hash: &str,
    cells_dir: &Path,
    unit: &Unit,
    max_qubits: usize,
    computed: &AtomicUsize,
    reused: &AtomicUsize,
) -> Result<Vec<CampaignRecord>> {
    let Unit { n, k, sample, method } = unit;
    let (n, k, method) = (*n, *k, *method);
    let path = |p: usize| cells_dir.join(CampaignRecord::file_stem(n, k, sample.id, method, p));
    let settings = |p: usize| SweepSettings {
        p,
        alpha_grid: config.alpha_grid(),
        bx: config.opt_box,
        restarts: config.restarts,
        seed: derive_seed(config.seed, stream_id(TAG_SWEEP, n, k, sample.id, method, p)),
        backend: match (p, config.p1_backend) {
            (1, P1Backend::Analytic) => Backend::Analytic(AnalyticMode::Validated),
            _ => Backend::Statevector,
        },
        optimizer: OptimizerSettings::default(),
        max_qubits,
    };
    let pg = PhantomGraph::build(sample.graph.clone(), method)?;
    let mut max_cut = None;
    let mut max_cut = || -> Result<usize> {
        if max_cut.is_none() {
            max_cut = Some(sample.graph.max_cut()?);
        }
        Ok(max_cut.unwrap())
    };

    let store = |rec: &CampaignRecord, stem: PathBuf| -> Result<()> {
        let prov = Provenance::new()
            .with("config_sha256", hash)
            .with("seed", rec.sweep_seed)
            .with("graph_seed", rec.graph_seed)
            .with("n", n)
            .with("k", k)
            .with("graph_id", rec.graph_id)
            .with("method", method)
            .with("p", rec.p)
            .with("max_cut", rec.max_cut);
        write_atomic(&stem.with_extension("csv"), sweep_csv(&rec.sweep, rec.max_cut, &prov).as_bytes())?;
        // The JSON file marks the cell complete, so it goes last.
        write_json(&stem.with_extension("json"), rec)
    };

    let mut records = Vec::new();
    let p1 = match load_record(&path(1).with_extension("json"), hash) {
        Some(rec) => {
            reused.fetch_add(1, Ordering::Relaxed);
            rec
        }
        None => {
            let s = settings(1);
            let sweep = alpha_sweep(&pg, &s, None)?;
            let rec = CampaignRecord::new(hash, (n, k), sample, method, s.seed, max_cut()?, sweep)?;
            store(&rec, path(1))?;
            computed.fetch_add(1, Ordering::Relaxed);
            rec
        }
    };
    if config.depths.contains(&2) {
        let p2 = match load_record(&path(2).with_extension("json"), hash) {
            Some(rec) => {
                reused.fetch_add(1, Ordering::Relaxed);
                rec
            }
            None => {
                let s = settings(2);
                let sweep = p2_second_pass(&pg, &p1.sweep, &s)?;
                let rec = CampaignRecord::new(hash, (n, k), sample, method, s.seed, p1.max_cut, sweep)?;
                store(&rec, path(2))?;
                computed.fetch_add(1, Ordering::Relaxed);
                rec
            }
        };
        records.push(p2);
    }
    if config.depths.contains(&1) {
        records.insert(0, p1);
    }
    Ok(records)
}

/// Groups records by `(n, k, method, p)` in sorted order and writes
/// `aggregate.csv`, `summary.json` and the charts.
pub fn write_aggregate(
    config: &ExperimentConfig,
    hash: &str,
    dir: &Path,
    records: &[CampaignRecord],
) -> Result<CampaignSummary> {
    let summary = summarize(config, hash, records);
    let prov = Provenance::new().with("config_sha256", hash).with("seed", config.seed);
    let mut csv = prov.header();
    csv.push_str(
        "n,k,method,p,graphs,mean_ratio_standard,std_ratio_standard,mean_ratio_modified,std_ratio_modified,\
         mean_improvement,std_improvement,mean_alpha_max,std_alpha_max\n",
    );
    for r in &summary.rows {
        let floats = [
            r.mean_ratio_standard,
            r.std_ratio_standard,
            r.mean_ratio_modified,
            r.std_ratio_modified,
            r.mean_improvement,
            r.std_improvement,
            r.mean_alpha_max,
            r.std_alpha_max,
        ];
        let floats: Vec<String> = floats.iter().map(|&x| fmt_f64(x)).collect();
        csv.push_str(&format!("{},{},{},{},{},{}\n", r.n, r.k, r.method, r.p, r.graphs, floats.join(",")));
    }
    write_atomic(&dir.join("aggregate.csv"), csv.as_bytes())?;
    write_json(&dir.join("summary.json"), &summary)?;
    write_charts(&summary, dir)?;
    Ok(summary)
}

pub fn summarize(config: &ExperimentConfig, hash: &str, records: &[CampaignRecord]) -> CampaignSummary {
    let mut groups: BTreeMap<(usize, usize, String, usize), Vec<&CampaignRecord>> = BTreeMap::new();
    for rec in records {
        groups.entry((rec.n, rec.k, rec.method.to_string(), rec.p)).or_default().push(rec);
    }
    let rows: Vec<AggregateRow> = groups
        .values()
        .map(|recs| {
            let mut recs = recs.clone();
            recs.sort_by_key(|r| r.graph_id);
            let col = |f: fn(&CampaignRecord) -> f64| recs.iter().map(|r| f(r)).collect::<Vec<_>>();
            let (std_r, modr, imp, amax) =
                (col(|r| r.ratio_standard), col(|r| r.ratio_modified), col(|r| r.improvement), col(|r| r.alpha_max));
            AggregateRow {
                n: recs[0].n,
                k: recs[0].k,
                method: recs[0].method,
                p: recs[0].p,
                graphs: recs.len(),
                mean_ratio_standard: mean(&std_r),
                std_ratio_standard: std_dev(&std_r),
                mean_ratio_modified: mean(&modr),
                std_ratio_modified: std_dev(&modr),
                mean_improvement: mean(&imp),
                std_improvement: std_dev(&imp),
                mean_alpha_max: mean(&amax),
                std_alpha_max: std_dev(&amax),
            }
        })
        .collect();

    let mut overall = Vec::new();
    for &method in &config.methods {
        for &p in &config.depths {
            let mut recs: Vec<&CampaignRecord> = records.iter().filter(|r| r.method == method && r.p == p).collect();
            if recs.is_empty() {
                continue;
            }
            recs.sort_by_key(|r| (r.n, r.k, r.graph_id));
            let col = |f: fn(&CampaignRecord) -> f64| recs.iter().map(|r| f(r)).collect::<Vec<_>>();
            overall.push(OverallRow {
                method,
                p,
                graphs: recs.len(),
                mean_ratio_standard: mean(&col(|r| r.ratio_standard)),
                mean_ratio_modified: mean(&col(|r| r.ratio_modified)),
                mean_improvement: mean(&col(|r| r.improvement)),
            });
        }
    }
    CampaignSummary { config_sha256: hash.to_string(), seed: config.seed, overall, rows }
}

fn write_charts(summary: &CampaignSummary, dir: &Path) -> Result<()> {
    let methods: Vec<PhantomMethod> = {
        let mut m: Vec<_> = summary.rows.iter().map(|r| r.method).collect();
        m.dedup();
        m.sort_by_key(|m| m.to_string());
        m.dedup();
        m
    };
    let depths: Vec<usize> = {
        let mut d: Vec<_> = summary.rows.iter().map(|r| r.p).collect();
        d.sort();
        d.dedup();
        d
    };
    let mut nk: Vec<(usize, usize)> = summary.rows.iter().map(|r| (r.n, r.k)).collect();
    nk.sort();
    nk.dedup();

    for &method in &methods {
        let categories: Vec<String> = nk.iter().map(|(n, k)| format!("n={n} k={k}")).collect();
        let mut series = Vec::new();
        for &p in &depths {
            let pick = |f: fn(&AggregateRow) -> f64| {
                nk.iter().map(|&(n, k)| summary.row(n, k, method, p).map_or(f64::NAN, f)).collect::<Vec<_>>()
            };
            series.push((format!("standard p={p}"), pick(|r| r.mean_ratio_standard)));
            series.push((format!("modified p={p}"), pick(|r| r.mean_ratio_modified)));
        }
        let svg = bar_chart(&format!("Mean approximation ratio ({method} method)"), "approximation ratio", &categories, &series);
        write_atomic(&dir.join(format!("ratios_{method}.svg")), svg.as_bytes())?;
    }

    let mut ns: Vec<usize> = nk.iter().map(|&(n, _)| n).collect();
    ns.dedup();
    let lines = |f: fn(&AggregateRow) -> f64| {
        let mut series = Vec::new();
        for &method in &methods {
            for &p in &depths {
                for &n in &ns {
                    let pts: Vec<(f64, f64)> = summary
                        .rows
                        .iter()
                        .filter(|r| r.method == method && r.p == p && r.n == n)
                        .map(|r| (r.k as f64, f(r)))
                        .collect();
                    if !pts.is_empty() {
                        series.push((format!("{method} p={p} n={n}"), pts));
                    }
                }
            }
        }
        series
    };
    let svg = line_chart("Mean improvement vs degree", "degree k", "improvement", &lines(|r| r.mean_improvement));
    write_atomic(&dir.join("improvement.svg"), svg.as_bytes())?;
    let svg = line_chart("Mean alpha_max vs degree", "degree k", "alpha_max", &lines(|r| r.mean_alpha_max));
    write_atomic(&dir.join("alpha_max.svg"), svg.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            n_min: 6,
            n_max: 6,
            degrees: [(6, vec![3])].into_iter().collect(),
            graphs_per_cell: 2,
            methods: vec![PhantomMethod::Triangle, PhantomMethod::Full],
            depths: vec![1, 2],
            alpha_stop: 0.1,
            restarts: 2,
            ..Default::default()
        }
    }

    #[test]
    fn seeds_are_distinct_per_stream() {
        let a = derive_seed(1, stream_id(TAG_SWEEP, 16, 4, 0, PhantomMethod::Triangle, 1));
        let b = derive_seed(1, stream_id(TAG_SWEEP, 16, 4, 0, PhantomMethod::Triangle, 2));
        let c = derive_seed(2, stream_id(TAG_SWEEP, 16, 4, 0, PhantomMethod::Triangle, 1));
        assert!(a != b && a != c && b != c);
        assert_eq!(a, derive_seed(1, stream_id(TAG_SWEEP, 16, 4, 0, PhantomMethod::Triangle, 1)));
    }

    #[test]
    fn sampled_graphs_are_distinct() {
        let graphs = sample_graphs(8, 3, 4, 200, 5);
        assert_eq!(graphs.len(), 4);
        let prints: HashSet<_> = graphs.iter().map(|s| s.graph.fingerprint()).collect();
        assert_eq!(prints.len(), 4);
        // Only one 5-regular graph on 6 vertices exists.
        assert_eq!(sample_graphs(6, 5, 10, 50, 5).len(), 1);
    }

    #[test]
    fn campaign_resumes_with_identical_aggregate() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config();
        let first = run_campaign(&config, dir.path(), &CampaignOptions::default()).unwrap();
        assert_eq!(first.computed, 8);
        assert_eq!(first.reused, 0);
        let aggregate = std::fs::read(dir.path().join("aggregate.csv")).unwrap();

        std::fs::remove_file(dir.path().join("cells/n06_k03_g01_full_p2.json")).unwrap();
        let second = run_campaign(&config, dir.path(), &CampaignOptions::default()).unwrap();
        assert_eq!((second.computed, second.reused), (1, 7));
        assert_eq!(std::fs::read(dir.path().join("aggregate.csv")).unwrap(), aggregate);
        assert_eq!(first.records, second.records);

        let other = ExperimentConfig { seed: 99, ..config };
        assert!(run_campaign(&other, dir.path(), &CampaignOptions::default()).is_err());
    }

    #[test]
    fn aggregate_is_the_mean_of_cells() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config();
        let out = run_campaign(&config, dir.path(), &CampaignOptions::default()).unwrap();
        for row in &out.summary.rows {
            let imps: Vec<f64> = out
                .records
                .iter()
                .filter(|r| (r.n, r.k, r.method, r.p) == (row.n, row.k, row.method, row.p))
                .map(|r| r.improvement)
                .collect();
            assert_eq!(row.graphs, imps.len());
            assert_eq!(row.mean_improvement, mean(&imps));
            assert!(row.mean_improvement >= 0.0);
        }
        for rec in &out.records {
            assert!(rec.ratio_modified > 0.0 && rec.ratio_modified <= 1.0 + 1e-12);
            assert_eq!(rec.improvement, rec.ratio_modified - rec.ratio_standard);
        }
        for name in ["aggregate.csv", "summary.json", "ratios_triangle.svg", "improvement.svg", "alpha_max.svg"] {
            assert!(dir.path().join(name).exists(), "{name}");
        }
        let text = std::fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
        assert!(text.starts_with(&format!("# config_sha256={}\n", config.sha256())));
    }
}
