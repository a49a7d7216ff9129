//! Command implementations, callable without going through the binary.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{bail, Context, Result};
use phantom_qaoa::analytic::{
    cycle_alpha_profile, cycle_three_hop_expectation, total_expectation_p1, triangled_cycle_expectation, AnalyticMode,
    AngleTriple,
};
use phantom_qaoa::graph::{cycle_graph, erdos_renyi_graph, random_regular_graph, Graph};
use phantom_qaoa::optimize::{
    alpha_grid, alpha_sweep, optimize_angles, optimize_joint, p2_second_pass, AlphaSweepResult, Backend, OptBox,
    OptResult, OptimizerSettings, SweepSettings,
};
use phantom_qaoa::sim::{landscape_grid, Landscape, Simulator, DEFAULT_MAX_QUBITS};
use phantom_qaoa::{PhantomGraph, PhantomMethod};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::output::{fmt_f64, sweep_csv, write_atomic, write_json, Provenance};

/// Environment variable overriding the simulator's qubit cap.
pub const MAX_QUBITS_ENV: &str = "PHANTOM_QAOA_MAX_QUBITS";

pub fn max_qubits_from_env() -> Result<usize> {
    match std::env::var(MAX_QUBITS_ENV) {
        Ok(v) => v.trim().parse().with_context(|| format!("{MAX_QUBITS_ENV}={v} is not a qubit count")),
        Err(_) => Ok(DEFAULT_MAX_QUBITS),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhantomChoice {
    /// No phantom edges.
    Standard,
    Full,
    Triangle,
    Cycle3,
    /// Phantom edges read from the input file.
    Custom,
}

impl std::str::FromStr for PhantomChoice {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "standard" => PhantomChoice::Standard,
            "full" => PhantomChoice::Full,
            "triangle" => PhantomChoice::Triangle,
            "cycle3" => PhantomChoice::Cycle3,
            "custom" => PhantomChoice::Custom,
            other => bail!("unknown method '{other}' (standard, full, triangle, cycle3, custom)"),
        })
    }
}

/// Reads a graph file and attaches phantom edges.
///
/// `Custom` expects a phantom-graph file (`base_edges`/`phantom_edges`);
/// every other choice accepts either a graph or a phantom-graph file and
/// uses only its base edges.
pub fn load_phantom_graph(path: &Path, method: PhantomChoice) -> Result<PhantomGraph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let base = match serde_json::from_str::<PhantomGraph>(&text) {
        Ok(pg) if method == PhantomChoice::Custom => return Ok(pg),
        Ok(pg) => pg.base().clone(),
        Err(_) if method == PhantomChoice::Custom => bail!("{} is not a phantom-graph file", path.display()),
        Err(_) => serde_json::from_str::<Graph>(&text).with_context(|| format!("parsing {}", path.display()))?,
    };
    Ok(match method {
        PhantomChoice::Standard | PhantomChoice::Custom => PhantomGraph::standard(base),
        PhantomChoice::Full => PhantomGraph::full_method(base),
        PhantomChoice::Triangle => PhantomGraph::triangle_method(base),
        PhantomChoice::Cycle3 => PhantomGraph::cycle_three_hop(base)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Cycle,
    Regular,
    ErdosRenyi,
}

pub fn gen_graph(kind: GraphKind, n: usize, degree: Option<usize>, prob: Option<f64>, seed: u64) -> Result<Graph> {
    Ok(match kind {
        GraphKind::Cycle => cycle_graph(n)?,
        GraphKind::Regular => random_regular_graph(n, degree.context("--degree is required for regular graphs")?, seed)?,
        GraphKind::ErdosRenyi => erdos_renyi_graph(n, prob.context("--prob is required for Erdős–Rényi graphs")?, seed)?,
    })
}

/// `m`, then the degree sequence as `degree×count` runs.
pub fn degree_summary(g: &Graph) -> String {
    let mut degrees = g.degrees();
    degrees.sort_unstable();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for d in degrees {
        match runs.last_mut() {
            Some((last, count)) if *last == d => *count += 1,
            _ => runs.push((d, 1)),
        }
    }
    let runs: Vec<String> = runs.iter().map(|(d, c)| format!("{d}x{c}")).collect();
    format!("n={} m={} degrees {}", g.n(), g.m(), runs.join(" "))
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub p: usize,
    pub alpha_start: f64,
    pub alpha_stop: f64,
    pub alpha_step: f64,
    pub bx: OptBox,
    pub restarts: usize,
    pub seed: u64,
    /// Backend of the depth-1 pass; the depth-2 pass always simulates.
    pub p1_backend: Backend,
    pub joint: bool,
    pub max_qubits: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            p: 1,
            alpha_start: 0.0,
            alpha_stop: 0.5,
            alpha_step: 0.05,
            bx: OptBox::restricted(),
            restarts: 10,
            seed: 1,
            p1_backend: Backend::Statevector,
            joint: false,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointSummary {
    pub alpha: f64,
    pub value: f64,
    pub approx_ratio: f64,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub n: usize,
    pub m: usize,
    pub phantom_edges: usize,
    pub p: usize,
    pub seed: u64,
    pub max_cut: usize,
    pub alpha_max: f64,
    /// `None` when 0 is not on the grid.
    pub ratio_alpha0: Option<f64>,
    pub ratio_alpha_max: f64,
    pub improvement: Option<f64>,
    pub joint: Option<JointSummary>,
    pub sweep: AlphaSweepResult,
}

/// Sweeps α at depth `p`. Depth 2 first runs the depth-1 sweep on the same
/// grid and warm-starts from it.
pub fn run_sweep(pg: &PhantomGraph, opts: &SweepOptions) -> Result<SweepSummary> {
    let settings = SweepSettings {
        p: opts.p,
        alpha_grid: alpha_grid(opts.alpha_start, opts.alpha_stop, opts.alpha_step)?,
        bx: opts.bx,
        restarts: opts.restarts,
        seed: opts.seed,
        backend: Backend::Statevector,
        optimizer: OptimizerSettings::default(),
        max_qubits: opts.max_qubits,
    };
    let p1_settings = SweepSettings { p: 1, backend: opts.p1_backend, ..settings.clone() };
    let sweep = match opts.p {
        1 => alpha_sweep(pg, &p1_settings, None)?,
        2 => p2_second_pass(pg, &alpha_sweep(pg, &p1_settings, None)?, &settings)?,
        _ => alpha_sweep(pg, &settings, None)?,
    };
    let max_cut = pg.base().max_cut()?;
    let ratio = |v: f64| v / max_cut as f64;
    let joint = if opts.joint {
        let joint_settings = if opts.p == 1 { p1_settings } else { settings };
        let (res, alpha) = optimize_joint(pg, &joint_settings, (opts.alpha_start, opts.alpha_stop))?;
        Some(JointSummary {
            alpha,
            value: res.value,
            approx_ratio: ratio(res.value),
            gammas: res.gammas,
            betas: res.betas,
        })
    } else {
        None
    };
    Ok(SweepSummary {
        n: pg.n(),
        m: pg.base().m(),
        phantom_edges: pg.phantom_edges().len(),
        p: opts.p,
        seed: opts.seed,
        max_cut,
        alpha_max: sweep.alpha_max,
        ratio_alpha0: sweep.at_alpha(0.0).map(|r| ratio(r.result.value)),
        ratio_alpha_max: ratio(sweep.best().result.value),
        improvement: sweep.improvement.map(ratio),
        joint,
        sweep,
    })
}

pub fn write_sweep(summary: &SweepSummary, csv_path: &Path, json_path: &Path, provenance: Provenance) -> Result<()> {
    let prov = provenance.with("seed", summary.seed).with("p", summary.p).with("max_cut", summary.max_cut);
    write_atomic(csv_path, sweep_csv(&summary.sweep, summary.max_cut, &prov).as_bytes())?;
    write_json(json_path, summary)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandscapeSummary {
    pub alpha: f64,
    pub resolution: usize,
    /// `(γ, β, value)` at the grid maximum.
    pub restricted_max: (f64, f64, f64),
    pub extended_max: (f64, f64, f64),
}

/// Depth-1 grids over both boxes at the same resolution. Returns the grid of
/// `bx` (for writing) and the two maxima.
pub fn run_landscape(
    pg: &PhantomGraph,
    alpha: f64,
    bx: OptBox,
    resolution: usize,
) -> Result<(Landscape, LandscapeSummary)> {
    let grid = |b: OptBox| {
        landscape_grid(pg, alpha, (b.gamma_lo, b.gamma_hi), (b.beta_lo, b.beta_hi), (resolution, resolution))
    };
    let restricted = grid(OptBox::restricted())?;
    let extended = grid(OptBox::extended())?;
    let summary = LandscapeSummary { alpha, resolution, restricted_max: restricted.max(), extended_max: extended.max() };
    let chosen = if bx == OptBox::restricted() {
        restricted
    } else if bx == OptBox::extended() {
        extended
    } else {
        grid(bx)?
    };
    Ok((chosen, summary))
}

/// `gamma,beta,expectation`, β-major with γ varying fastest.
pub fn landscape_csv(landscape: &Landscape, provenance: &Provenance) -> String {
    let mut out = provenance.header();
    out.push_str("gamma,beta,expectation\n");
    for (g, b, v) in landscape.rows() {
        out.push_str(&format!("{},{},{}\n", fmt_f64(g), fmt_f64(b), fmt_f64(v)));
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleRow {
    pub alpha: f64,
    /// Triangled-cycle value at `(π/4, π/8)`.
    pub profile: f64,
    /// Triangled-cycle value maximized over the restricted box.
    pub triangle_opt: f64,
    /// Three-hop value maximized over the restricted box; `None` when the
    /// three-hop construction is invalid for this cycle length.
    pub three_hop_opt: Option<f64>,
}

/// Closed-form cycle expressions over an α grid, for a cycle of `m` vertices.
pub fn cycle_analysis(m: usize, alphas: &[f64], restarts: usize, seed: u64) -> Result<Vec<CycleRow>> {
    if m < 6 {
        bail!("the cycle formulas need at least 6 vertices");
    }
    let three_hop_valid = PhantomGraph::cycle_three_hop(cycle_graph(m)?).is_ok();
    let bx = OptBox::restricted();
    let settings = OptimizerSettings::default();
    let best = |f: &(dyn Fn(f64, f64) -> f64 + Sync)| -> Result<OptResult> {
        Ok(optimize_angles(|g, b| f(g[0], b[0]), 1, &bx, restarts, seed, &[], &settings)?)
    };
    alphas
        .iter()
        .map(|&alpha| {
            let tri = best(&|g, b| triangled_cycle_expectation(m, AngleTriple::new(g, b, alpha)))?;
            let hop = if three_hop_valid {
                Some(best(&|g, b| cycle_three_hop_expectation(m, AngleTriple::new(g, b, alpha)))?.value)
            } else {
                None
            };
            Ok(CycleRow { alpha, profile: cycle_alpha_profile(m, alpha), triangle_opt: tri.value, three_hop_opt: hop })
        })
        .collect()
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct VerifyReport {
    pub trials: usize,
    pub max_dev_validated: f64,
    pub max_dev_paper_verbatim: f64,
    /// Paper-verbatim deviation restricted to α = 0 evaluations.
    pub max_dev_paper_verbatim_alpha0: f64,
    /// Paper-verbatim deviation on graphs whose phantom edges close triangles.
    pub max_dev_paper_verbatim_triangled: f64,
}

impl VerifyReport {
    pub const TOLERANCE: f64 = 1e-9;

    pub fn passed(&self) -> bool {
        self.max_dev_validated <= Self::TOLERANCE && self.max_dev_paper_verbatim_alpha0 <= Self::TOLERANCE
    }
}

/// Cross-checks both closed-form modes against the simulator on random
/// graphs with `3 ≤ n ≤ n_max`, alternating full and triangle phantom sets.
/// Each trial evaluates one random `(γ, β, α)` and the same angles at α = 0.
pub fn verify(trials: usize, n_max: usize, seed: u64) -> Result<VerifyReport> {
    if n_max < 3 {
        bail!("n-max must be at least 3");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerifyReport { trials, ..Default::default() };
    for t in 0..trials {
        let n = rng.gen_range(3..=n_max);
        let prob = rng.gen_range(0.2..0.9);
        let base = loop {
            let g = erdos_renyi_graph(n, prob, rng.gen())?;
            if g.m() > 0 {
                break g;
            }
        };
        let method = if t % 2 == 0 { PhantomMethod::Triangle } else { PhantomMethod::Full };
        let pg = PhantomGraph::build(base, method)?;
        let sim = Simulator::new(&pg)?;
        let gamma = rng.gen_range(-PI..PI);
        let beta = rng.gen_range(-PI / 2.0..PI / 2.0);
        let alpha = rng.gen_range(0.0..1.5);
        let triangled = pg.environments().iter().any(|e| e.f_mixed + e.f_pp > 0);
        for a in [alpha, 0.0] {
            let exact = sim.expectation(&[gamma], &[beta], a);
            let angles = AngleTriple::new(gamma, beta, a);
            let dev = |mode| (total_expectation_p1(&pg, angles, mode) - exact).abs();
            let (validated, verbatim) = (dev(AnalyticMode::Validated), dev(AnalyticMode::PaperVerbatim));
            report.max_dev_validated = report.max_dev_validated.max(validated);
            report.max_dev_paper_verbatim = report.max_dev_paper_verbatim.max(verbatim);
            if a == 0.0 {
                report.max_dev_paper_verbatim_alpha0 = report.max_dev_paper_verbatim_alpha0.max(verbatim);
            } else if triangled {
                report.max_dev_paper_verbatim_triangled = report.max_dev_paper_verbatim_triangled.max(verbatim);
            }
        }
    }
    Ok(report)
}
