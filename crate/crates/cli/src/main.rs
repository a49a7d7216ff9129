use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use phantom_qaoa::analytic::AnalyticMode;
use phantom_qaoa::graph::Graph;
use phantom_qaoa::optimize::{alpha_grid, Backend, OptBox};
use phantom_qaoa_cli::campaign::{run_campaign, CampaignOptions};
use phantom_qaoa_cli::commands::{
    cycle_analysis, degree_summary, gen_graph, landscape_csv, load_phantom_graph, max_qubits_from_env, run_landscape,
    run_sweep, verify, write_sweep, GraphKind, PhantomChoice, SweepOptions,
};
use phantom_qaoa_cli::config::ExperimentConfig;
use phantom_qaoa_cli::output::{fmt_f64, write_atomic, write_json, Provenance};

#[derive(Parser)]
#[command(name = "phantom-qaoa", version, about = "QAOA Max-Cut experiments with phantom edges")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Cycle,
    Regular,
    Er,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoxArg {
    Restricted,
    Extended,
}

impl BoxArg {
    fn to_box(self) -> OptBox {
        match self {
            BoxArg::Restricted => OptBox::restricted(),
            BoxArg::Extended => OptBox::extended(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Statevector,
    Analytic,
    PaperVerbatim,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and write it as JSON.
    GenGraph {
        #[arg(long = "type", value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        prob: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimize the angles at every α on a grid.
    Sweep {
        #[arg(long)]
        graph: PathBuf,
        /// standard, full, triangle, cycle3 or custom.
        #[arg(long, default_value = "triangle")]
        method: PhantomChoice,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 0.0)]
        alpha_start: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha_stop: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha_step: f64,
        #[arg(long = "box", value_enum, default_value = "restricted")]
        opt_box: BoxArg,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Evaluator for the depth-1 pass.
        #[arg(long, value_enum, default_value = "statevector")]
        backend: BackendArg,
        /// Also optimize α jointly with the angles.
        #[arg(long)]
        joint: bool,
        /// Sweep CSV path; the JSON summary goes next to it.
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Run a configured multi-graph campaign (resumable).
    Campaign {
        /// JSON configuration file.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "campaign")]
        out: PathBuf,
    },
    /// Depth-1 energy landscape on a γ × β grid.
    Landscape {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "triangle")]
        method: PhantomChoice,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long = "box", value_enum, default_value = "extended")]
        opt_box: BoxArg,
        #[arg(long, default_value_t = 201)]
        resolution: usize,
        #[arg(long, default_value = "landscape.csv")]
        out: PathBuf,
    },
    /// Closed-form cycle expressions over α.
    CycleAnalysis {
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 0.0)]
        alpha_start: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha_stop: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha_step: f64,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact maximum cut by enumeration.
    Maxcut {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Cross-check the closed form against the simulator.
    Verify {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    let max_qubits = max_qubits_from_env()?;
    match command {
        Command::GenGraph { kind, n, degree, prob, seed, out } => {
            let kind = match kind {
                KindArg::Cycle => GraphKind::Cycle,
                KindArg::Regular => GraphKind::Regular,
                KindArg::Er => GraphKind::ErdosRenyi,
            };
            let g = gen_graph(kind, n, degree, prob, seed)?;
            let json = serde_json::to_string(&g)?;
            match out {
                Some(path) => {
                    write_atomic(&path, format!("{json}\n").as_bytes())?;
                    println!("{}", degree_summary(&g));
                }
                None => println!("{json}"),
            }
        }
        Command::Sweep {
            graph,
            method,
            p,
            alpha_start,
            alpha_stop,
            alpha_step,
            opt_box,
            restarts,
            seed,
            backend,
            joint,
            out,
        } => {
            let pg = load_phantom_graph(&graph, method)?;
            let p1_backend = match backend {
                BackendArg::Statevector => Backend::Statevector,
                BackendArg::Analytic => Backend::Analytic(AnalyticMode::Validated),
                BackendArg::PaperVerbatim => Backend::Analytic(AnalyticMode::PaperVerbatim),
            };
            let opts = SweepOptions {
                p,
                alpha_start,
                alpha_stop,
                alpha_step,
                bx: opt_box.to_box(),
                restarts,
                seed,
                p1_backend,
                joint,
                max_qubits,
            };
            let summary = run_sweep(&pg, &opts)?;
            let json_path = out.with_extension("json");
            let prov = Provenance::new().with("graph", graph.display()).with("method", format!("{method:?}").to_lowercase());
            write_sweep(&summary, &out, &json_path, prov)?;
            println!("max_cut {}", summary.max_cut);
            if let Some(r0) = summary.ratio_alpha0 {
                println!("ratio(alpha=0) {}", fmt_f64(r0));
            }
            println!("ratio(alpha_max={}) {}", summary.alpha_max, fmt_f64(summary.ratio_alpha_max));
            if let Some(imp) = summary.improvement {
                println!("improvement {}", fmt_f64(imp));
            }
            if let Some(j) = &summary.joint {
                println!("joint alpha {} ratio {}", fmt_f64(j.alpha), fmt_f64(j.approx_ratio));
            }
            println!("wrote {} and {}", out.display(), json_path.display());
        }
        Command::Campaign { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let outcome = run_campaign(&cfg, &out, &CampaignOptions { max_qubits, progress: true })?;
            println!("cells computed {} reused {}", outcome.computed, outcome.reused);
            for row in &outcome.summary.overall {
                println!(
                    "{} p={}: graphs {} mean ratio standard {:.4} modified {:.4} improvement {:.4}",
                    row.method, row.p, row.graphs, row.mean_ratio_standard, row.mean_ratio_modified, row.mean_improvement
                );
            }
            println!("results in {}", out.display());
        }
        Command::Landscape { graph, method, alpha, opt_box, resolution, out } => {
            let pg = load_phantom_graph(&graph, method)?;
            if pg.n() > max_qubits {
                bail!("graph has {} vertices, above the qubit cap {max_qubits}", pg.n());
            }
            let (grid, summary) = run_landscape(&pg, alpha, opt_box.to_box(), resolution)?;
            let prov = Provenance::new().with("graph", graph.display()).with("alpha", alpha);
            write_atomic(&out, landscape_csv(&grid, &prov).as_bytes())?;
            let (rg, rb, rv) = summary.restricted_max;
            let (eg, eb, ev) = summary.extended_max;
            println!("restricted max {} at gamma {} beta {}", fmt_f64(rv), fmt_f64(rg), fmt_f64(rb));
            println!("extended max {} at gamma {} beta {}", fmt_f64(ev), fmt_f64(eg), fmt_f64(eb));
            write_json(&out.with_extension("json"), &summary)?;
        }
        Command::CycleAnalysis { m, alpha_start, alpha_stop, alpha_step, restarts, seed, out } => {
            let alphas = alpha_grid(alpha_start, alpha_stop, alpha_step)?;
            let rows = cycle_analysis(m, &alphas, restarts, seed)?;
            let mut csv = Provenance::new().with("m", m).with("seed", seed).header();
            csv.push_str("alpha,profile,triangle_opt,three_hop_opt\n");
            for r in &rows {
                let hop = r.three_hop_opt.map(fmt_f64).unwrap_or_default();
                csv.push_str(&format!("{},{},{},{hop}\n", fmt_f64(r.alpha), fmt_f64(r.profile), fmt_f64(r.triangle_opt)));
            }
            match out {
                Some(path) => write_atomic(&path, csv.as_bytes())?,
                None => print!("{csv}"),
            }
            let best = rows.iter().max_by(|a, b| a.triangle_opt.total_cmp(&b.triangle_opt)).context("empty α grid")?;
            println!(
                "best triangled value {} (ratio {}) at alpha {}",
                fmt_f64(best.triangle_opt),
                fmt_f64(best.triangle_opt / m as f64),
                best.alpha
            );
        }
        Command::Maxcut { graph } => {
            let text = std::fs::read_to_string(&graph).with_context(|| format!("reading {}", graph.display()))?;
            let g: Graph = serde_json::from_str(&text).context("parsing graph")?;
            println!("m {} max_cut {}", g.m(), g.max_cut()?);
        }
        Command::Verify { trials, n_max, seed } => {
            let report = verify(trials, n_max, seed)?;
            println!("trials {}", report.trials);
            println!("validated max deviation {:.3e}", report.max_dev_validated);
            println!("paper_verbatim max deviation {:.3e}", report.max_dev_paper_verbatim);
            println!("paper_verbatim alpha=0 max deviation {:.3e}", report.max_dev_paper_verbatim_alpha0);
            println!(
                "paper_verbatim triangled max deviation {:.3e} (reported only)",
                report.max_dev_paper_verbatim_triangled
            );
            let verdict = if report.passed() { "PASS" } else { "FAIL" };
            println!("{verdict} (tolerance {:e})", phantom_qaoa_cli::commands::VerifyReport::TOLERANCE);
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
