//! Bounded multistart quasi-Newton optimization of the QAOA angles.
//!
//! Each local run is a BFGS ascent with central finite-difference gradients;
//! iterates are projected onto the parameter box after every line-search
//! step. Restarts are independent tasks whose random starts come from
//! `(seed, restart index)`, so results do not depend on the worker count.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{total_expectation_p1, AnalyticMode, AngleTriple};
use crate::error::{invalid, Result};
use crate::phantom::PhantomGraph;
use crate::sim::{QaoaParams, Simulator, DEFAULT_MAX_QUBITS};

/// Box constraints on every `γ_i` and every `β_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptBox {
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub beta_lo: f64,
    pub beta_hi: f64,
}

impl OptBox {
    pub fn new(gamma_lo: f64, gamma_hi: f64, beta_lo: f64, beta_hi: f64) -> Result<Self> {
        if !(gamma_lo < gamma_hi && beta_lo < beta_hi) {
            return invalid(format!("empty box: γ [{gamma_lo}, {gamma_hi}], β [{beta_lo}, {beta_hi}]"));
        }
        Ok(Self { gamma_lo, gamma_hi, beta_lo, beta_hi })
    }

    /// `γ ∈ [−π, π]`, `β ∈ [−π/4, π/4]`.
    pub fn restricted() -> Self {
        Self { gamma_lo: -PI, gamma_hi: PI, beta_lo: -FRAC_PI_4, beta_hi: FRAC_PI_4 }
    }

    /// `γ ∈ [−2π, 2π]`, `β ∈ [−π/2, π/2]`.
    pub fn extended() -> Self {
        Self { gamma_lo: -2.0 * PI, gamma_hi: 2.0 * PI, beta_lo: -FRAC_PI_2, beta_hi: FRAC_PI_2 }
    }

    /// Lower and upper bounds for the layout `[γ_1..γ_p, β_1..β_p]`.
    pub fn bounds(&self, p: usize) -> (Vec<f64>, Vec<f64>) {
        let lo = std::iter::repeat(self.gamma_lo).take(p).chain(std::iter::repeat(self.beta_lo).take(p)).collect();
        let hi = std::iter::repeat(self.gamma_hi).take(p).chain(std::iter::repeat(self.beta_hi).take(p)).collect();
        (lo, hi)
    }

    pub fn contains(&self, gammas: &[f64], betas: &[f64]) -> bool {
        gammas.iter().all(|g| (self.gamma_lo..=self.gamma_hi).contains(g))
            && betas.iter().all(|b| (self.beta_lo..=self.beta_hi).contains(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub max_iterations: usize,
    /// Stop when the projected gradient's ∞-norm falls below this.
    pub grad_tol: f64,
    /// Central-difference step is `max(fd_step, fd_step·|x|)`.
    pub fd_step: f64,
    /// Largest ∞-norm of a single step, in radians.
    pub max_step: f64,
    /// The line search gives up below this step length (∞-norm).
    pub min_step: f64,
    /// Stop once an accepted step raises the objective by less than
    /// `stall_tol · (1 + |f|)`; finite-difference noise keeps the gradient
    /// test from firing on objectives of order 10 or more.
    pub stall_tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self { max_iterations: 500, grad_tol: 1e-8, fd_step: 1e-7, max_step: 0.5, min_step: 1e-10, stall_tol: 1e-13 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTolerance,
    /// The line search could not improve the objective any further; with
    /// finite-difference gradients this is the usual way to reach an optimum.
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub termination: Termination,
}

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((xi, &l), &h) in x.iter_mut().zip(lo).zip(hi) {
        *xi = xi.clamp(l, h);
    }
}

fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], rel_step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = rel_step.max(rel_step * x[i].abs());
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

// Zeroes components that point out of the box at an active bound.
fn mask_outward(v: &mut [f64], x: &[f64], lo: &[f64], hi: &[f64]) {
    for i in 0..v.len() {
        if (x[i] <= lo[i] && v[i] < 0.0) || (x[i] >= hi[i] && v[i] > 0.0) {
            v[i] = 0.0;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximizes `f` over the box `[lo, hi]` starting from `x0` (projected first).
pub fn maximize_bounded<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    settings: &OptimizerSettings,
) -> LocalResult {
    let n = x0.len();
    let identity = |scale: f64| {
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            h[i * n + i] = scale;
        }
        h
    };
    let mut x = x0.to_vec();
    project(&mut x, lo, hi);
    let mut fx = f(&x);
    let mut g = fd_gradient(f, &x, settings.fd_step);
    // Inverse Hessian approximation of -f.
    let mut hinv = identity(1.0);
    let mut fresh = true;
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        let mut pg = g.clone();
        mask_outward(&mut pg, &x, lo, hi);
        if inf_norm(&pg) < settings.grad_tol {
            termination = Termination::GradientTolerance;
            break;
        }
        iterations += 1;

        let mut d: Vec<f64> = (0..n).map(|i| (0..n).map(|j| hinv[i * n + j] * pg[j]).sum()).collect();
        mask_outward(&mut d, &x, lo, hi);
        if dot(&d, &pg) <= 0.0 {
            hinv = identity(1.0);
            fresh = true;
            d = pg.clone();
        }
        let dmax = inf_norm(&d);
        if dmax > settings.max_step {
            d.iter_mut().for_each(|di| *di *= settings.max_step / dmax);
        }

        let mut t = 1.0;
        let mut accepted = None;
        loop {
            let mut trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            project(&mut trial, lo, hi);
            let step: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            if inf_norm(&step) < settings.min_step {
                break;
            }
            let ft = f(&trial);
            if ft > fx && ft >= fx + 1e-4 * dot(&pg, &step) {
                accepted = Some((trial, ft, step));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new, s)) = accepted else {
            termination = Termination::Stalled;
            break;
        };

        let g_new = fd_gradient(f, &x_new, settings.fd_step);
        // Secant pair for -f: y = -(g_new - g).
        let y: Vec<f64> = g.iter().zip(&g_new).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if fresh {
                hinv = identity(sy / dot(&y, &y));
                fresh = false;
            }
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| hinv[i * n + j] * y[j]).sum()).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        let gain = f_new - fx;
        x = x_new;
        fx = f_new;
        g = g_new;
        if gain < settings.stall_tol * (1.0 + fx.abs()) {
            termination = Termination::Stalled;
            break;
        }
    }

    LocalResult { x, value: fx, iterations, termination }
}

/// Values within this relative distance of the best are ties.
pub const TIE_TOL: f64 = 1e-12;

// Among runs tied with the best value, the one with the smallest angles
// (∞-norm), then the lowest start index. Equivalent optima such as
// (π/4, π/8) and (3π/4, -π/8) on even cycles would otherwise be reported
// depending on start order.
fn select_best(runs: &[LocalResult]) -> usize {
    let top = runs.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
    let floor = top - TIE_TOL * (1.0 + top.abs());
    let mut best: Option<usize> = None;
    for (i, run) in runs.iter().enumerate() {
        if run.value >= floor && best.map_or(true, |b| inf_norm(&run.x) < inf_norm(&runs[b].x)) {
            best = Some(i);
        }
    }
    best.expect("at least one run")
}

/// Best result of a multistart run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Objective re-evaluated at the returned angles.
    pub value: f64,
    pub restarts_used: usize,
    /// Index into the start list (explicit starts first, then random ones).
    pub best_start: usize,
    pub converged: Vec<bool>,
}

impl OptResult {
    pub fn params(&self, alpha: f64) -> QaoaParams {
        QaoaParams { gammas: self.gammas.clone(), betas: self.betas.clone(), alpha }
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    /// `[γ_1..γ_p, β_1..β_p]`.
    pub fn flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }
}

/// Uniform random start `restart` in the box, from the stream `(seed, restart)`.
pub fn random_start(bx: &OptBox, p: usize, seed: u64, restart: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let (lo, hi) = bx.bounds(p);
    lo.iter().zip(&hi).map(|(&l, &h)| rng.gen_range(l..=h)).collect()
}

/// Multistart maximization of `objective(γ⃗, β⃗)` over the box.
///
/// `explicit` starts (layout `[γ..., β...]`) run first, followed by
/// `restarts` random starts. Results within [`TIE_TOL`] of the best are
/// ties, resolved toward the smallest angles and then the lowest start index.
pub fn optimize_angles<F>(
    objective: F,
    p: usize,
    bx: &OptBox,
    restarts: usize,
    seed: u64,
    explicit: &[Vec<f64>],
    settings: &OptimizerSettings,
) -> Result<OptResult>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    if p == 0 {
        return invalid("depth must be at least 1");
    }
    if let Some(bad) = explicit.iter().find(|s| s.len() != 2 * p) {
        return invalid(format!("start of length {} does not match depth {p}", bad.len()));
    }
    let mut starts: Vec<Vec<f64>> = explicit.to_vec();
    starts.extend((0..restarts).map(|r| random_start(bx, p, seed, r)));
    if starts.is_empty() {
        return invalid("no starting points: need restarts >= 1 or explicit starts");
    }

    let (lo, hi) = bx.bounds(p);
    let flat = |x: &[f64]| objective(&x[..p], &x[p..]);
    let runs: Vec<LocalResult> = starts
        .par_iter()
        .map(|x0| maximize_bounded(&flat, x0, &lo, &hi, settings))
        .collect();

    let best = select_best(&runs);
    let x = &runs[best].x;
    Ok(OptResult {
        gammas: x[..p].to_vec(),
        betas: x[p..].to_vec(),
        value: objective(&x[..p], &x[p..]),
        restarts_used: runs.len(),
        best_start: best,
        converged: runs.iter().map(|r| r.termination != Termination::MaxIterations).collect(),
    })
}

/// How `⟨C⟩` is evaluated during a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Statevector,
    /// Closed form; depth 1 only.
    Analytic(AnalyticMode),
}

/// `⟨C⟩(γ⃗, β⃗; α)` on a fixed phantom graph.
pub enum Objective<'a> {
    Statevector(Simulator),
    Analytic(&'a PhantomGraph, AnalyticMode),
}

impl<'a> Objective<'a> {
    pub fn new(pg: &'a PhantomGraph, backend: Backend, p: usize) -> Result<Self> {
        Self::with_limit(pg, backend, p, DEFAULT_MAX_QUBITS)
    }

    /// As [`Objective::new`] with an explicit qubit cap for the simulator.
    pub fn with_limit(pg: &'a PhantomGraph, backend: Backend, p: usize, max_qubits: usize) -> Result<Self> {
        match backend {
            Backend::Statevector => Ok(Objective::Statevector(Simulator::with_limit(pg, max_qubits)?)),
            Backend::Analytic(_) if p != 1 => invalid("the analytic backend only supports depth 1"),
            Backend::Analytic(mode) => Ok(Objective::Analytic(pg, mode)),
        }
    }

    pub fn eval(&self, gammas: &[f64], betas: &[f64], alpha: f64) -> f64 {
        match self {
            Objective::Statevector(sim) => sim.expectation(gammas, betas, alpha),
            Objective::Analytic(pg, mode) => {
                total_expectation_p1(pg, AngleTriple::new(gammas[0], betas[0], alpha), *mode)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub p: usize,
    pub alpha_grid: Vec<f64>,
    pub bx: OptBox,
    pub restarts: usize,
    pub seed: u64,
    pub backend: Backend,
    pub optimizer: OptimizerSettings,
    pub max_qubits: usize,
}

impl SweepSettings {
    /// Depth `p`, α from 0.0 to 0.5 in steps of 0.05, restricted box, 10 restarts.
    pub fn standard(p: usize, seed: u64) -> Self {
        Self {
            p,
            alpha_grid: default_alpha_grid(),
            bx: OptBox::restricted(),
            restarts: 10,
            seed,
            backend: Backend::Statevector,
            optimizer: OptimizerSettings::default(),
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

/// `0.0, 0.05, ..., 0.5`.
pub fn default_alpha_grid() -> Vec<f64> {
    alpha_grid(0.0, 0.5, 0.05).expect("valid default grid")
}

/// `start, start + step, ...` up to `stop` inclusive (with 1e-9 slack).
pub fn alpha_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return invalid(format!("bad α grid {start}..{stop} step {step}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    // Round to 12 decimals so 0.15 prints as 0.15, not 0.15000000000000002.
    Ok((0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaRecord {
    pub alpha: f64,
    pub result: OptResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSweepResult {
    pub p: usize,
    pub records: Vec<AlphaRecord>,
    /// Grid α with the highest value; ties go to the smallest α.
    pub alpha_max: f64,
    pub best_index: usize,
    /// Best value minus the value at α = 0, when 0 is on the grid.
    pub improvement: Option<f64>,
}

impl AlphaSweepResult {
    fn from_records(p: usize, records: Vec<AlphaRecord>) -> Self {
        let mut best = 0;
        for (i, rec) in records.iter().enumerate() {
            if rec.result.value > records[best].result.value {
                best = i;
            }
        }
        let improvement = records
            .iter()
            .find(|r| r.alpha == 0.0)
            .map(|zero| records[best].result.value - zero.result.value);
        Self { p, alpha_max: records[best].alpha, best_index: best, improvement, records }
    }

    pub fn best(&self) -> &AlphaRecord {
        &self.records[self.best_index]
    }

    pub fn at_alpha(&self, alpha: f64) -> Option<&AlphaRecord> {
        self.records.iter().find(|r| r.alpha == alpha)
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return invalid("α grid is empty");
    }
    if grid.iter().any(|a| !a.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("α grid must be finite and strictly increasing");
    }
    Ok(())
}

/// Optimizes the angles independently at every grid α.
///
/// Random starts are shared across α (stream index = restart index).
/// `warm_starts[i]`, when given, are extra explicit starts for grid point `i`.
pub fn alpha_sweep(
    pg: &PhantomGraph,
    settings: &SweepSettings,
    warm_starts: Option<&[Vec<Vec<f64>>]>,
) -> Result<AlphaSweepResult> {
    validate_grid(&settings.alpha_grid)?;
    if let Some(w) = warm_starts {
        if w.len() != settings.alpha_grid.len() {
            return invalid("warm start lists must match the α grid");
        }
    }
    let objective = Objective::with_limit(pg, settings.backend, settings.p, settings.max_qubits)?;
    let records = settings
        .alpha_grid
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let explicit = warm_starts.map(|w| w[i].as_slice()).unwrap_or(&[]);
            let result = optimize_angles(
                |g, b| objective.eval(g, b, alpha),
                settings.p,
                &settings.bx,
                settings.restarts,
                settings.seed,
                explicit,
                &settings.optimizer,
            )?;
            Ok(AlphaRecord { alpha, result })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AlphaSweepResult::from_records(settings.p, records))
}

/// Depth-2 start pool for grid point `index`: every depth-1 optimum of the
/// pool with its layer duplicated, then the zero-second-layer embedding of
/// this α's own optimum.
pub fn p2_warm_starts(p1: &AlphaSweepResult, index: usize) -> Vec<Vec<f64>> {
    let mut starts: Vec<Vec<f64>> = p1
        .records
        .iter()
        .map(|r| vec![r.result.gammas[0], r.result.gammas[0], r.result.betas[0], r.result.betas[0]])
        .collect();
    let own = &p1.records[index].result;
    starts.push(vec![own.gammas[0], 0.0, own.betas[0], 0.0]);
    starts
}

/// Second optimization pass at depth 2, warm-started from a depth-1 sweep
/// on the same grid, plus `settings.restarts` random starts per α.
pub fn p2_second_pass(pg: &PhantomGraph, p1: &AlphaSweepResult, settings: &SweepSettings) -> Result<AlphaSweepResult> {
    if p1.records.is_empty() {
        return invalid("depth-1 pool is empty");
    }
    if p1.p != 1 || p1.records.iter().any(|r| r.result.depth() != 1) {
        return invalid("warm starts must come from a depth-1 sweep");
    }
    let same_grid = p1.records.len() == settings.alpha_grid.len()
        && p1.records.iter().zip(&settings.alpha_grid).all(|(r, &a)| r.alpha == a);
    if !same_grid {
        return invalid("depth-1 results do not cover the α grid");
    }
    let warm: Vec<Vec<Vec<f64>>> = (0..p1.records.len()).map(|i| p2_warm_starts(p1, i)).collect();
    let settings = SweepSettings { p: 2, ..settings.clone() };
    alpha_sweep(pg, &settings, Some(&warm))
}

/// Optimizes `(γ⃗, β⃗, α)` jointly with `α ∈ [alpha_lo, alpha_hi]`.
pub fn optimize_joint(
    pg: &PhantomGraph,
    settings: &SweepSettings,
    alpha_range: (f64, f64),
) -> Result<(OptResult, f64)> {
    let p = settings.p;
    if !(alpha_range.0 < alpha_range.1) {
        return invalid("empty α range");
    }
    let objective = Objective::with_limit(pg, settings.backend, p, settings.max_qubits)?;
    let (mut lo, mut hi) = settings.bx.bounds(p);
    lo.push(alpha_range.0);
    hi.push(alpha_range.1);
    let f = |x: &[f64]| objective.eval(&x[..p], &x[p..2 * p], x[2 * p]);
    let starts: Vec<Vec<f64>> = (0..settings.restarts.max(1))
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
            rng.set_stream(r as u64);
            lo.iter().zip(&hi).map(|(&l, &h)| rng.gen_range(l..=h)).collect()
        })
        .collect();
    let runs: Vec<LocalResult> =
        starts.par_iter().map(|x0| maximize_bounded(&f, x0, &lo, &hi, &settings.optimizer)).collect();
    let best = select_best(&runs);
    let x = &runs[best].x;
    let alpha = x[2 * p];
    Ok((
        OptResult {
            gammas: x[..p].to_vec(),
            betas: x[p..2 * p].to_vec(),
            value: f(x),
            restarts_used: runs.len(),
            best_start: best,
            converged: runs.iter().map(|r| r.termination != Termination::MaxIterations).collect(),
        },
        alpha,
    ))
}
