//! Campaign configuration, read from JSON.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use phantom_qaoa::optimize::{alpha_grid, OptBox};
use phantom_qaoa::PhantomMethod;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Backend for the depth-1 pass of a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum P1Backend {
    /// Closed-form expectation; agrees with the simulator to ~1e-12.
    Analytic,
    Statevector,
}

/// Every field has a default, so `{}` is a valid (large) configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_min: usize,
    pub n_max: usize,
    /// Degrees per vertex count; a missing `n` means every feasible `k ≥ 2`.
    pub degrees: BTreeMap<usize, Vec<usize>>,
    pub graphs_per_cell: usize,
    /// Random graphs tried per `(n, k)` while collecting distinct ones.
    pub sampling_attempts: usize,
    pub methods: Vec<PhantomMethod>,
    pub depths: Vec<usize>,
    pub alpha_start: f64,
    pub alpha_stop: f64,
    pub alpha_step: f64,
    #[serde(rename = "box")]
    pub opt_box: OptBox,
    pub restarts: usize,
    pub seed: u64,
    pub p1_backend: P1Backend,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_min: 6,
            n_max: 16,
            degrees: BTreeMap::new(),
            graphs_per_cell: 10,
            sampling_attempts: 200,
            methods: vec![PhantomMethod::Full, PhantomMethod::Triangle],
            depths: vec![1, 2],
            alpha_start: 0.0,
            alpha_stop: 0.5,
            alpha_step: 0.05,
            opt_box: OptBox::restricted(),
            restarts: 10,
            seed: 1,
            p1_backend: P1Backend::Analytic,
        }
    }
}

/// `k` in `2..n` with `n·k` even.
pub fn feasible_degrees(n: usize) -> Vec<usize> {
    (2..n).filter(|k| n * k % 2 == 0).collect()
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min < 3 || self.n_min > self.n_max {
            bail!("node range {}..={} is empty or below 3", self.n_min, self.n_max);
        }
        if self.graphs_per_cell == 0 || self.sampling_attempts < self.graphs_per_cell {
            bail!("need graphs_per_cell >= 1 and sampling_attempts >= graphs_per_cell");
        }
        if self.methods.is_empty() {
            bail!("no phantom methods selected");
        }
        if let Some(m) = self.methods.iter().find(|m| !matches!(m, PhantomMethod::Full | PhantomMethod::Triangle)) {
            bail!("campaign methods must be full or triangle, got {m}");
        }
        if self.depths.is_empty() || self.depths.iter().any(|p| !(1..=2).contains(p)) {
            bail!("depths must be a non-empty subset of {{1, 2}}");
        }
        if self.restarts == 0 {
            bail!("restarts must be at least 1");
        }
        alpha_grid(self.alpha_start, self.alpha_stop, self.alpha_step)?;
        OptBox::new(self.opt_box.gamma_lo, self.opt_box.gamma_hi, self.opt_box.beta_lo, self.opt_box.beta_hi)?;
        for (&n, ks) in &self.degrees {
            if !(self.n_min..=self.n_max).contains(&n) {
                bail!("degree list given for n={n} outside the node range");
            }
            if ks.is_empty() {
                bail!("empty degree list for n={n}");
            }
            if let Some(k) = ks.iter().find(|&&k| k == 0 || k >= n || n * k % 2 == 1) {
                bail!("no {k}-regular graph on {n} vertices");
            }
        }
        Ok(())
    }

    pub fn alpha_grid(&self) -> Vec<f64> {
        alpha_grid(self.alpha_start, self.alpha_stop, self.alpha_step).expect("validated grid")
    }

    /// `(n, k)` pairs in ascending order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        (self.n_min..=self.n_max)
            .flat_map(|n| {
                let ks = self.degrees.get(&n).cloned().unwrap_or_else(|| feasible_degrees(n));
                ks.into_iter().map(move |k| (n, k))
            })
            .collect()
    }

    /// SHA-256 of the canonical JSON encoding, in hex.
    pub fn sha256(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(canonical.as_bytes()))
    }
}
