//! Dense statevector simulation of the phantom-edge QAOA circuit.
//!
//! Basis index bit `j` is the partition bit of vertex `j`. The phase layer is
//! `exp(-iγ(C + αC'))`, applied as one diagonal pass using precomputed integer
//! cut counts; the mixer is `exp(-iβ Σ X_j)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::phantom::PhantomGraph;

/// Default qubit cap; 24 qubits is 256 MiB of amplitudes.
pub const DEFAULT_MAX_QUBITS: usize = 24;
/// Absolute cap regardless of overrides.
pub const HARD_MAX_QUBITS: usize = 30;

fn check_capacity(n: usize, limit: usize) -> Result<()> {
    let limit = limit.min(HARD_MAX_QUBITS);
    if n == 0 {
        return invalid("statevector needs at least one qubit");
    }
    if n > limit {
        return Err(Error::Capacity {
            what: "qubit count",
            requested: n,
            limit,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub alpha: f64,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>, alpha: f64) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return invalid(format!(
                "need equal, nonzero numbers of gammas and betas (got {} and {})",
                gammas.len(),
                betas.len()
            ));
        }
        Ok(Self { gammas, betas, alpha })
    }

    pub fn p1(gamma: f64, beta: f64, alpha: f64) -> Self {
        Self {
            gammas: vec![gamma],
            betas: vec![beta],
            alpha,
        }
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }
}

/// Diagonals of `C` and `C'` in the computational basis.
#[derive(Debug, Clone)]
pub struct CutSpectrum {
    n: usize,
    base_cut: Vec<u16>,
    phantom_cut: Vec<u16>,
    m_base: usize,
    m_phantom: usize,
    // base_cut * (m_phantom + 1) + phantom_cut, the phase-table index.
    keys: Vec<u32>,
}

impl CutSpectrum {
    pub fn new(pg: &PhantomGraph) -> Result<Self> {
        Self::with_limit(pg, DEFAULT_MAX_QUBITS)
    }

    pub fn with_limit(pg: &PhantomGraph, limit: usize) -> Result<Self> {
        let n = pg.n();
        check_capacity(n, limit)?;
        let base_cut = cut_counts(n, &pg.base().adjacency_masks());
        let phantom_cut = cut_counts(n, &pg.phantom_graph().adjacency_masks());
        let m_phantom = pg.phantom_edges().len();
        let keys = base_cut
            .iter()
            .zip(&phantom_cut)
            .map(|(&c, &cp)| c as u32 * (m_phantom as u32 + 1) + cp as u32)
            .collect();
        Ok(Self {
            n,
            base_cut,
            phantom_cut,
            m_base: pg.base().m(),
            m_phantom,
            keys,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base_cut(&self) -> &[u16] {
        &self.base_cut
    }

    pub fn phantom_cut(&self) -> &[u16] {
        &self.phantom_cut
    }

    fn phase_table(&self, gamma: f64, alpha: f64) -> Vec<Complex64> {
        let base: Vec<Complex64> = (0..=self.m_base).map(|c| Complex64::from_polar(1.0, -gamma * c as f64)).collect();
        let phantom: Vec<Complex64> =
            (0..=self.m_phantom).map(|c| Complex64::from_polar(1.0, -gamma * alpha * c as f64)).collect();
        base.iter().flat_map(|b| phantom.iter().map(move |p| b * p)).collect()
    }
}

// Vertex v joins side 1 at index b = prev | (1 << v), v the top bit of b:
// edges to side-0 neighbors become cut, edges to side-1 neighbors stop being cut.
fn cut_counts(n: usize, masks: &[u64]) -> Vec<u16> {
    let dim = 1usize << n;
    let mut cut = vec![0u16; dim];
    for b in 1..dim {
        let v = usize::BITS as usize - 1 - b.leading_zeros() as usize;
        let prev = b ^ (1 << v);
        let ones = (masks[v] & prev as u64).count_ones() as i32;
        let delta = masks[v].count_ones() as i32 - 2 * ones;
        cut[b] = (cut[prev] as i32 + delta) as u16;
    }
    cut
}

/// Sum of `term(i)` for `i` in `lo..hi` with a fixed binary-tree shape.
fn tree_sum(lo: usize, hi: usize, term: &impl Fn(usize) -> f64) -> f64 {
    if hi - lo <= 256 {
        return (lo..hi).map(term).sum();
    }
    let mid = lo + (hi - lo) / 2;
    tree_sum(lo, mid, term) + tree_sum(mid, hi, term)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|+⟩^⊗n`, every amplitude `2^{-n/2}`.
    pub fn plus(n: usize, limit: usize) -> Result<Self> {
        check_capacity(n, limit)?;
        let dim = 1usize << n;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self { n, amps: vec![amp; dim] })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << n {
            return invalid(format!("{} amplitudes do not describe {n} qubits", amps.len()));
        }
        Ok(Self { n, amps })
    }

    /// The basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_capacity(n, HARD_MAX_QUBITS)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        *amps.get_mut(index).ok_or_else(|| Error::InvalidArgument(format!("basis index {index} out of range")))? =
            Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        tree_sum(0, self.amps.len(), &|i| self.amps[i].norm_sqr())
    }

    /// Multiplies amplitude `b` by `exp(-iγ(base_cut[b] + α·phantom_cut[b]))`.
    pub fn apply_phase(&mut self, spectrum: &CutSpectrum, gamma: f64, alpha: f64) {
        assert_eq!(spectrum.n, self.n, "spectrum and state dimensions differ");
        if gamma == 0.0 {
            return;
        }
        let table = spectrum.phase_table(gamma, alpha);
        for (a, &k) in self.amps.iter_mut().zip(&spectrum.keys) {
            *a *= table[k as usize];
        }
    }

    /// `exp(-iβX)` on every qubit.
    pub fn apply_mixer(&mut self, beta: f64) {
        if beta == 0.0 {
            return;
        }
        let (s, c) = beta.sin_cos();
        for j in 0..self.n {
            let stride = 1usize << j;
            for block in self.amps.chunks_exact_mut(2 * stride) {
                let (lo, hi) = block.split_at_mut(stride);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (a, b) = (*x, *y);
                    // [[c, -is], [-is, c]]
                    *x = Complex64::new(c * a.re + s * b.im, c * a.im - s * b.re);
                    *y = Complex64::new(c * b.re + s * a.im, c * b.im - s * a.re);
                }
            }
        }
    }

    /// `⟨C⟩ = Σ_b |a_b|² base_cut[b]`, the original cost only.
    pub fn expectation_of_cut(&self, spectrum: &CutSpectrum) -> f64 {
        assert_eq!(spectrum.n, self.n, "spectrum and state dimensions differ");
        tree_sum(0, self.amps.len(), &|i| self.amps[i].norm_sqr() * spectrum.base_cut[i] as f64)
    }

    /// Probability that base edge `(u, v)` is cut.
    pub fn per_edge_expectation(&self, pg: &PhantomGraph, u: usize, v: usize) -> Result<f64> {
        if !pg.base().has_edge(u, v) {
            return invalid(format!("({u}, {v}) is not a base edge"));
        }
        if pg.n() != self.n {
            return invalid("graph and state sizes differ");
        }
        Ok(tree_sum(0, self.amps.len(), &|i| {
            if (i >> u & 1) != (i >> v & 1) {
                self.amps[i].norm_sqr()
            } else {
                0.0
            }
        }))
    }
}

/// `|+⟩^⊗n` under the default qubit cap.
pub fn initial_plus_state(n: usize) -> Result<Statevector> {
    Statevector::plus(n, DEFAULT_MAX_QUBITS)
}

/// Precomputed spectra for repeated circuit evaluations on one graph.
#[derive(Debug, Clone)]
pub struct Simulator {
    spectrum: CutSpectrum,
}

impl Simulator {
    pub fn new(pg: &PhantomGraph) -> Result<Self> {
        Self::with_limit(pg, DEFAULT_MAX_QUBITS)
    }

    pub fn with_limit(pg: &PhantomGraph, limit: usize) -> Result<Self> {
        Ok(Self {
            spectrum: CutSpectrum::with_limit(pg, limit)?,
        })
    }

    pub fn spectrum(&self) -> &CutSpectrum {
        &self.spectrum
    }

    /// `|+⟩`, then for each layer the phase operator followed by the mixer.
    pub fn run(&self, gammas: &[f64], betas: &[f64], alpha: f64) -> Statevector {
        assert_eq!(gammas.len(), betas.len(), "gamma and beta sequences differ in length");
        let mut state = Statevector::plus(self.spectrum.n, HARD_MAX_QUBITS).expect("capacity checked at construction");
        for (&gamma, &beta) in gammas.iter().zip(betas) {
            state.apply_phase(&self.spectrum, gamma, alpha);
            state.apply_mixer(beta);
        }
        state
    }

    /// `⟨C⟩` after the circuit.
    ///
    /// `|+⟩`, `C`, `C'` and the mixer all commute with flipping every bit, so
    /// `a_b = a_{¬b}` throughout and only indices with the top bit clear are
    /// simulated.
    pub fn expectation(&self, gammas: &[f64], betas: &[f64], alpha: f64) -> f64 {
        assert_eq!(gammas.len(), betas.len(), "gamma and beta sequences differ in length");
        let n = self.spectrum.n;
        if n < 2 {
            return self.run(gammas, betas, alpha).expectation_of_cut(&self.spectrum);
        }
        let half = 1usize << (n - 1);
        let mut re = vec![(0.5f64).powf(n as f64 / 2.0); half];
        let mut im = vec![0.0; half];
        for (&gamma, &beta) in gammas.iter().zip(betas) {
            if gamma != 0.0 {
                let table = self.spectrum.phase_table(gamma, alpha);
                for ((r, i), &k) in re.iter_mut().zip(im.iter_mut()).zip(&self.spectrum.keys) {
                    let t = table[k as usize];
                    (*r, *i) = (*r * t.re - *i * t.im, *r * t.im + *i * t.re);
                }
            }
            if beta != 0.0 {
                half_mixer(&mut re, &mut im, n, beta);
            }
        }
        let cut = &self.spectrum.base_cut;
        2.0 * tree_sum(0, half, &|b| (re[b] * re[b] + im[b] * im[b]) * cut[b] as f64)
    }
}

// exp(-iβX) on every qubit of a flip-symmetric state stored for the lower half.
// For the top qubit the partner of b is b | top, whose amplitude equals that of
// its complement, b ^ (half - 1).
fn half_mixer(re: &mut [f64], im: &mut [f64], n: usize, beta: f64) {
    let (s, c) = beta.sin_cos();
    let rotate = |xr: &mut f64, xi: &mut f64, yr: &mut f64, yi: &mut f64| {
        let (ar, ai, br, bi) = (*xr, *xi, *yr, *yi);
        *xr = c * ar + s * bi;
        *xi = c * ai - s * br;
        *yr = c * br + s * ai;
        *yi = c * bi - s * ar;
    };
    for j in 0..n - 1 {
        let stride = 1usize << j;
        for (rb, ib) in re.chunks_exact_mut(2 * stride).zip(im.chunks_exact_mut(2 * stride)) {
            let (rlo, rhi) = rb.split_at_mut(stride);
            let (ilo, ihi) = ib.split_at_mut(stride);
            for k in 0..stride {
                rotate(&mut rlo[k], &mut ilo[k], &mut rhi[k], &mut ihi[k]);
            }
        }
    }
    let quarter = re.len() / 2;
    let (rlo, rhi) = re.split_at_mut(quarter);
    let (ilo, ihi) = im.split_at_mut(quarter);
    for k in 0..quarter {
        let p = quarter - 1 - k;
        rotate(&mut rlo[k], &mut ilo[k], &mut rhi[p], &mut ihi[p]);
    }
}

pub fn run_circuit(pg: &PhantomGraph, params: &QaoaParams) -> Result<Statevector> {
    Ok(Simulator::new(pg)?.run(&params.gammas, &params.betas, params.alpha))
}

/// `⟨C⟩` for depth 1 on a `γ × β` grid; `values[bi * gammas.len() + gi]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Landscape {
    pub alpha: f64,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub values: Vec<f64>,
}

impl Landscape {
    pub fn value(&self, gi: usize, bi: usize) -> f64 {
        self.values[bi * self.gammas.len() + gi]
    }

    /// Row-major `(γ, β, ⟨C⟩)` triples, γ fastest.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.betas
            .iter()
            .flat_map(move |&b| self.gammas.iter().map(move |&g| (g, b)))
            .zip(&self.values)
            .map(|((g, b), &v)| (g, b, v))
    }

    /// Largest grid value with `γ` and `β` inside the given closed ranges.
    pub fn max_within(&self, gamma_range: (f64, f64), beta_range: (f64, f64)) -> Option<(f64, f64, f64)> {
        let tol = 1e-12;
        self.rows()
            .filter(|&(g, b, _)| {
                g >= gamma_range.0 - tol && g <= gamma_range.1 + tol && b >= beta_range.0 - tol && b <= beta_range.1 + tol
            })
            .fold(None, |best: Option<(f64, f64, f64)>, row| match best {
                Some(b) if b.2 >= row.2 => Some(b),
                _ => Some(row),
            })
    }

    pub fn max(&self) -> (f64, f64, f64) {
        self.max_within((f64::NEG_INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY))
            .expect("landscape is non-empty")
    }
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| if i + 1 == count { hi } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 })
        .collect()
}

/// Evaluates depth-1 `⟨C⟩` on an evenly spaced grid including both endpoints.
pub fn landscape_grid(
    pg: &PhantomGraph,
    alpha: f64,
    gamma_range: (f64, f64),
    beta_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<Landscape> {
    let (ng, nb) = resolution;
    if ng < 2 || nb < 2 {
        return invalid(format!("landscape resolution must be at least 2 per axis, got {ng}x{nb}"));
    }
    let sim = Simulator::new(pg)?;
    let gammas = linspace(gamma_range.0, gamma_range.1, ng);
    let betas = linspace(beta_range.0, beta_range.1, nb);
    let values = (0..ng * nb)
        .into_par_iter()
        .map(|idx| sim.expectation(&[gammas[idx % ng]], &[betas[idx / ng]], alpha))
        .collect();
    Ok(Landscape {
        alpha,
        gammas,
        betas,
        values,
    })
}
