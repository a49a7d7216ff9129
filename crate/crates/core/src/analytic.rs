//! Closed-form depth-1 expectations for the phantom-edge ansatz.
//!
//! Base edges rotate by `γ` and phantom edges by `αγ` in the phase operator.
//! At depth one the cut probability of a base edge `(u, v)` depends only on
//! its [`EdgeEnvironment`].

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::phantom::{EdgeEnvironment, PhantomGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleTriple {
    pub gamma: f64,
    pub beta: f64,
    pub alpha: f64,
}

impl AngleTriple {
    pub fn new(gamma: f64, beta: f64, alpha: f64) -> Self {
        Self { gamma, beta, alpha }
    }
}

/// Which closed form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticMode {
    /// Exact for every environment; agrees with the statevector simulator.
    ///
    /// The triangle contributions multiply rather than add: the `Y_u Y_v`
    /// bracket is `Π_w cos(θ_uw − θ_vw) − Π_w cos(θ_uw + θ_vw)` over the
    /// common and private neighbors `w`.
    #[default]
    Validated,
    /// The three triangle classes summed as separate terms, with a factor ½
    /// on the mixed-triangle term. Matches [`AnalyticMode::Validated`] when
    /// `f_mixed = 0` and at most one of `f`, `f_pp` is nonzero; otherwise it
    /// deviates from the simulator.
    PaperVerbatim,
}

/// `x^k` by repeated squaring, with `0^0 = 1`.
pub fn ipow(mut x: f64, mut k: u32) -> f64 {
    let mut acc = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            acc *= x;
        }
        x *= x;
        k >>= 1;
    }
    acc
}

/// Probability that base edge `(u, v)` is cut after one layer.
pub fn edge_expectation_p1(env: &EdgeEnvironment, angles: AngleTriple, mode: AnalyticMode) -> f64 {
    let AngleTriple { gamma, beta, alpha } = angles;
    let ag = alpha * gamma;
    let (sg, cg) = gamma.sin_cos();
    let ca = ag.cos();
    let EdgeEnvironment { d, e, d_p, e_p, f, f_mixed: fm, f_pp } = *env;

    let linear = (4.0 * beta).sin() / 4.0 * sg * (ipow(cg, d) * ipow(ca, d_p) + ipow(cg, e) * ipow(ca, e_p));
    let s2b = (2.0 * beta).sin();
    let quad = s2b * s2b / 4.0;

    let bracket = match mode {
        AnalyticMode::Validated => {
            let shared = ipow(cg, d + e - 2 * f - fm) * ipow(ca, d_p + e_p - 2 * f_pp - fm);
            let minus = ipow(((1.0 - alpha) * gamma).cos(), fm);
            let plus = ipow((2.0 * gamma).cos(), f)
                * ipow((2.0 * ag).cos(), f_pp)
                * ipow(((1.0 + alpha) * gamma).cos(), fm);
            shared * (minus - plus)
        }
        AnalyticMode::PaperVerbatim => {
            let sa = ag.sin();
            let base_tri = ipow(cg, d + e - 2 * f) * ipow(ca, d_p + e_p) * (1.0 - ipow((2.0 * gamma).cos(), f));
            let mixed_tri = ipow(cg, d + e - fm)
                * ipow(ca, d_p + e_p - fm)
                * 0.5
                * (ipow(cg * ca + sg * sa, fm) - ipow(cg * ca - sg * sa, fm));
            let phantom_tri =
                ipow(cg, d + e) * ipow(ca, d_p + e_p - 2 * f_pp) * (1.0 - ipow((2.0 * ag).cos(), f_pp));
            base_tri + mixed_tri + phantom_tri
        }
    };

    0.5 + linear - quad * bracket
}

/// The triangle-free special case; rejects environments with any triangle.
pub fn corollary_triangle_free(env: &EdgeEnvironment, angles: AngleTriple) -> Result<f64> {
    if !env.is_triangle_free() {
        return invalid(format!("environment {env:?} contains triangles"));
    }
    let AngleTriple { gamma, beta, alpha } = angles;
    let (sg, cg) = gamma.sin_cos();
    let ca = (alpha * gamma).cos();
    Ok(0.5
        + (4.0 * beta).sin() / 4.0
            * sg
            * (ipow(cg, env.d) * ipow(ca, env.d_p) + ipow(cg, env.e) * ipow(ca, env.e_p)))
}

/// `⟨C⟩` summed over base edges only; phantom edges never enter the target.
pub fn total_expectation_p1(pg: &PhantomGraph, angles: AngleTriple, mode: AnalyticMode) -> f64 {
    pg.environments()
        .iter()
        .map(|env| edge_expectation_p1(env, angles, mode))
        .sum()
}

/// Standard-ansatz expectation on a `D`-regular triangle-free graph with `m` edges.
pub fn regular_triangle_free_expectation(degree: u32, m: usize, gamma: f64, beta: f64) -> f64 {
    let m = m as f64;
    m / 2.0 + m / 2.0 * (4.0 * beta).sin() * gamma.sin() * ipow(gamma.cos(), degree.saturating_sub(1))
}

/// Optimal angles and value of [`regular_triangle_free_expectation`]:
/// `γ* = arctan(1/√(D−1))`, `β* = π/8`.
pub fn regular_triangle_free_max(degree: u32, m: usize) -> Result<(f64, f64, f64)> {
    if degree < 1 {
        return invalid("degree must be at least 1");
    }
    let dd = degree as f64;
    let gamma = if degree == 1 { FRAC_PI_2 } else { (1.0 / (dd - 1.0).sqrt()).atan() };
    let m = m as f64;
    let value = m / 2.0 + m / 2.0 / dd.sqrt() * ((dd - 1.0) / dd).powf((dd - 1.0) / 2.0);
    Ok((gamma, FRAC_PI_8, value))
}

/// Cycle with three-hop phantom edges:
/// `m/2 + (m/2) sin4β sinγ cosγ cos²(αγ)`.
pub fn cycle_three_hop_expectation(m: usize, angles: AngleTriple) -> f64 {
    let AngleTriple { gamma, beta, alpha } = angles;
    let m = m as f64;
    let ca = (alpha * gamma).cos();
    m / 2.0 + m / 2.0 * (4.0 * beta).sin() * gamma.sin() * gamma.cos() * ca * ca
}

/// Cycle with distance-two phantom edges:
/// `m/2 + (m/2) sin4β sinγ cosγ cos²(αγ) − m sin²2β cosγ cos³(αγ) sinγ sin(αγ)`.
pub fn triangled_cycle_expectation(m: usize, angles: AngleTriple) -> f64 {
    let AngleTriple { gamma, beta, alpha } = angles;
    let m = m as f64;
    let (sa, ca) = (alpha * gamma).sin_cos();
    let (sg, cg) = gamma.sin_cos();
    let s2b = (2.0 * beta).sin();
    m / 2.0 + m / 2.0 * (4.0 * beta).sin() * sg * cg * ca * ca - m * s2b * s2b * cg * ca.powi(3) * sg * sa
}

/// [`triangled_cycle_expectation`] at `(γ, β) = (π/4, π/8)` as a function of α:
/// `m/2 + (m/4)cos²(πα/4) − (m/4)cos³(πα/4) sin(πα/4)`.
pub fn cycle_alpha_profile(m: usize, alpha: f64) -> f64 {
    let m = m as f64;
    let (s, c) = (FRAC_PI_4 * alpha).sin_cos();
    m / 2.0 + m / 4.0 * c * c - m / 4.0 * c.powi(3) * s
}
