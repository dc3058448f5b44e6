//! Optimal quotes: finite horizon, long-horizon limit and closed-form
//! approximations.
//!
//! All offsets are distances from the reference price in Ticks: the bid is
//! posted at `S − δᵇ` and the ask at `S + δᵃ`.

use serde::Serialize;

use crate::error::Result;
use crate::ladder::LadderMatrix;
use crate::params::{ModelParams, Variant};
use crate::spectral::{decompose, SpectralDecomposition};
use crate::value::ValueLadder;

/// Bid and ask offsets with the resulting spread. A side is `None` where the
/// inventory bound forbids quoting it: no bid at `q = Q`, no ask at `q = −Q`,
/// and no spread at `|q| = Q`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct QuotePair {
    pub delta_b: Option<f64>,
    pub delta_a: Option<f64>,
    pub spread: Option<f64>,
}

impl QuotePair {
    /// Builds a pair from both sides; the spread is their sum when both exist.
    pub fn from_sides(delta_b: Option<f64>, delta_a: Option<f64>) -> Self {
        let spread = match (delta_b, delta_a) {
            (Some(b), Some(a)) => Some(b + a),
            _ => None,
        };
        QuotePair {
            delta_b,
            delta_a,
            spread,
        }
    }

    /// Neither side quoted.
    pub fn silent() -> Self {
        QuotePair::default()
    }
}

/// Offsets from per-inventory log-weights `ln φ_q` (`φ = v` for finite
/// horizons, `φ = f⁰` asymptotically), for every `q ∈ [−Q, Q]`.
fn quotes_from_logs(params: &ModelParams, variant: Variant, logs: &[f64]) -> Vec<QuotePair> {
    let offset = params.base_offset()
        + match variant {
            Variant::Impact => 0.5 * params.xi(),
            Variant::Base | Variant::Drift => 0.0,
        };
    log_ratio_quotes(params.k(), offset, logs)
}

fn log_ratio_quotes(k: f64, offset: f64, logs: &[f64]) -> Vec<QuotePair> {
    let n = logs.len();
    (0..n)
        .map(|i| {
            let delta_b = (i + 1 < n).then(|| (logs[i] - logs[i + 1]) / k + offset);
            let delta_a = (i > 0).then(|| (logs[i] - logs[i - 1]) / k + offset);
            let spread = (i > 0 && i + 1 < n)
                .then(|| -(logs[i + 1] + logs[i - 1] - 2.0 * logs[i]) / k + 2.0 * offset);
            QuotePair {
                delta_b,
                delta_a,
                spread,
            }
        })
        .collect()
}

/// Optimal quotes at time `t` and inventory `q`.
pub fn optimal_quotes(ladder: &ValueLadder, t: f64, q: i32) -> Result<QuotePair> {
    let params = ladder.params();
    params.check_inventory(q)?;
    let row = optimal_quote_row(ladder, t)?;
    Ok(row[params.index_of(q)])
}

/// Optimal quotes at time `t` for every inventory, indexed by `q + Q`.
pub fn optimal_quote_row(ladder: &ValueLadder, t: f64) -> Result<Vec<QuotePair>> {
    let logs = ladder.log_values(t)?;
    Ok(quotes_from_logs(
        ladder.params(),
        ladder.matrix().variant(),
        &logs,
    ))
}

/// `δ*(t, q) − δ*_∞(q)` per side (and for the spread), evaluated from the
/// transient part of the spectral expansion so that it stays accurate far
/// below the rounding level of the quotes themselves.
pub fn convergence_gap_row(ladder: &ValueLadder, t: f64) -> Result<Vec<QuotePair>> {
    let corrections = ladder.transient_log_correction(t)?;
    Ok(log_ratio_quotes(ladder.params().k(), 0.0, &corrections))
}

/// Long-horizon solution: smallest eigenpair of `M` and the limiting quotes.
#[derive(Debug, Clone)]
pub struct AsymptoticSolution {
    pub lambda0: f64,
    /// Positive unit eigenvector, indexed by `q + Q`.
    pub f0: Vec<f64>,
    /// `ln f⁰_q`, exact where `f⁰_q` underflows.
    pub f0_log: Vec<f64>,
    pub quotes_by_q: Vec<QuotePair>,
}

impl AsymptoticSolution {
    pub fn quotes(&self, params: &ModelParams, q: i32) -> Result<QuotePair> {
        params.check_inventory(q)?;
        Ok(self.quotes_by_q[params.index_of(q)])
    }
}

pub fn asymptotic_quotes(matrix: &LadderMatrix) -> Result<AsymptoticSolution> {
    let dec = decompose(matrix)?;
    Ok(asymptotic_from_decomposition(matrix, &dec))
}

pub fn asymptotic_from_decomposition(
    matrix: &LadderMatrix,
    dec: &SpectralDecomposition,
) -> AsymptoticSolution {
    AsymptoticSolution {
        lambda0: dec.ground_value(),
        f0: dec.ground_vector().to_vec(),
        f0_log: dec.ground_log().to_vec(),
        quotes_by_q: quotes_from_logs(matrix.params(), matrix.variant(), dec.ground_log()),
    }
}

/// The quadratic criterion minimised by the ground state:
/// `Σ αq²f_q² + η Σ (f_{q+1} − f_q)² + η f_Q² + η f_{−Q}²` (base ladder),
/// normalised by `‖f‖²`.
pub fn rayleigh_objective(params: &ModelParams, f: &[f64]) -> f64 {
    let alpha = params.alpha();
    let eta = params.eta();
    let mut total = 0.0;
    for (i, x) in f.iter().enumerate() {
        let q = params.inventory_at(i) as f64;
        total += alpha * q * q * x * x;
    }
    for w in f.windows(2) {
        total += eta * (w[1] - w[0]).powi(2);
    }
    total += eta * (f[0] * f[0] + f[f.len() - 1] * f[f.len() - 1]);
    total / f.iter().map(|x| x * x).sum::<f64>()
}

/// Closed-form approximation of the asymptotic quotes obtained by replacing
/// the discrete ground state with the Gaussian minimiser of the continuous
/// problem. Sides forbidden at the inventory bound are omitted.
pub fn gaussian_approximation(params: &ModelParams, variant: Variant, q: i32) -> QuotePair {
    let c = params.base_offset();
    let scale = params.skew_scale();
    let qf = q as f64;
    let (bid, ask, spread) = match variant {
        Variant::Base => (
            c + 0.5 * (2.0 * qf + 1.0) * scale,
            c - 0.5 * (2.0 * qf - 1.0) * scale,
            2.0 * c + scale,
        ),
        Variant::Drift => {
            let tilt = params.mu() / (params.gamma() * params.sigma().powi(2));
            (
                c + (-tilt + 0.5 * (2.0 * qf + 1.0)) * scale,
                c + (tilt - 0.5 * (2.0 * qf - 1.0)) * scale,
                2.0 * c + scale,
            )
        }
        Variant::Impact => {
            let xi = params.xi();
            let s = (0.25 * params.k() * xi).exp() * scale;
            (
                c + 0.5 * xi + 0.5 * (2.0 * qf + 1.0) * s,
                c + 0.5 * xi - 0.5 * (2.0 * qf - 1.0) * s,
                2.0 * c + xi + s,
            )
        }
    };
    let q_max = params.q_max();
    QuotePair {
        delta_b: (q < q_max).then_some(bid),
        delta_a: (q > -q_max).then_some(ask),
        spread: (q.abs() < q_max).then_some(spread),
    }
}

/// Positive branch of the Gaussian ground state of the continuous problem,
/// `π^{−1/4} (α/η)^{1/8} exp(−½ √(α/η) x²)`; unit norm in `L²(ℝ)`.
pub fn gaussian_f0_density(params: &ModelParams, x: f64) -> f64 {
    let ratio = params.alpha() / params.eta();
    std::f64::consts::PI.powf(-0.25) * ratio.powf(0.125) * (-0.5 * ratio.sqrt() * x * x).exp()
}

/// Near-terminal expansion of the quotes, linear in the time to go:
/// `δᵇ ≈ c + ((1 + 2q)/2) γσ²(T − t)`, `δᵃ ≈ c + ((1 − 2q)/2) γσ²(T − t)`.
pub fn taylor_quotes_near_t(params: &ModelParams, t: f64, q: i32) -> Result<QuotePair> {
    params.check_time(t)?;
    params.check_inventory(q)?;
    let c = params.base_offset();
    let slope = params.gamma() * params.sigma().powi(2) * (params.horizon() - t);
    let qf = q as f64;
    let q_max = params.q_max();
    Ok(QuotePair::from_sides(
        (q < q_max).then_some(c + 0.5 * (1.0 + 2.0 * qf) * slope),
        (q > -q_max).then_some(c + 0.5 * (1.0 - 2.0 * qf) * slope),
    ))
}
