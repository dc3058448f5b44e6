//! Quoting policies: maps from `(t, q)` to bid/ask offsets.

use crate::error::Result;
use crate::params::{ModelParams, Variant};
use crate::quotes::{
    gaussian_approximation, optimal_quote_row, taylor_quotes_near_t, AsymptoticSolution, QuotePair,
};
use crate::value::ValueLadder;

/// A quoting rule. Implementations must never quote a bid at `q = Q` nor an
/// ask at `q = −Q`; the simulator and backtester enforce this as well.
pub trait QuotingPolicy: Sync {
    fn label(&self) -> &str;
    fn quotes(&self, t: f64, q: i32) -> QuotePair;
}

fn mask(q: i32, q_max: i32, qp: QuotePair) -> QuotePair {
    QuotePair::from_sides(
        qp.delta_b.filter(|_| q < q_max),
        qp.delta_a.filter(|_| q > -q_max),
    )
}

/// Finite-horizon optimal quotes tabulated on a uniform time grid; the quote
/// in force at `t` is the one at the last grid point `≤ t`.
#[derive(Debug, Clone)]
pub struct TabulatedPolicy {
    label: String,
    q_max: i32,
    step: f64,
    /// row-major `[time][q + Q]`; NaN marks an absent side
    bids: Vec<f64>,
    asks: Vec<f64>,
    rows: usize,
}

impl TabulatedPolicy {
    pub fn optimal(ladder: &ValueLadder, step: f64) -> Result<Self> {
        let params = ladder.params();
        let horizon = params.horizon();
        let rows = (horizon / step).ceil() as usize + 1;
        let dim = params.dim();
        let mut bids = Vec::with_capacity(rows * dim);
        let mut asks = Vec::with_capacity(rows * dim);
        for r in 0..rows {
            let t = (r as f64 * step).min(horizon);
            for qp in optimal_quote_row(ladder, t)? {
                bids.push(qp.delta_b.unwrap_or(f64::NAN));
                asks.push(qp.delta_a.unwrap_or(f64::NAN));
            }
        }
        Ok(TabulatedPolicy {
            label: "optimal".into(),
            q_max: params.q_max(),
            step,
            bids,
            asks,
            rows,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

impl QuotingPolicy for TabulatedPolicy {
    fn label(&self) -> &str {
        &self.label
    }

    fn quotes(&self, t: f64, q: i32) -> QuotePair {
        if q.abs() > self.q_max {
            return QuotePair::silent();
        }
        // small tolerance so that t = j·step lands on row j despite rounding
        let row = ((t / self.step + 1e-9).floor().max(0.0) as usize).min(self.rows - 1);
        let idx = row * (2 * self.q_max as usize + 1) + (q + self.q_max) as usize;
        let side = |x: f64| (!x.is_nan()).then_some(x);
        QuotePair::from_sides(side(self.bids[idx]), side(self.asks[idx]))
    }
}

/// Time-invariant long-horizon quotes.
#[derive(Debug, Clone)]
pub struct AsymptoticPolicy {
    q_max: i32,
    quotes: Vec<QuotePair>,
}

impl AsymptoticPolicy {
    pub fn new(params: &ModelParams, solution: &AsymptoticSolution) -> Self {
        AsymptoticPolicy {
            q_max: params.q_max(),
            quotes: solution.quotes_by_q.clone(),
        }
    }
}

impl QuotingPolicy for AsymptoticPolicy {
    fn label(&self) -> &str {
        "asymptotic"
    }

    fn quotes(&self, _t: f64, q: i32) -> QuotePair {
        if q.abs() > self.q_max {
            return QuotePair::silent();
        }
        self.quotes[(q + self.q_max) as usize]
    }
}

/// Closed-form Gaussian approximation of the asymptotic quotes.
#[derive(Debug, Clone)]
pub struct GaussianPolicy {
    params: ModelParams,
    variant: Variant,
}

impl GaussianPolicy {
    pub fn new(params: &ModelParams, variant: Variant) -> Self {
        GaussianPolicy {
            params: *params,
            variant,
        }
    }
}

impl QuotingPolicy for GaussianPolicy {
    fn label(&self) -> &str {
        "gaussian-approx"
    }

    fn quotes(&self, _t: f64, q: i32) -> QuotePair {
        if q.abs() > self.params.q_max() {
            return QuotePair::silent();
        }
        gaussian_approximation(&self.params, self.variant, q)
    }
}

/// Near-terminal linear expansion of the optimal quotes.
#[derive(Debug, Clone)]
pub struct TaylorPolicy {
    params: ModelParams,
}

impl TaylorPolicy {
    pub fn new(params: &ModelParams) -> Self {
        TaylorPolicy { params: *params }
    }
}

impl QuotingPolicy for TaylorPolicy {
    fn label(&self) -> &str {
        "taylor"
    }

    fn quotes(&self, t: f64, q: i32) -> QuotePair {
        let t = t.clamp(0.0, self.params.horizon());
        taylor_quotes_near_t(&self.params, t, q).unwrap_or_default()
    }
}

/// Same offset on both sides regardless of time and inventory (apart from
/// the inventory bound).
#[derive(Debug, Clone)]
pub struct SymmetricConstantPolicy {
    pub delta: f64,
    pub q_max: i32,
}

impl QuotingPolicy for SymmetricConstantPolicy {
    fn label(&self) -> &str {
        "symmetric-constant"
    }

    fn quotes(&self, _t: f64, q: i32) -> QuotePair {
        mask(
            q,
            self.q_max,
            QuotePair::from_sides(Some(self.delta), Some(self.delta)),
        )
    }
}

/// Wraps an arbitrary closure.
pub struct CustomPolicy<F> {
    label: String,
    q_max: i32,
    f: F,
}

impl<F> CustomPolicy<F>
where
    F: Fn(f64, i32) -> QuotePair + Sync,
{
    pub fn new(label: impl Into<String>, q_max: i32, f: F) -> Self {
        CustomPolicy {
            label: label.into(),
            q_max,
            f,
        }
    }
}

impl<F> QuotingPolicy for CustomPolicy<F>
where
    F: Fn(f64, i32) -> QuotePair + Sync,
{
    fn label(&self) -> &str {
        &self.label
    }

    fn quotes(&self, t: f64, q: i32) -> QuotePair {
        mask(q, self.q_max, (self.f)(t, q))
    }
}
