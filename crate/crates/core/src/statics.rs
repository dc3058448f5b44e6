//! Comparative statics of the asymptotic quotes by centred finite differences.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ladder::LadderMatrix;
use crate::params::{ModelParams, ParamsDraft, Variant};
use crate::quotes::{asymptotic_quotes, QuotePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Parameter {
    #[serde(rename = "sigma2")]
    Sigma2,
    #[serde(rename = "mu")]
    Mu,
    #[serde(rename = "A")]
    A,
    #[serde(rename = "k")]
    K,
}

impl Parameter {
    pub const ALL: [Parameter; 4] = [Parameter::Sigma2, Parameter::Mu, Parameter::A, Parameter::K];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::Sigma2 => "sigma2",
            Parameter::Mu => "mu",
            Parameter::A => "A",
            Parameter::K => "k",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bid,
    Ask,
    Spread,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Bid => "bid",
            Side::Ask => "ask",
            Side::Spread => "spread",
        }
    }

    fn pick(self, qp: &QuotePair) -> Option<f64> {
        match self {
            Side::Bid => qp.delta_b,
            Side::Ask => qp.delta_a,
            Side::Spread => qp.spread,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticsConfig {
    /// Relative perturbation applied to σ², A and k.
    pub rel_step: f64,
    /// Absolute perturbation applied to μ (Tick·s⁻¹), since μ is usually 0.
    pub mu_step: f64,
    /// Inventories at which the three-case σ² and A patterns are checked.
    pub pattern_inventories: Vec<i32>,
}

impl Default for StaticsConfig {
    fn default() -> Self {
        StaticsConfig {
            rel_step: 1e-4,
            mu_step: 1e-4,
            pattern_inventories: vec![-5, 0, 5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticsRow {
    pub parameter: Parameter,
    pub q: i32,
    pub side: Side,
    /// Centred difference quotient; 0 when the step is 0.
    pub derivative: f64,
    pub sign: i8,
    /// Sign predicted by the qualitative analysis, when one is made here.
    pub expected_sign: Option<i8>,
}

impl StaticsRow {
    pub fn agrees(&self) -> Option<bool> {
        self.expected_sign.map(|e| e == self.sign)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StaticsReport {
    pub rows: Vec<StaticsRow>,
}

impl StaticsReport {
    pub fn disagreements(&self) -> impl Iterator<Item = &StaticsRow> {
        self.rows.iter().filter(|r| r.agrees() == Some(false))
    }

    pub fn find(&self, parameter: Parameter, q: i32, side: Side) -> Option<&StaticsRow> {
        self.rows
            .iter()
            .find(|r| r.parameter == parameter && r.q == q && r.side == side)
    }
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Sign claims for the asymptotic quotes. Side patterns for σ² and A are
/// only claimed at the monitored inventories; spread and drift claims hold
/// at every inventory. γ is deliberately absent (its effect is ambiguous).
fn expected_sign(parameter: Parameter, side: Side, q: i32, monitored: bool) -> Option<i8> {
    let volatility_pattern = |side: Side| -> Option<i8> {
        match side {
            Side::Spread => Some(1),
            Side::Bid if monitored => Some(if q < 0 { -1 } else { 1 }),
            Side::Ask if monitored => Some(if q > 0 { -1 } else { 1 }),
            _ => None,
        }
    };
    match parameter {
        Parameter::Sigma2 => volatility_pattern(side),
        // liquidity acts exactly opposite to volatility
        Parameter::A => volatility_pattern(side).map(|s| -s),
        Parameter::Mu => match side {
            Side::Bid => Some(-1),
            Side::Ask => Some(1),
            Side::Spread => None,
        },
        Parameter::K => match side {
            Side::Spread => Some(-1),
            _ => None,
        },
    }
}

fn perturbed(draft: ParamsDraft, parameter: Parameter, h: f64, direction: f64) -> ParamsDraft {
    let mut d = draft;
    match parameter {
        Parameter::Sigma2 => d.sigma = (d.sigma * d.sigma * (1.0 + direction * h)).sqrt(),
        Parameter::Mu => d.mu += direction * h,
        Parameter::A => d.a *= 1.0 + direction * h,
        Parameter::K => d.k *= 1.0 + direction * h,
    }
    d
}

fn asymptotic_row(draft: ParamsDraft, variant: Variant) -> Result<Vec<QuotePair>> {
    let p = ModelParams::new(draft)?;
    Ok(asymptotic_quotes(&LadderMatrix::build(&p, variant))?.quotes_by_q)
}

/// Finite-difference signs of `δᵇ∞`, `δᵃ∞` and `ψ∞` with respect to σ², μ,
/// A and k at every admissible inventory. μ is perturbed in the drift model,
/// the other parameters in `variant`.
pub fn comparative_statics_report(
    base: &ModelParams,
    variant: Variant,
    config: &StaticsConfig,
) -> Result<StaticsReport> {
    if !(config.rel_step >= 0.0 && config.rel_step < 1.0) {
        return Err(Error::domain(
            "rel_step",
            format!("must be in [0, 1), got {}", config.rel_step),
        ));
    }
    if !(config.mu_step >= 0.0 && config.mu_step.is_finite()) {
        return Err(Error::domain(
            "mu_step",
            format!("must be >= 0, got {}", config.mu_step),
        ));
    }
    let draft = base.draft();
    let mut rows = Vec::new();
    for parameter in Parameter::ALL {
        let (variant, h, scale) = match parameter {
            Parameter::Mu => (Variant::Drift, config.mu_step, 1.0),
            Parameter::Sigma2 => (variant, config.rel_step, draft.sigma * draft.sigma),
            Parameter::A => (variant, config.rel_step, draft.a),
            Parameter::K => (variant, config.rel_step, draft.k),
        };
        let up = asymptotic_row(perturbed(draft, parameter, h, 1.0), variant)?;
        let down = asymptotic_row(perturbed(draft, parameter, h, -1.0), variant)?;
        let width = 2.0 * h * scale;
        for (i, (u, d)) in up.iter().zip(&down).enumerate() {
            let q = base.inventory_at(i);
            let monitored = config.pattern_inventories.contains(&q);
            for side in [Side::Bid, Side::Ask, Side::Spread] {
                let (Some(hi), Some(lo)) = (side.pick(u), side.pick(d)) else {
                    continue;
                };
                let diff = hi - lo;
                let derivative = if width > 0.0 { diff / width } else { 0.0 };
                rows.push(StaticsRow {
                    parameter,
                    q,
                    side,
                    derivative,
                    sign: sign_of(diff),
                    expected_sign: expected_sign(parameter, side, q, monitored),
                });
            }
        }
    }
    Ok(StaticsReport { rows })
}
