use serde::{Deserialize, Serialize};

use super::{round_ask, round_bid};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::policy::QuotingPolicy;
use crate::tape::TradeRecord;

const SIZE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ReferencePriceRule {
    /// Mid of the best quotes carried by each record; last trade price when a
    /// record has none.
    Mid,
    LastTrade,
    /// Exponentially weighted average of the mid (or last trade), with the
    /// weight of an observation halving every `half_life` seconds.
    Ewma {
        half_life: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestConfig {
    pub params: ModelParams,
    /// Price units per Tick.
    pub tick_size: f64,
    /// Maximum resting time of an order, in seconds.
    pub requote_dt: f64,
    /// Order size in shares; inventories are reported in this unit.
    pub ats: f64,
    pub reference: ReferencePriceRule,
    /// Grid the posted prices are rounded to, in Ticks.
    pub rounding_increment: f64,
    /// Initial inventory in ATS units.
    pub q0: i32,
}

impl BacktestConfig {
    pub fn new(params: ModelParams) -> Self {
        BacktestConfig {
            params,
            tick_size: 1.0,
            requote_dt: 5.0,
            ats: 1.0,
            reference: ReferencePriceRule::Mid,
            rounding_increment: 1.0,
            q0: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(field, format!("must be > 0, got {v}")))
            }
        };
        positive("tick_size", self.tick_size)?;
        positive("requote_dt", self.requote_dt)?;
        positive("ats", self.ats)?;
        positive("rounding_increment", self.rounding_increment)?;
        if let ReferencePriceRule::Ewma { half_life } = self.reference {
            positive("half_life", half_life)?;
        }
        self.params.check_inventory(self.q0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bid,
    Ask,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BacktestFill {
    /// Index of the tape record that triggered the fill.
    pub event: usize,
    pub timestamp: f64,
    pub side: Side,
    /// Execution price in Ticks (the posted price).
    pub price: f64,
    /// Filled quantity in shares.
    pub size: f64,
    /// Reference price in force when the fill occurred, in Ticks.
    pub reference: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluationReason {
    Start,
    Expiry,
    Fill,
}

/// A quote computation and the orders it posted. Prices in Ticks, sizes in
/// shares; an absent side has no price and zero size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuoteEvaluation {
    pub event: usize,
    pub timestamp: f64,
    pub reason: EvaluationReason,
    pub reference: f64,
    pub inventory: f64,
    pub bid: Option<f64>,
    pub ask: Option<f64>,
    pub bid_size: f64,
    pub ask_size: f64,
}

/// State after processing one tape record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PnlPoint {
    pub event: usize,
    pub timestamp: f64,
    /// Ticks.
    pub reference: f64,
    /// ATS units.
    pub inventory: f64,
    /// Quote currency.
    pub cash: f64,
    /// `cash + inventory·reference − initial inventory·initial reference`,
    /// in quote currency.
    pub pnl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestSummary {
    pub label: String,
    pub n_events: usize,
    pub n_evaluations: usize,
    pub bid_fills: usize,
    pub ask_fills: usize,
    /// Shares traded.
    pub volume: f64,
    pub initial_inventory: f64,
    pub final_inventory: f64,
    pub max_abs_inventory: f64,
    pub start_reference: f64,
    pub end_reference: f64,
    pub final_pnl: f64,
    pub tick_size: f64,
    pub ats: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BacktestReport {
    pub summary: BacktestSummary,
    pub pnl: Vec<PnlPoint>,
    pub fills: Vec<BacktestFill>,
    pub evaluations: Vec<QuoteEvaluation>,
}

impl BacktestReport {
    /// Rebuilds the P&L series from the trade log and the reference prices.
    pub fn recompute_pnl(&self) -> Vec<f64> {
        let s = &self.summary;
        let unit = s.ats * s.tick_size;
        let mut cash = 0.0;
        let mut shares = s.initial_inventory * s.ats;
        let mut fills = self.fills.iter().peekable();
        self.pnl
            .iter()
            .map(|point| {
                while let Some(f) = fills.next_if(|f| f.event <= point.event) {
                    match f.side {
                        Side::Bid => {
                            cash -= f.price * f.size * s.tick_size;
                            shares += f.size;
                        }
                        Side::Ask => {
                            cash += f.price * f.size * s.tick_size;
                            shares -= f.size;
                        }
                    }
                }
                cash + shares * point.reference * s.tick_size
                    - s.initial_inventory * s.start_reference * unit
            })
            .collect()
    }

    /// Largest absolute gap between the streamed and recomputed P&L.
    pub fn recompute_error(&self) -> f64 {
        self.recompute_pnl()
            .iter()
            .zip(&self.pnl)
            .map(|(r, p)| (r - p.pnl).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy)]
enum QuoteSource<'a> {
    Policy(&'a dyn QuotingPolicy),
    BestQuotes,
}

#[derive(Debug, Clone, Copy)]
struct RestingOrder {
    price: f64,
    remaining: f64,
}

struct Engine<'a> {
    config: &'a BacktestConfig,
    source: QuoteSource<'a>,
    start: f64,
    reference: f64,
    reference_time: f64,
    best: Option<(f64, f64)>,
    shares: f64,
    cash: f64,
    bid: Option<RestingOrder>,
    ask: Option<RestingOrder>,
    next_expiry: f64,
    evaluations: Vec<QuoteEvaluation>,
}

impl Engine<'_> {
    fn observe(&self, rec: &TradeRecord) -> f64 {
        match self.config.reference {
            ReferencePriceRule::LastTrade => rec.price,
            ReferencePriceRule::Mid | ReferencePriceRule::Ewma { .. } => {
                rec.mid().unwrap_or(rec.price)
            }
        }
    }

    fn update_reference(&mut self, rec: &TradeRecord) {
        let obs = self.observe(rec) / self.config.tick_size;
        self.reference = match self.config.reference {
            ReferencePriceRule::Ewma { half_life } => {
                let w = (-std::f64::consts::LN_2 * (rec.timestamp - self.reference_time)
                    / half_life)
                    .exp();
                w * self.reference + (1.0 - w) * obs
            }
            _ => obs,
        };
        self.reference_time = rec.timestamp;
        if let (Some(b), Some(a)) = (rec.best_bid, rec.best_ask) {
            self.best = Some((b / self.config.tick_size, a / self.config.tick_size));
        }
    }

    fn evaluate(&mut self, event: usize, timestamp: f64, reason: EvaluationReason) {
        let cfg = self.config;
        let ats = cfg.ats;
        let cap = cfg.params.q_max() as f64 * ats;
        let (bid, ask) = match self.source {
            QuoteSource::Policy(policy) => {
                let q = ((self.shares / ats).round() as i32)
                    .clamp(-cfg.params.q_max(), cfg.params.q_max());
                let t = (timestamp - self.start).clamp(0.0, cfg.params.horizon());
                let qp = policy.quotes(t, q);
                (
                    qp.delta_b
                        .filter(|d| d.is_finite())
                        .map(|d| round_bid(self.reference - d, cfg.rounding_increment)),
                    qp.delta_a
                        .filter(|d| d.is_finite())
                        .map(|d| round_ask(self.reference + d, cfg.rounding_increment)),
                )
            }
            QuoteSource::BestQuotes => match self.best {
                Some((b, a)) => (Some(b), Some(a)),
                None => (None, None),
            },
        };
        let bid_size = (cap - self.shares).min(ats);
        let ask_size = (cap + self.shares).min(ats);
        let bid = bid.filter(|_| bid_size > SIZE_EPS);
        let ask = ask.filter(|_| ask_size > SIZE_EPS);
        self.bid = bid.map(|price| RestingOrder {
            price,
            remaining: bid_size,
        });
        self.ask = ask.map(|price| RestingOrder {
            price,
            remaining: ask_size,
        });
        self.next_expiry = timestamp + cfg.requote_dt;
        self.evaluations.push(QuoteEvaluation {
            event,
            timestamp,
            reason,
            reference: self.reference,
            inventory: self.shares / ats,
            bid,
            ask,
            bid_size: if bid.is_some() { bid_size } else { 0.0 },
            ask_size: if ask.is_some() { ask_size } else { 0.0 },
        });
    }
}

fn replay(
    records: &[TradeRecord],
    config: &BacktestConfig,
    source: QuoteSource<'_>,
    label: &str,
) -> Result<BacktestReport> {
    config.validate()?;
    let tick = config.tick_size;
    let initial_inventory = config.q0 as f64;
    let Some(first) = records.first() else {
        return Ok(BacktestReport {
            summary: BacktestSummary {
                label: label.to_string(),
                n_events: 0,
                n_evaluations: 0,
                bid_fills: 0,
                ask_fills: 0,
                volume: 0.0,
                initial_inventory,
                final_inventory: initial_inventory,
                max_abs_inventory: initial_inventory.abs(),
                start_reference: f64::NAN,
                end_reference: f64::NAN,
                final_pnl: 0.0,
                tick_size: tick,
                ats: config.ats,
            },
            pnl: Vec::new(),
            fills: Vec::new(),
            evaluations: Vec::new(),
        });
    };

    let mut engine = Engine {
        config,
        source,
        start: first.timestamp,
        reference: 0.0,
        reference_time: first.timestamp,
        best: None,
        shares: initial_inventory * config.ats,
        cash: 0.0,
        bid: None,
        ask: None,
        next_expiry: f64::INFINITY,
        evaluations: Vec::new(),
    };
    engine.reference = engine.observe(first) / tick;
    engine.update_reference(first);
    let start_reference = engine.reference;
    engine.evaluate(0, first.timestamp, EvaluationReason::Start);

    let mut fills = Vec::new();
    let mut pnl = Vec::with_capacity(records.len());
    let mut max_abs = initial_inventory.abs();
    for (i, rec) in records.iter().enumerate() {
        while engine.next_expiry <= rec.timestamp {
            let t = engine.next_expiry;
            engine.evaluate(i, t, EvaluationReason::Expiry);
        }

        let price = rec.price / tick;
        let mut completed = false;
        if let Some(order) = engine.ask.as_mut().filter(|o| price >= o.price) {
            let size = order.remaining.min(rec.size);
            order.remaining -= size;
            engine.cash += order.price * size * tick;
            engine.shares -= size;
            fills.push(BacktestFill {
                event: i,
                timestamp: rec.timestamp,
                side: Side::Ask,
                price: order.price,
                size,
                reference: engine.reference,
            });
            if order.remaining <= SIZE_EPS {
                engine.ask = None;
                completed = true;
            }
        } else if let Some(order) = engine.bid.as_mut().filter(|o| price <= o.price) {
            let size = order.remaining.min(rec.size);
            order.remaining -= size;
            engine.cash -= order.price * size * tick;
            engine.shares += size;
            fills.push(BacktestFill {
                event: i,
                timestamp: rec.timestamp,
                side: Side::Bid,
                price: order.price,
                size,
                reference: engine.reference,
            });
            if order.remaining <= SIZE_EPS {
                engine.bid = None;
                completed = true;
            }
        }

        if i > 0 {
            engine.update_reference(rec);
        }
        if completed {
            engine.evaluate(i, rec.timestamp, EvaluationReason::Fill);
        }
        let inventory = engine.shares / config.ats;
        max_abs = max_abs.max(inventory.abs());
        pnl.push(PnlPoint {
            event: i,
            timestamp: rec.timestamp,
            reference: engine.reference,
            inventory,
            cash: engine.cash,
            pnl: engine.cash + engine.shares * engine.reference * tick
                - initial_inventory * config.ats * start_reference * tick,
        });
    }

    let last = pnl.last().copied().expect("records is non-empty");
    let summary = BacktestSummary {
        label: label.to_string(),
        n_events: records.len(),
        n_evaluations: engine.evaluations.len(),
        bid_fills: fills.iter().filter(|f| f.side == Side::Bid).count(),
        ask_fills: fills.iter().filter(|f| f.side == Side::Ask).count(),
        volume: fills.iter().map(|f| f.size).sum(),
        initial_inventory,
        final_inventory: last.inventory,
        max_abs_inventory: max_abs,
        start_reference,
        end_reference: last.reference,
        final_pnl: last.pnl,
        tick_size: tick,
        ats: config.ats,
    };
    Ok(BacktestReport {
        summary,
        pnl,
        fills,
        evaluations: engine.evaluations,
    })
}

/// Replays `records` with quotes from `policy`. The policy clock starts at the
/// first record and is clamped to the model horizon.
pub fn run_backtest(
    records: &[TradeRecord],
    config: &BacktestConfig,
    policy: &dyn QuotingPolicy,
) -> Result<BacktestReport> {
    replay(records, config, QuoteSource::Policy(policy), policy.label())
}

/// Same event loop with orders pinned to the prevailing best bid and ask.
pub fn naive_baseline(records: &[TradeRecord], config: &BacktestConfig) -> Result<BacktestReport> {
    if let Some(i) = records
        .iter()
        .position(|r| r.best_bid.is_none() || r.best_ask.is_none())
    {
        return Err(Error::MissingQuotes { line: i + 2 });
    }
    replay(records, config, QuoteSource::BestQuotes, "naive")
}
