//! Event-driven replay of a quoting policy against a trade tape.
//!
//! Orders of size ATS are posted at the policy's offsets from a reference
//! price, rounded to the tick grid, and rest for `requote_dt` seconds unless
//! a trade fills them. An ask fills when a trade prints at or above it, a bid
//! when a trade prints at or below it.

mod calibrate;
mod engine;

pub use calibrate::{calibrate, Calibration, CalibrationConfig, DepthBucket};
pub use engine::{
    naive_baseline, run_backtest, BacktestConfig, BacktestFill, BacktestReport, BacktestSummary,
    EvaluationReason, PnlPoint, QuoteEvaluation, ReferencePriceRule, Side,
};

/// Rounds a bid price to the nearest multiple of `increment`, ties down.
pub fn round_bid(price: f64, increment: f64) -> f64 {
    ((price / increment) - 0.5).ceil() * increment
}

/// Rounds an ask price to the nearest multiple of `increment`, ties up.
pub fn round_ask(price: f64, increment: f64) -> f64 {
    ((price / increment) + 0.5).floor() * increment
}
