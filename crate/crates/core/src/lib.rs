#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Optimal quoting for a market maker with a hard inventory bound.
//!
//! The value function of the CARA market-making problem with exponential
//! fill intensities reduces to a linear ODE ladder `v̇ = M v` indexed by
//! inventory. This crate builds the ladder matrix, evaluates the ladder
//! spectrally, derives finite-horizon and asymptotic quotes with their
//! closed-form approximations, simulates the resulting strategy and replays
//! it against trade-by-trade data.

pub mod backtest;
pub mod cli;
pub mod error;
pub mod ladder;
pub mod output;
pub mod params;
pub mod policy;
pub mod quotes;
pub mod simulator;
pub mod spectral;
pub mod statics;
pub mod tape;
pub mod value;

pub use backtest::{
    calibrate, naive_baseline, run_backtest, BacktestConfig, BacktestReport, Calibration,
    CalibrationConfig, ReferencePriceRule,
};
pub use error::{Error, Result};
pub use ladder::LadderMatrix;
pub use params::{ModelParams, ParamsDraft, Variant};
pub use policy::{
    AsymptoticPolicy, CustomPolicy, GaussianPolicy, QuotingPolicy, SymmetricConstantPolicy,
    TabulatedPolicy, TaylorPolicy,
};
pub use quotes::{
    asymptotic_quotes, convergence_gap_row, gaussian_approximation, optimal_quote_row,
    optimal_quotes, taylor_quotes_near_t, AsymptoticSolution, QuotePair,
};
pub use simulator::{simulate, synthetic_tape, SimConfig, SimSummary, Simulation, TapeConfig};
pub use spectral::{decompose, SpectralDecomposition};
pub use statics::{comparative_statics_report, Parameter, Side, StaticsConfig, StaticsReport};
pub use tape::{emit_trades, ingest_trades, ingest_trades_file, Tape, TradeRecord};
pub use value::{integrate_ode_oracle, OdeGrid, ValueLadder};
