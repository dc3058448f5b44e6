use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ParamsDraft;
use crate::tape::TradeRecord;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationConfig {
    /// Use only the last `window` records; all of them when `None`.
    pub window: Option<usize>,
    pub min_trades: usize,
    /// Price units per Tick.
    pub tick_size: f64,
    /// Number of depth buckets between 0 and the 90th percentile depth.
    pub n_buckets: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            window: None,
            min_trades: 500,
            tick_size: 1.0,
            n_buckets: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DepthBucket {
    /// Lower edge, in Ticks from the mid.
    pub depth: f64,
    /// Trades with depth at least `depth`, per side and per second.
    pub rate: f64,
    /// Trades whose depth falls in this bucket.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    /// Tick·s^{−1/2}.
    pub sigma: f64,
    /// s⁻¹.
    pub a: f64,
    /// Tick⁻¹.
    pub k: f64,
    pub n_trades: usize,
    pub duration: f64,
    pub buckets: Vec<DepthBucket>,
}

impl Calibration {
    /// Replaces σ, A and k in `base`; the result still has to be validated.
    pub fn apply(&self, base: ParamsDraft) -> ParamsDraft {
        ParamsDraft {
            sigma: self.sigma,
            a: self.a,
            k: self.k,
            ..base
        }
    }
}

/// Estimates σ from the realised variance of the mid and `(A, k)` from a
/// least-squares fit of `ln rate(δ) = ln A − kδ`, where `rate(δ)` counts the
/// trades printing at least `δ` away from the mid, per side and per second.
pub fn calibrate(records: &[TradeRecord], config: &CalibrationConfig) -> Result<Calibration> {
    if let Some(w) = config.window {
        if w < config.min_trades {
            return Err(Error::InsufficientData(format!(
                "window of {w} trades is below the minimum of {}",
                config.min_trades
            )));
        }
    }
    if !(config.tick_size > 0.0) {
        return Err(Error::domain("tick_size", "must be > 0"));
    }
    if config.n_buckets < 3 {
        return Err(Error::domain("n_buckets", "must be at least 3"));
    }
    let start = config.window.map_or(0, |w| records.len().saturating_sub(w));
    let window = &records[start..];
    if window.len() < config.min_trades {
        return Err(Error::InsufficientData(format!(
            "{} trades available, at least {} required",
            window.len(),
            config.min_trades
        )));
    }
    if let Some(i) = window.iter().position(|r| r.mid().is_none()) {
        return Err(Error::MissingQuotes {
            line: start + i + 2,
        });
    }

    let tick = config.tick_size;
    let duration = window[window.len() - 1].timestamp - window[0].timestamp;
    if !(duration > 0.0) {
        return Err(Error::InsufficientData("window spans zero time".into()));
    }
    let mids: Vec<f64> = window.iter().map(|r| r.mid().unwrap() / tick).collect();
    let realised: f64 = mids.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    let sigma = (realised / duration).sqrt();

    let mut depths: Vec<f64> = window
        .iter()
        .zip(&mids)
        .map(|(r, m)| (r.price / tick - m).abs())
        .collect();
    depths.sort_by(f64::total_cmp);
    let top = depths[((depths.len() - 1) as f64 * 0.9) as usize];
    if !(top > 0.0) {
        return Err(Error::DegenerateFit { occupied: 1 });
    }
    let width = top / config.n_buckets as f64;
    let per_side = 2.0 * duration;
    let mut buckets = Vec::new();
    for j in 0..config.n_buckets {
        let lo = j as f64 * width;
        let hi = lo + width;
        let at_least = depths.len() - depths.partition_point(|&d| d < lo);
        let count = depths.partition_point(|&d| d < hi) - depths.partition_point(|&d| d < lo);
        if count > 0 {
            buckets.push(DepthBucket {
                depth: lo,
                rate: at_least as f64 / per_side,
                count,
            });
        }
    }
    if buckets.len() < 3 {
        return Err(Error::DegenerateFit {
            occupied: buckets.len(),
        });
    }

    let n = buckets.len() as f64;
    let mx = buckets.iter().map(|b| b.depth).sum::<f64>() / n;
    let my = buckets.iter().map(|b| b.rate.ln()).sum::<f64>() / n;
    let sxy: f64 = buckets
        .iter()
        .map(|b| (b.depth - mx) * (b.rate.ln() - my))
        .sum();
    let sxx: f64 = buckets.iter().map(|b| (b.depth - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;

    Ok(Calibration {
        sigma,
        a: intercept.exp(),
        k: -slope,
        n_trades: window.len(),
        duration,
        buckets,
    })
}
