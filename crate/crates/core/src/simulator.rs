//! Monte Carlo simulation of a market maker quoting against exponential
//! fill intensities.
//!
//! Time is discretised with step `dt`. In each step the reference price
//! moves by `μ dt + σ √dt Z`, and each quoted side fills independently with
//! probability `1 − exp(−λ(δ) dt)`, `λ(δ) = A e^{−kδ}`. In the market impact
//! model a bid fill moves the price down by ξ and an ask fill moves it up.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::policy::QuotingPolicy;
use crate::tape::TradeRecord;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub s0: f64,
    pub q0: i32,
    pub x0: f64,
    /// Lower bound on quoted offsets; caps the fill intensity at `A e^{−k δ_floor}`.
    pub delta_floor: f64,
    /// Number of paths (the first ones) whose full trajectory is kept.
    pub record_paths: usize,
    /// Keep every `record_stride`-th step of recorded trajectories.
    pub record_stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_paths: 1000,
            dt: 0.01,
            seed: 0,
            s0: 100.0,
            q0: 0,
            x0: 0.0,
            delta_floor: -10.0,
            record_paths: 0,
            record_stride: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FillSide {
    Bid,
    Ask,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FillEvent {
    pub side: FillSide,
    pub time: f64,
    /// Reference price at the fill, before any impact.
    pub reference: f64,
    /// Execution price: `S − δᵇ` for bids, `S + δᵃ` for asks.
    pub price: f64,
}

/// A recorded trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct SimPath {
    pub times: Vec<f64>,
    pub prices: Vec<f64>,
    pub cash: Vec<f64>,
    pub inventory: Vec<i32>,
    pub fills: Vec<FillEvent>,
    pub terminal_price: f64,
    pub terminal_cash: f64,
    pub terminal_inventory: i32,
    pub terminal_wealth: f64,
}

impl SimPath {
    /// Rebuilds terminal wealth from the initial state, the fill log and the
    /// terminal price alone.
    pub fn wealth_from_events(&self, x0: f64, q0: i32) -> f64 {
        let mut cash = x0;
        let mut q = q0;
        for f in &self.fills {
            match f.side {
                FillSide::Bid => {
                    cash -= f.price;
                    q += 1;
                }
                FillSide::Ask => {
                    cash += f.price;
                    q -= 1;
                }
            }
        }
        cash + q as f64 * self.terminal_price
    }
}

/// Per-path scalar outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathOutcome {
    pub terminal_wealth: f64,
    pub terminal_inventory: i32,
    /// Time average of `q_t` over `[0, T]`.
    pub mean_inventory: f64,
    pub max_abs_inventory: i32,
    pub bid_fills: u32,
    pub ask_fills: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimSummary {
    pub policy: String,
    pub n_paths: usize,
    pub mean_wealth: f64,
    pub var_wealth: f64,
    pub std_error_wealth: f64,
    /// `−(1/γ) ln E[e^{−γ W_T}]`.
    pub certainty_equivalent: f64,
    pub std_error_certainty_equivalent: f64,
    /// Mean over paths of the time-averaged inventory.
    pub mean_inventory: f64,
    pub std_error_mean_inventory: f64,
    pub max_abs_inventory: i32,
    /// Counts of terminal inventories, index `q + Q`.
    pub inventory_histogram: Vec<u64>,
    pub mean_bid_fills: f64,
    pub mean_ask_fills: f64,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub outcomes: Vec<PathOutcome>,
    pub paths: Vec<SimPath>,
    pub summary: SimSummary,
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

fn intensity_or_zero(params: &ModelParams, delta: Option<f64>, floor: f64) -> f64 {
    delta.map_or(0.0, |d| params.intensity(d.max(floor)))
}

struct Recorder {
    stride: usize,
    path: SimPath,
}

impl Recorder {
    fn push(&mut self, t: f64, s: f64, x: f64, q: i32) {
        self.path.times.push(t);
        self.path.prices.push(s);
        self.path.cash.push(x);
        self.path.inventory.push(q);
    }
}

/// Reference price sampled lazily on the step grid. Increments over `n`
/// steps are drawn in one go, which has the same law as `n` Euler steps.
struct PriceProcess {
    value: f64,
    step: usize,
    drift: f64,
    vol: f64,
}

impl PriceProcess {
    fn advance_to(&mut self, step: usize, rng: &mut ChaCha8Rng) -> f64 {
        if step > self.step {
            let n = (step - self.step) as f64;
            let z: f64 = rng.sample(StandardNormal);
            self.value += self.drift * n + self.vol * n.sqrt() * z;
            self.step = step;
        }
        self.value
    }
}

/// Per-step fills with probability `1 − e^{−λ dt}`, realised by comparing
/// the accumulated hazard `Σ λ dt` against an `Exp(1)` threshold that is
/// redrawn after every fill. This is the same Bernoulli sequence, drawn
/// once per fill instead of once per step.
struct FillClock {
    hazard: f64,
    threshold: f64,
}

impl FillClock {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        FillClock {
            hazard: 0.0,
            threshold: rng.sample(Exp1),
        }
    }

    fn tick(&mut self, increment: f64, rng: &mut ChaCha8Rng) -> bool {
        self.hazard += increment;
        if self.hazard >= self.threshold {
            self.hazard = 0.0;
            self.threshold = rng.sample(Exp1);
            true
        } else {
            false
        }
    }
}

fn simulate_path(
    params: &ModelParams,
    policy: &dyn QuotingPolicy,
    cfg: &SimConfig,
    index: usize,
    record: bool,
) -> (PathOutcome, Option<SimPath>) {
    let mut rng = path_rng(cfg.seed, index);
    let q_max = params.q_max();
    let steps = (params.horizon() / cfg.dt).round().max(1.0) as usize;
    let dt = params.horizon() / steps as f64;
    let xi = params.xi();

    let mut price = PriceProcess {
        value: cfg.s0,
        step: 0,
        drift: params.mu() * dt,
        vol: params.sigma() * dt.sqrt(),
    };
    let mut bid_clock = FillClock::new(&mut rng);
    let mut ask_clock = FillClock::new(&mut rng);
    let mut x = cfg.x0;
    let mut q = cfg.q0;
    let mut inventory_sum = 0.0;
    let mut max_abs = q.abs();
    let mut bid_fills = 0u32;
    let mut ask_fills = 0u32;

    let mut recorder = record.then(|| Recorder {
        stride: cfg.record_stride.max(1),
        path: SimPath {
            times: Vec::new(),
            prices: Vec::new(),
            cash: Vec::new(),
            inventory: Vec::new(),
            fills: Vec::new(),
            terminal_price: 0.0,
            terminal_cash: 0.0,
            terminal_inventory: 0,
            terminal_wealth: 0.0,
        },
    });

    let mut cached: Option<(Option<f64>, Option<f64>)> = None;
    let mut h_bid = 0.0;
    let mut h_ask = 0.0;

    for step in 0..steps {
        let t = step as f64 * dt;
        if let Some(r) = recorder.as_mut() {
            if step % r.stride == 0 {
                let s = price.advance_to(step, &mut rng);
                r.push(t, s, x, q);
            }
        }

        let qp = policy.quotes(t, q);
        let bid = qp
            .delta_b
            .filter(|_| q < q_max)
            .map(|d| d.max(cfg.delta_floor));
        let ask = qp
            .delta_a
            .filter(|_| q > -q_max)
            .map(|d| d.max(cfg.delta_floor));
        if cached != Some((bid, ask)) {
            h_bid = intensity_or_zero(params, bid, cfg.delta_floor) * dt;
            h_ask = intensity_or_zero(params, ask, cfg.delta_floor) * dt;
            cached = Some((bid, ask));
        }

        let bid_hit = bid.is_some() && bid_clock.tick(h_bid, &mut rng);
        let ask_hit = ask.is_some() && ask_clock.tick(h_ask, &mut rng);
        if bid_hit || ask_hit {
            let s = price.advance_to(step, &mut rng);
            for (hit, side, delta) in [(bid_hit, FillSide::Bid, bid), (ask_hit, FillSide::Ask, ask)]
            {
                if !hit {
                    continue;
                }
                let delta = delta.unwrap();
                let fill_price = match side {
                    FillSide::Bid => {
                        x -= s - delta;
                        q += 1;
                        bid_fills += 1;
                        s - delta
                    }
                    FillSide::Ask => {
                        x += s + delta;
                        q -= 1;
                        ask_fills += 1;
                        s + delta
                    }
                };
                if let Some(r) = recorder.as_mut() {
                    r.path.fills.push(FillEvent {
                        side,
                        time: t,
                        reference: s,
                        price: fill_price,
                    });
                }
            }
            price.value += xi * (ask_hit as i32 - bid_hit as i32) as f64;
            max_abs = max_abs.max(q.abs());
        }
        inventory_sum += q as f64;
    }

    let s = price.advance_to(steps, &mut rng);
    let wealth = x + q as f64 * s;
    let outcome = PathOutcome {
        terminal_wealth: wealth,
        terminal_inventory: q,
        mean_inventory: inventory_sum / steps as f64,
        max_abs_inventory: max_abs,
        bid_fills,
        ask_fills,
    };
    let path = recorder.map(|mut r| {
        r.push(params.horizon(), s, x, q);
        r.path.terminal_price = s;
        r.path.terminal_cash = x;
        r.path.terminal_inventory = q;
        r.path.terminal_wealth = wealth;
        r.path
    });
    (outcome, path)
}

fn mean_and_var(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Certainty equivalent `−(1/γ) ln mean(e^{−γW})` and its delta-method
/// standard error, computed with a log-sum-exp shift.
pub fn certainty_equivalent(wealth: &[f64], gamma: f64) -> (f64, f64) {
    let n = wealth.len() as f64;
    let shift = wealth
        .iter()
        .map(|w| -gamma * w)
        .fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = wealth.iter().map(|w| (-gamma * w - shift).exp()).collect();
    let (mean, var) = mean_and_var(scaled.iter().copied());
    let ce = -(mean.ln() + shift) / gamma;
    let se = (var / n).sqrt() / (gamma * mean);
    (ce, se)
}

fn summarize(params: &ModelParams, label: &str, outcomes: &[PathOutcome]) -> SimSummary {
    let n = outcomes.len();
    let wealth: Vec<f64> = outcomes.iter().map(|o| o.terminal_wealth).collect();
    let (mean_wealth, var_wealth) = mean_and_var(wealth.iter().copied());
    let (ce, ce_se) = certainty_equivalent(&wealth, params.gamma());
    let (mean_inv, var_inv) = mean_and_var(outcomes.iter().map(|o| o.mean_inventory));
    let mut histogram = vec![0u64; params.dim()];
    for o in outcomes {
        histogram[params.index_of(o.terminal_inventory)] += 1;
    }
    SimSummary {
        policy: label.to_string(),
        n_paths: n,
        mean_wealth,
        var_wealth,
        std_error_wealth: (var_wealth / n as f64).sqrt(),
        certainty_equivalent: ce,
        std_error_certainty_equivalent: ce_se,
        mean_inventory: mean_inv,
        std_error_mean_inventory: (var_inv / n as f64).sqrt(),
        max_abs_inventory: outcomes
            .iter()
            .map(|o| o.max_abs_inventory)
            .max()
            .unwrap_or(0),
        inventory_histogram: histogram,
        mean_bid_fills: outcomes.iter().map(|o| o.bid_fills as f64).sum::<f64>() / n as f64,
        mean_ask_fills: outcomes.iter().map(|o| o.ask_fills as f64).sum::<f64>() / n as f64,
    }
}

/// Runs `n_paths` independent paths. Each path draws from its own stream
/// derived from `(seed, path index)`, so results do not depend on how paths
/// are scheduled across threads.
pub fn simulate(
    params: &ModelParams,
    policy: &dyn QuotingPolicy,
    cfg: &SimConfig,
) -> Result<Simulation> {
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::domain("dt", format!("must be > 0, got {}", cfg.dt)));
    }
    if cfg.n_paths == 0 {
        return Err(Error::domain("n_paths", "must be at least 1"));
    }
    if cfg.q0.abs() > params.q_max() {
        return Err(Error::domain(
            "q0",
            format!("initial inventory {} outside bounds", cfg.q0),
        ));
    }

    let results: Vec<(PathOutcome, Option<SimPath>)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| simulate_path(params, policy, cfg, i, i < cfg.record_paths))
        .collect();

    let mut outcomes = Vec::with_capacity(results.len());
    let mut paths = Vec::new();
    for (o, p) in results {
        outcomes.push(o);
        paths.extend(p);
    }
    let summary = summarize(params, policy.label(), &outcomes);
    Ok(Simulation {
        outcomes,
        paths,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TapeConfig {
    pub duration: f64,
    pub seed: u64,
    /// Initial reference price, in Ticks.
    pub s0: f64,
    /// Half the quoted market spread, in Ticks.
    pub half_spread: f64,
    /// Price units per Tick.
    pub tick_size: f64,
    /// Trades are generated at every depth `δ ≥ min_depth` from the
    /// reference price.
    pub min_depth: f64,
    /// Size of every generated trade, in shares.
    pub trade_size: f64,
}

impl Default for TapeConfig {
    fn default() -> Self {
        TapeConfig {
            duration: 600.0,
            seed: 0,
            s0: 10_000.0,
            half_spread: 0.5,
            tick_size: 1.0,
            min_depth: 0.0,
            trade_size: 1.0,
        }
    }
}

/// Synthetic trade tape consistent with the model: on each side, market
/// orders that reach depth at least `δ` from the reference price arrive at
/// rate `A e^{−kδ}`. Equivalently, orders arrive at rate `A e^{−k δ_min}`
/// per side with depth `δ_min + Exp(k)`. Buyer-initiated trades print at
/// `S + depth`, seller-initiated ones at `S − depth`; the best quotes are
/// `S ∓ half_spread`.
pub fn synthetic_tape(params: &ModelParams, cfg: &TapeConfig) -> Result<Vec<TradeRecord>> {
    if !(cfg.duration > 0.0) {
        return Err(Error::domain("duration", "must be > 0"));
    }
    if !(cfg.tick_size > 0.0) {
        return Err(Error::domain("tick_size", "must be > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let side_rate = params.intensity(cfg.min_depth);
    let arrivals = Exp::new(2.0 * side_rate).map_err(|e| Error::domain("A", e.to_string()))?;
    let depth = Exp::new(params.k()).map_err(|e| Error::domain("k", e.to_string()))?;

    let mut records = Vec::new();
    let mut t = 0.0;
    let mut s = cfg.s0;
    loop {
        let wait: f64 = rng.sample(arrivals);
        if t + wait > cfg.duration {
            break;
        }
        t += wait;
        let z: f64 = rng.sample(StandardNormal);
        s += params.mu() * wait + params.sigma() * wait.sqrt() * z;
        let d = cfg.min_depth + rng.sample::<f64, _>(depth);
        let buyer_initiated = rng.random::<bool>();
        let price = if buyer_initiated { s + d } else { s - d };
        records.push(TradeRecord {
            timestamp: t,
            price: price * cfg.tick_size,
            size: cfg.trade_size,
            best_bid: Some((s - cfg.half_spread) * cfg.tick_size),
            best_ask: Some((s + cfg.half_spread) * cfg.tick_size),
        });
    }
    Ok(records)
}
