use mmquote::backtest::{round_ask, round_bid, run_backtest, BacktestConfig, EvaluationReason};
use mmquote::policy::{SymmetricConstantPolicy, TabulatedPolicy};
use mmquote::quotes::optimal_quotes;
use mmquote::simulator::{simulate, synthetic_tape, SimConfig, TapeConfig};
use mmquote::tape::{emit_trades, ingest_trades, TradeRecord};
use mmquote::{LadderMatrix, ParamsDraft, ValueLadder, Variant};
use proptest::prelude::*;

proptest! {
    #[test]
    fn tick_rounding_is_idempotent(price in 1.0f64..1e5, inc in prop::sample::select(vec![1.0, 0.5, 0.25, 0.1, 0.01])) {
        let b = round_bid(price, inc);
        let a = round_ask(price, inc);
        prop_assert_eq!(round_bid(b, inc), b);
        prop_assert_eq!(round_ask(a, inc), a);
        prop_assert!((b - price).abs() <= 0.5 * inc + 1e-9);
        prop_assert!((a - price).abs() <= 0.5 * inc + 1e-9);
        prop_assert!(b <= a);
    }

    #[test]
    fn tape_round_trips(rows in prop::collection::vec((0.0f64..1e4, 1e-3f64..1e4, 1e-3f64..1e6, 0.0f64..5.0), 1..40)) {
        let mut t = 0.0;
        let records: Vec<TradeRecord> = rows
            .iter()
            .map(|&(dt, price, size, half)| {
                t += dt;
                TradeRecord { timestamp: t, price, size, best_bid: Some(price - half), best_ask: Some(price + half) }
            })
            .collect();
        let mut buf = Vec::new();
        emit_trades(&records, &mut buf).unwrap();
        let back = ingest_trades(buf.as_slice()).unwrap();
        prop_assert_eq!(back.records, records);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quotes_mirror_and_spread_identity(t in 0.0f64..=600.0, q in -29i32..=29) {
        let p = ParamsDraft::reference().validate().unwrap();
        let l = ValueLadder::new(LadderMatrix::build(&p, Variant::Base)).unwrap();
        let a = optimal_quotes(&l, t, q).unwrap();
        let b = optimal_quotes(&l, t, -q).unwrap();
        prop_assert!((a.delta_b.unwrap() - b.delta_a.unwrap()).abs() < 1e-9);
        prop_assert!((a.spread.unwrap() - a.delta_b.unwrap() - a.delta_a.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn value_depends_only_on_time_to_go(tau in 0.0f64..300.0, q in -30i32..=30) {
        let short = ParamsDraft { horizon: 300.0, ..ParamsDraft::reference() }.validate().unwrap();
        let long = ParamsDraft::reference().validate().unwrap();
        let ls = ValueLadder::new(LadderMatrix::build(&short, Variant::Base)).unwrap();
        let ll = ValueLadder::new(LadderMatrix::build(&long, Variant::Base)).unwrap();
        let a = ls.log_value(300.0 - tau, q).unwrap();
        let b = ll.log_value(600.0 - tau, q).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn simulated_inventory_stays_bounded(delta in -3.0f64..4.0, q_max in 1u32..4, seed in 0u64..1000) {
        let p = ParamsDraft { horizon: 30.0, q_max, ..ParamsDraft::reference() }.validate().unwrap();
        let pol = SymmetricConstantPolicy { delta, q_max: p.q_max() };
        let sim = simulate(&p, &pol, &SimConfig { n_paths: 8, seed, ..SimConfig::default() }).unwrap();
        prop_assert!(sim.outcomes.iter().all(|o| o.max_abs_inventory <= q_max as i32));
    }
}

#[test]
fn standard_error_halves_when_paths_quadruple() {
    let p = ParamsDraft {
        horizon: 60.0,
        ..ParamsDraft::reference()
    }
    .validate()
    .unwrap();
    let pol = SymmetricConstantPolicy {
        delta: 2.0,
        q_max: 30,
    };
    let se = |n| {
        simulate(
            &p,
            &pol,
            &SimConfig {
                n_paths: n,
                seed: 5,
                ..SimConfig::default()
            },
        )
        .unwrap()
        .summary
        .std_error_wealth
    };
    let (a, b, c) = (se(2000), se(4000), se(8000));
    assert!((0.62..0.80).contains(&(b / a)), "{}", b / a);
    assert!((0.42..0.58).contains(&(c / a)), "{}", c / a);
}

#[test]
fn requotes_only_at_fills_and_expiries() {
    let p = ParamsDraft::reference().validate().unwrap();
    let l = ValueLadder::new(LadderMatrix::build(&p, Variant::Base)).unwrap();
    let pol = TabulatedPolicy::optimal(&l, 0.1).unwrap();
    let tape = synthetic_tape(
        &p,
        &TapeConfig {
            duration: 600.0,
            seed: 2,
            s0: 100.0,
            ..TapeConfig::default()
        },
    )
    .unwrap();
    let cfg = BacktestConfig {
        requote_dt: 3.0,
        ..BacktestConfig::new(p)
    };
    let report = run_backtest(&tape, &cfg, &pol).unwrap();
    assert!(!report.fills.is_empty());

    let evals = &report.evaluations;
    assert_eq!(evals[0].reason, EvaluationReason::Start);
    for w in evals.windows(2) {
        match w[1].reason {
            EvaluationReason::Expiry => {
                assert!((w[1].timestamp - w[0].timestamp - 3.0).abs() < 1e-9)
            }
            EvaluationReason::Fill => assert!(report
                .fills
                .iter()
                .any(|f| f.event == w[1].event && f.timestamp == w[1].timestamp)),
            EvaluationReason::Start => panic!("second start"),
        }
    }
    // each fill executes at the price posted by the latest evaluation before it
    for f in &report.fills {
        let posted = evals
            .iter()
            .rev()
            .find(|e| {
                e.event < f.event || (e.event == f.event && e.reason != EvaluationReason::Fill)
            })
            .unwrap();
        let price = match f.side {
            mmquote::backtest::Side::Bid => posted.bid,
            mmquote::backtest::Side::Ask => posted.ask,
        };
        assert_eq!(price, Some(f.price));
    }
    assert!(report.pnl.iter().all(|x| x.inventory.abs() <= 30.0));
    assert!(report.recompute_error() <= 1e-9);
}
