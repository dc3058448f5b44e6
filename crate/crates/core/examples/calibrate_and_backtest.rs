//! Calibrate on a synthetic trade tape, then replay it with the optimal quotes.

use mmquote::{
    calibrate, naive_baseline, run_backtest, synthetic_tape, BacktestConfig, CalibrationConfig,
    LadderMatrix, ParamsDraft, TabulatedPolicy, TapeConfig, ValueLadder, Variant,
};

fn main() -> mmquote::Result<()> {
    let truth = ParamsDraft::reference().validate()?;
    let tape = synthetic_tape(
        &truth,
        &TapeConfig {
            duration: 3600.0,
            seed: 9,
            ..TapeConfig::default()
        },
    )?;

    let cal = calibrate(&tape, &CalibrationConfig::default())?;
    println!(
        "{} trades: sigma {:.4} A {:.4} k {:.4}",
        cal.n_trades, cal.sigma, cal.a, cal.k
    );

    let params = cal
        .apply(ParamsDraft {
            horizon: 600.0,
            ..ParamsDraft::reference()
        })
        .validate()?;
    let ladder = ValueLadder::new(LadderMatrix::build(&params, Variant::Base))?;
    let policy = TabulatedPolicy::optimal(&ladder, 0.1)?;
    let cfg = BacktestConfig::new(params);

    let window = &tape[..tape.partition_point(|r| r.timestamp < 600.0)];
    for report in [
        run_backtest(window, &cfg, &policy)?,
        naive_baseline(window, &cfg)?,
    ] {
        let s = &report.summary;
        println!(
            "{:<10} fills {:>4}/{:<4} final q {:>5} pnl {:>9.2}",
            s.label, s.bid_fills, s.ask_fills, s.final_inventory, s.final_pnl
        );
    }
    Ok(())
}
