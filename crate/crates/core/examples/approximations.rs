//! Error of the near-expiry expansion as the time to go shrinks, away from the
//! inventory bound where the expansion degrades.

use mmquote::{
    optimal_quotes, taylor_quotes_near_t, LadderMatrix, ParamsDraft, ValueLadder, Variant,
};

fn main() -> mmquote::Result<()> {
    let params = ParamsDraft::reference().validate()?;
    let ladder = ValueLadder::new(LadderMatrix::build(&params, Variant::Base))?;
    let horizon = params.horizon();

    println!("{:>8} {:>14}", "tau", "max |error|");
    for tau in [16.0, 8.0, 4.0, 2.0, 1.0] {
        let t = horizon - tau;
        let mut worst: f64 = 0.0;
        for q in -10..=10 {
            let exact = optimal_quotes(&ladder, t, q)?;
            let approx = taylor_quotes_near_t(&params, t, q)?;
            worst = worst.max((exact.delta_b.unwrap() - approx.delta_b.unwrap()).abs());
            worst = worst.max((exact.delta_a.unwrap() - approx.delta_a.unwrap()).abs());
        }
        println!("{tau:>8} {worst:>14.3e}");
    }
    Ok(())
}
