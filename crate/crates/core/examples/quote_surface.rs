//! Optimal finite-horizon quotes at a few dates and inventories.

use mmquote::{optimal_quotes, LadderMatrix, ParamsDraft, ValueLadder, Variant};

fn main() -> mmquote::Result<()> {
    let params = ParamsDraft::reference().validate()?;
    let ladder = ValueLadder::new(LadderMatrix::build(&params, Variant::Base))?;

    println!(
        "{:>6} {:>4} {:>10} {:>10} {:>10}",
        "t", "q", "delta_b", "delta_a", "spread"
    );
    for t in [0.0, 300.0, 590.0, 600.0] {
        for q in [-30, -5, 0, 5, 30] {
            let qp = optimal_quotes(&ladder, t, q)?;
            let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.5}"));
            println!(
                "{t:>6} {q:>4} {:>10} {:>10} {:>10}",
                show(qp.delta_b),
                show(qp.delta_a),
                show(qp.spread)
            );
        }
    }
    Ok(())
}
