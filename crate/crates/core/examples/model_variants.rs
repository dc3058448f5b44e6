//! Effect of drift and market impact on the long-horizon quotes.

use mmquote::{asymptotic_quotes, LadderMatrix, ParamsDraft, Variant};

fn main() -> mmquote::Result<()> {
    let base = ParamsDraft::reference();
    let cases = [
        ("base", base, Variant::Base),
        ("drift", ParamsDraft { mu: 0.01, ..base }, Variant::Drift),
        ("impact", ParamsDraft { xi: 0.5, ..base }, Variant::Impact),
    ];

    for (name, draft, variant) in cases {
        let params = draft.validate()?;
        let solution = asymptotic_quotes(&LadderMatrix::build(&params, variant))?;
        let at = |q| {
            solution
                .quotes(&params, q)
                .map(|qp| (qp.delta_b.unwrap(), qp.delta_a.unwrap()))
        };
        let (b0, a0) = at(0)?;
        let (b5, a5) = at(5)?;
        println!("{name:<7} q=0 ({b0:.4}, {a0:.4})  q=5 ({b5:.4}, {a5:.4})");
    }
    Ok(())
}
