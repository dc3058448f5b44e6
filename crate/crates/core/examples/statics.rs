//! Signs of the long-horizon quote sensitivities.

use mmquote::{comparative_statics_report, Parameter, ParamsDraft, Side, StaticsConfig, Variant};

fn main() -> mmquote::Result<()> {
    let params = ParamsDraft::reference().validate()?;
    let report = comparative_statics_report(&params, Variant::Base, &StaticsConfig::default())?;

    for parameter in Parameter::ALL {
        for q in [-5, 0, 5] {
            let row = report
                .find(parameter, q, Side::Spread)
                .expect("row present");
            println!(
                "{:>6} q={q:>3} d(spread) = {:+.4e}",
                parameter.name(),
                row.derivative
            );
        }
    }
    let qs: Vec<i32> = report.disagreements().map(|r| r.q.abs()).collect();
    if let (Some(lo), Some(hi)) = (qs.iter().min(), qs.iter().max()) {
        println!(
            "{} sign disagreements, all at |q| in [{lo}, {hi}]",
            qs.len()
        );
    }
    Ok(())
}
