//! Long-horizon quotes from the ground state, next to the Gaussian closed form.

use mmquote::{asymptotic_quotes, gaussian_approximation, LadderMatrix, ParamsDraft, Variant};

fn main() -> mmquote::Result<()> {
    let params = ParamsDraft::reference().validate()?;
    let solution = asymptotic_quotes(&LadderMatrix::build(&params, Variant::Base))?;

    println!(
        "{:>4} {:>10} {:>10} {:>10} {:>10}",
        "q", "bid_inf", "ask_inf", "bid_gauss", "ask_gauss"
    );
    for q in (-30..=30).step_by(5) {
        let exact = solution.quotes(&params, q)?;
        let gauss = gaussian_approximation(&params, Variant::Base, q);
        println!(
            "{q:>4} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            exact.delta_b.unwrap_or(f64::NAN),
            exact.delta_a.unwrap_or(f64::NAN),
            gauss.delta_b.unwrap_or(f64::NAN),
            gauss.delta_a.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
