//! Monte Carlo comparison of the optimal strategy against simpler rules.

use mmquote::{
    asymptotic_quotes, simulate, AsymptoticPolicy, GaussianPolicy, LadderMatrix, ParamsDraft,
    QuotingPolicy, SimConfig, SymmetricConstantPolicy, TabulatedPolicy, ValueLadder, Variant,
};

fn main() -> mmquote::Result<()> {
    let params = ParamsDraft {
        horizon: 120.0,
        ..ParamsDraft::reference()
    }
    .validate()?;
    let matrix = LadderMatrix::build(&params, Variant::Base);
    let ladder = ValueLadder::new(matrix.clone())?;
    let solution = asymptotic_quotes(&matrix)?;

    let policies: Vec<Box<dyn QuotingPolicy>> = vec![
        Box::new(TabulatedPolicy::optimal(&ladder, 0.1)?),
        Box::new(AsymptoticPolicy::new(&params, &solution)),
        Box::new(GaussianPolicy::new(&params, Variant::Base)),
        Box::new(SymmetricConstantPolicy {
            delta: 3.279,
            q_max: params.q_max(),
        }),
    ];
    let cfg = SimConfig {
        n_paths: 2000,
        seed: 1,
        ..SimConfig::default()
    };

    for policy in &policies {
        let s = simulate(&params, policy.as_ref(), &cfg)?.summary;
        println!(
            "{:<20} CE {:>8.3} ± {:.3}  mean wealth {:>8.3}  max |q| {}",
            s.policy,
            s.certainty_equivalent,
            s.std_error_certainty_equivalent,
            s.mean_wealth,
            s.max_abs_inventory
        );
    }
    Ok(())
}
