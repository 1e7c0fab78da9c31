//! Empirical contraction ratios of the Bellman operators on a random MDP.

use expectrl::bellman::{contraction_probe, OperatorKind};
use expectrl::expectile::ExpectileSpec;
use expectrl::mdp::{garnet, Policy};

fn main() -> expectrl::Result<()> {
    let mdp = garnet(10, 4, 4, 0.0, 7)?;
    let uniform = Policy::uniform(mdp.n_states(), mdp.n_actions());
    println!("gamma = {}", mdp.gamma());
    let classical = contraction_probe(&mdp, OperatorKind::ClassicalOptimal, None, 2000, 1)?;
    println!("classical optimal:        {classical:.6}");
    for alpha in [0.1, 0.3, 0.5] {
        let spec = ExpectileSpec::new(alpha)?;
        let opt = contraction_probe(&mdp, OperatorKind::ExpectileOptimal(spec), None, 2000, 1)?;
        let eval = contraction_probe(&mdp, OperatorKind::ExpectilePolicy(spec), Some(&uniform), 2000, 1)?;
        println!("expectile alpha {alpha}: optimal {opt:.6}, uniform policy {eval:.6}");
    }
    Ok(())
}
