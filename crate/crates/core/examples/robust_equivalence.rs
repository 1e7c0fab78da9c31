//! Expectile value iteration and robust value iteration over the
//! likelihood-ratio uncertainty set reach the same fixed point.

use expectrl::bellman::{robust_value_iteration, value_iteration, OperatorKind};
use expectrl::expectile::ExpectileSpec;
use expectrl::mdp::garnet;

fn main() -> expectrl::Result<()> {
    let mdp = garnet(8, 3, 3, 0.2, 42)?;
    let classical = value_iteration(&mdp, OperatorKind::ClassicalOptimal, None, 1e-10, 100_000)?;
    println!("classical  V = {:.4?}", classical.value.as_slice());
    for alpha in [0.2, 0.3, 0.4] {
        let spec = ExpectileSpec::new(alpha)?;
        let expectile = value_iteration(&mdp, OperatorKind::ExpectileOptimal(spec), None, 1e-10, 100_000)?;
        let robust = robust_value_iteration(&mdp, spec, 1e-10, 100_000, None)?;
        println!("alpha {alpha}: V = {:.4?}", expectile.value.as_slice());
        println!(
            "           robust gap {:.2e} after {} / {} iterations",
            expectile.value.sup_distance(&robust.value),
            expectile.iterations,
            robust.iterations
        );
    }
    Ok(())
}
