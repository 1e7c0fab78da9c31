//! Expectiles of a discrete distribution computed two ways: bisection on the
//! first-order condition and the variational (likelihood-ratio) form.

use expectrl::expectile::{
    expectile_discrete, expectile_loss, expectile_variational, DiscreteDistribution, ExpectileSpec, DEFAULT_ETA_GRID,
    DEFAULT_TOL,
};

fn main() -> expectrl::Result<()> {
    // A bet that pays 1 with probability 1/2 and 0 otherwise.
    let coin = DiscreteDistribution::new(vec![0.0, 1.0], vec![0.5, 0.5])?;
    // A heavier downside: lose 4 with probability 0.1.
    let skewed = DiscreteDistribution::new(vec![-4.0, 1.0], vec![0.1, 0.9])?;

    for (name, dist) in [("coin", &coin), ("skewed", &skewed)] {
        println!("{name}: mean {:.4}", dist.mean());
        for alpha in [0.1, 0.2, 0.3, 0.4, 0.5] {
            let bisection = expectile_discrete(dist, alpha, DEFAULT_TOL)?;
            let variational = expectile_variational(dist, &ExpectileSpec::new(alpha)?, DEFAULT_ETA_GRID)?;
            println!("  alpha {alpha:.1}: bisection {bisection:+.6}  variational {variational:+.6}");
        }
    }

    println!("asymmetric loss at alpha 0.2:");
    for u in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        println!("  L({u:+.1}) = {:.3}", expectile_loss(u, 0.2)?);
    }
    Ok(())
}
