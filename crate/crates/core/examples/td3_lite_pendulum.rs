//! Short TD3-lite run on the pendulum with an expectile critic, then a
//! worst-case evaluation over the (mass, length) grid.

use expectrl::agents::{td3_lite_train, Td3LiteConfig};
use expectrl::approx::OptimizerKind;
use expectrl::envs::{evaluate, EnvFamily, OmegaGrid, PendulumFamily};

fn main() -> expectrl::Result<()> {
    let family = PendulumFamily::new();
    let config = Td3LiteConfig {
        alpha: 0.3,
        total_steps: 4000,
        warmup_steps: 500,
        hidden: vec![32, 32],
        optimizer: OptimizerKind::Adam,
        lr_critic: 1e-3,
        lr_actor: 1e-3,
        seed: 1,
        ..Default::default()
    };
    let run = td3_lite_train(&family, &config)?;
    let returns = run.log.returns();
    let tail = &returns[returns.len().saturating_sub(5)..];
    println!("episodes {}, last returns {:.1?}", returns.len(), tail);
    let grid = OmegaGrid::uniform(family.omega_box(), 3)?;
    let report = evaluate(&run.policy(), &family, &grid, 3, 9)?;
    println!("R_worst {:.2}, R_average {:.2}", report.worst, report.average);
    Ok(())
}
