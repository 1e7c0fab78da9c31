//! The bandit over alpha arms locking onto the arm that pays. The synthetic
//! environment returns about 1 when arm 0 acts and about 0 otherwise.

use expectrl::agents::{auto_train, Td3LiteConfig};
use expectrl::harness::resolve_family;

fn main() -> expectrl::Result<()> {
    let family = resolve_family("arm_separation")?;
    let config = Td3LiteConfig {
        total_steps: 200,
        warmup_steps: 10,
        batch: 8,
        hidden: vec![8, 8],
        seed: 4,
        ..Default::default()
    };
    let run = auto_train(family.as_ref(), &config)?;
    for record in run.log.records.iter().step_by(20) {
        let probs: Vec<String> = record.bandit_probs.iter().map(|p| format!("{p:.3}")).collect();
        println!("episode {:>3}: arm {} return {:+.2}  p = [{}]", record.episode, record.arm, record.episode_return, probs.join(", "));
    }
    let bandit = run.bandit.as_ref().expect("auto runs carry a bandit");
    println!("deployed alpha: {}", bandit.arms()[bandit.best_arm()]);
    Ok(())
}
