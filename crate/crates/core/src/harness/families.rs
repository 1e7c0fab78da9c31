use crate::envs::synthetic::{
    ArmSeparationEnv, FixedFamily, SafeRiskyBandit, TwoPointContinuousBandit, ZeroRewardEnv,
};
use crate::envs::{builtin_families, EnvFamily};
use crate::error::{Error, Result};

/// Arm paid by the `arm_separation` family: index 0 of the default arms, α = 0.2.
pub const SEPARATION_BEST_ARM: usize = 0;
pub const SEPARATION_NOISE: f64 = 0.1;

/// Ids of the synthetic families known to the harness, besides the built-in
/// toy families.
pub const SYNTHETIC_IDS: [&str; 4] = ["safe_risky", "two_point", "zero_reward", "arm_separation"];

/// Built-in or synthetic family by id.
pub fn resolve_family(id: &str) -> Result<Box<dyn EnvFamily>> {
    let fam: Box<dyn EnvFamily> = match id {
        "safe_risky" => Box::new(FixedFamily::new(id, SafeRiskyBandit::new(), 0.9)),
        "two_point" => Box::new(FixedFamily::new(id, TwoPointContinuousBandit::new(), 0.9)),
        "zero_reward" => Box::new(FixedFamily::new(id, ZeroRewardEnv::new(20), 0.9)),
        "arm_separation" => Box::new(FixedFamily::new(
            id,
            ArmSeparationEnv::new(SEPARATION_BEST_ARM, SEPARATION_NOISE),
            0.9,
        )),
        _ => {
            return builtin_families()
                .into_iter()
                .find(|f| f.id() == id)
                .ok_or_else(|| Error::UnknownFamily(id.to_string()))
        }
    };
    Ok(fam)
}

pub fn family_ids() -> Vec<String> {
    builtin_families()
        .iter()
        .map(|f| f.id().to_string())
        .chain(SYNTHETIC_IDS.iter().map(|s| s.to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_resolves() {
        for id in family_ids() {
            assert_eq!(resolve_family(&id).unwrap().id(), id);
        }
        assert!(matches!(resolve_family("missing"), Err(Error::UnknownFamily(_))));
    }
}
