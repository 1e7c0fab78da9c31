use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-episode training record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    /// Environment steps taken so far, this episode included.
    pub step: usize,
    pub arm: usize,
    pub alpha: f64,
    pub episode_return: f64,
    /// Mean critic loss over the episode's updates, 0 when none ran.
    pub critic_loss: f64,
    /// Environment parameter the episode was played at.
    pub omega: Vec<f64>,
    /// Arm probabilities after the episode's bandit update.
    pub bandit_probs: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub records: Vec<EpisodeRecord>,
}

impl TrainingLog {
    pub fn push(&mut self, record: EpisodeRecord) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn returns(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.episode_return).collect()
    }

    /// CSV with columns `episode, step, arm, alpha, return, critic_loss,
    /// omega_0…, p_0…`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let omega_dim = self.records.first().map_or(0, |r| r.omega.len());
        let arms = self.records.first().map_or(0, |r| r.bandit_probs.len());
        let mut header: Vec<String> = ["episode", "step", "arm", "alpha", "return", "critic_loss"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend((0..omega_dim).map(|i| format!("omega_{i}")));
        header.extend((0..arms).map(|i| format!("p_{i}")));
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![
                r.episode.to_string(),
                r.step.to_string(),
                r.arm.to_string(),
                r.alpha.to_string(),
                r.episode_return.to_string(),
                r.critic_loss.to_string(),
            ];
            row.extend(r.omega.iter().map(f64::to_string));
            row.extend(r.bandit_probs.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_row() {
        let mut log = TrainingLog::default();
        log.push(EpisodeRecord {
            episode: 0,
            step: 3,
            arm: 1,
            alpha: 0.3,
            episode_return: -0.5,
            critic_loss: 0.25,
            omega: vec![0.1],
            bandit_probs: vec![0.5, 0.5],
        });
        assert_eq!(
            log.to_csv_string().unwrap(),
            "episode,step,arm,alpha,return,critic_loss,omega_0,p_0,p_1\n0,3,1,0.3,-0.5,0.25,0.1,0.5,0.5\n"
        );
    }
}
