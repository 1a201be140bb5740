use rand::seq::SliceRandom;

use super::manifest::{ManifestRecord, StageManifest};
use super::CurriculumError;
use crate::seed;

/// Training order over consecutive stage manifests.
///
/// Each stage runs for exactly its step budget. Within a stage the records
/// are visited in a seeded permutation that is redrawn every epoch, so every
/// record is seen before any is repeated.
#[derive(Debug)]
pub struct Schedule<'a> {
    manifests: &'a [StageManifest],
    seed: u64,
    stage: usize,
    step_in_stage: u64,
    step: usize,
    epoch: u64,
    order: Vec<usize>,
    pos: usize,
}

pub fn schedule(manifests: &[StageManifest], seed_value: u64) -> Result<Schedule<'_>, CurriculumError> {
    let stages: Vec<Option<u8>> = manifests.iter().map(|m| m.stage).collect();
    if stages.windows(2).any(|w| w[0] >= w[1] && w[1].is_some()) {
        return Err(CurriculumError::Unordered);
    }
    if stages.contains(&None) && manifests.len() > 1 {
        return Err(CurriculumError::Unordered);
    }
    if let Some(m) = manifests.iter().find(|m| m.step_budget > 0 && m.records.is_empty()) {
        return Err(CurriculumError::EmptyManifest(m.stage.unwrap_or(u8::MAX)));
    }
    let mut s = Schedule {
        manifests,
        seed: seed_value,
        stage: 0,
        step_in_stage: 0,
        step: 0,
        epoch: 0,
        order: Vec::new(),
        pos: 0,
    };
    s.skip_exhausted();
    s.reshuffle();
    Ok(s)
}

impl<'a> Schedule<'a> {
    fn reshuffle(&mut self) {
        let Some(m) = self.manifests.get(self.stage) else {
            return;
        };
        self.order = (0..m.records.len()).collect();
        let key = format!("schedule:{}:{}:{}", self.stage, m.stage.map_or(-1, i32::from), self.epoch);
        self.order.shuffle(&mut seed::rng(seed::derive_seed(self.seed, &key)));
        self.pos = 0;
    }

    fn skip_exhausted(&mut self) {
        while self.manifests.get(self.stage).is_some_and(|m| self.step_in_stage >= m.step_budget) {
            self.stage += 1;
            self.step_in_stage = 0;
            self.epoch = 0;
        }
    }

    /// Global step at which each manifest begins: the running sum of budgets.
    pub fn stage_starts(&self) -> Vec<u64> {
        self.manifests
            .iter()
            .scan(0, |acc, m| {
                let start = *acc;
                *acc += m.step_budget;
                Some(start)
            })
            .collect()
    }

    pub fn total_steps(&self) -> u64 {
        self.manifests.iter().map(|m| m.step_budget).sum()
    }
}

impl<'a> Iterator for Schedule<'a> {
    type Item = (usize, &'a ManifestRecord);

    fn next(&mut self) -> Option<Self::Item> {
        let manifests = self.manifests;
        let m = manifests.get(self.stage)?;
        if self.pos == self.order.len() {
            self.epoch += 1;
            self.reshuffle();
        }
        let record = &m.records[self.order[self.pos]];
        let item = (self.step, record);
        self.pos += 1;
        self.step += 1;
        self.step_in_stage += 1;
        if self.step_in_stage >= m.step_budget {
            self.skip_exhausted();
            self.reshuffle();
        }
        Some(item)
    }
}
