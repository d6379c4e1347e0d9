use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Corpus, DatasetError};
use crate::tagging::{derive_labels, PraiseLabels};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum StratifyBy {
    #[default]
    None,
    /// Split each praise-label combination group separately.
    PraiseLabelCombination,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    /// Train, validation, test.
    pub ratios: (f64, f64, f64),
    pub seed: u64,
    pub stratify_by: StratifyBy,
}

impl SplitConfig {
    pub fn new(ratios: (f64, f64, f64), seed: u64) -> Self {
        SplitConfig { ratios, seed, stratify_by: StratifyBy::None }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let (a, b, c) = self.ratios;
        let finite = [a, b, c].iter().all(|r| r.is_finite() && *r > 0.0);
        if finite && (a + b + c - 1.0).abs() <= 1e-9 {
            Ok(())
        } else {
            Err(DatasetError::InvalidRatios(self.ratios))
        }
    }
}

/// `floor(n * ratio)` per part, then the leftover items one at a time to
/// train, validation, test, train, ...
pub fn split_sizes(n: usize, ratios: (f64, f64, f64)) -> [usize; 3] {
    let floor = |r: f64| ((n as f64) * r + 1e-9).floor() as usize;
    let mut sizes = [floor(ratios.0), floor(ratios.1), floor(ratios.2)];
    let mut leftover = n.saturating_sub(sizes.iter().sum());
    let mut part = 0;
    while leftover > 0 {
        sizes[part % 3] += 1;
        leftover -= 1;
        part += 1;
    }
    sizes
}

/// Seeded shuffle-and-cut into train, validation and test. Each output keeps
/// the input order of its members.
pub fn split_dataset(corpus: &Corpus, config: &SplitConfig) -> Result<(Corpus, Corpus, Corpus), DatasetError> {
    config.validate()?;
    if corpus.len() < 3 {
        return Err(DatasetError::TooSmall(corpus.len()));
    }
    let groups: Vec<Vec<usize>> = match config.stratify_by {
        StratifyBy::None => vec![(0..corpus.len()).collect()],
        StratifyBy::PraiseLabelCombination => {
            let mut by_labels: BTreeMap<PraiseLabels, Vec<usize>> = BTreeMap::new();
            for (i, r) in corpus.responses().iter().enumerate() {
                by_labels.entry(derive_labels(r.gold_spans())).or_default().push(i);
            }
            by_labels.into_values().collect()
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut assignment = vec![0u8; corpus.len()];
    for mut group in groups {
        group.shuffle(&mut rng);
        let [train, validation, _] = split_sizes(group.len(), config.ratios);
        for (pos, idx) in group.into_iter().enumerate() {
            assignment[idx] = if pos < train {
                0
            } else if pos < train + validation {
                1
            } else {
                2
            };
        }
    }

    let mut parts: [Vec<_>; 3] = Default::default();
    for (r, part) in corpus.responses().iter().zip(assignment) {
        parts[part as usize].push(r.clone());
    }
    let [train, validation, test] = parts;
    let name = corpus.name();
    Ok((
        Corpus::new(format!("{name}-train"), train)?,
        Corpus::new(format!("{name}-validation"), validation)?,
        Corpus::new(format!("{name}-test"), test)?,
    ))
}
