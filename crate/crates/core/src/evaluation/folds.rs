use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::representation::MotionVector;
use crate::seed;

pub const DEFAULT_FOLDS: usize = 10;

struct Group {
    members: Vec<usize>,
    label: u8,
}

fn groups_of(vectors: &[MotionVector]) -> Vec<Group> {
    let mut by_key: BTreeMap<String, Group> = BTreeMap::new();
    for (i, v) in vectors.iter().enumerate() {
        by_key
            .entry(v.group_key())
            .or_insert_with(|| Group { members: Vec::new(), label: v.label.label() })
            .members
            .push(i);
    }
    by_key.into_values().collect()
}

/// Splits vector indices into `k_folds` disjoint test folds.
///
/// Vectors sharing a recording key always land in the same fold. Within each
/// class, recordings are shuffled, ordered largest first and dealt to the
/// fold currently holding the fewest vectors of that class, which keeps class
/// proportions and fold sizes close to even.
pub fn make_folds(vectors: &[MotionVector], k_folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if vectors.len() < k_folds {
        return Err(Error::TooFewSamples { needed: k_folds, actual: vectors.len() });
    }
    let ones = vectors.iter().filter(|v| v.label.label() == 1).count();
    if ones == 0 || ones == vectors.len() {
        return Err(Error::SingleClass);
    }
    let groups = groups_of(vectors);
    if groups.len() < k_folds {
        return Err(Error::TooFewSamples { needed: k_folds, actual: groups.len() });
    }

    let mut rng = seed::rng(seed);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k_folds];
    for class in [1u8, 0] {
        let mut of_class: Vec<&Group> = groups.iter().filter(|g| g.label == class).collect();
        of_class.shuffle(&mut rng);
        of_class.sort_by(|a, b| b.members.len().cmp(&a.members.len()));
        let mut class_count = vec![0usize; k_folds];
        for g in of_class {
            let target = (0..k_folds)
                .min_by_key(|&f| (class_count[f], folds[f].len(), f))
                .expect("k_folds > 0");
            class_count[target] += g.members.len();
            folds[target].extend_from_slice(&g.members);
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}
