//! Train / TS1 / TS2 protocol.
//!
//! - train: windows at P1, P3, P5.
//! - TS1: windows at the unseen positions P2, P4, optionally subsampled to a
//!   fixed per-class count.
//! - TS2: a class-balanced sample across all five positions.
//!
//! By default the highest-numbered trial of every (class, train position) is
//! withheld from train and TS2 samples those positions from it, so TS2 never
//! contains a training window. With `reserve_ts2_trials = false` every trial
//! at P1/P3/P5 is used for training and TS2 may reuse training windows.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::{DataError, Movement, Position, Tagged};
use crate::rng::{stream, tag};

pub const TRAIN_POSITIONS: [Position; 3] = [Position::P1, Position::P3, Position::P5];
pub const TEST_POSITIONS: [Position; 2] = [Position::P2, Position::P4];

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SplitConfig {
    /// `None` keeps every P2/P4 window in TS1.
    pub ts1_per_class: Option<usize>,
    pub ts2_per_class: usize,
    pub reserve_ts2_trials: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { ts1_per_class: None, ts2_per_class: 880, reserve_ts2_trials: true }
    }
}

impl SplitConfig {
    /// Per-subject counts of the original protocol: 1521 TS1 and 880 TS2
    /// windows per class, TS2 drawn from all trials.
    pub fn full_scale() -> Self {
        Self { ts1_per_class: Some(1521), ts2_per_class: 880, reserve_ts2_trials: false }
    }
}

#[derive(Debug, Clone)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub ts1: Vec<T>,
    pub ts2: Vec<T>,
}

/// Splits `total` into `parts` near-equal shares, earlier shares larger.
fn shares(total: usize, parts: usize) -> Vec<usize> {
    (0..parts).map(|i| total / parts + usize::from(i < total % parts)).collect()
}

fn per_class_counts<T: Tagged>(items: &[T]) -> Vec<usize> {
    let mut counts = vec![0; Movement::COUNT];
    for it in items {
        counts[it.tag().class.index()] += 1;
    }
    counts
}

fn check_balanced<T: Tagged>(set: &'static str, items: &[T]) -> Result<(), DataError> {
    let counts = per_class_counts(items);
    if counts.iter().any(|&c| c != counts[0]) {
        return Err(DataError::Unbalanced { set, counts });
    }
    Ok(())
}

fn sample<T: Clone>(
    set: &'static str,
    pool: &[&T],
    needed: usize,
    class: Movement,
    position: Position,
    seed: u64,
) -> Result<Vec<T>, DataError> {
    if pool.len() < needed {
        return Err(DataError::InsufficientWindows { set, class, position, needed, available: pool.len() });
    }
    let mut order: Vec<usize> = (0..pool.len()).collect();
    let mut rng = stream(seed, &[tag(set), class.index() as u64, position.index() as u64]);
    order.shuffle(&mut rng);
    let mut picked: Vec<usize> = order[..needed].to_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| pool[i].clone()).collect())
}

/// Builds the three evaluation sets from windows (or anything tagged) of one
/// subject. Output sets are ordered by window identity.
pub fn make_splits<T: Tagged + Clone>(items: &[T], cfg: &SplitConfig, seed: u64) -> Result<DatasetSplit<T>, DataError> {
    let mut groups: BTreeMap<(Movement, Position), Vec<&T>> = BTreeMap::new();
    for it in items {
        let t = it.tag();
        groups.entry((t.class, t.position)).or_default().push(it);
    }
    for g in groups.values_mut() {
        g.sort_by_key(|it| it.tag());
    }
    for &class in Movement::ALL {
        for &position in Position::ALL {
            if !groups.contains_key(&(class, position)) {
                return Err(DataError::MissingGroup { class, position });
            }
        }
    }

    let ts2_quota = shares(cfg.ts2_per_class, Position::COUNT);
    let ts1_quota = cfg.ts1_per_class.map(|n| shares(n, TEST_POSITIONS.len()));
    let mut split = DatasetSplit { train: Vec::new(), ts1: Vec::new(), ts2: Vec::new() };

    for &class in Movement::ALL {
        for &position in &TRAIN_POSITIONS {
            let group = &groups[&(class, position)];
            let (train, ts2_pool): (Vec<&T>, Vec<&T>) = if cfg.reserve_ts2_trials {
                let held_out = group.iter().map(|it| it.tag().trial).max().expect("non-empty group");
                let (held, kept): (Vec<&T>, Vec<&T>) = group.iter().partition(|it| it.tag().trial == held_out);
                if kept.is_empty() {
                    return Err(DataError::InsufficientWindows {
                        set: "train",
                        class,
                        position,
                        needed: 1,
                        available: 0,
                    });
                }
                (kept, held)
            } else {
                (group.clone(), group.clone())
            };
            split.train.extend(train.into_iter().cloned());
            let quota = ts2_quota[position.index()];
            split.ts2.extend(sample("ts2", &ts2_pool, quota, class, position, seed)?);
        }
        for (k, &position) in TEST_POSITIONS.iter().enumerate() {
            let group = &groups[&(class, position)];
            let ts1: Vec<T> = match &ts1_quota {
                None => group.iter().map(|it| (*it).clone()).collect(),
                Some(q) => sample("ts1", group, q[k], class, position, seed)?,
            };
            let taken: std::collections::HashSet<_> = ts1.iter().map(|it| it.tag()).collect();
            let rest: Vec<&T> = group.iter().copied().filter(|it| !taken.contains(&it.tag())).collect();
            let quota = ts2_quota[position.index()];
            // TS1 may legitimately use every window when no TS1 quota is set;
            // TS2 then shares P2/P4 windows with TS1.
            let pool = if rest.len() >= quota { rest } else { group.clone() };
            split.ts2.extend(sample("ts2", &pool, quota, class, position, seed)?);
            split.ts1.extend(ts1);
        }
    }

    for set in [&mut split.train, &mut split.ts1, &mut split.ts2] {
        set.sort_by_key(|it| it.tag());
    }
    check_balanced("train", &split.train)?;
    check_balanced("ts1", &split.ts1)?;
    check_balanced("ts2", &split.ts2)?;
    Ok(split)
}
