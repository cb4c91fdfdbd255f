//! Deterministic subject-level train/val/test split generation and leakage
//! checking.
//!
//! The shuffle is pinned end to end so every run (and every port) produces
//! identical memberships: subject IDs are sorted lexicographically, shuffled
//! by Fisher-Yates driven by splitmix64, and apportioned by largest
//! remainder with ties broken train > val > test.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SplitsSpec;

/// splitmix64 with the standard constants. State advances by the golden
/// gamma; output is the mixed state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }
}

/// In-place Fisher-Yates: i runs from n-1 down to 1, swapping with
/// j = next output mod (i+1).
pub fn shuffle<T>(items: &mut [T], rng: &mut SplitMix64) {
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

const METHOD: &str = "fisher-yates/splitmix64/largest-remainder";
const RATIO_GRID: u64 = 1_000_000_000;

/// Largest-remainder apportionment of `n` seats across the three ratios.
///
/// Ratios are quantized to a 1e-9 grid (their documented precision) so the
/// arithmetic is exact integer math; ties on the remainder are broken in
/// train > val > test order.
fn apportion(n: usize, ratios: (f64, f64, f64)) -> [usize; 3] {
    let nanos = [ratios.0, ratios.1, ratios.2].map(|r| (r * RATIO_GRID as f64).round() as u64);
    let quotas = nanos.map(|rn| rn * n as u64);
    let mut sizes = quotas.map(|q| (q / RATIO_GRID) as usize);
    let fracs = quotas.map(|q| q % RATIO_GRID);
    let assigned: usize = sizes.iter().sum();
    let seats = n.saturating_sub(assigned);
    let mut order = [0usize, 1, 2];
    order.sort_by_key(|&k| (std::cmp::Reverse(fracs[k]), k));
    for &k in order.iter().take(seats) {
        sizes[k] += 1;
    }
    sizes
}

/// Generates a deterministic subject-level split.
pub fn generate_splits(
    subject_ids: &[String],
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<SplitsSpec> {
    if subject_ids.is_empty() {
        return Err(Error::EmptyInput("subject id list".into()));
    }
    if !(ratios.0 > 0.0 && ratios.1 > 0.0 && ratios.2 > 0.0) {
        return Err(Error::BadRatios(format!(
            "all three ratios must be positive, got {ratios:?}"
        )));
    }
    let sum = ratios.0 + ratios.1 + ratios.2;
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::BadRatios(format!("ratios sum to {sum}, expected 1")));
    }

    let mut ids: Vec<String> = subject_ids.to_vec();
    ids.sort_unstable();
    for pair in ids.windows(2) {
        if pair[0] == pair[1] {
            return Err(Error::DuplicateSubjects(pair[0].clone()));
        }
    }

    let mut rng = SplitMix64::new(seed);
    shuffle(&mut ids, &mut rng);

    let [n_train, n_val, n_test] = apportion(ids.len(), ratios);
    debug_assert_eq!(n_train + n_val + n_test, ids.len());
    let test = ids.split_off(n_train + n_val);
    let val = ids.split_off(n_train);
    let train = ids;

    Ok(SplitsSpec {
        seed,
        ratios: [ratios.0, ratios.1, ratios.2],
        method: METHOD.to_string(),
        rationale: "Subject-level assignment keeps every subject's data in exactly one split, \
                    preventing cross-split leakage."
            .to_string(),
        train,
        val,
        test,
    })
}

/// Kind of split violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitViolationKind {
    /// A subject appears in more than one list (or twice in one).
    DuplicateAssignment,
    /// A listed subject is not part of the population.
    UnknownSubject,
    /// A population subject appears in no list.
    UnassignedSubject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitViolation {
    #[serde(rename = "Kind")]
    pub kind: SplitViolationKind,
    #[serde(rename = "Subject")]
    pub subject: String,
}

/// Checks a split against a subject population. Empty result means the three
/// lists are pairwise disjoint, every listed subject is in the population,
/// and every population subject is assigned exactly once.
pub fn check_leakage(spec: &SplitsSpec, population: &[String]) -> Vec<SplitViolation> {
    use std::collections::BTreeMap;

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for id in spec.train.iter().chain(&spec.val).chain(&spec.test) {
        *counts.entry(id.as_str()).or_default() += 1;
    }
    let pop: std::collections::BTreeSet<&str> = population.iter().map(String::as_str).collect();

    let mut violations = Vec::new();
    for (&id, &count) in &counts {
        if count > 1 {
            violations.push(SplitViolation {
                kind: SplitViolationKind::DuplicateAssignment,
                subject: id.to_string(),
            });
        }
        if !pop.contains(id) {
            violations.push(SplitViolation {
                kind: SplitViolationKind::UnknownSubject,
                subject: id.to_string(),
            });
        }
    }
    for &id in &pop {
        if !counts.contains_key(id) {
            violations.push(SplitViolation {
                kind: SplitViolationKind::UnassignedSubject,
                subject: id.to_string(),
            });
        }
    }
    violations
}
