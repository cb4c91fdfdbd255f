//! Compliance scoring: turns a human-judged 22-dimension scorecard into
//! per-category sums, a total, and an integer percentage.
//!
//! Arithmetic is exact: statuses are tallied in half-points and percentages
//! rounded half-up with integer math, so published scorecards reproduce
//! bit-for-bit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DimensionCategory, Scorecard};

/// Scored card, shaped like one column of a compliance table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    #[serde(rename = "Structure")]
    pub structure: f64,
    #[serde(rename = "Imaging")]
    pub imaging: f64,
    #[serde(rename = "Annotation")]
    pub annotation: f64,
    #[serde(rename = "Provenance")]
    pub provenance: f64,
    #[serde(rename = "Quality")]
    pub quality: f64,
    #[serde(rename = "MLReadiness")]
    pub ml_readiness: f64,
    #[serde(rename = "Total")]
    pub total: f64,
    #[serde(rename = "Percent")]
    pub percent: u32,
}

impl ScoreReport {
    pub fn category_sum(&self, category: DimensionCategory) -> f64 {
        match category {
            DimensionCategory::Structure => self.structure,
            DimensionCategory::Imaging => self.imaging,
            DimensionCategory::Annotation => self.annotation,
            DimensionCategory::Provenance => self.provenance,
            DimensionCategory::Quality => self.quality,
            DimensionCategory::MLReadiness => self.ml_readiness,
        }
    }
}

/// floor(a/b + 1/2) in integer arithmetic.
fn round_half_up(numer: u64, denom: u64) -> u32 {
    ((2 * numer + denom) / (2 * denom)) as u32
}

/// Half-point sums per category, after validating the fixed cardinalities.
fn tally_half_points(card: &Scorecard) -> Result<[u32; 6]> {
    if card.0.len() != 22 {
        return Err(Error::WrongDimensionCount(format!(
            "expected 22 entries, got {}",
            card.0.len()
        )));
    }
    let mut halves = [0u32; 6];
    let mut counts = [0u32; 6];
    for entry in &card.0 {
        let category = DimensionCategory::parse(&entry.category)?;
        let k = DimensionCategory::ALL
            .iter()
            .position(|&c| c == category)
            .expect("category is one of ALL");
        halves[k] += entry.status.half_points();
        counts[k] += 1;
    }
    for (k, category) in DimensionCategory::ALL.iter().enumerate() {
        if counts[k] != category.dimension_count() {
            return Err(Error::WrongDimensionCount(format!(
                "category {} has {} dimensions, expected {}",
                category.label(),
                counts[k],
                category.dimension_count()
            )));
        }
    }
    Ok(halves)
}

/// Scores one card: satisfied = 1, partial = 0.5, absent = 0; percent is
/// round-half-up of 100 * total / 22.
pub fn score(card: &Scorecard) -> Result<ScoreReport> {
    let halves = tally_half_points(card)?;
    let total_halves: u32 = halves.iter().sum();
    let sums: Vec<f64> = halves.iter().map(|&h| h as f64 / 2.0).collect();
    Ok(ScoreReport {
        structure: sums[0],
        imaging: sums[1],
        annotation: sums[2],
        provenance: sums[3],
        quality: sums[4],
        ml_readiness: sums[5],
        total: total_halves as f64 / 2.0,
        percent: round_half_up(100 * u64::from(total_halves), 44),
    })
}

/// Mean category score across cards as a percentage of the category maximum,
/// rounded half-up. Returned in fixed category order.
pub fn category_averages(cards: &[Scorecard]) -> Result<Vec<(DimensionCategory, u32)>> {
    if cards.is_empty() {
        return Err(Error::EmptyInput("no scorecards".into()));
    }
    let mut sums = [0u64; 6];
    for card in cards {
        let halves = tally_half_points(card)?;
        for (k, h) in halves.iter().enumerate() {
            sums[k] += u64::from(*h);
        }
    }
    let n = cards.len() as u64;
    Ok(DimensionCategory::ALL
        .iter()
        .enumerate()
        .map(|(k, &category)| {
            // mean/max as a fraction: (sums/2n) / max = sums / (2n * max)
            let denom = 2 * n * u64::from(category.dimension_count());
            (category, round_half_up(100 * sums[k], denom))
        })
        .collect())
}
