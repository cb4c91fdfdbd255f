//! Inter-annotator agreement: pairwise Dice, majority-vote consensus masks,
//! quality tiers, and the Full-profile quality artifacts.
//!
//! The default entry points run data-parallel over voxel chunks and reader
//! pairs when the `parallel` feature is enabled (the default). The [`seq`]
//! module always carries the sequential implementations; it is the fallback
//! path and the baseline the benchmark suite compares against.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    DatasetQuality, QualitySummary, QualityTier, SubjectQuality, TierCounts, VIDS_VERSION,
};
use crate::naming::{parse_dir_component, parse_entity_name, DirKind};
use crate::volume::{read_volume, LabelVolume};
use crate::{naming, par};

/// Exact rational consensus threshold; avoids float comparisons at
/// boundaries like 2 readers out of 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction {
    num: u32,
    den: u32,
}

impl Fraction {
    /// Majority vote: at least half the readers.
    pub const HALF: Fraction = Fraction { num: 1, den: 2 };

    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 || num > den {
            return Err(Error::BadConfig(format!(
                "consensus threshold must satisfy 0 < num/den <= 1, got {num}/{den}"
            )));
        }
        Ok(Fraction { num, den })
    }

    /// True when `count` of `total` votes meets the threshold (count/total >= num/den).
    #[inline]
    pub fn met(self, count: u32, total: u32) -> bool {
        u64::from(count) * u64::from(self.den) >= u64::from(self.num) * u64::from(total)
    }
}

/// Masks of one annotated unit (a subject or a single nodule) from two or
/// more readers, all on an identical grid.
#[derive(Debug, Clone)]
pub struct ReaderMaskSet {
    pub unit_id: String,
    masks: Vec<LabelVolume>,
}

impl ReaderMaskSet {
    pub fn new(unit_id: impl Into<String>, masks: Vec<LabelVolume>) -> Result<Self> {
        if masks.len() < 2 {
            return Err(Error::BadConfig(format!(
                "a reader mask set needs at least 2 masks, got {}",
                masks.len()
            )));
        }
        let first = &masks[0];
        for m in &masks[1..] {
            if m.dims() != first.dims() {
                return Err(Error::DimsMismatch {
                    a: first.dims(),
                    b: m.dims(),
                });
            }
            if m.spacing() != first.spacing() {
                return Err(Error::BadConfig(format!(
                    "reader masks disagree on spacing: {:?} vs {:?}",
                    first.spacing(),
                    m.spacing()
                )));
            }
        }
        for (i, m) in masks.iter().enumerate() {
            if !m.is_binary() {
                return Err(Error::BadConfig(format!(
                    "reader mask {i} is not binary (values outside {{0,1}})"
                )));
            }
        }
        Ok(ReaderMaskSet {
            unit_id: unit_id.into(),
            masks,
        })
    }

    pub fn masks(&self) -> &[LabelVolume] {
        &self.masks
    }

    pub fn reader_count(&self) -> usize {
        self.masks.len()
    }
}

/// Dice per reader pair, indices into the mask set with `reader_a < reader_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDice {
    pub reader_a: usize,
    pub reader_b: usize,
    pub dice: f64,
}

const CHUNK: usize = 16 * 1024;

fn dice_from_counts(a_count: usize, b_count: usize, overlap: usize) -> f64 {
    if a_count == 0 && b_count == 0 {
        return 1.0; // identical empty masks agree perfectly
    }
    2.0 * overlap as f64 / (a_count + b_count) as f64
}

/// Always-sequential implementations.
///
/// Numerically identical to the top-level entry points; kept public so the
/// benchmark suite and thread-pool-averse embedders can call them directly.
pub mod seq {
    use super::*;

    pub fn dice(a: &LabelVolume, b: &LabelVolume) -> Result<f64> {
        if a.dims() != b.dims() {
            return Err(Error::DimsMismatch {
                a: a.dims(),
                b: b.dims(),
            });
        }
        let (mut ca, mut cb, mut overlap) = (0usize, 0usize, 0usize);
        for (&va, &vb) in a.voxels().iter().zip(b.voxels()) {
            ca += (va != 0) as usize;
            cb += (vb != 0) as usize;
            overlap += (va != 0 && vb != 0) as usize;
        }
        Ok(dice_from_counts(ca, cb, overlap))
    }

    pub fn pairwise_dice(set: &ReaderMaskSet) -> Result<Vec<PairDice>> {
        let masks = set.masks();
        let mut out = Vec::with_capacity(masks.len() * (masks.len() - 1) / 2);
        for i in 0..masks.len() {
            for j in i + 1..masks.len() {
                out.push(PairDice {
                    reader_a: i,
                    reader_b: j,
                    dice: dice(&masks[i], &masks[j])?,
                });
            }
        }
        Ok(out)
    }

    pub fn consensus_mask(set: &ReaderMaskSet, threshold: Fraction) -> LabelVolume {
        let masks = set.masks();
        let total = masks.len() as u32;
        let mut out = masks[0].clone();
        let n = out.len();
        for idx in 0..n {
            let count = masks.iter().map(|m| (m.voxels()[idx] != 0) as u32).sum();
            out.voxels_mut()[idx] = threshold.met(count, total) as u8;
        }
        out
    }
}

/// Dice coefficient 2|A∩B| / (|A|+|B|) by voxel counting.
///
/// Both masks empty yields 1.0; exactly one empty yields 0.0.
pub fn dice(a: &LabelVolume, b: &LabelVolume) -> Result<f64> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if a.dims() != b.dims() {
            return Err(Error::DimsMismatch {
                a: a.dims(),
                b: b.dims(),
            });
        }
        let (ca, cb, overlap) = a
            .voxels()
            .par_chunks(CHUNK)
            .zip(b.voxels().par_chunks(CHUNK))
            .map(|(xs, ys)| {
                let (mut ca, mut cb, mut ov) = (0usize, 0usize, 0usize);
                for (&va, &vb) in xs.iter().zip(ys) {
                    ca += (va != 0) as usize;
                    cb += (vb != 0) as usize;
                    ov += (va != 0 && vb != 0) as usize;
                }
                (ca, cb, ov)
            })
            .reduce(|| (0, 0, 0), |l, r| (l.0 + r.0, l.1 + r.1, l.2 + r.2));
        Ok(dice_from_counts(ca, cb, overlap))
    }
    #[cfg(not(feature = "parallel"))]
    seq::dice(a, b)
}

/// Dice for every reader pair, ordered lexicographically by (i, j).
/// Returns exactly C(R,2) entries.
pub fn pairwise_dice(set: &ReaderMaskSet) -> Result<Vec<PairDice>> {
    #[cfg(feature = "parallel")]
    {
        let masks = set.masks();
        let mut pairs = Vec::with_capacity(masks.len() * (masks.len() - 1) / 2);
        for i in 0..masks.len() {
            for j in i + 1..masks.len() {
                pairs.push((i, j));
            }
        }
        par::try_map(pairs, |(i, j)| {
            Ok(PairDice {
                reader_a: i,
                reader_b: j,
                dice: seq::dice(&masks[i], &masks[j])?,
            })
        })
    }
    #[cfg(not(feature = "parallel"))]
    seq::pairwise_dice(set)
}

/// Majority-vote consensus: a voxel is set when at least `threshold` of the
/// readers marked it.
pub fn consensus_mask(set: &ReaderMaskSet, threshold: Fraction) -> LabelVolume {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let masks = set.masks();
        let total = masks.len() as u32;
        let mut out = masks[0].clone();
        let base_ptr_chunks: Vec<(usize, &mut [u8])> = {
            // chunk index bookkeeping so each output chunk can address the
            // matching input ranges
            out.voxels_mut().chunks_mut(CHUNK).enumerate().collect()
        };
        base_ptr_chunks.into_par_iter().for_each(|(ci, chunk)| {
            let start = ci * CHUNK;
            for (off, slot) in chunk.iter_mut().enumerate() {
                let idx = start + off;
                let count = masks.iter().map(|m| (m.voxels()[idx] != 0) as u32).sum();
                *slot = threshold.met(count, total) as u8;
            }
        });
        out
    }
    #[cfg(not(feature = "parallel"))]
    seq::consensus_mask(set, threshold)
}

/// Bands a mean pairwise Dice into a quality tier. Boundaries are inclusive
/// at the lower edge: >=0.90 excellent, >=0.85 good, >=0.75 acceptable.
pub fn quality_tier(mean_dice: f64) -> QualityTier {
    debug_assert!((0.0..=1.0).contains(&mean_dice), "dice out of range: {mean_dice}");
    if mean_dice >= 0.90 {
        QualityTier::Excellent
    } else if mean_dice >= 0.85 {
        QualityTier::Good
    } else if mean_dice >= 0.75 {
        QualityTier::Acceptable
    } else {
        QualityTier::Poor
    }
}

// ---------------------------------------------------------------------------
// Quality artifacts
// ---------------------------------------------------------------------------

/// Agreement results for one annotated unit: pair Dice values plus the
/// reader labels that produced them.
#[derive(Debug, Clone)]
pub struct UnitAgreement {
    pub subject: String,
    pub unit: String,
    pub readers: Vec<String>,
    pub pairs: Vec<PairDice>,
}

/// One row of `annotation_agreement.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementRecord {
    #[serde(rename = "Subject")]
    pub subject: String,
    #[serde(rename = "Unit")]
    pub unit: String,
    #[serde(rename = "ReaderA")]
    pub reader_a: String,
    #[serde(rename = "ReaderB")]
    pub reader_b: String,
    #[serde(rename = "Dice")]
    pub dice: f64,
}

/// Per-subject rollup inside `annotation_agreement.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectAgreement {
    #[serde(rename = "Subject")]
    pub subject: String,
    #[serde(rename = "PairCount")]
    pub pair_count: u32,
    #[serde(rename = "MeanPairwiseDice")]
    pub mean_pairwise_dice: f64,
}

/// `quality/annotation_agreement.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementFile {
    #[serde(rename = "VIDSVersion")]
    pub vids_version: String,
    #[serde(rename = "Pairs")]
    pub pairs: Vec<AgreementRecord>,
    #[serde(rename = "PerSubject")]
    pub per_subject: Vec<SubjectAgreement>,
}

const AGGREGATION_NOTE: &str =
    "Per-subject mean is the flat mean over all reader-pair Dice records across the subject's units; \
     dataset aggregates are over all pair records. Per-subject means allow subject-weighted statistics.";

/// Builds the quality summary and agreement records from per-unit pairwise
/// results. `subjects` is the full roster; subjects without units are listed
/// as unrated.
pub fn build_quality_artifacts(
    subjects: &[String],
    units: &[UnitAgreement],
) -> (QualitySummary, AgreementFile) {
    let mut by_subject: BTreeMap<&str, Vec<&UnitAgreement>> = BTreeMap::new();
    for u in units {
        by_subject.entry(u.subject.as_str()).or_default().push(u);
    }

    let mut roster: Vec<&str> = subjects.iter().map(String::as_str).collect();
    roster.sort_unstable();
    roster.dedup();
    for u in units {
        if !roster.contains(&u.subject.as_str()) {
            roster.push(u.subject.as_str());
        }
    }
    roster.sort_unstable();

    let mut per_subject = Vec::with_capacity(roster.len());
    let mut rollups = Vec::new();
    let mut tier_counts = TierCounts::default();
    let mut all_dice: Vec<f64> = Vec::new();

    for subject in roster {
        let subject_units = by_subject.get(subject).map(Vec::as_slice).unwrap_or(&[]);
        let dices: Vec<f64> = subject_units
            .iter()
            .flat_map(|u| u.pairs.iter().map(|p| p.dice))
            .collect();
        let (mean, tier) = if dices.is_empty() {
            (None, QualityTier::Unrated)
        } else {
            let mean = dices.iter().sum::<f64>() / dices.len() as f64;
            (Some(mean), quality_tier(mean))
        };
        match tier {
            QualityTier::Excellent => tier_counts.excellent += 1,
            QualityTier::Good => tier_counts.good += 1,
            QualityTier::Acceptable => tier_counts.acceptable += 1,
            QualityTier::Poor => tier_counts.poor += 1,
            QualityTier::Unrated => tier_counts.unrated += 1,
        }
        if let Some(mean) = mean {
            rollups.push(SubjectAgreement {
                subject: subject.to_string(),
                pair_count: dices.len() as u32,
                mean_pairwise_dice: mean,
            });
        }
        all_dice.extend(&dices);
        per_subject.push(SubjectQuality {
            subject: subject.to_string(),
            nodule_count: subject_units.len() as u32,
            mean_pairwise_dice: mean,
            tier,
        });
    }

    let dataset = if all_dice.is_empty() {
        None
    } else {
        Some(DatasetQuality {
            mean_pairwise_dice: all_dice.iter().sum::<f64>() / all_dice.len() as f64,
            min_pairwise_dice: all_dice.iter().copied().fold(f64::INFINITY, f64::min),
            max_pairwise_dice: all_dice.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            tier_counts,
        })
    };

    let mut pair_records = Vec::new();
    for u in units {
        for p in &u.pairs {
            pair_records.push(AgreementRecord {
                subject: u.subject.clone(),
                unit: u.unit.clone(),
                reader_a: u.readers[p.reader_a].clone(),
                reader_b: u.readers[p.reader_b].clone(),
                dice: p.dice,
            });
        }
    }
    pair_records.sort_by(|a, b| {
        (&a.subject, &a.unit, &a.reader_a, &a.reader_b)
            .cmp(&(&b.subject, &b.unit, &b.reader_a, &b.reader_b))
    });

    (
        QualitySummary {
            vids_version: VIDS_VERSION.to_string(),
            aggregation: AGGREGATION_NOTE.to_string(),
            per_subject,
            dataset,
        },
        AgreementFile {
            vids_version: VIDS_VERSION.to_string(),
            pairs: pair_records,
            per_subject: rollups,
        },
    )
}

/// Writes the two quality artifacts under `<root>/quality/`.
pub fn write_quality_artifacts(
    root: &Path,
    summary: &QualitySummary,
    agreement: &AgreementFile,
) -> Result<()> {
    let dir = root.join("quality");
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let summary_path = dir.join("quality_summary.json");
    let text = serde_json::to_string_pretty(summary).map_err(|e| Error::json(&summary_path, e))?;
    fs::write(&summary_path, text + "\n").map_err(|e| Error::io(&summary_path, e))?;
    let agreement_path = dir.join("annotation_agreement.json");
    let text =
        serde_json::to_string_pretty(agreement).map_err(|e| Error::json(&agreement_path, e))?;
    fs::write(&agreement_path, text + "\n").map_err(|e| Error::io(&agreement_path, e))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Recomputation from per-reader masks on disk
// ---------------------------------------------------------------------------

/// Per-reader mask trees live under `derivatives/readers/<reader>/`, a custom
/// derivatives area the validator ignores. The consensus masks under
/// `derivatives/annotations/` are what ship; the reader trees are what make
/// agreement recomputable.
pub const READERS_DIR: &str = "derivatives/readers";

fn sorted_dir_names(dir: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    if !dir.is_dir() {
        return Ok(names);
    }
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() && !path.is_symlink() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort_unstable();
    Ok(names)
}

/// Recomputes inter-annotator agreement from per-reader masks under
/// `derivatives/readers/` and returns the quality artifacts for the dataset.
///
/// Units with fewer than two readers are skipped, mirroring the consensus
/// requirement. Units are processed in parallel; output order is by
/// (subject, unit) regardless of scheduling.
pub fn compute_agreement_from_tree(root: &Path) -> Result<(QualitySummary, AgreementFile)> {
    if !root.exists() {
        return Err(Error::RootNotFound(root.into()));
    }
    if !root.is_dir() {
        return Err(Error::RootNotDirectory(root.into()));
    }

    // subject roster from the source tree
    let mut subjects = Vec::new();
    for name in sorted_dir_names(root)? {
        if let Ok(id) = parse_dir_component(&name, DirKind::Subject) {
            subjects.push(id);
        }
    }

    // (subject, unit stem) -> [(reader, mask path)]
    type UnitKey = (String, String);
    type ReaderMasks = Vec<(String, std::path::PathBuf)>;
    let readers_root = root.join(READERS_DIR);
    let mut units: BTreeMap<UnitKey, ReaderMasks> = BTreeMap::new();
    for reader in sorted_dir_names(&readers_root)? {
        let reader_dir = readers_root.join(&reader);
        for sub_name in sorted_dir_names(&reader_dir)? {
            let Ok(subject) = parse_dir_component(&sub_name, DirKind::Subject) else {
                continue;
            };
            let sub_dir = reader_dir.join(&sub_name);
            for ses_name in sorted_dir_names(&sub_dir)? {
                if parse_dir_component(&ses_name, DirKind::Session).is_err() {
                    continue;
                }
                let ses_dir = sub_dir.join(&ses_name);
                for mod_name in sorted_dir_names(&ses_dir)? {
                    let mod_dir = ses_dir.join(&mod_name);
                    let mut files: Vec<String> = fs::read_dir(&mod_dir)
                        .map_err(|e| Error::io(&mod_dir, e))?
                        .filter_map(|e| e.ok())
                        .filter(|e| e.path().is_file())
                        .map(|e| e.file_name().to_string_lossy().into_owned())
                        .collect();
                    files.sort_unstable();
                    for file in files {
                        if !file.ends_with("_seg.nii.gz") {
                            continue;
                        }
                        let Ok(entity) = parse_entity_name(&file) else {
                            continue;
                        };
                        let mut stem = naming::render_entity_name(&entity);
                        stem.truncate(stem.len() - entity.extension.len() - 1);
                        units
                            .entry((subject.clone(), stem))
                            .or_default()
                            .push((reader.clone(), mod_dir.join(&file)));
                    }
                }
            }
        }
    }

    let work: Vec<(UnitKey, ReaderMasks)> =
        units.into_iter().filter(|(_, r)| r.len() >= 2).collect();
    let computed: Vec<UnitAgreement> = par::try_map(work, |((subject, unit), reader_masks)| {
        let readers: Vec<String> = reader_masks.iter().map(|(r, _)| r.clone()).collect();
        let masks = reader_masks
            .iter()
            .map(|(_, p)| read_volume(p).map(|l| l.volume))
            .collect::<Result<Vec<_>>>()?;
        let set = ReaderMaskSet::new(unit.clone(), masks)?;
        let pairs = pairwise_dice(&set)?;
        Ok::<_, Error>(UnitAgreement {
            subject,
            unit,
            readers,
            pairs,
        })
    })?;

    Ok(build_quality_artifacts(&subjects, &computed))
}
