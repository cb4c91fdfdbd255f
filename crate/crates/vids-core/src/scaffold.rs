//! Synthetic dataset generation: compliant skeletons, full multi-reader
//! fixtures, and per-rule mutants for the validation test harness.
//!
//! Output is a pure function of the config: dates, demographics, and voxel
//! noise all derive from the seed, and every serializer in the write path is
//! deterministic, so identical configs produce byte-identical trees.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fsutil::{copy_tree, ensure_empty_dir, write_json_pretty, write_text};
use crate::model::{
    AnnotationProcess, AnnotationSidecar, Annotator, ComplianceInfo, DatasetDescription, LabelMap,
    Profile, Provenance, QualityControl, RuleId, VidsMarker, VIDS_VERSION,
};
use crate::quality::{
    build_quality_artifacts, consensus_mask, pairwise_dice, write_quality_artifacts, Fraction,
    ReaderMaskSet, UnitAgreement, READERS_DIR,
};
use crate::splits::{generate_splits, SplitMix64};
use crate::volume::{write_volume, LabelVolume};

const SYNTH_TOOL: &str = "vids-kit-synth";

/// Configuration for synthetic datasets.
#[derive(Debug, Clone)]
pub struct FixtureConfig {
    pub n_subjects: u32,
    /// Readers per annotated subject; at least 2 so pairwise Dice exists.
    pub readers_per_subject: u32,
    /// Each dimension at least 4 so sphere masks are non-degenerate.
    pub volume_dims: (u32, u32, u32),
    pub profile: Profile,
    pub seed: u64,
    pub modality: String,
    /// Trailing subjects that receive imaging only, modeling source data
    /// with too few readers for consensus. Annotation rules quantify over
    /// existing annotations, so the fixture still validates.
    pub unannotated_subjects: u32,
}

impl FixtureConfig {
    pub fn new(n_subjects: u32) -> Self {
        FixtureConfig {
            n_subjects,
            readers_per_subject: 4,
            volume_dims: (16, 16, 16),
            profile: Profile::Poc,
            seed: 42,
            modality: "ct".to_string(),
            unannotated_subjects: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 {
            return Err(Error::BadConfig(
                "at least one subject is required (rule S005 is unsatisfiable otherwise)".into(),
            ));
        }
        if self.readers_per_subject < 2 {
            return Err(Error::BadConfig(
                "readers_per_subject must be at least 2 for pairwise agreement".into(),
            ));
        }
        let (nx, ny, nz) = self.volume_dims;
        if nx < 4 || ny < 4 || nz < 4 {
            return Err(Error::BadConfig(format!(
                "volume dims must each be at least 4, got {:?}",
                self.volume_dims
            )));
        }
        if self.unannotated_subjects >= self.n_subjects {
            return Err(Error::BadConfig(
                "at least one subject must carry annotations (rule A002)".into(),
            ));
        }
        if self.modality.is_empty()
            || !self.modality.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
        {
            return Err(Error::BadConfig(format!(
                "modality must be lowercase alphanumeric, got {:?}",
                self.modality
            )));
        }
        Ok(())
    }
}

/// Counts and Dice aggregates from fixture generation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureStats {
    #[serde(rename = "Subjects")]
    pub subjects: u32,
    #[serde(rename = "AnnotatedSubjects")]
    pub annotated_subjects: u32,
    #[serde(rename = "Images")]
    pub images: u32,
    #[serde(rename = "Segmentations")]
    pub segmentations: u32,
    #[serde(rename = "ReaderMasks")]
    pub reader_masks: u32,
    #[serde(rename = "DicePairs")]
    pub dice_pairs: u32,
    #[serde(rename = "MeanPairwiseDice", skip_serializing_if = "Option::is_none")]
    pub mean_pairwise_dice: Option<f64>,
    #[serde(rename = "MinPairwiseDice", skip_serializing_if = "Option::is_none")]
    pub min_pairwise_dice: Option<f64>,
    #[serde(rename = "MaxPairwiseDice", skip_serializing_if = "Option::is_none")]
    pub max_pairwise_dice: Option<f64>,
}

/// Seeded substream, decorrelated by tag list.
fn substream(seed: u64, tags: &[u64]) -> SplitMix64 {
    let mut state = seed;
    for &tag in tags {
        let mut mixer = SplitMix64::new(state ^ tag.wrapping_mul(0xA24BAED4963EE407));
        state = mixer.next_u64();
    }
    SplitMix64::new(state)
}

/// Deterministic ISO-8601 date within 2026, derived from the stream.
fn seeded_date(rng: &mut SplitMix64) -> String {
    let month = 1 + (rng.next_u64() % 12) as u32;
    let day = 1 + (rng.next_u64() % 28) as u32;
    format!("2026-{month:02}-{day:02}")
}

fn subject_id(index: u32, total: u32) -> String {
    let width = std::cmp::max(3, total.to_string().len());
    format!("{:0width$}", index + 1, width = width)
}

struct Sphere {
    center: (f64, f64, f64),
    radius: f64,
}

impl Sphere {
    fn fill(&self, dims: (u32, u32, u32), spacing: (f32, f32, f32)) -> LabelVolume {
        let mut mask = LabelVolume::zeros(dims, spacing).expect("valid dims");
        let r2 = self.radius * self.radius;
        for z in 0..dims.2 {
            for y in 0..dims.1 {
                for x in 0..dims.0 {
                    let dx = x as f64 - self.center.0;
                    let dy = y as f64 - self.center.1;
                    let dz = z as f64 - self.center.2;
                    if dx * dx + dy * dy + dz * dz <= r2 {
                        mask.set(x, y, z, 1);
                    }
                }
            }
        }
        mask
    }
}

fn unit_f64(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Subject-level base sphere: center near the middle, radius ~ a fifth of
/// the smallest dimension.
fn base_sphere(dims: (u32, u32, u32), rng: &mut SplitMix64) -> Sphere {
    let min_dim = dims.0.min(dims.1).min(dims.2) as f64;
    let jitter = |rng: &mut SplitMix64, extent: f64| (unit_f64(rng) - 0.5) * extent / 4.0;
    Sphere {
        center: (
            dims.0 as f64 / 2.0 + jitter(rng, dims.0 as f64),
            dims.1 as f64 / 2.0 + jitter(rng, dims.1 as f64),
            dims.2 as f64 / 2.0 + jitter(rng, dims.2 as f64),
        ),
        radius: (min_dim / 5.0).max(1.6) * (0.9 + 0.2 * unit_f64(rng)),
    }
}

/// Per-reader variation: up to one voxel of center shift and ten percent of
/// radius, keeping pairwise Dice in a realistic band.
fn reader_sphere(base: &Sphere, rng: &mut SplitMix64) -> Sphere {
    let shift = |rng: &mut SplitMix64| (unit_f64(rng) - 0.5) * 2.0;
    Sphere {
        center: (
            base.center.0 + shift(rng),
            base.center.1 + shift(rng),
            base.center.2 + shift(rng),
        ),
        radius: (base.radius * (0.9 + 0.2 * unit_f64(rng))).max(1.5),
    }
}

fn synth_image(dims: (u32, u32, u32), spacing: (f32, f32, f32), sphere: &Sphere, rng: &mut SplitMix64) -> LabelVolume {
    let mut image = LabelVolume::zeros(dims, spacing).expect("valid dims");
    let r2 = sphere.radius * sphere.radius;
    for z in 0..dims.2 {
        for y in 0..dims.1 {
            for x in 0..dims.0 {
                let dx = x as f64 - sphere.center.0;
                let dy = y as f64 - sphere.center.1;
                let dz = z as f64 - sphere.center.2;
                let noise = (rng.next_u64() % 40) as u8;
                let value = if dx * dx + dy * dy + dz * dz <= r2 {
                    180 + noise
                } else {
                    20 + noise
                };
                image.set(x, y, z, value);
            }
        }
    }
    image
}

const SPACING: (f32, f32, f32) = (1.0, 1.0, 1.25);
const SESSION: &str = "baseline";
const MANUFACTURERS: [&str; 3] = ["Siemens", "Philips", "GE"];

fn write_root_metadata(root: &Path, config: &FixtureConfig, profile: Profile) -> Result<()> {
    write_json_pretty(
        &root.join(".vids"),
        &VidsMarker {
            vids_version: VIDS_VERSION.to_string(),
            profile,
        },
    )?;

    write_json_pretty(
        &root.join("dataset_description.json"),
        &DatasetDescription {
            name: Some(format!("Synthetic {} fixture", config.modality.to_uppercase())),
            vids_version: Some(VIDS_VERSION.to_string()),
            dataset_type: Some(format!("{}-segmentation", config.modality)),
            license: Some("CC-BY-4.0".to_string()),
            authors: Some(vec![SYNTH_TOOL.to_string()]),
            modalities: Some(vec![config.modality.clone()]),
            compliance: Some(ComplianceInfo {
                irb_approval: Some("not-applicable-synthetic-data".to_string()),
                deidentification_method: Some("synthetic-generation".to_string()),
                extra: Default::default(),
            }),
            custom_modalities: None,
            extra: Default::default(),
        },
    )?;

    let mut rng = substream(config.seed, &[0xD3]);
    let participants: Vec<Value> = (0..config.n_subjects)
        .map(|i| {
            json!({
                "SubjectID": subject_id(i, config.n_subjects),
                "Age": 40 + (rng.next_u64() % 45),
                "Sex": if rng.next_u64().is_multiple_of(2) { "F" } else { "M" },
            })
        })
        .collect();
    write_json_pretty(&root.join("participants.json"), &participants)?;

    write_text(
        &root.join("README.md"),
        &format!(
            "# Synthetic {} fixture\n\nGenerated by {SYNTH_TOOL} (seed {}) with {} subjects. \
             Images are noise volumes with a bright sphere; segmentations are sphere masks.\n",
            config.modality.to_uppercase(),
            config.seed,
            config.n_subjects
        ),
    )?;

    write_text(
        &root.join("CHANGES.md"),
        &format!("## {VIDS_VERSION}\n\n- Initial synthetic release (seed {}).\n", config.seed),
    )?;
    Ok(())
}

fn modality_dir(root: &Path, sub: &str, modality: &str) -> PathBuf {
    root.join(format!("sub-{sub}"))
        .join(format!("ses-{SESSION}"))
        .join(modality)
}

fn write_subject_image(root: &Path, config: &FixtureConfig, index: u32) -> Result<Sphere> {
    let sub = subject_id(index, config.n_subjects);
    let dir = modality_dir(root, &sub, &config.modality);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let mut rng = substream(config.seed, &[0x1A, u64::from(index)]);
    let sphere = base_sphere(config.volume_dims, &mut rng);
    let image = synth_image(config.volume_dims, SPACING, &sphere, &mut rng);
    let stem = format!("sub-{sub}_ses-{SESSION}_{}_img", config.modality);
    write_volume(&image, dir.join(format!("{stem}.nii.gz")))?;

    let manufacturer = MANUFACTURERS[(rng.next_u64() % 3) as usize];
    let sidecar = json!({
        "Manufacturer": manufacturer,
        "Modality": config.modality.to_uppercase(),
        "SliceThickness_mm": SPACING.2,
        "SeriesDescription": "synthetic noise volume with sphere target",
    });
    write_json_pretty(&dir.join(format!("{stem}.json")), &sidecar)?;
    Ok(sphere)
}

fn default_label_map() -> LabelMap {
    let mut map = LabelMap::default();
    map.0.insert("0".to_string(), "background".to_string());
    map.0.insert("1".to_string(), "nodule".to_string());
    map
}

fn annotation_sidecar(
    source_image: String,
    annotator: Annotator,
    date: String,
    confidence: Option<f64>,
) -> AnnotationSidecar {
    AnnotationSidecar {
        vids_version: Some(VIDS_VERSION.to_string()),
        annotation_type: Some("segmentation".to_string()),
        source_image: Some(source_image),
        label_map: Some(default_label_map()),
        provenance: Some(Provenance {
            annotator: Some(annotator),
            annotation_process: Some(AnnotationProcess {
                tool: Some(SYNTH_TOOL.to_string()),
                version: Some(env!("CARGO_PKG_VERSION").to_string()),
                date: Some(date),
                time_spent_minutes: None,
                method: Some("automated".to_string()),
                extra: Default::default(),
            }),
            quality_control: confidence.map(|c| QualityControl {
                reviewed_by: Some(format!("{SYNTH_TOOL}-qc")),
                review_date: None,
                review_outcome: Some("approved".to_string()),
                confidence: Some(c),
                extra: Default::default(),
            }),
            extra: Default::default(),
        }),
        annotations: None,
        extra: Default::default(),
    }
}

/// Generates a POC-valid skeleton: root metadata, per-subject imaging, and a
/// single-annotator segmentation per subject. The marker is written as POC;
/// quality/ and ml/ are absent and skip under that profile.
pub fn scaffold_dataset(root: impl AsRef<Path>, config: &FixtureConfig) -> Result<()> {
    let root = root.as_ref();
    config.validate()?;
    ensure_empty_dir(root)?;
    write_root_metadata(root, config, Profile::Poc)?;

    for index in 0..config.n_subjects {
        let sphere = write_subject_image(root, config, index)?;
        let sub = subject_id(index, config.n_subjects);
        let ann_dir = root
            .join("derivatives/annotations")
            .join(format!("sub-{sub}"))
            .join(format!("ses-{SESSION}"))
            .join(&config.modality);
        fs::create_dir_all(&ann_dir).map_err(|e| Error::io(&ann_dir, e))?;

        let mask = sphere.fill(config.volume_dims, SPACING);
        let stem = format!("sub-{sub}_ses-{SESSION}_{}_seg", config.modality);
        write_volume(&mask, ann_dir.join(format!("{stem}.nii.gz")))?;

        let mut rng = substream(config.seed, &[0xDA7E, u64::from(index)]);
        let sidecar = annotation_sidecar(
            format!("sub-{sub}_ses-{SESSION}_{}_img.nii.gz", config.modality),
            Annotator {
                id: Some("annotator_01".to_string()),
                credentials: Some("synthetic".to_string()),
                ..Default::default()
            },
            seeded_date(&mut rng),
            None,
        );
        write_json_pretty(&ann_dir.join(format!("{stem}.json")), &sidecar)?;
    }
    Ok(())
}

/// Generates a complete fixture: multi-reader sphere masks, majority-vote
/// consensus segmentations with provenance, per-reader mask trees under
/// `derivatives/readers/`, quality artifacts, and ML splits. With
/// `profile = Full` the result validates 21/21.
pub fn generate_fixture(root: impl AsRef<Path>, config: &FixtureConfig) -> Result<FixtureStats> {
    let root = root.as_ref();
    config.validate()?;
    ensure_empty_dir(root)?;
    write_root_metadata(root, config, config.profile)?;

    let annotated = config.n_subjects - config.unannotated_subjects;
    let mut units: Vec<UnitAgreement> = Vec::with_capacity(annotated as usize);
    let mut subject_ids = Vec::with_capacity(config.n_subjects as usize);
    let mut reader_masks_written = 0u32;

    for index in 0..config.n_subjects {
        let sphere = write_subject_image(root, config, index)?;
        let sub = subject_id(index, config.n_subjects);
        subject_ids.push(sub.clone());
        if index >= annotated {
            continue; // imaging only: no qualifying multi-reader source
        }

        let readers: Vec<String> = (1..=config.readers_per_subject)
            .map(|r| format!("reader_{r:02}"))
            .collect();
        let stem = format!("sub-{sub}_ses-{SESSION}_{}_seg", config.modality);
        let img_name = format!("sub-{sub}_ses-{SESSION}_{}_img.nii.gz", config.modality);

        let mut masks = Vec::with_capacity(readers.len());
        for (r, reader) in readers.iter().enumerate() {
            let mut rng = substream(config.seed, &[0x5EED, u64::from(index), r as u64 + 1]);
            let mask = reader_sphere(&sphere, &mut rng).fill(config.volume_dims, SPACING);
            let reader_dir = root
                .join(READERS_DIR)
                .join(reader)
                .join(format!("sub-{sub}"))
                .join(format!("ses-{SESSION}"))
                .join(&config.modality);
            fs::create_dir_all(&reader_dir).map_err(|e| Error::io(&reader_dir, e))?;
            write_volume(&mask, reader_dir.join(format!("{stem}.nii.gz")))?;
            let mut date_rng = substream(config.seed, &[0xDA7E, u64::from(index), r as u64 + 1]);
            let reader_sidecar = annotation_sidecar(
                img_name.clone(),
                Annotator {
                    id: Some(reader.clone()),
                    credentials: Some("synthetic".to_string()),
                    ..Default::default()
                },
                seeded_date(&mut date_rng),
                None,
            );
            write_json_pretty(&reader_dir.join(format!("{stem}.json")), &reader_sidecar)?;
            reader_masks_written += 1;
            masks.push(mask);
        }

        let set = ReaderMaskSet::new(stem.clone(), masks)?;
        let pairs = pairwise_dice(&set)?;
        let consensus = consensus_mask(&set, Fraction::HALF);
        let subject_mean =
            pairs.iter().map(|p| p.dice).sum::<f64>() / pairs.len() as f64;

        let ann_dir = root
            .join("derivatives/annotations")
            .join(format!("sub-{sub}"))
            .join(format!("ses-{SESSION}"))
            .join(&config.modality);
        fs::create_dir_all(&ann_dir).map_err(|e| Error::io(&ann_dir, e))?;
        write_volume(&consensus, ann_dir.join(format!("{stem}.nii.gz")))?;

        let mut date_rng = substream(config.seed, &[0xDA7E, u64::from(index)]);
        let sidecar = annotation_sidecar(
            img_name,
            Annotator {
                id: Some("reader_panel".to_string()),
                name: Some(format!(
                    "{} synthetic readers, majority vote at 50%",
                    readers.len()
                )),
                credentials: Some("synthetic".to_string()),
                ..Default::default()
            },
            seeded_date(&mut date_rng),
            Some(subject_mean),
        );
        write_json_pretty(&ann_dir.join(format!("{stem}.json")), &sidecar)?;

        units.push(UnitAgreement {
            subject: sub,
            unit: stem,
            readers,
            pairs,
        });
    }

    let (summary, agreement) = build_quality_artifacts(&subject_ids, &units);
    write_quality_artifacts(root, &summary, &agreement)?;

    let splits = generate_splits(&subject_ids, (0.70, 0.15, 0.15), config.seed)?;
    write_json_pretty(&root.join("ml/splits.json"), &splits)?;

    let all_dice: Vec<f64> = units
        .iter()
        .flat_map(|u| u.pairs.iter().map(|p| p.dice))
        .collect();
    Ok(FixtureStats {
        subjects: config.n_subjects,
        annotated_subjects: annotated,
        images: config.n_subjects,
        segmentations: annotated,
        reader_masks: reader_masks_written,
        dice_pairs: all_dice.len() as u32,
        mean_pairwise_dice: (!all_dice.is_empty())
            .then(|| all_dice.iter().sum::<f64>() / all_dice.len() as f64),
        min_pairwise_dice: all_dice.iter().copied().reduce(f64::min),
        max_pairwise_dice: all_dice.iter().copied().reduce(f64::max),
    })
}

// ---------------------------------------------------------------------------
// Mutation harness
// ---------------------------------------------------------------------------

fn first_image(root: &Path) -> Result<PathBuf> {
    let index = crate::validator::scan_dataset(root)?;
    for subject in &index.subjects {
        for session in &subject.sessions {
            for modality in &session.modalities {
                if let Some(image) = modality.images.first() {
                    return Ok(root.join(&image.file_rel));
                }
            }
        }
    }
    Err(Error::BadConfig("fixture has no image files".into()))
}

fn first_annotation_sidecar(root: &Path) -> Result<PathBuf> {
    let index = crate::validator::scan_dataset(root)?;
    index
        .annotations
        .iter()
        .map(|a| root.join(&a.sidecar_rel))
        .find(|p| p.is_file())
        .ok_or_else(|| Error::BadConfig("fixture has no annotation sidecars".into()))
}

fn edit_json(path: &Path, edit: impl FnOnce(&mut Value)) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    edit(&mut value);
    write_json_pretty(path, &value)
}

fn remove(path: &Path) -> Result<()> {
    if path.is_dir() {
        fs::remove_dir_all(path).map_err(|e| Error::io(path, e))
    } else {
        fs::remove_file(path).map_err(|e| Error::io(path, e))
    }
}

fn rename_prefix_dirs(dir: &Path, prefix: &str) -> Result<Vec<String>> {
    let mut renamed = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if entry.path().is_dir() && name.starts_with(prefix) {
            let new_name = format!("not{name}");
            fs::rename(entry.path(), dir.join(&new_name)).map_err(|e| Error::io(entry.path(), e))?;
            renamed.push(name);
        }
    }
    renamed.sort_unstable();
    Ok(renamed)
}

/// Copies `src` to `dst` and applies the minimal edit that violates exactly
/// `rule`. Edits may touch a second artifact only to absorb side effects
/// (for example emptying split lists when subject directories go away), so
/// the mutation flips one rule and one rule only.
pub fn mutate_fixture(
    src: impl AsRef<Path>,
    rule: RuleId,
    dst: impl AsRef<Path>,
) -> Result<String> {
    let src = src.as_ref();
    let dst = dst.as_ref();
    if !src.is_dir() {
        return Err(Error::RootNotFound(src.into()));
    }
    ensure_empty_dir(dst)?;
    copy_tree(src, dst)?;

    let description = match rule {
        RuleId::S001 => {
            remove(&dst.join(".vids"))?;
            "deleted the .vids marker".to_string()
        }
        RuleId::S002 => {
            edit_json(&dst.join("dataset_description.json"), |v| {
                v["License"] = Value::String(String::new());
            })?;
            "blanked the License field in dataset_description.json".to_string()
        }
        RuleId::S003 => {
            let json = dst.join("participants.json");
            let tsv = dst.join("participants.tsv");
            if json.is_file() {
                remove(&json)?;
            }
            if tsv.is_file() {
                remove(&tsv)?;
            }
            "deleted the participants registry".to_string()
        }
        RuleId::S004 => {
            remove(&dst.join("README.md"))?;
            "deleted README.md".to_string()
        }
        RuleId::S005 => {
            let renamed = rename_prefix_dirs(dst, "sub-")?;
            let splits = dst.join("ml/splits.json");
            if splits.is_file() {
                edit_json(&splits, |v| {
                    v["Train"] = json!([]);
                    v["Val"] = json!([]);
                    v["Test"] = json!([]);
                })?;
            }
            format!(
                "renamed {} subject directories to invalid prefixes (split lists emptied to keep \
                 M002 self-consistent)",
                renamed.len()
            )
        }
        RuleId::S006 => {
            let index = crate::validator::scan_dataset(dst)?;
            let subject = index
                .subjects
                .first()
                .ok_or_else(|| Error::BadConfig("fixture has no subjects".into()))?;
            let renamed = rename_prefix_dirs(&dst.join(&subject.dir_name), "ses-")?;
            format!(
                "renamed session directories {renamed:?} of {} to invalid prefixes",
                subject.dir_name
            )
        }
        RuleId::I001 => {
            let image = first_image(dst)?;
            remove(&image)?;
            format!("deleted image {} (sidecar kept)", image.display())
        }
        RuleId::I002 => {
            let image = first_image(dst)?;
            let sidecar = image.to_string_lossy().replace(".nii.gz", ".json");
            remove(Path::new(&sidecar))?;
            format!("deleted imaging sidecar {sidecar}")
        }
        RuleId::I003 => {
            let image = first_image(dst)?;
            let sidecar = image.to_string_lossy().replace(".nii.gz", ".json");
            write_text(Path::new(&sidecar), "{ this is not valid json\n")?;
            format!("corrupted imaging sidecar {sidecar}")
        }
        RuleId::I004 => {
            let image = first_image(dst)?;
            let image_name = image.file_name().unwrap().to_string_lossy().into_owned();
            let dir = image.parent().unwrap().to_path_buf();
            let old_stem = image_name.trim_end_matches(".nii.gz").to_string();
            let new_stem = old_stem.replace("_img", "_badsuffix");
            fs::rename(&image, dir.join(format!("{new_stem}.nii.gz")))
                .map_err(|e| Error::io(&image, e))?;
            let old_sidecar = dir.join(format!("{old_stem}.json"));
            fs::rename(&old_sidecar, dir.join(format!("{new_stem}.json")))
                .map_err(|e| Error::io(&old_sidecar, e))?;
            format!("renamed {old_stem} image and sidecar to grammar-violating stem {new_stem}")
        }
        RuleId::A001 => {
            remove(&dst.join("derivatives/annotations"))?;
            "deleted derivatives/annotations/".to_string()
        }
        RuleId::A002 => {
            let index = crate::validator::scan_dataset(dst)?;
            let mut deleted = 0;
            for annotation in &index.annotations {
                remove(&dst.join(&annotation.seg_rel))?;
                deleted += 1;
            }
            if deleted == 0 {
                return Err(Error::BadConfig("fixture has no segmentation files".into()));
            }
            format!("deleted all {deleted} segmentation files (sidecars kept)")
        }
        RuleId::A003 => {
            let sidecar = first_annotation_sidecar(dst)?;
            remove(&sidecar)?;
            format!("deleted annotation sidecar {}", sidecar.display())
        }
        RuleId::A004 => {
            let sidecar = first_annotation_sidecar(dst)?;
            edit_json(&sidecar, |v| {
                if let Some(obj) = v.as_object_mut() {
                    obj.remove("VIDSVersion");
                }
            })?;
            format!("removed VIDSVersion from {}", sidecar.display())
        }
        RuleId::A005 => {
            let sidecar = first_annotation_sidecar(dst)?;
            edit_json(&sidecar, |v| {
                if let Some(annotator) = v
                    .pointer_mut("/Provenance/Annotator")
                    .and_then(Value::as_object_mut)
                {
                    annotator.remove("ID");
                    annotator.remove("Name");
                }
            })?;
            format!("removed annotator ID and Name from {}", sidecar.display())
        }
        RuleId::Q001 => {
            remove(&dst.join("quality"))?;
            "deleted quality/".to_string()
        }
        RuleId::Q002 => {
            remove(&dst.join("quality/quality_summary.json"))?;
            "deleted quality/quality_summary.json".to_string()
        }
        RuleId::Q003 => {
            remove(&dst.join("quality/annotation_agreement.json"))?;
            "deleted quality/annotation_agreement.json".to_string()
        }
        RuleId::M001 => {
            remove(&dst.join("ml"))?;
            "deleted ml/".to_string()
        }
        RuleId::M002 => {
            let mut duplicated = String::new();
            edit_json(&dst.join("ml/splits.json"), |v| {
                let first_train = v["Train"]
                    .as_array()
                    .and_then(|a| a.first())
                    .and_then(Value::as_str)
                    .map(str::to_string);
                if let (Some(subject), Some(test)) = (first_train, v["Test"].as_array_mut()) {
                    test.push(Value::String(subject.clone()));
                    duplicated = subject;
                }
            })?;
            if duplicated.is_empty() {
                return Err(Error::BadConfig("splits.json has no train subjects".into()));
            }
            format!("duplicated subject {duplicated} from train into test in ml/splits.json")
        }
        RuleId::D001 => {
            remove(&dst.join("CHANGES.md"))?;
            "deleted CHANGES.md".to_string()
        }
    };
    Ok(description)
}
