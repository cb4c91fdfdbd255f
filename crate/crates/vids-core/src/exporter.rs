//! Export to downstream layouts without losing provenance: a flat
//! images/labels layout and a training-framework layout with
//! imagesTr/labelsTr/imagesTs split by `ml/splits.json`.
//!
//! Every export writes a `mapping.json` manifest linking case ids back to
//! subject/session/modality, plus a `vids-provenance/` companion holding
//! byte-identical copies of the exported annotation sidecars. Only the first
//! image per subject (lexicographically first session, then modality, then
//! file) is exported; multi-channel stacking is out of scope because channel
//! ordering is unspecified.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil::ensure_empty_dir;
use crate::model::{LabelMap, Profile, ReportStatus, RuleOutcome};
use crate::par;
use crate::validator::{scan_dataset, validate_index, DatasetIndex};

/// One exported case in `mapping.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(rename = "CaseId")]
    pub case_id: String,
    #[serde(rename = "Subject")]
    pub subject_id: String,
    #[serde(rename = "Session")]
    pub session_id: String,
    #[serde(rename = "Modality")]
    pub modality: String,
    /// Dataset-relative source path of the exported image.
    #[serde(rename = "ImageSource")]
    pub image_source: String,
    /// Dataset-relative source path of the segmentation, when one exists.
    #[serde(rename = "LabelSource", skip_serializing_if = "Option::is_none")]
    pub label_source: Option<String>,
    /// Split membership, recorded for training-framework exports (val
    /// subjects land in the Tr folder but keep their split here).
    #[serde(rename = "Split", skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
}

/// `mapping.json`: the case-to-subject manifest of an export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportManifest {
    #[serde(rename = "Layout")]
    pub layout: String,
    #[serde(rename = "TaskName", skip_serializing_if = "Option::is_none")]
    pub task_name: Option<String>,
    #[serde(rename = "Entries")]
    pub entries: Vec<ManifestEntry>,
}

/// Task descriptor for the training-framework layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDescriptor {
    #[serde(rename = "VIDSVersion")]
    pub vids_version: String,
    #[serde(rename = "Name")]
    pub name: String,
    #[serde(rename = "Modalities")]
    pub modalities: Vec<String>,
    #[serde(rename = "LabelMap", skip_serializing_if = "Option::is_none")]
    pub label_map: Option<LabelMap>,
}

/// Exported case before copying: all source/destination paths resolved.
struct CasePlan {
    entry: ManifestEntry,
    image_src: PathBuf,
    image_dst: PathBuf,
    label_src: Option<PathBuf>,
    label_dst: Option<PathBuf>,
    sidecar_src: Option<PathBuf>,
    sidecar_dst: Option<PathBuf>,
}

fn require_validation(index: &DatasetIndex, profile: Profile) -> Result<()> {
    let report = validate_index(index, Some(profile));
    if report.status() == ReportStatus::Fail {
        let failing: Vec<String> = report
            .results
            .iter()
            .filter(|r| r.outcome == RuleOutcome::Fail)
            .map(|r| r.id.to_string())
            .collect();
        return Err(Error::ValidationRequired {
            profile: profile.to_string(),
            detail: format!("failing rules: {}", failing.join(", ")),
        });
    }
    Ok(())
}

/// First image per subject plus its matching segmentation and sidecar.
fn plan_cases(
    index: &DatasetIndex,
    make_paths: impl Fn(usize, &ManifestEntry) -> (PathBuf, Option<PathBuf>, Option<PathBuf>),
) -> Vec<CasePlan> {
    let root = &index.root;
    let mut plans = Vec::new();
    let mut case_number = 0usize;
    for subject in &index.subjects {
        let Some((session, modality, image)) = subject.sessions.iter().find_map(|session| {
            session.modalities.iter().find_map(|modality| {
                modality
                    .images
                    .first()
                    .map(|image| (session, modality, image))
            })
        }) else {
            continue;
        };
        case_number += 1;
        let case_id = format!("case_{case_number:04}");

        let annotation = index.annotations.iter().find(|a| {
            a.subject_id == subject.id
                && a.session_id == session.id
                && a.modality.eq_ignore_ascii_case(&modality.name)
        });

        let entry = ManifestEntry {
            case_id,
            subject_id: subject.id.clone(),
            session_id: session.id.clone(),
            modality: modality.name.clone(),
            image_source: image.file_rel.clone(),
            label_source: annotation.map(|a| a.seg_rel.clone()),
            split: None,
        };
        // The layout decides where the image goes and whether labels and
        // sidecars are taken at all (test cases get no label file).
        let (image_dst, label_dst, sidecar_dst) = make_paths(case_number, &entry);
        let sidecar_src = annotation
            .map(|a| root.join(&a.sidecar_rel))
            .filter(|p| p.is_file());
        plans.push(CasePlan {
            image_src: root.join(&image.file_rel),
            image_dst,
            label_src: annotation
                .filter(|_| label_dst.is_some())
                .map(|a| root.join(&a.seg_rel)),
            label_dst: label_dst.filter(|_| annotation.is_some()),
            sidecar_dst: if sidecar_src.is_some() { sidecar_dst } else { None },
            sidecar_src,
            entry,
        });
    }
    plans
}

fn run_copies(plans: &[CasePlan]) -> Result<()> {
    let jobs: Vec<(PathBuf, PathBuf)> = plans
        .iter()
        .flat_map(|p| {
            let mut jobs = vec![(p.image_src.clone(), p.image_dst.clone())];
            if let (Some(src), Some(dst)) = (&p.label_src, &p.label_dst) {
                jobs.push((src.clone(), dst.clone()));
            }
            if let (Some(src), Some(dst)) = (&p.sidecar_src, &p.sidecar_dst) {
                jobs.push((src.clone(), dst.clone()));
            }
            jobs
        })
        .collect();
    par::try_map(jobs, |(src, dst)| {
        fs::copy(&src, &dst)
            .map(drop)
            .map_err(|e| Error::io(&src, e))
    })
    .map(drop)
}

fn write_manifest(out: &Path, manifest: &ExportManifest) -> Result<()> {
    crate::fsutil::write_json_pretty(&out.join("mapping.json"), manifest)
}

/// Exports to the flat layout: `images/case_NNNN.nii.gz`, matching
/// `labels/`, `mapping.json`, and `vids-provenance/`. Requires the source to
/// pass POC validation; the source tree is never modified.
pub fn export_flat(dataset_root: impl AsRef<Path>, out_root: impl AsRef<Path>) -> Result<ExportManifest> {
    let index = scan_dataset(dataset_root)?;
    require_validation(&index, Profile::Poc)?;
    let out = out_root.as_ref();
    ensure_empty_dir(out)?;
    for sub in ["images", "labels", "vids-provenance"] {
        fs::create_dir_all(out.join(sub)).map_err(|e| Error::io(out, e))?;
    }

    let plans = plan_cases(&index, |_, entry| {
        (
            out.join("images").join(format!("{}.nii.gz", entry.case_id)),
            Some(out.join("labels").join(format!("{}.nii.gz", entry.case_id))),
            Some(out.join("vids-provenance").join(format!("{}.json", entry.case_id))),
        )
    });
    run_copies(&plans)?;

    let manifest = ExportManifest {
        layout: "flat".to_string(),
        task_name: None,
        entries: plans.into_iter().map(|p| p.entry).collect(),
    };
    write_manifest(out, &manifest)?;
    Ok(manifest)
}

#[derive(Debug, Deserialize)]
struct SplitMembership {
    #[serde(rename = "Train", default)]
    train: Vec<String>,
    #[serde(rename = "Val", default)]
    val: Vec<String>,
    #[serde(rename = "Test", default)]
    test: Vec<String>,
}

impl SplitMembership {
    fn of(&self, subject: &str) -> Option<&'static str> {
        if self.train.iter().any(|s| s == subject) {
            Some("train")
        } else if self.val.iter().any(|s| s == subject) {
            Some("val")
        } else if self.test.iter().any(|s| s == subject) {
            Some("test")
        } else {
            None
        }
    }
}

/// Exports to the training-framework layout: channel-suffixed images under
/// `imagesTr`/`imagesTs`, labels under `labelsTr`, a task descriptor, and
/// the same mapping/provenance companions.
///
/// Train and val subjects land in Tr (frameworks re-split internally); the
/// manifest records the original split. Subjects absent from every split
/// list are not exported.
pub fn export_training_layout(
    dataset_root: impl AsRef<Path>,
    out_root: impl AsRef<Path>,
    task_name: &str,
) -> Result<ExportManifest> {
    let index = scan_dataset(dataset_root)?;
    require_validation(&index, Profile::Full)?;

    let splits_path = index.root.join("ml/splits.json");
    let splits_text = fs::read_to_string(&splits_path)
        .map_err(|e| Error::MissingSplits(format!("{}: {e}", splits_path.display())))?;
    let membership: SplitMembership = serde_json::from_str(&splits_text)
        .map_err(|e| Error::MissingSplits(format!("{}: {e}", splits_path.display())))?;

    let out = out_root.as_ref();
    ensure_empty_dir(out)?;
    for sub in ["imagesTr", "labelsTr", "imagesTs", "vids-provenance"] {
        fs::create_dir_all(out.join(sub)).map_err(|e| Error::io(out, e))?;
    }

    let mut plans = plan_cases(&index, |case_number, entry| {
        let split = membership.of(&entry.subject_id);
        let images_dir = match split {
            Some("test") => "imagesTs",
            _ => "imagesTr",
        };
        let image_dst = out
            .join(images_dir)
            .join(format!("{task_name}_{case_number:04}_0000.nii.gz"));
        let label_dst = match split {
            Some("test") | None => None,
            _ => Some(out.join("labelsTr").join(format!("{task_name}_{case_number:04}.nii.gz"))),
        };
        let sidecar_dst = out.join("vids-provenance").join(format!("{}.json", entry.case_id));
        (image_dst, label_dst, Some(sidecar_dst))
    });

    // Attach split labels, dropping subjects outside every list.
    plans.retain_mut(|plan| match membership.of(&plan.entry.subject_id) {
        Some(split) => {
            plan.entry.split = Some(split.to_string());
            true
        }
        None => false,
    });
    run_copies(&plans)?;

    // Representative label map from the first parsed annotation sidecar.
    let label_map = index.annotations.iter().find_map(|a| match &a.sidecar {
        crate::validator::AnnotationSidecarState::Parsed(s) => s.label_map.clone(),
        _ => None,
    });
    let mut modalities: Vec<String> = plans.iter().map(|p| p.entry.modality.clone()).collect();
    modalities.sort_unstable();
    modalities.dedup();
    crate::fsutil::write_json_pretty(
        &out.join("dataset.json"),
        &TaskDescriptor {
            vids_version: crate::model::VIDS_VERSION.to_string(),
            name: task_name.to_string(),
            modalities,
            label_map,
        },
    )?;

    let manifest = ExportManifest {
        layout: "training-framework".to_string(),
        task_name: Some(task_name.to_string()),
        entries: plans.into_iter().map(|p| p.entry).collect(),
    };
    write_manifest(out, &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaffold::{generate_fixture, scaffold_dataset, FixtureConfig};

    #[test]
    fn flat_export_counts_and_traceability() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("ds");
        scaffold_dataset(&root, &FixtureConfig::new(3)).unwrap();
        let out = dir.path().join("flat");
        let manifest = export_flat(&root, &out).unwrap();

        assert_eq!(manifest.layout, "flat");
        assert_eq!(manifest.entries.len(), 3);
        assert_eq!(manifest.entries[0].case_id, "case_0001");
        // Lexicographic subject order.
        let subjects: Vec<&str> = manifest.entries.iter().map(|e| e.subject_id.as_str()).collect();
        assert_eq!(subjects, ["001", "002", "003"]);

        for entry in &manifest.entries {
            assert!(out.join("images").join(format!("{}.nii.gz", entry.case_id)).is_file());
            assert!(out.join("labels").join(format!("{}.nii.gz", entry.case_id)).is_file());
            let provenance = out.join("vids-provenance").join(format!("{}.json", entry.case_id));
            let source = root.join(entry.label_source.as_ref().unwrap().replace("_seg.nii.gz", "_seg.json"));
            assert_eq!(
                std::fs::read(&provenance).unwrap(),
                std::fs::read(&source).unwrap(),
                "provenance copy differs for {}",
                entry.case_id
            );
        }

        // Manifest round-trips from disk.
        let loaded: ExportManifest =
            serde_json::from_str(&std::fs::read_to_string(out.join("mapping.json")).unwrap())
                .unwrap();
        assert_eq!(loaded, manifest);
    }

    #[test]
    fn flat_export_requires_poc_pass() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("ds");
        scaffold_dataset(&root, &FixtureConfig::new(1)).unwrap();
        std::fs::remove_file(root.join("README.md")).unwrap();
        let out = dir.path().join("flat");
        match export_flat(&root, &out) {
            Err(Error::ValidationRequired { profile, detail }) => {
                assert_eq!(profile, "poc");
                assert!(detail.contains("S004"));
            }
            other => panic!("expected ValidationRequired, got {other:?}"),
        }
    }

    #[test]
    fn training_export_respects_splits() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("ds");
        let mut config = FixtureConfig::new(10);
        config.profile = crate::model::Profile::Full;
        generate_fixture(&root, &config).unwrap();
        let out = dir.path().join("task");
        let manifest = export_training_layout(&root, &out, "Lung").unwrap();

        assert_eq!(manifest.entries.len(), 10);
        let tr = std::fs::read_dir(out.join("imagesTr")).unwrap().count();
        let ts = std::fs::read_dir(out.join("imagesTs")).unwrap().count();
        let labels = std::fs::read_dir(out.join("labelsTr")).unwrap().count();
        assert_eq!(tr, 9); // 7 train + 2 val
        assert_eq!(ts, 1);
        assert_eq!(labels, 9);
        assert_eq!(
            manifest.entries.iter().filter(|e| e.split.as_deref() == Some("test")).count(),
            1
        );

        // Descriptor carries the sidecar label map.
        let descriptor: TaskDescriptor =
            serde_json::from_str(&std::fs::read_to_string(out.join("dataset.json")).unwrap())
                .unwrap();
        assert_eq!(descriptor.name, "Lung");
        assert_eq!(descriptor.modalities, vec!["ct".to_string()]);
        let map = descriptor.label_map.unwrap();
        assert_eq!(map.0.get("0").map(String::as_str), Some("background"));
        assert_eq!(map.0.get("1").map(String::as_str), Some("nodule"));

        // Case ids resolve to unique subjects.
        let mut subjects: Vec<&String> = manifest.entries.iter().map(|e| &e.subject_id).collect();
        subjects.sort_unstable();
        subjects.dedup();
        assert_eq!(subjects.len(), manifest.entries.len());
    }

    #[test]
    fn training_export_requires_full_pass() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("ds");
        scaffold_dataset(&root, &FixtureConfig::new(2)).unwrap();
        // POC skeleton has no quality/ or ml/, so Full validation fails.
        let out = dir.path().join("task");
        assert!(matches!(
            export_training_layout(&root, &out, "Lung"),
            Err(Error::ValidationRequired { .. })
        ));
    }

    #[test]
    fn export_destination_must_be_empty() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("ds");
        scaffold_dataset(&root, &FixtureConfig::new(1)).unwrap();
        let out = dir.path().join("flat");
        std::fs::create_dir_all(out.join("stale")).unwrap();
        assert!(matches!(
            export_flat(&root, &out),
            Err(Error::DestinationNotEmpty(_))
        ));
    }
}
