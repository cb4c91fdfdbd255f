//! Validator behavior on real trees: scan fidelity, error containment,
//! profile resolution, determinism, and profile monotonicity.

use std::fs;
use std::path::Path;

use vids_core::error::Error;
use vids_core::model::{Profile, ReportStatus, RuleId, RuleOutcome};
use vids_core::scaffold::{generate_fixture, mutate_fixture, scaffold_dataset, FixtureConfig};
use vids_core::validator::{scan_dataset, validate, ArtifactState, SidecarState};

fn full_fixture(root: &Path, subjects: u32) {
    let mut config = FixtureConfig::new(subjects);
    config.profile = Profile::Full;
    generate_fixture(root, &config).unwrap();
}

#[test]
fn scan_rejects_bad_roots() {
    assert!(matches!(
        scan_dataset("/no/such/dataset/root"),
        Err(Error::RootNotFound(_))
    ));
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("file");
    fs::write(&file, "x").unwrap();
    assert!(matches!(
        scan_dataset(&file),
        Err(Error::RootNotDirectory(_))
    ));
}

#[test]
fn scan_of_empty_directory_is_a_valid_empty_index() {
    let dir = tempfile::tempdir().unwrap();
    let index = scan_dataset(dir.path()).unwrap();
    assert!(index.subjects.is_empty());
    assert_eq!(index.marker, ArtifactState::Missing);
    assert!(!index.annotations_dir_present);
    assert!(index.naming_violations.is_empty());
}

#[test]
fn scan_captures_the_reference_layout() {
    // One subject, one session, modality ct, image + sidecar, one
    // annotation + sidecar: the standard's canonical directory layout.
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("ds");
    scaffold_dataset(&root, &FixtureConfig::new(1)).unwrap();

    let index = scan_dataset(&root).unwrap();
    assert_eq!(index.subjects.len(), 1);
    let subject = &index.subjects[0];
    assert_eq!(subject.id, "001");
    assert_eq!(subject.sessions.len(), 1);
    assert_eq!(subject.sessions[0].id, "baseline");
    assert_eq!(subject.sessions[0].modalities.len(), 1);
    let modality = &subject.sessions[0].modalities[0];
    assert_eq!(modality.name, "ct");
    assert_eq!(modality.images.len(), 1);
    assert_eq!(modality.images[0].sidecar, SidecarState::Object);
    assert_eq!(index.annotations.len(), 1);
    assert_eq!(index.annotations[0].subject_id, "001");
    assert!(index.marker.parsed().is_some());
}

#[test]
fn scan_contains_unreadable_sidecars_without_aborting() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("ds");
    scaffold_dataset(&root, &FixtureConfig::new(2)).unwrap();
    let sidecar = root.join("sub-001/ses-baseline/ct/sub-001_ses-baseline_ct_img.json");
    fs::write(&sidecar, "{ broken").unwrap();

    let index = scan_dataset(&root).unwrap();
    let image = &index.subjects[0].sessions[0].modalities[0].images[0];
    assert!(matches!(image.sidecar, SidecarState::Unparsable { .. }));
    // The rest of the scan is unaffected.
    assert_eq!(index.subjects.len(), 2);
    assert_eq!(
        index.subjects[1].sessions[0].modalities[0].images[0].sidecar,
        SidecarState::Object
    );

    let report = validate(&root, None).unwrap();
    assert_eq!(report.outcome(RuleId::I003), Some(RuleOutcome::Fail));
    assert_eq!(report.outcome(RuleId::I002), Some(RuleOutcome::Pass));
}

#[test]
fn missing_marker_defaults_to_poc_and_fails_s001() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("ds");
    scaffold_dataset(&root, &FixtureConfig::new(1)).unwrap();
    fs::remove_file(root.join(".vids")).unwrap();

    let report = validate(&root, None).unwrap();
    assert_eq!(report.profile, Profile::Poc);
    assert_eq!(report.outcome(RuleId::S001), Some(RuleOutcome::Fail));
    let s001 = report.results.iter().find(|r| r.id == RuleId::S001).unwrap();
    assert!(s001.message.contains("defaulted to poc"), "got: {}", s001.message);
    // Full-only rules skip under the defaulted profile.
    assert_eq!(report.outcome(RuleId::Q001), Some(RuleOutcome::Skip));

    // An explicit override suppresses the default note.
    let report = validate(&root, Some(Profile::Full)).unwrap();
    assert_eq!(report.profile, Profile::Full);
    let s001 = report.results.iter().find(|r| r.id == RuleId::S001).unwrap();
    assert!(!s001.message.contains("defaulted"));
}

#[test]
fn id_mismatch_between_file_and_directories_warns_i004() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("ds");
    scaffold_dataset(&root, &FixtureConfig::new(2)).unwrap();
    // Rename subject 002's files to claim subject 001; grammar stays valid.
    let mod_dir = root.join("sub-002/ses-baseline/ct");
    for ext in ["nii.gz", "json"] {
        fs::rename(
            mod_dir.join(format!("sub-002_ses-baseline_ct_img.{ext}")),
            mod_dir.join(format!("sub-001_ses-baseline_ct_img.{ext}")),
        )
        .unwrap();
    }

    let report = validate(&root, None).unwrap();
    assert_eq!(report.outcome(RuleId::I004), Some(RuleOutcome::Warn));
    assert_eq!(report.status(), ReportStatus::Pass, "naming issues warn, not fail");
    let i004 = report.results.iter().find(|r| r.id == RuleId::I004).unwrap();
    assert_eq!(i004.evidence.len(), 2);
    assert!(i004.evidence[0].contains("sub-002/ses-baseline/ct/"));
}

#[test]
fn validation_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("ds");
    full_fixture(&root, 5);
    let a = validate(&root, None).unwrap();
    let b = validate(&root, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn report_survives_json_round_trip_and_status_recomputes() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("ds");
    full_fixture(&root, 3);
    let report = validate(&root, None).unwrap();

    let text = serde_json::to_string(&report).unwrap();
    let back: vids_core::model::ValidationReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);

    // Status is recomputable from results alone.
    let summary = vids_core::model::ValidationReport::summarize(&back.results);
    assert_eq!(summary, report.summary);
}

#[test]
fn lowering_the_profile_never_turns_pass_into_fail() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base");
    full_fixture(&base, 3);

    let mut roots = vec![base.clone()];
    for rule in [RuleId::S002, RuleId::I002, RuleId::A005, RuleId::Q002, RuleId::M002] {
        let dst = dir.path().join(format!("mut_{rule}"));
        mutate_fixture(&base, rule, &dst).unwrap();
        roots.push(dst);
    }

    for root in roots {
        let full = validate(&root, Some(Profile::Full)).unwrap();
        let poc = validate(&root, Some(Profile::Poc)).unwrap();
        for (f, p) in full.results.iter().zip(&poc.results) {
            assert_eq!(f.id, p.id);
            if f.outcome == RuleOutcome::Pass {
                assert!(
                    matches!(p.outcome, RuleOutcome::Pass | RuleOutcome::Skip),
                    "{}: {:?} under full became {:?} under poc",
                    f.id,
                    f.outcome,
                    p.outcome
                );
            }
        }
        // Full-compliant implies POC-compliant.
        if full.status() == ReportStatus::Pass {
            assert_eq!(poc.status(), ReportStatus::Pass);
        }
    }
}

#[test]
fn ignored_directories_and_hidden_files_do_not_affect_results() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("ds");
    full_fixture(&root, 2);
    let baseline = validate(&root, None).unwrap();

    fs::create_dir_all(root.join("code/scripts")).unwrap();
    fs::write(root.join("code/scripts/convert.py"), "print()\n").unwrap();
    fs::create_dir_all(root.join("derivatives/custom-pipeline/sub-001")).unwrap();
    fs::write(root.join("derivatives/custom-pipeline/sub-001/notes.txt"), "x").unwrap();
    fs::write(root.join("sub-001/ses-baseline/ct/.hidden"), "x").unwrap();

    let after = validate(&root, None).unwrap();
    assert_eq!(baseline.results, after.results);
    assert_eq!(after.status(), ReportStatus::Pass);
}

#[test]
fn symlinked_directories_are_never_followed() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("ds");
    full_fixture(&root, 2);
    let outside = dir.path().join("outside");
    fs::create_dir_all(outside.join("ses-evil/ct")).unwrap();
    fs::write(outside.join("ses-evil/ct/junk.nii.gz"), "not a volume").unwrap();
    std::os::unix::fs::symlink(&outside, root.join("sub-999")).unwrap();

    let index = scan_dataset(&root).unwrap();
    assert_eq!(index.subjects.len(), 2, "symlinked subject must be ignored");
    let report = validate(&root, None).unwrap();
    assert_eq!(report.status(), ReportStatus::Pass);
}
