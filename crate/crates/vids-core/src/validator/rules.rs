//! The 21 rule checks, each a pure function of the scanned index.
//!
//! Rules that examine the contents of a parent artifact (A002+ under the
//! annotations tree, Q002/Q003 under quality/, M002 under ml/) pass with an
//! explanatory message when that parent is missing: the missing parent is
//! exactly one rule's finding, and cascading the failure would break
//! single-fault isolation.

use crate::model::{
    provenance_minimum_ok, DatasetDescription, Profile, RuleId, RuleOutcome, RuleResult,
    VidsMarker,
};

use super::{
    AnnotationSidecarState, ArtifactState, DatasetIndex, ParticipantsState, ReadmeState,
    SidecarState,
};

pub(super) fn evaluate(index: &DatasetIndex, profile: Profile, defaulted: bool) -> Vec<RuleResult> {
    RuleId::ALL
        .into_iter()
        .map(|id| {
            if id.full_only() && profile == Profile::Poc {
                return RuleResult::new(id, RuleOutcome::Skip, "Full profile only");
            }
            match id {
                RuleId::S001 => s001(index, defaulted),
                RuleId::S002 => s002(index),
                RuleId::S003 => s003(index),
                RuleId::S004 => s004(index),
                RuleId::S005 => s005(index),
                RuleId::S006 => s006(index),
                RuleId::I001 => i001(index),
                RuleId::I002 => i002(index),
                RuleId::I003 => i003(index),
                RuleId::I004 => i004(index),
                RuleId::A001 => a001(index),
                RuleId::A002 => a002(index),
                RuleId::A003 => a003(index),
                RuleId::A004 => a004(index),
                RuleId::A005 => a005(index),
                RuleId::Q001 => q001(index),
                RuleId::Q002 => q002(index),
                RuleId::Q003 => q003(index),
                RuleId::M001 => m001(index),
                RuleId::M002 => m002(index),
                RuleId::D001 => d001(index),
            }
        })
        .collect()
}

fn pass(id: RuleId, message: impl Into<String>) -> RuleResult {
    RuleResult::new(id, RuleOutcome::Pass, message)
}

fn fail(id: RuleId, message: impl Into<String>, evidence: Vec<String>) -> RuleResult {
    RuleResult::new(id, RuleOutcome::Fail, message).with_evidence(evidence)
}

fn s001(index: &DatasetIndex, defaulted: bool) -> RuleResult {
    match &index.marker {
        ArtifactState::Parsed(VidsMarker { profile, .. }) => {
            pass(RuleId::S001, format!("marker present (profile {profile})"))
        }
        ArtifactState::Unparsable { error } => fail(
            RuleId::S001,
            format!(".vids marker does not parse: {error}"),
            vec![".vids".into()],
        ),
        ArtifactState::Missing => {
            let mut message = String::from(".vids marker missing at dataset root");
            if defaulted {
                message.push_str("; profile defaulted to poc");
            }
            fail(RuleId::S001, message, vec![".vids".into()])
        }
    }
}

fn s002(index: &DatasetIndex) -> RuleResult {
    const FILE: &str = "dataset_description.json";
    match &index.description {
        ArtifactState::Missing => fail(
            RuleId::S002,
            format!("{FILE} missing"),
            vec![FILE.into()],
        ),
        ArtifactState::Unparsable { error } => fail(
            RuleId::S002,
            format!("{FILE} does not parse: {error}"),
            vec![FILE.into()],
        ),
        ArtifactState::Parsed(desc) => {
            let missing = DatasetDescription::missing_required_fields(desc);
            if missing.is_empty() {
                pass(RuleId::S002, "all 6 required fields present")
            } else {
                fail(
                    RuleId::S002,
                    format!("required fields missing or empty: {}", missing.join(", ")),
                    vec![FILE.into()],
                )
            }
        }
    }
}

fn s003(index: &DatasetIndex) -> RuleResult {
    match &index.participants {
        ParticipantsState::Json { ok: true, .. } => pass(RuleId::S003, "participants.json present"),
        ParticipantsState::Tsv { ok: true } => pass(RuleId::S003, "participants.tsv present"),
        ParticipantsState::Json { error, .. } => fail(
            RuleId::S003,
            format!(
                "participants.json invalid: {}",
                error.as_deref().unwrap_or("unreadable")
            ),
            vec!["participants.json".into()],
        ),
        ParticipantsState::Tsv { ok: false } => fail(
            RuleId::S003,
            "participants.tsv unreadable or empty",
            vec!["participants.tsv".into()],
        ),
        ParticipantsState::Missing => fail(
            RuleId::S003,
            "neither participants.json nor participants.tsv found",
            vec!["participants.json".into()],
        ),
    }
}

fn s004(index: &DatasetIndex) -> RuleResult {
    match index.readme {
        ReadmeState::Present => pass(RuleId::S004, "README.md present"),
        ReadmeState::Empty => fail(
            RuleId::S004,
            "README.md is empty",
            vec!["README.md".into()],
        ),
        ReadmeState::Missing => fail(
            RuleId::S004,
            "README.md missing",
            vec!["README.md".into()],
        ),
    }
}

fn s005(index: &DatasetIndex) -> RuleResult {
    if index.subjects.is_empty() {
        fail(
            RuleId::S005,
            "no sub-* directories with valid ids found at dataset root",
            vec![".".into()],
        )
    } else {
        pass(RuleId::S005, format!("{} subjects", index.subjects.len()))
    }
}

fn s006(index: &DatasetIndex) -> RuleResult {
    let offenders: Vec<String> = index
        .subjects
        .iter()
        .filter(|s| s.sessions.is_empty())
        .map(|s| s.dir_name.clone())
        .collect();
    if offenders.is_empty() {
        pass(
            RuleId::S006,
            format!("{} subjects, all with sessions", index.subjects.len()),
        )
    } else {
        fail(
            RuleId::S006,
            format!("{} subject(s) without a valid ses-* directory", offenders.len()),
            offenders,
        )
    }
}

fn i001(index: &DatasetIndex) -> RuleResult {
    let offenders: Vec<String> = index
        .subjects
        .iter()
        .filter(|s| s.recursive_nifti_count == 0)
        .map(|s| s.dir_name.clone())
        .collect();
    if offenders.is_empty() {
        let total: usize = index.subjects.iter().map(|s| s.recursive_nifti_count).sum();
        pass(RuleId::I001, format!("{total} NIfTI files across subjects"))
    } else {
        fail(
            RuleId::I001,
            format!("{} subject(s) without any .nii.gz file", offenders.len()),
            offenders,
        )
    }
}

fn i002(index: &DatasetIndex) -> RuleResult {
    let mut missing = Vec::new();
    let mut images = 0usize;
    for subject in &index.subjects {
        for session in &subject.sessions {
            for modality in &session.modalities {
                for image in &modality.images {
                    images += 1;
                    if image.sidecar == SidecarState::Missing {
                        missing.push(image.sidecar_rel.clone());
                    }
                }
            }
        }
    }
    if missing.is_empty() {
        pass(
            RuleId::I002,
            format!("{images} imaging files, {images} sidecars"),
        )
    } else {
        fail(
            RuleId::I002,
            format!("{} image(s) without a sidecar", missing.len()),
            missing,
        )
    }
}

fn i003(index: &DatasetIndex) -> RuleResult {
    let mut offenders = Vec::new();
    let mut checked = 0usize;
    for subject in &index.subjects {
        for session in &subject.sessions {
            for modality in &session.modalities {
                for image in &modality.images {
                    match &image.sidecar {
                        SidecarState::Object => checked += 1,
                        SidecarState::Missing => {}
                        SidecarState::NotAnObject | SidecarState::Unparsable { .. } => {
                            offenders.push(image.sidecar_rel.clone());
                        }
                    }
                }
            }
        }
    }
    if offenders.is_empty() {
        pass(RuleId::I003, format!("{checked} sidecars parse as JSON objects"))
    } else {
        fail(
            RuleId::I003,
            format!("{} sidecar(s) invalid", offenders.len()),
            offenders,
        )
    }
}

fn i004(index: &DatasetIndex) -> RuleResult {
    if index.naming_violations.is_empty() {
        return pass(RuleId::I004, "naming convention satisfied");
    }
    let evidence: Vec<String> = index
        .naming_violations
        .iter()
        .map(|v| v.path_rel.clone())
        .collect();
    let detail = index
        .naming_violations
        .iter()
        .map(|v| format!("{}: {}", v.path_rel, v.detail))
        .collect::<Vec<_>>()
        .join("; ");
    RuleResult::new(
        RuleId::I004,
        RuleOutcome::Warn,
        format!("{} naming violation(s): {detail}", evidence.len()),
    )
    .with_evidence(evidence)
}

fn a001(index: &DatasetIndex) -> RuleResult {
    if index.annotations_dir_present {
        pass(RuleId::A001, "derivatives/annotations/ present")
    } else {
        fail(
            RuleId::A001,
            "derivatives/annotations/ missing",
            vec!["derivatives/annotations".into()],
        )
    }
}

fn a002(index: &DatasetIndex) -> RuleResult {
    if !index.annotations_dir_present {
        return pass(
            RuleId::A002,
            "not evaluated: derivatives/annotations/ missing (reported by A001)",
        );
    }
    if index.annotations.is_empty() {
        fail(
            RuleId::A002,
            "no *_seg.nii.gz files under derivatives/annotations/",
            vec!["derivatives/annotations".into()],
        )
    } else {
        pass(
            RuleId::A002,
            format!("{} segmentation files", index.annotations.len()),
        )
    }
}

fn a003(index: &DatasetIndex) -> RuleResult {
    let missing: Vec<String> = index
        .annotations
        .iter()
        .filter(|a| a.sidecar == AnnotationSidecarState::Missing)
        .map(|a| a.sidecar_rel.clone())
        .collect();
    if missing.is_empty() {
        pass(
            RuleId::A003,
            format!("{} annotation sidecars present", index.annotations.len()),
        )
    } else {
        fail(
            RuleId::A003,
            format!("{} segmentation(s) without a sidecar", missing.len()),
            missing,
        )
    }
}

fn a004(index: &DatasetIndex) -> RuleResult {
    let mut offenders = Vec::new();
    for annotation in &index.annotations {
        match &annotation.sidecar {
            AnnotationSidecarState::Missing => {}
            AnnotationSidecarState::Unparsable { .. } => {
                offenders.push(annotation.sidecar_rel.clone());
            }
            AnnotationSidecarState::Parsed(sidecar) => {
                let has_version = sidecar
                    .vids_version
                    .as_deref()
                    .is_some_and(|v| !v.trim().is_empty());
                if !has_version {
                    offenders.push(annotation.sidecar_rel.clone());
                }
            }
        }
    }
    if offenders.is_empty() {
        pass(RuleId::A004, "annotation sidecars valid with VIDSVersion")
    } else {
        fail(
            RuleId::A004,
            format!("{} sidecar(s) unparsable or missing VIDSVersion", offenders.len()),
            offenders,
        )
    }
}

fn a005(index: &DatasetIndex) -> RuleResult {
    let mut offenders = Vec::new();
    let mut segs = 0usize;
    for annotation in &index.annotations {
        segs += 1;
        if let AnnotationSidecarState::Parsed(sidecar) = &annotation.sidecar {
            let ok = sidecar
                .provenance
                .as_ref()
                .is_some_and(provenance_minimum_ok);
            if !ok {
                offenders.push(annotation.sidecar_rel.clone());
            }
        }
    }
    if offenders.is_empty() {
        pass(
            RuleId::A005,
            format!("{segs} segmentation files, provenance complete"),
        )
    } else {
        fail(
            RuleId::A005,
            format!(
                "{} sidecar(s) below the provenance minimum (annotator ID or Name, plus date or tool)",
                offenders.len()
            ),
            offenders,
        )
    }
}

fn q001(index: &DatasetIndex) -> RuleResult {
    if index.quality.dir_present {
        pass(RuleId::Q001, "quality/ present")
    } else {
        fail(RuleId::Q001, "quality/ missing", vec!["quality".into()])
    }
}

fn q002(index: &DatasetIndex) -> RuleResult {
    const FILE: &str = "quality/quality_summary.json";
    if !index.quality.dir_present {
        return pass(RuleId::Q002, "not evaluated: quality/ missing (reported by Q001)");
    }
    match &index.quality.summary {
        ArtifactState::Parsed(()) => pass(RuleId::Q002, "quality summary present"),
        ArtifactState::Missing => fail(RuleId::Q002, format!("{FILE} missing"), vec![FILE.into()]),
        ArtifactState::Unparsable { error } => fail(
            RuleId::Q002,
            format!("{FILE} does not parse: {error}"),
            vec![FILE.into()],
        ),
    }
}

fn q003(index: &DatasetIndex) -> RuleResult {
    const FILE: &str = "quality/annotation_agreement.json";
    if !index.quality.dir_present {
        return pass(RuleId::Q003, "not evaluated: quality/ missing (reported by Q001)");
    }
    match &index.quality.agreement {
        ArtifactState::Parsed(()) => pass(RuleId::Q003, "quality summary + agreement"),
        ArtifactState::Missing => fail(RuleId::Q003, format!("{FILE} missing"), vec![FILE.into()]),
        ArtifactState::Unparsable { error } => fail(
            RuleId::Q003,
            format!("{FILE} does not parse: {error}"),
            vec![FILE.into()],
        ),
    }
}

fn m001(index: &DatasetIndex) -> RuleResult {
    if index.ml.dir_present {
        pass(RuleId::M001, "ml/ present")
    } else {
        fail(RuleId::M001, "ml/ missing", vec!["ml".into()])
    }
}

fn m002(index: &DatasetIndex) -> RuleResult {
    const FILE: &str = "ml/splits.json";
    if !index.ml.dir_present {
        return pass(RuleId::M002, "not evaluated: ml/ missing (reported by M001)");
    }
    match &index.ml.splits {
        ArtifactState::Missing => fail(RuleId::M002, format!("{FILE} missing"), vec![FILE.into()]),
        ArtifactState::Unparsable { error } => fail(
            RuleId::M002,
            format!("{FILE} does not parse: {error}"),
            vec![FILE.into()],
        ),
        ArtifactState::Parsed(lists) => {
            use std::collections::BTreeMap;
            let known: std::collections::BTreeSet<&str> =
                index.subjects.iter().map(|s| s.id.as_str()).collect();
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for id in lists.train.iter().chain(&lists.val).chain(&lists.test) {
                *counts.entry(id.as_str()).or_default() += 1;
            }
            let mut problems = Vec::new();
            let mut evidence = Vec::new();
            for (&id, &count) in &counts {
                if count > 1 {
                    problems.push(format!("subject {id} assigned to multiple splits"));
                    evidence.push(id.to_string());
                }
                if !known.contains(id) {
                    problems.push(format!("subject {id} not found in the dataset"));
                    evidence.push(id.to_string());
                }
            }
            if problems.is_empty() {
                pass(RuleId::M002, "splits.json")
            } else {
                evidence.dedup();
                fail(RuleId::M002, problems.join("; "), evidence)
            }
        }
    }
}

fn d001(index: &DatasetIndex) -> RuleResult {
    if index.changes_present {
        pass(RuleId::D001, "CHANGES.md present")
    } else {
        RuleResult::new(RuleId::D001, RuleOutcome::Warn, "CHANGES.md absent")
            .with_evidence(vec!["CHANGES.md".into()])
    }
}
