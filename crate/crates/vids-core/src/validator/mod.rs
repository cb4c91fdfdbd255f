//! Dataset scanner and rule engine: walks a tree into a [`DatasetIndex`],
//! evaluates the 21-rule catalog under a profile, and renders reports.
//!
//! Scanning is tolerant: parse failures are recorded in the index instead of
//! aborting, so rule evaluation stays a pure function of the index. Subjects
//! are scanned in parallel when the `parallel` feature is enabled; the index
//! is sorted afterwards, so output is deterministic either way.

mod render;
mod rules;

pub use render::{render_report, RenderFormat};

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{
    AnnotationSidecar, DatasetDescription, Profile, ValidationReport, VidsMarker,
};
use crate::naming::{matches_location, parse_dir_component, parse_entity_name, DirKind};
use crate::par;

/// State of an optional JSON artifact: absent, unreadable/unparsable, or
/// parsed.
#[derive(Debug, Clone, PartialEq)]
pub enum ArtifactState<T> {
    Missing,
    Unparsable { error: String },
    Parsed(T),
}

impl<T> ArtifactState<T> {
    pub fn parsed(&self) -> Option<&T> {
        match self {
            ArtifactState::Parsed(v) => Some(v),
            _ => None,
        }
    }
}

/// Imaging sidecar parse state (I002/I003).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SidecarState {
    Missing,
    Unparsable { error: String },
    NotAnObject,
    Object,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageEntry {
    /// Dataset-relative path of the `.nii.gz` file.
    pub file_rel: String,
    /// Expected sidecar path (same stem, `.json`).
    pub sidecar_rel: String,
    pub sidecar: SidecarState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModalityEntry {
    pub name: String,
    pub images: Vec<ImageEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionEntry {
    pub id: String,
    pub dir_name: String,
    pub modalities: Vec<ModalityEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubjectEntry {
    pub id: String,
    pub dir_name: String,
    pub sessions: Vec<SessionEntry>,
    /// `.nii.gz` count anywhere under the subject directory, including
    /// files outside recognized session/modality structure.
    pub recursive_nifti_count: usize,
}

/// Annotation sidecar parse state (A003/A004/A005).
#[derive(Debug, Clone, PartialEq)]
pub enum AnnotationSidecarState {
    Missing,
    Unparsable { error: String },
    Parsed(Box<AnnotationSidecar>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationEntry {
    pub subject_id: String,
    pub session_id: String,
    pub modality: String,
    pub seg_rel: String,
    pub sidecar_rel: String,
    pub sidecar: AnnotationSidecarState,
}

/// A file whose name violates the grammar or whose entity IDs disagree with
/// the enclosing directories (I004 evidence).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamingViolation {
    pub path_rel: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParticipantsState {
    Missing,
    /// participants.json: ok means it parses as an object or array.
    Json { ok: bool, error: Option<String> },
    /// participants.tsv: ok means readable with at least one non-empty line.
    Tsv { ok: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadmeState {
    Missing,
    Empty,
    Present,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityFiles {
    pub dir_present: bool,
    pub summary: ArtifactState<()>,
    pub agreement: ArtifactState<()>,
}

/// Lenient mirror of `ml/splits.json`: only the membership lists matter for
/// rule M002.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
pub struct SplitsLists {
    #[serde(rename = "Train", default)]
    pub train: Vec<String>,
    #[serde(rename = "Val", default)]
    pub val: Vec<String>,
    #[serde(rename = "Test", default)]
    pub test: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlFiles {
    pub dir_present: bool,
    pub splits: ArtifactState<SplitsLists>,
}

/// Faithful snapshot of a dataset tree at scan time.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetIndex {
    pub root: PathBuf,
    pub marker: ArtifactState<VidsMarker>,
    pub description: ArtifactState<DatasetDescription>,
    pub participants: ParticipantsState,
    pub readme: ReadmeState,
    pub changes_present: bool,
    pub subjects: Vec<SubjectEntry>,
    pub annotations_dir_present: bool,
    pub annotations: Vec<AnnotationEntry>,
    pub quality: QualityFiles,
    pub ml: MlFiles,
    pub naming_violations: Vec<NamingViolation>,
}

impl DatasetIndex {
    pub fn subject_ids(&self) -> Vec<&str> {
        self.subjects.iter().map(|s| s.id.as_str()).collect()
    }

    pub fn image_count(&self) -> usize {
        self.subjects
            .iter()
            .flat_map(|s| &s.sessions)
            .flat_map(|s| &s.modalities)
            .map(|m| m.images.len())
            .sum()
    }
}

const ANNOTATIONS_DIR: &str = "derivatives/annotations";

fn rel_path(root: &Path, path: &Path) -> String {
    let stripped = path.strip_prefix(root).unwrap_or(path);
    stripped
        .components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Directory entries split into sorted (dirs, files) name lists; symlinks
/// and hidden names are skipped.
fn list_dir(dir: &Path) -> Result<(Vec<String>, Vec<String>)> {
    let mut dirs = Vec::new();
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with('.') {
            continue;
        }
        let file_type = entry.file_type().map_err(|e| Error::io(dir, e))?;
        if file_type.is_symlink() {
            continue;
        }
        if file_type.is_dir() {
            dirs.push(name);
        } else {
            files.push(name);
        }
    }
    dirs.sort_unstable();
    files.sort_unstable();
    Ok((dirs, files))
}

fn read_json_artifact<T: serde::de::DeserializeOwned>(path: &Path) -> ArtifactState<T> {
    if !path.is_file() {
        return ArtifactState::Missing;
    }
    match fs::read_to_string(path) {
        Err(e) => ArtifactState::Unparsable {
            error: e.to_string(),
        },
        Ok(text) => match serde_json::from_str(&text) {
            Ok(v) => ArtifactState::Parsed(v),
            Err(e) => ArtifactState::Unparsable {
                error: e.to_string(),
            },
        },
    }
}

fn count_nifti_recursive(dir: &Path) -> Result<usize> {
    let mut count = 0;
    let (dirs, files) = list_dir(dir)?;
    count += files.iter().filter(|f| f.ends_with(".nii.gz")).count();
    for d in dirs {
        count += count_nifti_recursive(&dir.join(d))?;
    }
    Ok(count)
}

/// Grammar and location checks for one directory of files; appends to
/// `violations`.
fn check_naming(
    root: &Path,
    dir: &Path,
    files: &[String],
    subject_id: &str,
    session_id: &str,
    modality: &str,
    violations: &mut Vec<NamingViolation>,
) {
    for file in files {
        let path_rel = rel_path(root, &dir.join(file));
        match parse_entity_name(file) {
            Err(e) => violations.push(NamingViolation {
                path_rel,
                detail: e.to_string(),
            }),
            Ok(entity) => {
                if !matches_location(&entity, subject_id, session_id, modality) {
                    violations.push(NamingViolation {
                        path_rel,
                        detail: format!(
                            "entity ids (sub-{}, ses-{}, {}) do not match enclosing directories \
                             (sub-{}, ses-{}, {})",
                            entity.subject_id,
                            entity.session_id,
                            entity.modality,
                            subject_id,
                            session_id,
                            modality
                        ),
                    });
                }
            }
        }
    }
}

fn scan_subject(
    root: &Path,
    dir_name: &str,
    subject_id: &str,
) -> Result<(SubjectEntry, Vec<NamingViolation>)> {
    let subject_dir = root.join(dir_name);
    let mut violations = Vec::new();
    let mut sessions = Vec::new();

    let (dirs, _) = list_dir(&subject_dir)?;
    for ses_name in &dirs {
        let Ok(session_id) = parse_dir_component(ses_name, DirKind::Session) else {
            continue;
        };
        let ses_dir = subject_dir.join(ses_name);
        let (mod_dirs, _) = list_dir(&ses_dir)?;
        let mut modalities = Vec::new();
        for mod_name in &mod_dirs {
            let mod_dir = ses_dir.join(mod_name);
            let (_, files) = list_dir(&mod_dir)?;
            check_naming(
                root,
                &mod_dir,
                &files,
                subject_id,
                &session_id,
                mod_name,
                &mut violations,
            );
            let mut images = Vec::new();
            for file in &files {
                if !file.ends_with(".nii.gz") {
                    continue;
                }
                let stem = &file[..file.len() - ".nii.gz".len()];
                let sidecar_name = format!("{stem}.json");
                let sidecar_path = mod_dir.join(&sidecar_name);
                let sidecar = if !sidecar_path.is_file() {
                    SidecarState::Missing
                } else {
                    match fs::read_to_string(&sidecar_path) {
                        Err(e) => SidecarState::Unparsable {
                            error: e.to_string(),
                        },
                        Ok(text) => match serde_json::from_str::<serde_json::Value>(&text) {
                            Ok(serde_json::Value::Object(_)) => SidecarState::Object,
                            Ok(_) => SidecarState::NotAnObject,
                            Err(e) => SidecarState::Unparsable {
                                error: e.to_string(),
                            },
                        },
                    }
                };
                images.push(ImageEntry {
                    file_rel: rel_path(root, &mod_dir.join(file)),
                    sidecar_rel: rel_path(root, &sidecar_path),
                    sidecar,
                });
            }
            modalities.push(ModalityEntry {
                name: mod_name.clone(),
                images,
            });
        }
        sessions.push(SessionEntry {
            id: session_id,
            dir_name: ses_name.clone(),
            modalities,
        });
    }

    Ok((
        SubjectEntry {
            id: subject_id.to_string(),
            dir_name: dir_name.to_string(),
            sessions,
            recursive_nifti_count: count_nifti_recursive(&subject_dir)?,
        },
        violations,
    ))
}

fn scan_annotation_subject(
    root: &Path,
    annotations_root: &Path,
    dir_name: &str,
    subject_id: &str,
) -> Result<(Vec<AnnotationEntry>, Vec<NamingViolation>)> {
    let subject_dir = annotations_root.join(dir_name);
    let mut entries = Vec::new();
    let mut violations = Vec::new();

    let (ses_dirs, _) = list_dir(&subject_dir)?;
    for ses_name in &ses_dirs {
        let Ok(session_id) = parse_dir_component(ses_name, DirKind::Session) else {
            continue;
        };
        let ses_dir = subject_dir.join(ses_name);
        let (mod_dirs, _) = list_dir(&ses_dir)?;
        for mod_name in &mod_dirs {
            let mod_dir = ses_dir.join(mod_name);
            let (_, files) = list_dir(&mod_dir)?;
            check_naming(
                root,
                &mod_dir,
                &files,
                subject_id,
                &session_id,
                mod_name,
                &mut violations,
            );
            for file in &files {
                if !file.ends_with("_seg.nii.gz") {
                    continue;
                }
                let stem = &file[..file.len() - ".nii.gz".len()];
                let sidecar_name = format!("{stem}.json");
                let sidecar_path = mod_dir.join(&sidecar_name);
                let sidecar = if !sidecar_path.is_file() {
                    AnnotationSidecarState::Missing
                } else {
                    match read_json_artifact::<AnnotationSidecar>(&sidecar_path) {
                        ArtifactState::Parsed(s) => AnnotationSidecarState::Parsed(Box::new(s)),
                        ArtifactState::Unparsable { error } => {
                            AnnotationSidecarState::Unparsable { error }
                        }
                        ArtifactState::Missing => AnnotationSidecarState::Missing,
                    }
                };
                entries.push(AnnotationEntry {
                    subject_id: subject_id.to_string(),
                    session_id: session_id.clone(),
                    modality: mod_name.clone(),
                    seg_rel: rel_path(root, &mod_dir.join(file)),
                    sidecar_rel: rel_path(root, &sidecar_path),
                    sidecar,
                });
            }
        }
    }
    Ok((entries, violations))
}

/// Walks the dataset tree into an index. JSON parse failures are recorded,
/// not fatal; symbolic links are never followed.
pub fn scan_dataset(root: impl AsRef<Path>) -> Result<DatasetIndex> {
    let root = root.as_ref();
    if !root.exists() {
        return Err(Error::RootNotFound(root.into()));
    }
    if !root.is_dir() {
        return Err(Error::RootNotDirectory(root.into()));
    }

    let marker = read_json_artifact::<VidsMarker>(&root.join(".vids"));
    let description =
        read_json_artifact::<DatasetDescription>(&root.join("dataset_description.json"));

    let participants_json = root.join("participants.json");
    let participants_tsv = root.join("participants.tsv");
    let participants = if participants_json.is_file() {
        match fs::read_to_string(&participants_json) {
            Err(e) => ParticipantsState::Json {
                ok: false,
                error: Some(e.to_string()),
            },
            Ok(text) => match serde_json::from_str::<serde_json::Value>(&text) {
                Ok(serde_json::Value::Object(_)) | Ok(serde_json::Value::Array(_)) => {
                    ParticipantsState::Json {
                        ok: true,
                        error: None,
                    }
                }
                Ok(_) => ParticipantsState::Json {
                    ok: false,
                    error: Some("top-level value is neither object nor array".to_string()),
                },
                Err(e) => ParticipantsState::Json {
                    ok: false,
                    error: Some(e.to_string()),
                },
            },
        }
    } else if participants_tsv.is_file() {
        let ok = fs::read_to_string(&participants_tsv)
            .map(|t| t.lines().any(|l| !l.trim().is_empty()))
            .unwrap_or(false);
        ParticipantsState::Tsv { ok }
    } else {
        ParticipantsState::Missing
    };

    let readme_path = root.join("README.md");
    let readme = if !readme_path.is_file() {
        ReadmeState::Missing
    } else if fs::read_to_string(&readme_path)
        .map(|t| t.trim().is_empty())
        .unwrap_or(true)
    {
        ReadmeState::Empty
    } else {
        ReadmeState::Present
    };

    let changes_present = root.join("CHANGES.md").is_file();

    // Source tree, one task per subject directory.
    let (root_dirs, _) = list_dir(root)?;
    let subject_dirs: Vec<(String, String)> = root_dirs
        .iter()
        .filter_map(|name| {
            parse_dir_component(name, DirKind::Subject)
                .ok()
                .map(|id| (name.clone(), id))
        })
        .collect();
    let scanned = par::try_map(subject_dirs, |(dir_name, id)| {
        scan_subject(root, &dir_name, &id)
    })?;
    let mut subjects = Vec::with_capacity(scanned.len());
    let mut naming_violations = Vec::new();
    for (subject, violations) in scanned {
        subjects.push(subject);
        naming_violations.extend(violations);
    }
    subjects.sort_by(|a, b| a.id.cmp(&b.id));

    // Annotations tree, mirrored layout.
    let annotations_root = root.join(ANNOTATIONS_DIR);
    let annotations_dir_present = annotations_root.is_dir();
    let mut annotations = Vec::new();
    if annotations_dir_present {
        let (ann_dirs, _) = list_dir(&annotations_root)?;
        let ann_subject_dirs: Vec<(String, String)> = ann_dirs
            .iter()
            .filter_map(|name| {
                parse_dir_component(name, DirKind::Subject)
                    .ok()
                    .map(|id| (name.clone(), id))
            })
            .collect();
        let scanned = par::try_map(ann_subject_dirs, |(dir_name, id)| {
            scan_annotation_subject(root, &annotations_root, &dir_name, &id)
        })?;
        for (entries, violations) in scanned {
            annotations.extend(entries);
            naming_violations.extend(violations);
        }
        annotations.sort_by(|a, b| a.seg_rel.cmp(&b.seg_rel));
    }
    naming_violations.sort_by(|a, b| a.path_rel.cmp(&b.path_rel));

    let quality_dir = root.join("quality");
    let quality = QualityFiles {
        dir_present: quality_dir.is_dir(),
        summary: read_json_artifact::<serde_json::Value>(&quality_dir.join("quality_summary.json"))
            .map_unit(),
        agreement: read_json_artifact::<serde_json::Value>(
            &quality_dir.join("annotation_agreement.json"),
        )
        .map_unit(),
    };

    let ml_dir = root.join("ml");
    let ml = MlFiles {
        dir_present: ml_dir.is_dir(),
        splits: read_json_artifact::<SplitsLists>(&ml_dir.join("splits.json")),
    };

    Ok(DatasetIndex {
        root: root.to_path_buf(),
        marker,
        description,
        participants,
        readme,
        changes_present,
        subjects,
        annotations_dir_present,
        annotations,
        quality,
        ml,
        naming_violations,
    })
}

impl<T> ArtifactState<T> {
    fn map_unit(self) -> ArtifactState<()> {
        match self {
            ArtifactState::Missing => ArtifactState::Missing,
            ArtifactState::Unparsable { error } => ArtifactState::Unparsable { error },
            ArtifactState::Parsed(_) => ArtifactState::Parsed(()),
        }
    }
}

/// Scans and validates a dataset under `profile_override`, the marker's
/// profile, or POC (with a note on S001) in that order of preference.
pub fn validate(root: impl AsRef<Path>, profile_override: Option<Profile>) -> Result<ValidationReport> {
    let index = scan_dataset(root)?;
    Ok(validate_index(&index, profile_override))
}

/// Rule evaluation on an existing index; pure function of its inputs.
pub fn validate_index(index: &DatasetIndex, profile_override: Option<Profile>) -> ValidationReport {
    let (profile, defaulted) = match (profile_override, index.marker.parsed()) {
        (Some(p), _) => (p, false),
        (None, Some(marker)) => (marker.profile, false),
        (None, None) => (Profile::Poc, true),
    };
    let results = rules::evaluate(index, profile, defaulted);
    ValidationReport::from_results(profile, results)
}
