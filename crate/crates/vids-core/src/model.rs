//! Shared domain types: compliance profiles, the closed 21-rule catalog,
//! sidecar schemas, splits, quality summaries, and scorecards.
//!
//! All JSON artifacts use PascalCase keys (`VIDSVersion`, `LabelMap`, ...).
//! Unknown keys are preserved through `extra` maps so that extended sidecars
//! survive read-modify-write cycles untouched.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Version string written into every artifact this toolkit generates.
pub const VIDS_VERSION: &str = "1.0";

// ---------------------------------------------------------------------------
// Profiles and rule catalog
// ---------------------------------------------------------------------------

/// Compliance profile: `poc` for prototypes, `full` for production datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Poc,
    Full,
}

impl Profile {
    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Poc => "poc",
            Profile::Full => "full",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poc" => Ok(Profile::Poc),
            "full" => Ok(Profile::Full),
            other => Err(Error::BadConfig(format!("unknown profile {other:?}"))),
        }
    }
}

/// Rule category, ordered as the catalog renders it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleCategory {
    Structure,
    Imaging,
    Annotation,
    Quality,
    Ml,
    Metadata,
}

impl RuleCategory {
    pub fn letter(self) -> char {
        match self {
            RuleCategory::Structure => 'S',
            RuleCategory::Imaging => 'I',
            RuleCategory::Annotation => 'A',
            RuleCategory::Quality => 'Q',
            RuleCategory::Ml => 'M',
            RuleCategory::Metadata => 'D',
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RuleCategory::Structure => "Structure",
            RuleCategory::Imaging => "Imaging",
            RuleCategory::Annotation => "Annotation",
            RuleCategory::Quality => "Quality",
            RuleCategory::Ml => "ML",
            RuleCategory::Metadata => "Metadata",
        }
    }
}

/// One of the 21 catalog rules. The enum is the whole catalog: no other rule
/// id can be constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[allow(clippy::upper_case_acronyms)]
pub enum RuleId {
    S001,
    S002,
    S003,
    S004,
    S005,
    S006,
    I001,
    I002,
    I003,
    I004,
    A001,
    A002,
    A003,
    A004,
    A005,
    Q001,
    Q002,
    Q003,
    M001,
    M002,
    D001,
}

impl RuleId {
    pub const ALL: [RuleId; 21] = [
        RuleId::S001,
        RuleId::S002,
        RuleId::S003,
        RuleId::S004,
        RuleId::S005,
        RuleId::S006,
        RuleId::I001,
        RuleId::I002,
        RuleId::I003,
        RuleId::I004,
        RuleId::A001,
        RuleId::A002,
        RuleId::A003,
        RuleId::A004,
        RuleId::A005,
        RuleId::Q001,
        RuleId::Q002,
        RuleId::Q003,
        RuleId::M001,
        RuleId::M002,
        RuleId::D001,
    ];

    pub fn category(self) -> RuleCategory {
        match self {
            RuleId::S001 | RuleId::S002 | RuleId::S003 | RuleId::S004 | RuleId::S005
            | RuleId::S006 => RuleCategory::Structure,
            RuleId::I001 | RuleId::I002 | RuleId::I003 | RuleId::I004 => RuleCategory::Imaging,
            RuleId::A001 | RuleId::A002 | RuleId::A003 | RuleId::A004 | RuleId::A005 => {
                RuleCategory::Annotation
            }
            RuleId::Q001 | RuleId::Q002 | RuleId::Q003 => RuleCategory::Quality,
            RuleId::M001 | RuleId::M002 => RuleCategory::Ml,
            RuleId::D001 => RuleCategory::Metadata,
        }
    }

    pub fn number(self) -> u8 {
        self.as_str()[1..].parse().expect("catalog ids are digits")
    }

    /// Canonical rendering: category letter plus zero-padded 3-digit number.
    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::S001 => "S001",
            RuleId::S002 => "S002",
            RuleId::S003 => "S003",
            RuleId::S004 => "S004",
            RuleId::S005 => "S005",
            RuleId::S006 => "S006",
            RuleId::I001 => "I001",
            RuleId::I002 => "I002",
            RuleId::I003 => "I003",
            RuleId::I004 => "I004",
            RuleId::A001 => "A001",
            RuleId::A002 => "A002",
            RuleId::A003 => "A003",
            RuleId::A004 => "A004",
            RuleId::A005 => "A005",
            RuleId::Q001 => "Q001",
            RuleId::Q002 => "Q002",
            RuleId::Q003 => "Q003",
            RuleId::M001 => "M001",
            RuleId::M002 => "M002",
            RuleId::D001 => "D001",
        }
    }

    /// Full-only rules are skipped under the POC profile.
    pub fn full_only(self) -> bool {
        matches!(
            self,
            RuleId::Q001 | RuleId::Q002 | RuleId::Q003 | RuleId::M001 | RuleId::M002
        )
    }

    /// Advisory rules yield WARN on violation and can never FAIL.
    pub fn advisory(self) -> bool {
        matches!(self, RuleId::I004 | RuleId::D001)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RuleId::ALL
            .iter()
            .copied()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownRule(s.to_string()))
    }
}

impl Serialize for RuleId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RuleId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Catalog row: rule id, check description, and applicability flags.
#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub id: RuleId,
    pub check: &'static str,
    pub full_only: bool,
    pub advisory: bool,
}

/// The 21-rule catalog in canonical order (S, I, A, Q, M, D, then number).
pub fn rule_catalog() -> [CatalogEntry; 21] {
    const CHECKS: [&str; 21] = [
        ".vids marker exists",
        "dataset_description.json valid (6 fields)",
        "participants.json or .tsv exists",
        "README.md exists",
        "Subject directories (sub-*) exist",
        "Session directories (ses-*) exist",
        "NIfTI files present per subject",
        "Imaging sidecar JSONs present",
        "Imaging sidecar JSONs are valid",
        "VIDS naming convention (WARN)",
        "derivatives/annotations/ exists",
        "Segmentation files exist",
        "Annotation sidecar JSONs exist",
        "Annotation JSONs valid + VIDSVersion",
        "Provenance fields populated",
        "quality/ directory exists",
        "quality_summary.json present",
        "annotation_agreement.json present",
        "ml/ directory exists",
        "ml/splits.json present",
        "CHANGES.md exists (WARN)",
    ];
    let mut out = [CatalogEntry {
        id: RuleId::S001,
        check: "",
        full_only: false,
        advisory: false,
    }; 21];
    for (i, id) in RuleId::ALL.into_iter().enumerate() {
        out[i] = CatalogEntry {
            id,
            check: CHECKS[i],
            full_only: id.full_only(),
            advisory: id.advisory(),
        };
    }
    out
}

// ---------------------------------------------------------------------------
// Validation report
// ---------------------------------------------------------------------------

/// Per-rule outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RuleOutcome {
    Pass,
    Fail,
    Warn,
    Skip,
}

impl fmt::Display for RuleOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleOutcome::Pass => "PASS",
            RuleOutcome::Fail => "FAIL",
            RuleOutcome::Warn => "WARN",
            RuleOutcome::Skip => "SKIP",
        };
        f.write_str(s)
    }
}

/// Result of evaluating one rule against a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleResult {
    #[serde(rename = "Rule")]
    pub id: RuleId,
    #[serde(rename = "Category")]
    pub category: String,
    #[serde(rename = "Outcome")]
    pub outcome: RuleOutcome,
    #[serde(rename = "Message")]
    pub message: String,
    /// Dataset-relative paths of offending or missing artifacts.
    #[serde(rename = "Evidence")]
    pub evidence: Vec<String>,
}

impl RuleResult {
    pub fn new(id: RuleId, outcome: RuleOutcome, message: impl Into<String>) -> Self {
        RuleResult {
            id,
            category: id.category().label().to_string(),
            outcome,
            message: message.into(),
            evidence: Vec::new(),
        }
    }

    pub fn with_evidence(mut self, evidence: Vec<String>) -> Self {
        self.evidence = evidence;
        self
    }
}

/// Overall dataset status: PASS iff zero rules FAIL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ReportStatus {
    Pass,
    Fail,
}

impl fmt::Display for ReportStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportStatus::Pass => "PASS",
            ReportStatus::Fail => "FAIL",
        })
    }
}

/// Status plus outcome tally; serialized as the report's `Summary` block so
/// CI consumers can assert on `Summary.Status`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportSummary {
    #[serde(rename = "Status")]
    pub status: ReportStatus,
    #[serde(rename = "Pass")]
    pub pass: u32,
    #[serde(rename = "Fail")]
    pub fail: u32,
    #[serde(rename = "Warn")]
    pub warn: u32,
    #[serde(rename = "Skip")]
    pub skip: u32,
}

/// Full validation report: one result per catalog rule, in catalog order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    #[serde(rename = "VIDSVersion")]
    pub vids_version: String,
    #[serde(rename = "Profile")]
    pub profile: Profile,
    #[serde(rename = "Results")]
    pub results: Vec<RuleResult>,
    #[serde(rename = "Summary")]
    pub summary: ReportSummary,
}

impl ValidationReport {
    /// Assembles a report, deriving the summary from the results.
    pub fn from_results(profile: Profile, results: Vec<RuleResult>) -> Self {
        let summary = Self::summarize(&results);
        ValidationReport {
            vids_version: VIDS_VERSION.to_string(),
            profile,
            results,
            summary,
        }
    }

    pub fn summarize(results: &[RuleResult]) -> ReportSummary {
        let mut summary = ReportSummary {
            status: ReportStatus::Pass,
            pass: 0,
            fail: 0,
            warn: 0,
            skip: 0,
        };
        for r in results {
            match r.outcome {
                RuleOutcome::Pass => summary.pass += 1,
                RuleOutcome::Fail => summary.fail += 1,
                RuleOutcome::Warn => summary.warn += 1,
                RuleOutcome::Skip => summary.skip += 1,
            }
        }
        if summary.fail > 0 {
            summary.status = ReportStatus::Fail;
        }
        summary
    }

    pub fn status(&self) -> ReportStatus {
        self.summary.status
    }

    pub fn outcome(&self, id: RuleId) -> Option<RuleOutcome> {
        self.results.iter().find(|r| r.id == id).map(|r| r.outcome)
    }
}

// ---------------------------------------------------------------------------
// Root metadata artifacts
// ---------------------------------------------------------------------------

/// Contents of the `.vids` marker at the dataset root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VidsMarker {
    #[serde(rename = "VIDSVersion")]
    pub vids_version: String,
    #[serde(rename = "Profile")]
    pub profile: Profile,
}

/// `dataset_description.json`. The six required fields are Name, VIDSVersion,
/// DatasetType, License, Authors, and Modalities; the rest is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetDescription {
    #[serde(rename = "Name", skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "VIDSVersion", skip_serializing_if = "Option::is_none")]
    pub vids_version: Option<String>,
    #[serde(rename = "DatasetType", skip_serializing_if = "Option::is_none")]
    pub dataset_type: Option<String>,
    #[serde(rename = "License", skip_serializing_if = "Option::is_none")]
    pub license: Option<String>,
    #[serde(rename = "Authors", skip_serializing_if = "Option::is_none")]
    pub authors: Option<Vec<String>>,
    #[serde(rename = "Modalities", skip_serializing_if = "Option::is_none")]
    pub modalities: Option<Vec<String>>,
    #[serde(rename = "Compliance", skip_serializing_if = "Option::is_none")]
    pub compliance: Option<ComplianceInfo>,
    #[serde(rename = "CustomModalities", skip_serializing_if = "Option::is_none")]
    pub custom_modalities: Option<BTreeMap<String, String>>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl DatasetDescription {
    /// Names of required fields that are missing or empty.
    pub fn missing_required_fields(&self) -> Vec<&'static str> {
        fn empty_text(v: &Option<String>) -> bool {
            v.as_deref().is_none_or(|s| s.trim().is_empty())
        }
        fn empty_list(v: &Option<Vec<String>>) -> bool {
            v.as_ref().is_none_or(|l| l.is_empty())
        }
        let mut missing = Vec::new();
        if empty_text(&self.name) {
            missing.push("Name");
        }
        if empty_text(&self.vids_version) {
            missing.push("VIDSVersion");
        }
        if empty_text(&self.dataset_type) {
            missing.push("DatasetType");
        }
        if empty_text(&self.license) {
            missing.push("License");
        }
        if empty_list(&self.authors) {
            missing.push("Authors");
        }
        if empty_list(&self.modalities) {
            missing.push("Modalities");
        }
        missing
    }
}

/// Optional ethics block inside `dataset_description.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceInfo {
    #[serde(rename = "IRBApproval", skip_serializing_if = "Option::is_none")]
    pub irb_approval: Option<String>,
    #[serde(
        rename = "DeidentificationMethod",
        skip_serializing_if = "Option::is_none"
    )]
    pub deidentification_method: Option<String>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

// ---------------------------------------------------------------------------
// File naming
// ---------------------------------------------------------------------------

/// File suffix token: `img` for source images, `seg` for segmentations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suffix {
    Img,
    Seg,
}

impl Suffix {
    pub fn as_str(self) -> &'static str {
        match self {
            Suffix::Img => "img",
            Suffix::Seg => "seg",
        }
    }
}

/// Decomposed `sub-<ID>_ses-<ID>_<modality>_<suffix>.<ext>` file name.
///
/// IDs are alphanumeric (hyphen and underscore are grammar separators); the
/// modality token is stored lowercase. `extension` is everything after the
/// first dot, so `nii.gz` is a single extension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityName {
    pub subject_id: String,
    pub session_id: String,
    pub modality: String,
    pub suffix: Suffix,
    pub extension: String,
}

// ---------------------------------------------------------------------------
// Sidecars
// ---------------------------------------------------------------------------

/// Imaging sidecar: a free-form JSON object. Recommended keys include
/// Manufacturer, SliceThickness_mm, and Modality.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImagingSidecar(pub Map<String, Value>);

/// Label map: non-negative integer keys (as text) to label names. Key "0" is
/// the background label.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelMap(pub BTreeMap<String, String>);

impl LabelMap {
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for key in self.0.keys() {
            let n: u64 = key.parse().map_err(|_| {
                Error::BadConfig(format!("label map key {key:?} is not a non-negative integer"))
            })?;
            if !seen.insert(n) {
                return Err(Error::BadConfig(format!(
                    "label map keys collide on value {n}"
                )));
            }
        }
        if !seen.contains(&0) {
            return Err(Error::BadConfig(
                "label map lacks a background entry (key \"0\")".to_string(),
            ));
        }
        Ok(())
    }
}

/// Annotation sidecar (`*_seg.json`): label map plus the provenance record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSidecar {
    #[serde(rename = "VIDSVersion", skip_serializing_if = "Option::is_none")]
    pub vids_version: Option<String>,
    #[serde(rename = "AnnotationType", skip_serializing_if = "Option::is_none")]
    pub annotation_type: Option<String>,
    #[serde(rename = "SourceImage", skip_serializing_if = "Option::is_none")]
    pub source_image: Option<String>,
    #[serde(rename = "LabelMap", skip_serializing_if = "Option::is_none")]
    pub label_map: Option<LabelMap>,
    #[serde(rename = "Provenance", skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    #[serde(rename = "Annotations", skip_serializing_if = "Option::is_none")]
    pub annotations: Option<Vec<AnnotationRecord>>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

/// Per-structure annotation record; `Characteristics` is the designated
/// domain-extension point and is never validated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    #[serde(rename = "Characteristics", skip_serializing_if = "Option::is_none")]
    pub characteristics: Option<Map<String, Value>>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

/// The provenance record: who annotated, with what process, under what QC.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(rename = "Annotator", skip_serializing_if = "Option::is_none")]
    pub annotator: Option<Annotator>,
    #[serde(rename = "AnnotationProcess", skip_serializing_if = "Option::is_none")]
    pub annotation_process: Option<AnnotationProcess>,
    #[serde(rename = "QualityControl", skip_serializing_if = "Option::is_none")]
    pub quality_control: Option<QualityControl>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Annotator {
    #[serde(rename = "ID", skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(rename = "Name", skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "Credentials", skip_serializing_if = "Option::is_none")]
    pub credentials: Option<String>,
    #[serde(rename = "Specialty", skip_serializing_if = "Option::is_none")]
    pub specialty: Option<String>,
    #[serde(rename = "Institution", skip_serializing_if = "Option::is_none")]
    pub institution: Option<String>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationProcess {
    #[serde(rename = "Tool", skip_serializing_if = "Option::is_none")]
    pub tool: Option<String>,
    #[serde(rename = "Version", skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    /// ISO-8601 calendar date, e.g. "2026-03-15".
    #[serde(rename = "Date", skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
    #[serde(rename = "TimeSpent_minutes", skip_serializing_if = "Option::is_none")]
    pub time_spent_minutes: Option<f64>,
    /// One of "manual", "semi-automated", "automated".
    #[serde(rename = "Method", skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityControl {
    #[serde(rename = "ReviewedBy", skip_serializing_if = "Option::is_none")]
    pub reviewed_by: Option<String>,
    #[serde(rename = "ReviewDate", skip_serializing_if = "Option::is_none")]
    pub review_date: Option<String>,
    /// One of "approved", "revisions", "rejected".
    #[serde(rename = "ReviewOutcome", skip_serializing_if = "Option::is_none")]
    pub review_outcome: Option<String>,
    /// Reviewer confidence in [0, 1].
    #[serde(rename = "Confidence", skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

fn filled(v: &Option<String>) -> bool {
    v.as_deref().is_some_and(|s| !s.trim().is_empty())
}

/// Minimum viable provenance: annotator identity (ID or Name) plus either an
/// annotation date or a tool name.
pub fn provenance_minimum_ok(p: &Provenance) -> bool {
    let identity = p
        .annotator
        .as_ref()
        .is_some_and(|a| filled(&a.id) || filled(&a.name));
    let process = p
        .annotation_process
        .as_ref()
        .is_some_and(|ap| filled(&ap.date) || filled(&ap.tool));
    identity && process
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

/// `ml/splits.json`: a documented subject-level train/val/test partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitsSpec {
    #[serde(rename = "Seed")]
    pub seed: u64,
    #[serde(rename = "Ratios")]
    pub ratios: [f64; 3],
    #[serde(rename = "Method")]
    pub method: String,
    #[serde(rename = "Rationale")]
    pub rationale: String,
    #[serde(rename = "Train")]
    pub train: Vec<String>,
    #[serde(rename = "Val")]
    pub val: Vec<String>,
    #[serde(rename = "Test")]
    pub test: Vec<String>,
}

// ---------------------------------------------------------------------------
// Quality summaries
// ---------------------------------------------------------------------------

/// Quality tier banding of mean pairwise Dice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QualityTier {
    Excellent,
    Good,
    Acceptable,
    Poor,
    Unrated,
}

impl fmt::Display for QualityTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            QualityTier::Excellent => "excellent",
            QualityTier::Good => "good",
            QualityTier::Acceptable => "acceptable",
            QualityTier::Poor => "poor",
            QualityTier::Unrated => "unrated",
        };
        f.write_str(s)
    }
}

/// Per-subject agreement rollup inside `quality_summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectQuality {
    #[serde(rename = "Subject")]
    pub subject: String,
    /// Number of annotated units (nodules) contributing reader pairs.
    #[serde(rename = "NoduleCount")]
    pub nodule_count: u32,
    #[serde(rename = "MeanPairwiseDice", skip_serializing_if = "Option::is_none")]
    pub mean_pairwise_dice: Option<f64>,
    #[serde(rename = "Tier")]
    pub tier: QualityTier,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierCounts {
    #[serde(rename = "Excellent")]
    pub excellent: u32,
    #[serde(rename = "Good")]
    pub good: u32,
    #[serde(rename = "Acceptable")]
    pub acceptable: u32,
    #[serde(rename = "Poor")]
    pub poor: u32,
    #[serde(rename = "Unrated")]
    pub unrated: u32,
}

/// Dataset-level aggregates over all reader-pair records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetQuality {
    #[serde(rename = "MeanPairwiseDice")]
    pub mean_pairwise_dice: f64,
    #[serde(rename = "MinPairwiseDice")]
    pub min_pairwise_dice: f64,
    #[serde(rename = "MaxPairwiseDice")]
    pub max_pairwise_dice: f64,
    #[serde(rename = "TierCounts")]
    pub tier_counts: TierCounts,
}

/// `quality/quality_summary.json`.
///
/// Subject means are flat means over every reader-pair record of the
/// subject's units; the dataset block aggregates over all pair records, and
/// per-subject means remain available for subject-weighted statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualitySummary {
    #[serde(rename = "VIDSVersion")]
    pub vids_version: String,
    #[serde(rename = "Aggregation")]
    pub aggregation: String,
    #[serde(rename = "PerSubject")]
    pub per_subject: Vec<SubjectQuality>,
    #[serde(rename = "Dataset", skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetQuality>,
}

// ---------------------------------------------------------------------------
// Compliance scorecards
// ---------------------------------------------------------------------------

/// Status of one compliance dimension, as judged by a human assessor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DimensionStatus {
    Satisfied,
    Partial,
    Absent,
}

impl DimensionStatus {
    /// Score contribution in half-points: satisfied 2, partial 1, absent 0.
    pub fn half_points(self) -> u32 {
        match self {
            DimensionStatus::Satisfied => 2,
            DimensionStatus::Partial => 1,
            DimensionStatus::Absent => 0,
        }
    }
}

/// One of the six scorecard categories, with its fixed dimension count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DimensionCategory {
    Structure,
    Imaging,
    Annotation,
    Provenance,
    Quality,
    MLReadiness,
}

impl DimensionCategory {
    pub const ALL: [DimensionCategory; 6] = [
        DimensionCategory::Structure,
        DimensionCategory::Imaging,
        DimensionCategory::Annotation,
        DimensionCategory::Provenance,
        DimensionCategory::Quality,
        DimensionCategory::MLReadiness,
    ];

    /// Fixed number of dimensions in this category (sums to 22).
    pub fn dimension_count(self) -> u32 {
        match self {
            DimensionCategory::Structure => 6,
            DimensionCategory::Imaging => 3,
            DimensionCategory::Annotation => 4,
            DimensionCategory::Provenance => 5,
            DimensionCategory::Quality => 2,
            DimensionCategory::MLReadiness => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DimensionCategory::Structure => "Structure",
            DimensionCategory::Imaging => "Imaging",
            DimensionCategory::Annotation => "Annotation",
            DimensionCategory::Provenance => "Provenance",
            DimensionCategory::Quality => "Quality",
            DimensionCategory::MLReadiness => "MLReadiness",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        DimensionCategory::ALL
            .iter()
            .copied()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::UnknownCategory(s.to_string()))
    }
}

/// One scorecard row. Category is kept as text so that unknown categories
/// surface as scoring errors rather than parse failures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorecardEntry {
    #[serde(rename = "Dimension")]
    pub dimension: String,
    #[serde(rename = "Category")]
    pub category: String,
    #[serde(rename = "Status")]
    pub status: DimensionStatus,
}

/// A 22-dimension compliance scorecard (serialized as a JSON array).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Scorecard(pub Vec<ScorecardEntry>);
