//! Parser and renderer for the `sub-<ID>_ses-<ID>_<modality>_<suffix>.<ext>`
//! file name grammar and the `sub-*` / `ses-*` directory conventions.
//!
//! IDs admit `[A-Za-z0-9]+` only: hyphen separates key from value and
//! underscore separates tokens, so neither may appear inside an ID. The
//! extension is everything after the first dot (`nii.gz` is one extension).

use crate::error::{Error, Result};
use crate::model::{EntityName, Suffix};

/// Directory level a path component belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirKind {
    Subject,
    Session,
}

impl DirKind {
    fn prefix(self) -> &'static str {
        match self {
            DirKind::Subject => "sub-",
            DirKind::Session => "ses-",
        }
    }
}

fn is_valid_id(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric())
}

fn malformed(input: &str, position: usize, reason: impl Into<String>) -> Error {
    Error::MalformedName {
        input: input.to_string(),
        position,
        reason: reason.into(),
    }
}

/// Decomposes a bare file name into its entity parts.
pub fn parse_entity_name(filename: &str) -> Result<EntityName> {
    let dot = filename
        .find('.')
        .ok_or_else(|| malformed(filename, filename.len(), "missing extension"))?;
    let (stem, ext_with_dot) = filename.split_at(dot);
    let extension = &ext_with_dot[1..];
    if extension.is_empty() {
        return Err(malformed(filename, dot, "empty extension"));
    }

    let mut tokens = Vec::with_capacity(4);
    let mut offset = 0;
    for token in stem.split('_') {
        tokens.push((offset, token));
        offset += token.len() + 1;
    }
    if tokens.len() != 4 {
        let reason = format!(
            "expected 4 underscore-separated tokens (sub-<ID>, ses-<ID>, modality, suffix), found {}",
            tokens.len()
        );
        let position = if tokens.len() > 4 { tokens[4].0 } else { stem.len() };
        return Err(malformed(filename, position, reason));
    }

    let (sub_off, sub_token) = tokens[0];
    let subject_id = sub_token
        .strip_prefix("sub-")
        .ok_or_else(|| malformed(filename, sub_off, "first token must start with \"sub-\""))?;
    if !is_valid_id(subject_id) {
        return Err(malformed(
            filename,
            sub_off + 4,
            "subject id must be non-empty alphanumeric",
        ));
    }

    let (ses_off, ses_token) = tokens[1];
    let session_id = ses_token
        .strip_prefix("ses-")
        .ok_or_else(|| malformed(filename, ses_off, "second token must start with \"ses-\""))?;
    if !is_valid_id(session_id) {
        return Err(malformed(
            filename,
            ses_off + 4,
            "session id must be non-empty alphanumeric",
        ));
    }

    let (mod_off, modality) = tokens[2];
    if !is_valid_id(modality) {
        return Err(malformed(
            filename,
            mod_off,
            "modality must be non-empty alphanumeric",
        ));
    }

    let (suf_off, suffix_token) = tokens[3];
    let suffix = match suffix_token {
        "img" => Suffix::Img,
        "seg" => Suffix::Seg,
        other => {
            return Err(malformed(
                filename,
                suf_off,
                format!("suffix must be \"img\" or \"seg\", found {other:?}"),
            ))
        }
    };

    Ok(EntityName {
        subject_id: subject_id.to_string(),
        session_id: session_id.to_string(),
        modality: modality.to_ascii_lowercase(),
        suffix,
        extension: extension.to_string(),
    })
}

/// Canonical rendering; `parse_entity_name(render_entity_name(e)) == e`.
pub fn render_entity_name(e: &EntityName) -> String {
    format!(
        "sub-{}_ses-{}_{}_{}.{}",
        e.subject_id,
        e.session_id,
        e.modality,
        e.suffix.as_str(),
        e.extension
    )
}

/// Strips the `sub-` / `ses-` prefix from a directory component and returns
/// the ID.
pub fn parse_dir_component(name: &str, kind: DirKind) -> Result<String> {
    let prefix = kind.prefix();
    let id = name
        .strip_prefix(prefix)
        .ok_or_else(|| malformed(name, 0, format!("expected {prefix:?} prefix")))?;
    if !is_valid_id(id) {
        return Err(malformed(
            name,
            prefix.len(),
            "id must be non-empty alphanumeric",
        ));
    }
    Ok(id.to_string())
}

/// True when the entity's IDs match the enclosing directory IDs. Modality
/// comparison is case-insensitive.
pub fn matches_location(e: &EntityName, subject_id: &str, session_id: &str, modality: &str) -> bool {
    e.subject_id == subject_id
        && e.session_id == session_id
        && e.modality.eq_ignore_ascii_case(modality)
}
