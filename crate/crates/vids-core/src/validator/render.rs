//! Report rendering: a grouped human transcript and a stable JSON document.

use std::fmt::Write as _;

use crate::model::{ReportStatus, RuleCategory, RuleId, RuleOutcome, RuleResult, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Human,
    Json,
}

const CATEGORY_ORDER: [RuleCategory; 6] = [
    RuleCategory::Structure,
    RuleCategory::Imaging,
    RuleCategory::Annotation,
    RuleCategory::Quality,
    RuleCategory::Ml,
    RuleCategory::Metadata,
];

/// Rule whose message supplies the parenthetical context when a whole
/// category collapses to one line.
fn context_rule(category: RuleCategory) -> RuleId {
    match category {
        RuleCategory::Structure => RuleId::S006,
        RuleCategory::Imaging => RuleId::I002,
        RuleCategory::Annotation => RuleId::A005,
        RuleCategory::Quality => RuleId::Q003,
        RuleCategory::Ml => RuleId::M002,
        RuleCategory::Metadata => RuleId::D001,
    }
}

fn range_label(rules: &[&RuleResult]) -> String {
    if rules.len() == 1 {
        format!("{}:", rules[0].id)
    } else {
        format!("{}-{}:", rules[0].id, rules[rules.len() - 1].id)
    }
}

fn render_human(report: &ValidationReport) -> String {
    let mut out = String::new();
    for category in CATEGORY_ORDER {
        let rules: Vec<&RuleResult> = report
            .results
            .iter()
            .filter(|r| r.id.category() == category)
            .collect();
        if rules.is_empty() {
            continue;
        }
        let uniform = rules.iter().all(|r| r.outcome == rules[0].outcome);
        let collapsible = uniform
            && matches!(rules[0].outcome, RuleOutcome::Pass | RuleOutcome::Skip);
        if collapsible {
            let context = match rules[0].outcome {
                RuleOutcome::Skip => "Full profile only".to_string(),
                _ => {
                    let anchor = context_rule(category);
                    rules
                        .iter()
                        .find(|r| r.id == anchor)
                        .map(|r| r.message.clone())
                        .unwrap_or_default()
                }
            };
            let _ = writeln!(
                out,
                "  {:<10} {} ({})",
                range_label(&rules),
                rules[0].outcome,
                context
            );
        } else {
            for rule in &rules {
                let _ = writeln!(out, "  {:<10} {} {}", format!("{}:", rule.id), rule.outcome, rule.message);
                for path in &rule.evidence {
                    let _ = writeln!(out, "      - {path}");
                }
            }
        }
    }
    match report.status() {
        ReportStatus::Pass => {
            let _ = writeln!(
                out,
                "  VALIDATION PASSED ({}/{} rules)",
                report.summary.pass,
                report.results.len()
            );
        }
        ReportStatus::Fail => {
            let _ = writeln!(
                out,
                "  VALIDATION FAILED ({} of {} rules FAIL)",
                report.summary.fail,
                report.results.len()
            );
        }
    }
    out
}

/// Renders a report. The JSON form is a single pretty-printed document whose
/// schema is documented in `docs/report-schema.md`.
pub fn render_report(report: &ValidationReport, format: RenderFormat) -> String {
    match format {
        RenderFormat::Human => render_human(report),
        RenderFormat::Json => {
            serde_json::to_string_pretty(report).expect("report serialization is infallible")
        }
    }
}
