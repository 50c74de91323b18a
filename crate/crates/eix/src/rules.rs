//! Rule-base documents.
//!
//! JSON layout: `{kind, n, rules: [{granule_id, label, mfs: [...]}]}` where each
//! type-1 MF is `{a, b, c, d}` and each type-2 MF is `{lower: {..}, upper: {..}}`.

use std::fmt::Write as _;

use eix_core::projection::AttributeMf;
use eix_core::{Engine, RuleBase, RuleKind};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleFormat {
    Json,
    /// One `IF ... THEN ...` line per rule.
    Text,
}

pub fn rulebase(engine: &Engine, kind: RuleKind) -> Result<RuleBase> {
    Ok(eix_core::export_rulebase(engine.state(), kind)?)
}

pub fn render(rb: &RuleBase, format: RuleFormat) -> String {
    match format {
        RuleFormat::Json => {
            serde_json::to_string_pretty(rb).expect("rule base serialization is infallible")
        }
        RuleFormat::Text => render_text(rb),
    }
}

pub fn parse_json(text: &str) -> Result<RuleBase> {
    serde_json::from_str(text).map_err(Error::from_json)
}

fn render_text(rb: &RuleBase) -> String {
    let mut out = String::new();
    for rule in &rb.rules {
        let premises: Vec<String> = rule
            .mfs
            .iter()
            .enumerate()
            .map(|(j, mf)| match mf {
                AttributeMf::Type1(t) => {
                    format!("x{} is T({}, {}, {}, {})", j + 1, t.a, t.b, t.c, t.d)
                }
                AttributeMf::Type2(m) => format!(
                    "x{} is IT2[lower T({}, {}, {}, {}), upper T({}, {}, {}, {})]",
                    j + 1,
                    m.lower.a,
                    m.lower.b,
                    m.lower.c,
                    m.lower.d,
                    m.upper.a,
                    m.upper.b,
                    m.upper.c,
                    m.upper.d
                ),
            })
            .collect();
        let consequent = match rule.label {
            Some(l) => format!("class {l}"),
            None => "unlabeled".to_string(),
        };
        let _ = writeln!(
            out,
            "R{}: IF {} THEN {}",
            rule.granule_id,
            premises.join(" AND "),
            consequent
        );
    }
    out
}
