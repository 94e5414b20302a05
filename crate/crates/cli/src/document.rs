//! JSON documents describing algebras, modules and derivations.
//!
//! ```json
//! {
//!   "algebra":    { "name": "X", "default": "-d - 2*l", "entries": { "0,1": "-d - 2*l" } },
//!   "module":     { "name": "V", "rank_one": false, "entries": { "0,0": "-d + l" } },
//!   "derivation": { "name": "D", "entries": { "0,1": "-d - 2*l" } }
//! }
//! ```
//!
//! Keys are comma-separated decimal index tuples. Algebra keys `i,j` give
//! `[L_i λ L_j] = P L_{i+j}`. Graded module keys `i,j` give
//! `L_i λ v_j = f v_{i+j}`; rank-one module keys are single indices `i`.
//! Derivation keys `i,k` give the `L_k` coefficient of `D_λ L_i`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use cw_core::derivation::ConformalDerivation;
use cw_core::module::GradedConformalModule;
use cw_core::{parse, GradedConformalAlgebra, MultiPoly, Window};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error in {location} at position {position}: {message}")]
    Parse { location: String, position: usize, message: String },
    #[error("validation error in {location}: {message}")]
    Validation { location: String, message: String },
}

fn validation(location: impl Into<String>, message: impl Into<String>) -> DocumentError {
    DocumentError::Validation {
        location: location.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RawSection {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_one: Option<bool>,
    #[serde(default)]
    pub entries: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RawDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<RawSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module: Option<RawSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivation: Option<RawSection>,
}

/// A structure-coefficient table read from an algebra section.
#[derive(Debug, Clone)]
pub struct AlgebraDoc {
    pub algebra: GradedConformalAlgebra,
    /// Square index window the table covers; `None` when a default makes it total.
    pub table_window: Option<Window>,
}

/// A module read from a module section. `table_window` is the algebra-index
/// range of a rank-one table.
#[derive(Debug, Clone)]
pub struct ModuleDoc {
    pub module: GradedConformalModule,
    pub table_window: Window,
}

#[derive(Debug, Clone)]
pub struct DerivationDoc {
    pub derivation: ConformalDerivation,
    pub table_window: Window,
}

#[derive(Debug, Clone, Default)]
pub struct Document {
    pub algebra: Option<AlgebraDoc>,
    pub module: Option<ModuleDoc>,
    pub derivation: Option<DerivationDoc>,
}

pub fn load_document(path: &Path) -> Result<Document, DocumentError> {
    let text = std::fs::read_to_string(path).map_err(|source| DocumentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_document(&text)
}

pub fn parse_document(text: &str) -> Result<Document, DocumentError> {
    let value: Value = serde_json::from_str(text).map_err(|e| DocumentError::Parse {
        location: format!("document line {}", e.line()),
        position: e.column(),
        message: e.to_string(),
    })?;
    let raw: RawDocument = serde_json::from_value(value).map_err(|e| validation("document", e.to_string()))?;
    if raw.algebra.is_none() && raw.module.is_none() && raw.derivation.is_none() {
        return Err(validation("document", "expected a section: algebra, module or derivation"));
    }
    Ok(Document {
        algebra: raw.algebra.as_ref().map(build_algebra).transpose()?,
        module: raw.module.as_ref().map(build_module).transpose()?,
        derivation: raw.derivation.as_ref().map(build_derivation).transpose()?,
    })
}

fn parse_poly(location: &str, text: &str) -> Result<MultiPoly, DocumentError> {
    parse(text).map_err(|e| DocumentError::Parse {
        location: location.to_string(),
        position: e.position,
        message: e.message,
    })
}

fn parse_key(section: &str, key: &str, arity: usize) -> Result<Vec<i64>, DocumentError> {
    let location = format!("{section} entry \"{key}\"");
    let parts: Result<Vec<i64>, _> = key.split(',').map(|s| s.trim().parse::<i64>()).collect();
    match parts {
        Ok(v) if v.len() == arity => Ok(v),
        Ok(v) => Err(validation(location, format!("expected {arity} indices, found {}", v.len()))),
        Err(e) => Err(validation(location, format!("bad index: {e}"))),
    }
}

fn parse_entries(
    section: &str,
    raw: &RawSection,
    arity: usize,
) -> Result<BTreeMap<Vec<i64>, MultiPoly>, DocumentError> {
    let mut out = BTreeMap::new();
    for (key, text) in &raw.entries {
        let idx = parse_key(section, key, arity)?;
        let poly = parse_poly(&format!("{section} entry \"{key}\""), text)?;
        if out.insert(idx, poly).is_some() {
            return Err(validation(format!("{section} entry \"{key}\""), "duplicate index"));
        }
    }
    Ok(out)
}

fn span(section: &str, idx: impl IntoIterator<Item = i64>) -> Result<Window, DocumentError> {
    let set: BTreeSet<i64> = idx.into_iter().collect();
    let (Some(&lo), Some(&hi)) = (set.first(), set.last()) else {
        return Err(validation(section, "no entries"));
    };
    if let Some(gap) = (lo..=hi).find(|k| !set.contains(k)) {
        return Err(validation(section, format!("window gap at index {gap} inside [{lo}, {hi}]")));
    }
    Ok(Window::new(lo, hi))
}

fn key_string(idx: &[i64]) -> String {
    idx.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
}

fn build_algebra(raw: &RawSection) -> Result<AlgebraDoc, DocumentError> {
    let name = raw.name.clone().unwrap_or_else(|| "algebra".into());
    let default = raw
        .default
        .as_deref()
        .map(|t| parse_poly("algebra default", t))
        .transpose()?;
    let entries = parse_entries("algebra", raw, 2)?;
    let table_window = match default {
        Some(_) => None,
        None => {
            let w = span("algebra", entries.keys().flatten().copied())?;
            for i in w.iter() {
                for j in w.iter() {
                    if !entries.contains_key(&vec![i, j]) {
                        return Err(validation("algebra", format!("window gap: missing entry \"{i},{j}\"")));
                    }
                }
            }
            Some(w)
        }
    };
    let table: BTreeMap<(i64, i64), MultiPoly> = entries.into_iter().map(|(k, p)| ((k[0], k[1]), p)).collect();
    let algebra = GradedConformalAlgebra::new(name, [0], move |i, j| {
        let p = table.get(&(i, j)).cloned().or_else(|| default.clone()).unwrap_or_default();
        vec![(i + j, p)]
    });
    Ok(AlgebraDoc { algebra, table_window })
}

fn build_module(raw: &RawSection) -> Result<ModuleDoc, DocumentError> {
    let name = raw.name.clone().unwrap_or_else(|| "module".into());
    if raw.default.is_some() {
        return Err(validation("module", "default is only supported for algebras"));
    }
    if raw.rank_one.unwrap_or(false) {
        let entries = parse_entries("module", raw, 1)?;
        let w = span("module", entries.keys().map(|k| k[0]))?;
        let table = entries.into_iter().map(|(k, p)| ((k[0], 0), p)).collect();
        return Ok(ModuleDoc {
            module: GradedConformalModule::from_table(name, Window::single(0), true, table),
            table_window: w,
        });
    }
    let entries = parse_entries("module", raw, 2)?;
    let w = span("module", entries.keys().flat_map(|k| [k[1], k[0] + k[1]]))?;
    for key in entries.keys() {
        if !w.differences().contains(key[0]) {
            return Err(validation(format!("module entry \"{}\"", key_string(key)), "algebra index out of range"));
        }
    }
    for j in w.iter() {
        for i in w.differences().iter() {
            if w.contains(i + j) && !entries.contains_key(&vec![i, j]) {
                return Err(validation("module", format!("window gap: missing entry \"{i},{j}\"")));
            }
        }
    }
    let table = entries.into_iter().map(|(k, p)| ((k[0], k[1]), p)).collect();
    Ok(ModuleDoc {
        module: GradedConformalModule::from_table(name, w, false, table),
        table_window: w.differences(),
    })
}

fn build_derivation(raw: &RawSection) -> Result<DerivationDoc, DocumentError> {
    let name = raw.name.clone().unwrap_or_else(|| "derivation".into());
    if raw.default.is_some() || raw.rank_one.is_some() {
        return Err(validation("derivation", "only name and entries are allowed"));
    }
    let entries = parse_entries("derivation", raw, 2)?;
    let w = span("derivation", entries.keys().map(|k| k[0]))?;
    let mut table: BTreeMap<i64, Vec<(i64, MultiPoly)>> = BTreeMap::new();
    for (k, p) in entries {
        table.entry(k[0]).or_default().push((k[1] - k[0], p));
    }
    Ok(DerivationDoc {
        derivation: ConformalDerivation::from_table(name, table),
        table_window: w,
    })
}

/// Serializes a module table back into a document section.
pub fn module_section(module: &GradedConformalModule, alg_window: Window) -> RawSection {
    let entries = if module.is_rank_one() {
        alg_window
            .iter()
            .filter_map(|i| module.coeff(i, 0).ok().map(|p| (i.to_string(), p.to_string())))
            .collect()
    } else {
        module
            .to_table(module.algebra_window(alg_window))
            .into_iter()
            .map(|((i, j), p)| (format!("{i},{j}"), p.to_string()))
            .collect()
    };
    RawSection {
        name: Some(module.name().to_string()),
        default: None,
        rank_one: Some(module.is_rank_one()),
        entries,
    }
}

pub fn module_document(module: &GradedConformalModule, alg_window: Window) -> String {
    let doc = RawDocument {
        module: Some(module_section(module, alg_window)),
        ..RawDocument::default()
    };
    serde_json::to_string_pretty(&doc).expect("document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use cw_core::module::make_v_abc;

    #[test]
    fn rank_one_module_round_trips() {
        let v = make_v_abc(&MultiPoly::int(1), &MultiPoly::int(0), &MultiPoly::int(1)).unwrap();
        let text = module_document(&v, Window::symmetric(3));
        let doc = parse_document(&text).unwrap();
        let back = doc.module.unwrap();
        assert_eq!(back.table_window, Window::symmetric(3));
        assert_eq!(module_document(&back.module, Window::symmetric(3)), text);
        for i in -3..=3 {
            assert_eq!(back.module.coeff(i, 0).unwrap(), v.coeff(i, 0).unwrap());
        }
    }

    #[test]
    fn malformed_polynomial_reports_position() {
        let err = parse_document(r#"{"module": {"rank_one": true, "entries": {"0": "d + * l"}}}"#).unwrap_err();
        match err {
            DocumentError::Parse { position, location, .. } => {
                assert_eq!(position, 4);
                assert!(location.contains("\"0\""));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn window_gap_is_rejected() {
        let err = parse_document(r#"{"module": {"rank_one": true, "entries": {"0": "d", "2": "d"}}}"#).unwrap_err();
        assert!(matches!(err, DocumentError::Validation { .. }), "{err}");
        assert!(err.to_string().contains("gap at index 1"));
        let err = parse_document(r#"{"module": {"entries": {"0,0": "d", "1,0": "d", "-1,1": "d"}}}"#).unwrap_err();
        assert!(err.to_string().contains("missing entry \"0,1\""), "{err}");
    }

    #[test]
    fn algebra_table_needs_full_square() {
        let ok = parse_document(r#"{"algebra": {"default": "-d - 2*l"}}"#).unwrap();
        assert!(ok.algebra.unwrap().table_window.is_none());
        let err = parse_document(r#"{"algebra": {"entries": {"0,0": "d", "0,1": "d"}}}"#).unwrap_err();
        assert!(err.to_string().contains("missing entry"), "{err}");
    }

    #[test]
    fn bad_json_is_a_parse_error() {
        assert!(matches!(parse_document("{"), Err(DocumentError::Parse { .. })));
        assert!(matches!(parse_document("{}"), Err(DocumentError::Validation { .. })));
    }
}
