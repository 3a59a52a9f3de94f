//! The signature catalog: which external calls are taint sources, which are
//! sensitive, and which carry the native / dynamic-loading / reflection /
//! background-service flags.
//!
//! The catalog is a JSON object with exactly seven keys, each an array of
//! `Class.member` strings:
//!
//! ```json
//! {
//!   "sources": ["Tel.getDeviceId"],
//!   "sensitive": ["Sms.send"],
//!   "native": [], "dynload": [], "reflect": [], "service": [],
//!   "source_fields": ["Build.BRAND"]
//! }
//! ```
//!
//! Missing keys default to empty; unknown keys are rejected by name. Sets
//! may overlap (a privacy getter can be both a source and sensitive), but
//! none may name the classes reserved for instrumentation.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Class used for the synthetic condition-sink calls inserted before ifs.
pub const IF_CLASS: &str = "IfClass";
/// Class used for the synthetic source getters that replace field loads.
pub const BUILD_CLASS: &str = "BuildClass";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Category {
    Source,
    Sensitive,
    Native,
    Dynload,
    Reflect,
    Service,
    SourceField,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid catalog JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid signature `{0}`: expected Class.member")]
    InvalidSignature(String),
    #[error("signature `{0}` uses a class reserved for instrumentation")]
    ReservedName(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Catalog {
    /// Calls whose return value introduces taint.
    pub sources: BTreeSet<String>,
    /// The sensitive-API list driving the S, S1 and J features.
    pub sensitive: BTreeSet<String>,
    pub native: BTreeSet<String>,
    pub dynload: BTreeSet<String>,
    pub reflect: BTreeSet<String>,
    pub service: BTreeSet<String>,
    /// `Class.field` names whose loads are rewritten into source calls.
    pub source_fields: BTreeSet<String>,
}

impl Catalog {
    pub fn from_json(text: &str) -> Result<Catalog, CatalogError> {
        let cat: Catalog = serde_json::from_str(text)?;
        cat.validate()?;
        Ok(cat)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// The catalog shipped with the toolchain (also on disk at
    /// `data/default_catalog.json`). Its families match what the corpus
    /// generator emits.
    pub fn default_catalog() -> Catalog {
        Self::from_json(include_str!(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../data/default_catalog.json"
        )))
        .expect("embedded default catalog is valid")
    }

    fn validate(&self) -> Result<(), CatalogError> {
        let sets = [
            &self.sources,
            &self.sensitive,
            &self.native,
            &self.dynload,
            &self.reflect,
            &self.service,
            &self.source_fields,
        ];
        for sig in sets.into_iter().flatten() {
            let Some((class, member)) = sig.split_once('.') else {
                return Err(CatalogError::InvalidSignature(sig.clone()));
            };
            if !is_ident(class) || !is_ident(member) {
                return Err(CatalogError::InvalidSignature(sig.clone()));
            }
            if class == IF_CLASS || class == BUILD_CLASS {
                return Err(CatalogError::ReservedName(sig.clone()));
            }
        }
        Ok(())
    }

    /// Every category containing `sig` (empty for unlisted signatures).
    pub fn classify(&self, sig: &str) -> BTreeSet<Category> {
        let pairs = [
            (&self.sources, Category::Source),
            (&self.sensitive, Category::Sensitive),
            (&self.native, Category::Native),
            (&self.dynload, Category::Dynload),
            (&self.reflect, Category::Reflect),
            (&self.service, Category::Service),
            (&self.source_fields, Category::SourceField),
        ];
        pairs
            .into_iter()
            .filter(|(set, _)| set.contains(sig))
            .map(|(_, cat)| cat)
            .collect()
    }

    pub fn is_source(&self, sig: &str) -> bool {
        self.sources.contains(sig)
    }

    pub fn is_sensitive(&self, sig: &str) -> bool {
        self.sensitive.contains(sig)
    }

    pub fn is_source_field(&self, class: &str, field: &str) -> bool {
        self.source_fields.contains(&format!("{class}.{field}"))
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
