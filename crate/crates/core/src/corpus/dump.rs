use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LanguageRef, Sense, Synset, SynsetKind, SynsetStore};
use crate::error::{read_to_string, write_string};
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct SynsetRecord {
    id: String,
    kind: String,
    senses: Vec<SenseRecord>,
}

#[derive(Serialize, Deserialize)]
struct SenseRecord {
    lang: String,
    lemma: String,
    #[serde(default)]
    main: bool,
    #[serde(default)]
    key: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ipa: Option<String>,
}

/// Parses a JSON-Lines synset dump, one synset object per non-blank line.
pub fn parse_synset_dump(text: &str) -> Result<SynsetStore> {
    let ctx = "synset dump";
    let mut store = SynsetStore::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SynsetRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(ctx, lineno, e.to_string()))?;
        let kind = match rec.kind.as_str() {
            "concept" => SynsetKind::Concept,
            "entity" => SynsetKind::Entity,
            other => return Err(Error::parse(ctx, lineno, format!("unknown kind {other:?}"))),
        };
        let senses = rec
            .senses
            .into_iter()
            .map(|s| {
                Ok(Sense {
                    lang: LanguageRef::new(&s.lang, None)?,
                    lemma: s.lemma,
                    is_main: s.main,
                    is_key: s.key,
                    ipa: s.ipa.filter(|i| !i.is_empty()),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::parse(ctx, lineno, e.to_string()))?;
        store
            .insert(Synset {
                id: rec.id,
                kind,
                senses,
            })
            .map_err(|e| Error::parse(ctx, lineno, e.to_string()))?;
    }
    Ok(store)
}

pub fn load_synset_dump(path: &Path) -> Result<SynsetStore> {
    parse_synset_dump(&read_to_string(path)?)
}

/// Serializes a store back into the dump format. Senses are written with
/// their ISO code; glottocodes are not part of the dump.
pub fn synset_dump_to_string(store: &SynsetStore) -> String {
    let mut out = String::new();
    for synset in store.synsets() {
        let rec = SynsetRecord {
            id: synset.id.clone(),
            kind: synset.kind.as_str().to_string(),
            senses: synset
                .senses
                .iter()
                .map(|s| SenseRecord {
                    lang: s.lang.iso().to_string(),
                    lemma: s.lemma.clone(),
                    main: s.is_main,
                    key: s.is_key,
                    ipa: s.ipa.clone(),
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("plain record serializes"));
        out.push('\n');
    }
    out
}

pub fn write_synset_dump(store: &SynsetStore, path: &Path) -> Result<()> {
    write_string(path, &synset_dump_to_string(store))
}
