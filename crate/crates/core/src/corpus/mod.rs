//! Shared domain types and the ingestion formats: the ISO-639-3 to Glottocode
//! mapping table, JSON-Lines synset dumps and TSV wordlists.

mod dump;
mod langmap;
mod wordlist;

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use unicode_normalization::UnicodeNormalization;

use crate::{Error, Result};

pub use dump::{load_synset_dump, parse_synset_dump, synset_dump_to_string, write_synset_dump};
pub use langmap::{load_language_map, resolve_language, LanguageMap};
pub use wordlist::{load_wordlist, write_wordlist, WordRow, Wordlist};

/// True for a Glottolog code: four lowercase letters or digits followed by four digits.
pub fn is_glottocode(code: &str) -> bool {
    let b = code.as_bytes();
    b.len() == 8
        && b[..4]
            .iter()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
        && b[4..].iter().all(u8::is_ascii_digit)
}

/// True for an ISO 639 code as used by the dumps: 2 or 3 lowercase ASCII letters.
pub fn is_iso_code(code: &str) -> bool {
    (2..=3).contains(&code.len()) && code.bytes().all(|c| c.is_ascii_lowercase())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LanguageRef {
    iso: String,
    glottocode: Option<String>,
}

impl LanguageRef {
    pub fn new(iso: &str, glottocode: Option<&str>) -> Result<Self> {
        if !is_iso_code(iso) {
            return Err(Error::data(format!("invalid ISO code {iso:?}")));
        }
        if let Some(g) = glottocode {
            if !is_glottocode(g) {
                return Err(Error::data(format!("invalid glottocode {g:?}")));
            }
        }
        Ok(LanguageRef {
            iso: iso.to_string(),
            glottocode: glottocode.map(str::to_string),
        })
    }

    pub fn iso(&self) -> &str {
        &self.iso
    }

    pub fn glottocode(&self) -> Option<&str> {
        self.glottocode.as_deref()
    }

    /// Identifier used downstream: the glottocode once resolved, the ISO code before.
    pub fn doculect(&self) -> &str {
        self.glottocode.as_deref().unwrap_or(&self.iso)
    }
}

impl fmt::Display for LanguageRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.glottocode {
            Some(g) => write!(f, "{}/{}", self.iso, g),
            None => f.write_str(&self.iso),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sense {
    pub lang: LanguageRef,
    pub lemma: String,
    pub is_main: bool,
    pub is_key: bool,
    pub ipa: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynsetKind {
    Concept,
    Entity,
}

impl SynsetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SynsetKind::Concept => "concept",
            SynsetKind::Entity => "entity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    pub id: String,
    pub kind: SynsetKind,
    pub senses: Vec<Sense>,
}

impl Synset {
    /// The main sense for a doculect, if any.
    pub fn main_sense(&self, doculect: &str) -> Option<&Sense> {
        self.senses
            .iter()
            .find(|s| s.is_main && s.lang.doculect() == doculect)
    }

    pub fn main_senses(&self) -> impl Iterator<Item = &Sense> {
        self.senses.iter().filter(|s| s.is_main)
    }

    fn validate(&self) -> Result<()> {
        let mut mains = BTreeSet::new();
        for sense in &self.senses {
            if sense.lemma.is_empty() {
                return Err(Error::data(format!("synset {}: empty lemma", self.id)));
            }
            if sense.is_main && !mains.insert(sense.lang.doculect()) {
                return Err(Error::data(format!(
                    "synset {}: more than one main sense for {}",
                    self.id,
                    sense.lang.doculect()
                )));
            }
        }
        Ok(())
    }
}

/// Synsets indexed by id, in insertion order, together with the set of
/// languages that carry at least one sense.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynsetStore {
    synsets: IndexMap<String, Synset>,
    languages: BTreeSet<LanguageRef>,
}

impl SynsetStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_synsets(synsets: impl IntoIterator<Item = Synset>) -> Result<Self> {
        let mut store = SynsetStore::new();
        for s in synsets {
            store.insert(s)?;
        }
        Ok(store)
    }

    pub fn insert(&mut self, mut synset: Synset) -> Result<()> {
        for sense in &mut synset.senses {
            sense.lemma = sense.lemma.nfc().collect();
        }
        synset.validate()?;
        if self.synsets.contains_key(&synset.id) {
            return Err(Error::data(format!("duplicate synset id {}", synset.id)));
        }
        for sense in &synset.senses {
            self.languages.insert(sense.lang.clone());
        }
        self.synsets.insert(synset.id.clone(), synset);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Synset> {
        self.synsets.get(id)
    }

    pub fn synsets(&self) -> impl ExactSizeIterator<Item = &Synset> {
        self.synsets.values()
    }

    pub fn languages(&self) -> &BTreeSet<LanguageRef> {
        &self.languages
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    /// Keeps the synsets accepted by `keep`; the language set is recomputed.
    pub fn filter(&self, mut keep: impl FnMut(&Synset) -> bool) -> SynsetStore {
        let kept = self.synsets.values().filter(|s| keep(s)).cloned();
        SynsetStore::from_synsets(kept).expect("subset of a valid store is valid")
    }

    /// Attaches glottocodes to every sense through `map`.
    ///
    /// Senses whose ISO code has no glottocode are dropped; the affected ISO
    /// codes are returned in sorted order.
    pub fn resolve_languages(&self, map: &LanguageMap) -> Result<(SynsetStore, Vec<String>)> {
        let mut unmapped = BTreeSet::new();
        let mut out = SynsetStore::new();
        for synset in self.synsets.values() {
            let mut senses = Vec::with_capacity(synset.senses.len());
            for sense in &synset.senses {
                match resolve_language(sense.lang.iso(), map) {
                    Some(g) => senses.push(Sense {
                        lang: LanguageRef::new(sense.lang.iso(), Some(g))?,
                        ..sense.clone()
                    }),
                    None => {
                        unmapped.insert(sense.lang.iso().to_string());
                    }
                }
            }
            // two ISO codes may share a glottocode and thereby collide on the main sense
            out.insert(Synset {
                id: synset.id.clone(),
                kind: synset.kind,
                senses,
            })?;
        }
        Ok((out, unmapped.into_iter().collect()))
    }
}
