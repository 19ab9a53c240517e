use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use indexmap::IndexSet;

use crate::error::{read_to_string, write_string};
use crate::{Error, Result};

pub const WORDLIST_HEADER: [&str; 7] = ["ID", "DOCULECT", "CONCEPT", "FORM", "IPA", "TOKENS", "COGID"];

/// One (doculect, concept) entry of a wordlist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordRow {
    pub id: u64,
    pub doculect: String,
    pub concept: String,
    /// Orthographic form; empty when only a transcription is known.
    pub form: String,
    pub ipa: Option<String>,
    pub tokens: Option<Vec<String>>,
    pub cogid: Option<u64>,
}

impl WordRow {
    pub fn new(id: u64, doculect: &str, concept: &str, form: &str) -> Self {
        WordRow {
            id,
            doculect: doculect.to_string(),
            concept: concept.to_string(),
            form: form.to_string(),
            ipa: None,
            tokens: None,
            cogid: None,
        }
    }

    pub fn with_ipa(mut self, ipa: &str) -> Self {
        self.ipa = Some(ipa.to_string());
        self
    }

    pub fn with_tokens<S: AsRef<str>>(mut self, tokens: &[S]) -> Self {
        self.tokens = Some(tokens.iter().map(|t| t.as_ref().to_string()).collect());
        self
    }

    pub fn with_cogid(mut self, cogid: u64) -> Self {
        self.cogid = Some(cogid);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::data(format!("row {}: {msg}", self.id)));
        if self.doculect.is_empty() || self.doculect.chars().any(char::is_whitespace) {
            return fail("doculect must be non-empty without whitespace");
        }
        if self.concept.is_empty() {
            return fail("empty concept");
        }
        if self.form.is_empty() && self.ipa.is_none() {
            return fail("neither FORM nor IPA present");
        }
        if self.tokens.is_some() && self.ipa.is_none() {
            return fail("TOKENS present without IPA");
        }
        if let Some(tokens) = &self.tokens {
            if tokens.is_empty() || tokens.iter().any(|t| t.is_empty() || t.contains(char::is_whitespace)) {
                return fail("tokens must be non-empty and whitespace-free");
            }
        }
        let cells = [Some(&self.concept), Some(&self.form), self.ipa.as_ref()];
        if cells.into_iter().flatten().any(|c| c.contains(['\t', '\n', '\r'])) {
            return fail("cell contains a tab or line break");
        }
        Ok(())
    }
}

/// The table passed between pipeline stages.
///
/// Doculects and concepts are kept as declared ordered sets. They default to
/// first-appearance order over the rows and survive row removal, so coverage
/// statistics keep the same denominator when entries are deleted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Wordlist {
    rows: Vec<WordRow>,
    doculects: IndexSet<String>,
    concepts: IndexSet<String>,
    allow_synonyms: bool,
}

impl Wordlist {
    /// Builds a synonym-free wordlist: at most one row per (doculect, concept).
    pub fn new(rows: Vec<WordRow>) -> Result<Self> {
        Self::build(rows, false)
    }

    pub fn with_synonyms(rows: Vec<WordRow>) -> Result<Self> {
        Self::build(rows, true)
    }

    fn build(rows: Vec<WordRow>, allow_synonyms: bool) -> Result<Self> {
        let mut ids = HashSet::new();
        let mut pairs = HashSet::new();
        let mut doculects = IndexSet::new();
        let mut concepts = IndexSet::new();
        for row in &rows {
            row.validate()?;
            if !ids.insert(row.id) {
                return Err(Error::data(format!("duplicate row id {}", row.id)));
            }
            if !allow_synonyms && !pairs.insert((row.doculect.as_str(), row.concept.as_str())) {
                return Err(Error::data(format!(
                    "row {}: second entry for ({}, {}) while synonyms are disabled",
                    row.id, row.doculect, row.concept
                )));
            }
            doculects.insert(row.doculect.clone());
            concepts.insert(row.concept.clone());
        }
        Ok(Wordlist {
            rows,
            doculects,
            concepts,
            allow_synonyms,
        })
    }

    /// Replaces the declared doculect and concept orders. Both must cover the rows.
    pub fn with_declared(
        mut self,
        doculects: impl IntoIterator<Item = String>,
        concepts: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let doculects: IndexSet<String> = doculects.into_iter().collect();
        let concepts: IndexSet<String> = concepts.into_iter().collect();
        if let Some(r) = self.rows.iter().find(|r| !doculects.contains(&r.doculect)) {
            return Err(Error::data(format!("doculect {} not declared", r.doculect)));
        }
        if let Some(r) = self.rows.iter().find(|r| !concepts.contains(&r.concept)) {
            return Err(Error::data(format!("concept {} not declared", r.concept)));
        }
        self.doculects = doculects;
        self.concepts = concepts;
        Ok(self)
    }

    pub fn rows(&self) -> &[WordRow] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<WordRow> {
        self.rows
    }

    pub fn doculects(&self) -> &IndexSet<String> {
        &self.doculects
    }

    pub fn concepts(&self) -> &IndexSet<String> {
        &self.concepts
    }

    pub fn allows_synonyms(&self) -> bool {
        self.allow_synonyms
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Removes rows rejected by `keep`; declared doculects and concepts stay.
    pub fn retain(&mut self, keep: impl FnMut(&WordRow) -> bool) {
        self.rows.retain(keep);
    }

    /// Rebuilds the wordlist with each row transformed, keeping declarations.
    pub fn try_map_rows(&self, mut f: impl FnMut(&WordRow) -> Result<WordRow>) -> Result<Self> {
        let rows = self.rows.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Self::build(rows, self.allow_synonyms)?.with_declared(self.doculects.iter().cloned(), self.concepts.iter().cloned())
    }

    /// Row indices grouped by concept, in declared concept order.
    pub fn concept_groups(&self) -> Vec<(&str, Vec<usize>)> {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, row) in self.rows.iter().enumerate() {
            let c = self.concepts.get_index_of(&row.concept).expect("declared concept");
            groups.entry(c).or_default().push(i);
        }
        groups
            .into_iter()
            .map(|(c, idx)| (self.concepts[c].as_str(), idx))
            .collect()
    }

    pub fn parse_tsv(text: &str, allow_synonyms: bool) -> Result<Self> {
        let ctx = "wordlist";
        let mut lines = text.lines().enumerate();
        let header: Vec<&str> = match lines.next() {
            Some((_, h)) => h.trim_start_matches('\u{feff}').split('\t').collect(),
            None => return Err(Error::parse(ctx, 1, "missing header")),
        };
        let col = |name: &str| header.iter().position(|h| *h == name);
        let mut missing: Vec<&str> = ["ID", "DOCULECT", "CONCEPT"]
            .into_iter()
            .filter(|c| col(c).is_none())
            .collect();
        if col("FORM").is_none() && col("IPA").is_none() {
            missing.push("FORM|IPA");
        }
        if !missing.is_empty() {
            return Err(Error::parse(ctx, 1, format!("missing columns: {}", missing.join(", "))));
        }
        let [id_c, doc_c, con_c] = ["ID", "DOCULECT", "CONCEPT"].map(|c| col(c).unwrap());
        let [form_c, ipa_c, tok_c, cog_c] = ["FORM", "IPA", "TOKENS", "COGID"].map(col);

        let mut rows = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split('\t').collect();
            if cells.len() != header.len() {
                return Err(Error::parse(
                    ctx,
                    lineno,
                    format!("expected {} cells, found {}", header.len(), cells.len()),
                ));
            }
            let opt = |c: Option<usize>| c.map(|c| cells[c]).filter(|s| !s.is_empty());
            let id = cells[id_c]
                .parse()
                .map_err(|_| Error::parse(ctx, lineno, format!("invalid ID {:?}", cells[id_c])))?;
            let cogid = opt(cog_c)
                .map(|c| {
                    c.parse()
                        .map_err(|_| Error::parse(ctx, lineno, format!("invalid COGID {c:?}")))
                })
                .transpose()?;
            rows.push(WordRow {
                id,
                doculect: cells[doc_c].to_string(),
                concept: cells[con_c].to_string(),
                form: opt(form_c).unwrap_or("").to_string(),
                ipa: opt(ipa_c).map(str::to_string),
                tokens: opt(tok_c).map(|t| t.split(' ').map(str::to_string).collect()),
                cogid,
            });
        }
        Self::build(rows, allow_synonyms)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = WORDLIST_HEADER.join("\t");
        out.push('\n');
        for r in &self.rows {
            let tokens = r.tokens.as_ref().map(|t| t.join(" ")).unwrap_or_default();
            let cogid = r.cogid.map(|c| c.to_string()).unwrap_or_default();
            let ipa = r.ipa.as_deref().unwrap_or("");
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                r.id, r.doculect, r.concept, r.form, ipa, tokens, cogid
            ));
        }
        out
    }
}

pub fn load_wordlist(path: &Path) -> Result<Wordlist> {
    Wordlist::parse_tsv(&read_to_string(path)?, false)
}

pub fn write_wordlist(wordlist: &Wordlist, path: &Path) -> Result<()> {
    write_string(path, &wordlist.to_tsv())
}
