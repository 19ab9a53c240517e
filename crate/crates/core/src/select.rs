//! Synset selection (top-K by availability, or by concept list) and
//! materialization of the chosen synsets into a wordlist.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::{Synset, SynsetKind, SynsetStore, WordRow, Wordlist};
use crate::g2p::G2pRegistry;
use crate::ipa::{tokenize, TokenizeOptions};
use crate::{Error, Result};

pub const DEFAULT_TOP_K: usize = 5000;

/// ISO code used to look up concept-list lemmas.
pub const LOOKUP_LANGUAGE: &str = "eng";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AvailabilityCount<'a> {
    pub synset_id: &'a str,
    pub n_ipa: usize,
    pub n_ipa_or_g2p: usize,
}

impl AvailabilityCount<'_> {
    pub fn key(&self, use_g2p: bool) -> usize {
        if use_g2p {
            self.n_ipa_or_g2p
        } else {
            self.n_ipa
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionParams {
    /// Doculects under study.
    pub languages: BTreeSet<String>,
    pub use_g2p: bool,
    /// Top-K size; ignored in concept-list mode.
    pub k: usize,
    /// When set, selection runs in concept-list mode.
    pub concept_list: Option<Vec<String>>,
}

impl SelectionParams {
    pub fn top_k(languages: impl IntoIterator<Item = String>, use_g2p: bool, k: usize) -> Self {
        SelectionParams {
            languages: languages.into_iter().collect(),
            use_g2p,
            k,
            concept_list: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Param("k must be at least 1".into()));
        }
        if self.languages.is_empty() {
            return Err(Error::Param("no languages under study".into()));
        }
        Ok(())
    }
}

/// One selected synset and the concept label its rows will carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub concept: String,
    pub synset_id: String,
}

impl Selection {
    pub fn from_ids<S: AsRef<str>>(ids: &[S]) -> Vec<Selection> {
        ids.iter()
            .map(|id| Selection {
                concept: id.as_ref().to_string(),
                synset_id: id.as_ref().to_string(),
            })
            .collect()
    }
}

pub fn filter_concept_synsets(store: &SynsetStore) -> SynsetStore {
    store.filter(|s| s.kind == SynsetKind::Concept)
}

/// Per-synset language counts. Synsets without any dump-IPA main sense among
/// the study languages are dropped.
pub fn availability_counts<'a>(
    store: &'a SynsetStore,
    params: &SelectionParams,
    g2p_supported: &BTreeSet<String>,
) -> Vec<AvailabilityCount<'a>> {
    let synsets: Vec<&Synset> = store.synsets().collect();
    synsets
        .par_iter()
        .filter_map(|s| {
            let mut n_ipa = 0;
            let mut n_ipa_or_g2p = 0;
            for lang in &params.languages {
                let Some(sense) = s.main_sense(lang) else { continue };
                let has_ipa = sense.ipa.is_some();
                n_ipa += has_ipa as usize;
                n_ipa_or_g2p += (has_ipa || g2p_supported.contains(lang)) as usize;
            }
            (n_ipa > 0).then_some(AvailabilityCount {
                synset_id: &s.id,
                n_ipa,
                n_ipa_or_g2p,
            })
        })
        .collect()
}

/// Ids of the `k` synsets with the highest count, ties by id.
pub fn select_top_k(counts: &[AvailabilityCount<'_>], params: &SelectionParams) -> Vec<String> {
    let mut sorted: Vec<&AvailabilityCount> = counts.iter().collect();
    sorted.sort_by(|a, b| {
        b.key(params.use_g2p)
            .cmp(&a.key(params.use_g2p))
            .then_with(|| a.synset_id.cmp(b.synset_id))
    });
    sorted.into_iter().take(params.k).map(|c| c.synset_id.to_string()).collect()
}

/// Histogram of the sort key: number of languages → number of synsets.
pub fn availability_histogram(counts: &[AvailabilityCount<'_>], use_g2p: bool) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for c in counts {
        *hist.entry(c.key(use_g2p)).or_insert(0) += 1;
    }
    hist
}

pub fn histogram_tsv(hist: &BTreeMap<usize, usize>) -> String {
    let mut out = String::from("n_languages\tn_synsets\n");
    for (n, count) in hist {
        let _ = writeln!(out, "{n}\t{count}");
    }
    out
}

/// One English lemma per line; blank lines and `#` comments are skipped.
pub fn parse_concept_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.nfc().collect())
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConceptListSelection {
    pub selected: Vec<Selection>,
    pub unresolved: Vec<String>,
}

fn is_lookup_sense(sense: &crate::corpus::Sense) -> bool {
    sense.lang.iso() == LOOKUP_LANGUAGE
}

fn lookup_main_is_key(synset: &Synset) -> bool {
    synset.main_senses().any(|s| is_lookup_sense(s) && s.is_key)
}

/// Resolves each lemma to one synset. Candidates carry the lemma as an
/// English sense; key-flagged English main senses win over the rest, then
/// the number of study languages with a main sense, then the id.
pub fn select_by_concept_list(
    store: &SynsetStore,
    concept_list: &[String],
    params: &SelectionParams,
) -> ConceptListSelection {
    let mut by_lemma: BTreeMap<String, Vec<&Synset>> = BTreeMap::new();
    for synset in store.synsets() {
        let lemmas: BTreeSet<String> = synset
            .senses
            .iter()
            .filter(|s| is_lookup_sense(s))
            .map(|s| s.lemma.to_lowercase())
            .collect();
        for lemma in lemmas {
            by_lemma.entry(lemma).or_default().push(synset);
        }
    }
    let coverage = |s: &Synset| params.languages.iter().filter(|l| s.main_sense(l).is_some()).count();
    let mut result = ConceptListSelection::default();
    let mut seen = BTreeSet::new();
    for lemma in concept_list.iter().filter(|l| seen.insert(l.to_lowercase())) {
        let Some(candidates) = by_lemma.get(&lemma.to_lowercase()) else {
            result.unresolved.push(lemma.clone());
            continue;
        };
        let any_key = candidates.iter().any(|s| lookup_main_is_key(s));
        let best = candidates
            .iter()
            .filter(|s| !any_key || lookup_main_is_key(s))
            .max_by(|a, b| coverage(a).cmp(&coverage(b)).then_with(|| b.id.cmp(&a.id)))
            .expect("non-empty candidate list");
        result.selected.push(Selection {
            concept: lemma.clone(),
            synset_id: best.id.clone(),
        });
    }
    result
}

/// Why a main sense produced no row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DropReason {
    /// No dump IPA and no G2P ruleset in use for the language.
    NoIpa,
    /// The G2P ruleset rejected the lemma.
    G2pFailed,
    /// The IPA contains symbols outside the strict alphabet.
    InvalidIpa,
    /// The IPA tokenized to nothing.
    EmptyIpa,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::NoIpa => "no_ipa",
            DropReason::G2pFailed => "g2p_failed",
            DropReason::InvalidIpa => "invalid_ipa",
            DropReason::EmptyIpa => "empty_ipa",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DropCounts {
    pub counts: BTreeMap<DropReason, usize>,
}

impl DropCounts {
    pub fn get(&self, reason: DropReason) -> usize {
        self.counts.get(&reason).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    fn add(&mut self, reason: DropReason) {
        *self.counts.entry(reason).or_insert(0) += 1;
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("reason\tcount\n");
        for r in [DropReason::NoIpa, DropReason::G2pFailed, DropReason::InvalidIpa, DropReason::EmptyIpa] {
            let _ = writeln!(out, "{}\t{}", r.as_str(), self.get(r));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Materialized {
    pub wordlist: Wordlist,
    pub drops: DropCounts,
}

/// One row per (selected synset, study language) with a usable main sense.
/// IPA comes from the dump when present, else from the G2P ruleset of a
/// language in `g2p_languages` (only when `params.use_g2p`). Rows are
/// tokenized strictly; failures are dropped and counted.
pub fn materialize_wordlist(
    store: &SynsetStore,
    selection: &[Selection],
    params: &SelectionParams,
    registry: &G2pRegistry,
    g2p_languages: &BTreeSet<String>,
) -> Result<Materialized> {
    if params.use_g2p {
        if let Some(lang) = g2p_languages.iter().find(|l| !registry.contains(l)) {
            return Err(Error::Param(format!("no G2P ruleset for {lang}")));
        }
    }
    let synsets: Vec<&Synset> = selection
        .iter()
        .map(|sel| {
            store
                .get(&sel.synset_id)
                .ok_or_else(|| Error::data(format!("selected synset {} not in store", sel.synset_id)))
        })
        .collect::<Result<_>>()?;

    type Cell = std::result::Result<(String, String, String, Vec<String>), DropReason>;
    let per_synset: Vec<Vec<Cell>> = synsets
        .par_iter()
        .map(|synset| {
            params
                .languages
                .iter()
                .filter_map(|lang| synset.main_sense(lang).map(|s| (lang, s)))
                .map(|(lang, sense)| {
                    let ipa = match &sense.ipa {
                        Some(ipa) => ipa.clone(),
                        None if params.use_g2p && g2p_languages.contains(lang) => registry
                            .transcribe(lang, &sense.lemma)
                            .expect("ruleset checked above")
                            .map_err(|_| DropReason::G2pFailed)?,
                        None => return Err(DropReason::NoIpa),
                    };
                    let tokens = tokenize(&ipa, TokenizeOptions::strict()).map_err(|_| DropReason::InvalidIpa)?;
                    if tokens.is_empty() {
                        return Err(DropReason::EmptyIpa);
                    }
                    let tokens = tokens.into_iter().map(|t| t.nfc()).collect();
                    Ok((lang.clone(), sense.lemma.clone(), ipa, tokens))
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::new();
    let mut drops = DropCounts::default();
    for (sel, cells) in selection.iter().zip(per_synset) {
        for cell in cells {
            match cell {
                Ok((lang, lemma, ipa, tokens)) => {
                    let id = rows.len() as u64 + 1;
                    rows.push(WordRow::new(id, &lang, &sel.concept, &lemma).with_ipa(&ipa).with_tokens(&tokens));
                }
                Err(reason) => drops.add(reason),
            }
        }
    }
    for (reason, n) in &drops.counts {
        log::warn!(target: "select", "dropped {n} senses: {}", reason.as_str());
    }
    Ok(Materialized {
        wordlist: Wordlist::new(rows)?,
        drops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LanguageRef, Sense};
    use crate::g2p::Ruleset;

    fn sense(iso: &str, glotto: &str, lemma: &str, main: bool, key: bool, ipa: Option<&str>) -> Sense {
        Sense {
            lang: LanguageRef::new(iso, Some(glotto)).unwrap(),
            lemma: lemma.into(),
            is_main: main,
            is_key: key,
            ipa: ipa.map(Into::into),
        }
    }

    fn synset(id: &str, kind: SynsetKind, senses: Vec<Sense>) -> Synset {
        Synset {
            id: id.into(),
            kind,
            senses,
        }
    }

    fn langs() -> BTreeSet<String> {
        ["stan1293", "stan1295"].into_iter().map(String::from).collect()
    }

    #[test]
    fn entity_filter() {
        let store = SynsetStore::from_synsets([
            synset("c", SynsetKind::Concept, vec![]),
            synset("e", SynsetKind::Entity, vec![]),
        ])
        .unwrap();
        let kept = filter_concept_synsets(&store);
        assert_eq!(kept.len(), 1);
        assert!(kept.get("c").is_some());
        let entities = store.filter(|s| s.kind == SynsetKind::Entity);
        assert!(filter_concept_synsets(&entities).is_empty());
    }

    #[test]
    fn counts_with_and_without_g2p() {
        let store = SynsetStore::from_synsets([
            synset(
                "s1",
                SynsetKind::Concept,
                vec![
                    sense("eng", "stan1293", "hand", true, false, Some("hænd")),
                    sense("deu", "stan1295", "Hand", true, false, None),
                ],
            ),
            synset("s2", SynsetKind::Concept, vec![sense("deu", "stan1295", "Fuß", true, false, None)]),
        ])
        .unwrap();
        let params = SelectionParams::top_k(langs(), true, 10);
        let g2p: BTreeSet<String> = ["stan1295".to_string()].into();
        let counts = availability_counts(&store, &params, &g2p);
        assert_eq!(counts, [AvailabilityCount { synset_id: "s1", n_ipa: 1, n_ipa_or_g2p: 2 }]);
        assert!(availability_counts(&SynsetStore::new(), &params, &g2p).is_empty());
    }

    #[test]
    fn top_k_with_ties() {
        let counts = [("A", 3), ("B", 5), ("C", 5)]
            .map(|(id, n)| AvailabilityCount { synset_id: id, n_ipa: n, n_ipa_or_g2p: n });
        let params = SelectionParams::top_k(langs(), false, 2);
        assert_eq!(select_top_k(&counts, &params), ["B", "C"]);
        let all = SelectionParams { k: 10, ..params.clone() };
        assert_eq!(select_top_k(&counts, &all), ["B", "C", "A"]);
        assert!(select_top_k(&[], &params).is_empty());
        assert!(SelectionParams { k: 0, ..params }.validate().is_err());
    }

    #[test]
    fn concept_list_rules() {
        let store = SynsetStore::from_synsets([
            synset("X", SynsetKind::Concept, vec![sense("eng", "stan1293", "hand", true, true, None)]),
            synset(
                "Y",
                SynsetKind::Concept,
                vec![
                    sense("eng", "stan1293", "hand", true, false, None),
                    sense("deu", "stan1295", "Hand", true, false, None),
                ],
            ),
            synset("P", SynsetKind::Concept, vec![sense("eng", "stan1293", "foot", true, false, None)]),
            synset(
                "Q",
                SynsetKind::Concept,
                vec![
                    sense("eng", "stan1293", "foot", true, false, None),
                    sense("deu", "stan1295", "Fuß", true, false, None),
                ],
            ),
        ])
        .unwrap();
        let params = SelectionParams::top_k(langs(), false, 1);
        let list = parse_concept_list("hand\n# comment\n\nfoot\nwhale\n");
        let sel = select_by_concept_list(&store, &list, &params);
        let picked: Vec<(&str, &str)> =
            sel.selected.iter().map(|s| (s.concept.as_str(), s.synset_id.as_str())).collect();
        assert_eq!(picked, [("hand", "X"), ("foot", "Q")]);
        assert_eq!(sel.unresolved, ["whale"]);
    }

    #[test]
    fn materialize_rows_and_drops() {
        let store = SynsetStore::from_synsets([
            synset(
                "s1",
                SynsetKind::Concept,
                vec![
                    sense("eng", "stan1293", "hand", true, false, Some("hænd")),
                    sense("deu", "stan1295", "hand", true, false, Some("hant")),
                ],
            ),
            synset(
                "s2",
                SynsetKind::Concept,
                vec![
                    sense("eng", "stan1293", "hand", true, false, Some("h@nd")),
                    sense("deu", "stan1295", "fus", true, false, None),
                ],
            ),
        ])
        .unwrap();
        let mut reg = G2pRegistry::new();
        reg.insert("stan1295", Ruleset::new("deu", &[("f", "f"), ("u", "uː"), ("s", "s")]).unwrap());
        let g2p: BTreeSet<String> = ["stan1295".to_string()].into();
        let params = SelectionParams::top_k(langs(), true, 10);
        let sel = Selection::from_ids(&["s1", "s2"]);
        let m = materialize_wordlist(&store, &sel, &params, &reg, &g2p).unwrap();
        assert_eq!(m.wordlist.len(), 3);
        assert_eq!(m.drops.get(DropReason::InvalidIpa), 1);
        let g2p_row = m.wordlist.rows().iter().find(|r| r.concept == "s2").unwrap();
        assert_eq!(g2p_row.ipa.as_deref(), Some("fuːs"));

        let no_g2p = SelectionParams { use_g2p: false, ..params.clone() };
        let m = materialize_wordlist(&store, &sel, &no_g2p, &reg, &g2p).unwrap();
        assert_eq!(m.wordlist.len(), 2);
        assert_eq!(m.drops.get(DropReason::NoIpa), 1);

        let missing: BTreeSet<String> = ["stan1293".to_string()].into();
        assert!(materialize_wordlist(&store, &sel, &params, &reg, &missing).is_err());
    }

    #[test]
    fn histogram() {
        let counts = [("A", 3), ("B", 5), ("C", 5)]
            .map(|(id, n)| AvailabilityCount { synset_id: id, n_ipa: n, n_ipa_or_g2p: n + 1 });
        assert_eq!(histogram_tsv(&availability_histogram(&counts, false)), "n_languages\tn_synsets\n3\t1\n5\t2\n");
        assert_eq!(histogram_tsv(&availability_histogram(&counts, true)), "n_languages\tn_synsets\n4\t1\n6\t2\n");
    }
}
