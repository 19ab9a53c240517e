//! Language-pair specific log-odds scores for sound-class correspondences.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::align::{align, align_with, normalized_distance, ScoringScheme};
use crate::{Error, Result};

pub const DEFAULT_RUNS: usize = 1000;
pub const DEFAULT_SMOOTHING: f64 = 0.5;

/// One word as seen by the scorer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredWord<'a> {
    pub doculect: &'a str,
    pub concept: &'a str,
    pub classes: Vec<char>,
}

type PairTable = HashMap<(char, char), f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct LexStatScorer {
    doculects: Vec<String>,
    /// Keyed by doculect indices `(i, j)` with `i <= j`; the class pair is
    /// ordered (class in `i`, class in `j`).
    tables: BTreeMap<(usize, usize), PairTable>,
    /// Pairs with fewer than two shared concepts; these use the plain scheme.
    fallback: BTreeSet<(usize, usize)>,
    scheme: ScoringScheme,
    gap_open: f64,
    gap_extend: f64,
    pub runs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LexStatParams {
    pub runs: usize,
    pub seed: u64,
    pub smoothing: f64,
    /// Gap penalties for alignments scored in log-odds units.
    pub gap_open: f64,
    pub gap_extend: f64,
}

impl Default for LexStatParams {
    fn default() -> Self {
        LexStatParams {
            runs: DEFAULT_RUNS,
            seed: 42,
            smoothing: DEFAULT_SMOOTHING,
            gap_open: -2.0,
            gap_extend: -1.0,
        }
    }
}

fn count_pairs(a: &[char], b: &[char], scheme: &ScoringScheme, counts: &mut HashMap<(char, char), f64>) {
    let al = align(a, b, scheme).expect("non-empty sequences");
    for (i, j) in al.matched() {
        *counts.entry((a[i], b[j])).or_insert(0.0) += 1.0;
    }
}

/// Attested correspondences come from aligning the words of shared
/// concepts; expected ones from `runs` random reassignments of the second
/// language's words to the shared concepts. Gap columns are not counted.
pub fn build_lexstat_scorer(
    words: &[ScoredWord<'_>],
    doculects: &[String],
    scheme: &ScoringScheme,
    params: LexStatParams,
) -> Result<LexStatScorer> {
    if params.runs == 0 {
        return Err(Error::Param("runs must be at least 1".into()));
    }
    if doculects.len() < 2 {
        return Err(Error::Param("the scorer needs at least 2 doculects".into()));
    }
    if !(params.smoothing > 0.0 && params.smoothing.is_finite()) {
        return Err(Error::Param("smoothing must be positive".into()));
    }
    if params.gap_open >= 0.0 || params.gap_extend >= 0.0 {
        return Err(Error::Param("gap penalties must be negative".into()));
    }
    if let Some(w) = words.iter().find(|w| w.classes.is_empty()) {
        return Err(Error::data(format!("empty class sequence for {}/{}", w.doculect, w.concept)));
    }
    let index: HashMap<&str, usize> = doculects.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
    // per doculect: concept -> words
    let mut by_lang: Vec<BTreeMap<&str, Vec<&[char]>>> = vec![BTreeMap::new(); doculects.len()];
    for w in words {
        let &d = index
            .get(w.doculect)
            .ok_or_else(|| Error::data(format!("doculect {} not declared", w.doculect)))?;
        by_lang[d].entry(w.concept).or_default().push(&w.classes);
    }

    let pairs: Vec<(usize, usize)> = (0..doculects.len())
        .flat_map(|i| (i..doculects.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<Option<PairTable>> = pairs
        .par_iter()
        .enumerate()
        .map(|(pair_index, &(i, j))| {
            let shared: Vec<&str> = by_lang[i]
                .keys()
                .filter(|c| by_lang[j].contains_key(*c))
                .copied()
                .collect();
            if shared.len() < 2 {
                return None;
            }
            let mut attested = HashMap::new();
            for c in &shared {
                for a in &by_lang[i][c] {
                    for b in &by_lang[j][c] {
                        count_pairs(a, b, scheme, &mut attested);
                    }
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(pair_index as u64);
            let mut expected = HashMap::new();
            let mut perm: Vec<usize> = (0..shared.len()).collect();
            for _ in 0..params.runs {
                perm.shuffle(&mut rng);
                for (k, c) in shared.iter().enumerate() {
                    for a in &by_lang[i][c] {
                        for b in &by_lang[j][shared[perm[k]]] {
                            count_pairs(a, b, scheme, &mut expected);
                        }
                    }
                }
            }
            let runs = params.runs as f64;
            let keys: BTreeSet<(char, char)> = attested.keys().chain(expected.keys()).copied().collect();
            let table = keys
                .into_iter()
                .map(|k| {
                    let att = attested.get(&k).copied().unwrap_or(0.0);
                    let exp = expected.get(&k).copied().unwrap_or(0.0) / runs;
                    (k, ((att + params.smoothing) / (exp + params.smoothing)).log2())
                })
                .collect();
            Some(table)
        })
        .collect();

    let mut tables = BTreeMap::new();
    let mut fallback = BTreeSet::new();
    for (&pair, table) in pairs.iter().zip(results) {
        match table {
            Some(t) => {
                tables.insert(pair, t);
            }
            None => {
                log::warn!(
                    target: "cluster",
                    "fewer than 2 shared concepts for {} / {}; using the plain scheme",
                    doculects[pair.0],
                    doculects[pair.1]
                );
                fallback.insert(pair);
            }
        }
    }
    Ok(LexStatScorer {
        doculects: doculects.to_vec(),
        tables,
        fallback,
        scheme: scheme.clone(),
        gap_open: params.gap_open,
        gap_extend: params.gap_extend,
        runs: params.runs,
        seed: params.seed,
    })
}

impl LexStatScorer {
    fn index(&self, doculect: &str) -> Result<usize> {
        self.doculects
            .iter()
            .position(|d| d == doculect)
            .ok_or_else(|| Error::data(format!("doculect {doculect} unknown to the scorer")))
    }

    /// Log-odds score for class `x` in `la` against class `y` in `lb`.
    /// `None` when the pair fell back to the plain scheme.
    pub fn score(&self, la: &str, x: char, lb: &str, y: char) -> Result<Option<f64>> {
        let (i, j) = (self.index(la)?, self.index(lb)?);
        let (key, cls) = if i <= j { ((i, j), (x, y)) } else { ((j, i), (y, x)) };
        Ok(self.tables.get(&key).map(|t| t.get(&cls).copied().unwrap_or(0.0)))
    }

    pub fn is_fallback(&self, la: &str, lb: &str) -> Result<bool> {
        let (i, j) = (self.index(la)?, self.index(lb)?);
        Ok(self.fallback.contains(&(i.min(j), i.max(j))))
    }

    pub fn fallback_pairs(&self) -> Vec<(&str, &str)> {
        self.fallback
            .iter()
            .map(|&(i, j)| (self.doculects[i].as_str(), self.doculects[j].as_str()))
            .collect()
    }

    fn aligned_score(&self, la: usize, a: &[char], lb: usize, b: &[char]) -> Result<f64> {
        let (key, swap) = if la <= lb { ((la, lb), false) } else { ((lb, la), true) };
        let table = &self.tables[&key];
        let sub = |x: char, y: char| {
            let cls = if swap { (y, x) } else { (x, y) };
            table.get(&cls).copied().unwrap_or(0.0)
        };
        Ok(align_with(a, b, sub, self.gap_open, self.gap_extend)?.score)
    }

    /// Normalized distance with log-odds scores. If any of the three
    /// language pairs involved fell back, the plain SCA distance is used.
    pub fn distance(&self, la: &str, a: &[char], lb: &str, b: &[char]) -> Result<f64> {
        let (i, j) = (self.index(la)?, self.index(lb)?);
        if i == j && a == b {
            return Ok(0.0);
        }
        let plain = [(i.min(j), i.max(j)), (i, i), (j, j)]
            .iter()
            .any(|p| self.fallback.contains(p));
        if plain {
            return super::align::sca_distance(a, b, &self.scheme);
        }
        let sab = self.aligned_score(i, a, j, b)?;
        let saa = self.aligned_score(i, a, i, a)?;
        let sbb = self.aligned_score(j, b, j, b)?;
        Ok(normalized_distance(sab, saa, sbb))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word<'a>(d: &'a str, c: &'a str, s: &str) -> ScoredWord<'a> {
        ScoredWord {
            doculect: d,
            concept: c,
            classes: s.chars().collect(),
        }
    }

    fn docs() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    fn params(runs: usize, seed: u64) -> LexStatParams {
        LexStatParams { runs, seed, ..Default::default() }
    }

    #[test]
    fn runs_zero_rejected() {
        let w = [word("a", "x", "P"), word("b", "x", "P")];
        assert!(build_lexstat_scorer(&w, &docs(), &ScoringScheme::sca(), params(0, 1)).is_err());
    }

    #[test]
    fn determinism() {
        let w = [
            word("a", "1", "PVT"),
            word("b", "1", "WVT"),
            word("a", "2", "KVN"),
            word("b", "2", "HVN"),
            word("a", "3", "MVR"),
            word("b", "3", "MVR"),
        ];
        let s1 = build_lexstat_scorer(&w, &docs(), &ScoringScheme::sca(), params(50, 7)).unwrap();
        let s2 = build_lexstat_scorer(&w, &docs(), &ScoringScheme::sca(), params(50, 7)).unwrap();
        assert_eq!(s1, s2);
        assert!(s1.fallback_pairs().is_empty());
        let d = s1.distance("a", &['P', 'V', 'T'], "b", &['W', 'V', 'T']).unwrap();
        assert!((0.0..=1.0).contains(&d));
        assert_eq!(s1.distance("a", &['P', 'V', 'T'], "a", &['P', 'V', 'T']).unwrap(), 0.0);
    }

    #[test]
    fn few_shared_concepts_fall_back() {
        let w = [word("a", "1", "PV"), word("b", "1", "PV"), word("a", "2", "TV")];
        let s = build_lexstat_scorer(&w, &docs(), &ScoringScheme::sca(), params(10, 1)).unwrap();
        assert!(s.is_fallback("a", "b").unwrap());
        assert_eq!(s.score("b", 'P', "a", 'P').unwrap(), None);
        assert!(s.score("a", 'P', "a", 'P').unwrap().is_some());
    }
}
