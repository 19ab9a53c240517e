//! Cognate detection: sound-class alignment distances and flat
//! average-linkage clustering per concept.

mod align;
mod lexstat;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

pub use align::{align, align_with, normalized_distance, sca_distance, Alignment, Column, ScoringScheme};
pub use lexstat::{build_lexstat_scorer, LexStatParams, LexStatScorer, ScoredWord, DEFAULT_RUNS, DEFAULT_SMOOTHING};

use crate::corpus::Wordlist;
use crate::ipa::{to_sound_classes, SoundClassTable};
use crate::{Error, Result};

pub const DEFAULT_SCA_THRESHOLD: f64 = 0.45;
pub const DEFAULT_LEXSTAT_THRESHOLD: f64 = 0.60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Sca,
    LexStat,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sca" => Ok(Method::Sca),
            "lexstat" => Ok(Method::LexStat),
            _ => Err(Error::Param(format!("unknown clustering method {s:?} (expected sca or lexstat)"))),
        }
    }
}

impl Method {
    pub fn default_threshold(self) -> f64 {
        match self {
            Method::Sca => DEFAULT_SCA_THRESHOLD,
            Method::LexStat => DEFAULT_LEXSTAT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterParams {
    pub method: Method,
    /// Clusters merge while their average distance is at most this value.
    pub threshold: f64,
    pub scheme: ScoringScheme,
    pub lexstat: LexStatParams,
}

impl ClusterParams {
    pub fn new(method: Method) -> Self {
        ClusterParams {
            method,
            threshold: method.default_threshold(),
            scheme: ScoringScheme::sca(),
            lexstat: LexStatParams::default(),
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.lexstat.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::Param(format!("threshold {} outside (0, 1]", self.threshold)));
        }
        Ok(())
    }
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self::new(Method::Sca)
    }
}

/// One word to cluster. `id` must be unique within the call; it breaks ties
/// so the result does not depend on input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterItem<'a> {
    pub id: u64,
    pub doculect: &'a str,
    pub classes: Vec<char>,
}

const QUANT: f64 = 1e9;

fn quantize(d: f64) -> u128 {
    (d * QUANT).round() as u128
}

/// Average-linkage agglomeration cut at `params.threshold`. Returns a
/// 1-based class per item; classes are numbered by their smallest item id.
pub fn cluster_concept(
    items: &[ClusterItem<'_>],
    params: &ClusterParams,
    scorer: Option<&LexStatScorer>,
) -> Result<Vec<u64>> {
    params.validate()?;
    let n = items.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut dist = vec![vec![0u128; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&items[i], &items[j]);
            let d = match (params.method, scorer) {
                (Method::LexStat, Some(s)) => s.distance(a.doculect, &a.classes, b.doculect, &b.classes)?,
                (Method::LexStat, None) => return Err(Error::Param("lexstat clustering needs a scorer".into())),
                (Method::Sca, _) => sca_distance(&a.classes, &b.classes, &params.scheme)?,
            };
            dist[i][j] = quantize(d);
            dist[j][i] = dist[i][j];
        }
    }
    let theta = quantize(params.threshold);

    // Active clusters: members, smallest id. `sums[a][b]` is the total
    // pairwise distance between clusters a and b.
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut min_id: Vec<u64> = items.iter().map(|it| it.id).collect();
    let mut active: Vec<bool> = vec![true; n];
    let mut sums = dist;
    loop {
        let mut best: Option<(usize, usize)> = None;
        for a in (0..n).filter(|&a| active[a]) {
            for b in (a + 1..n).filter(|&b| active[b]) {
                let size = (members[a].len() * members[b].len()) as u128;
                if sums[a][b] > theta * size {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((x, y)) => {
                        let best_size = (members[x].len() * members[y].len()) as u128;
                        let lhs = sums[a][b] * best_size;
                        let rhs = sums[x][y] * size;
                        lhs < rhs || (lhs == rhs && pair_key(&min_id, a, b) < pair_key(&min_id, x, y))
                    }
                };
                if better {
                    best = Some((a, b));
                }
            }
        }
        let Some((a, b)) = best else { break };
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        min_id[a] = min_id[a].min(min_id[b]);
        active[b] = false;
        for c in 0..n {
            if active[c] && c != a {
                sums[a][c] += sums[b][c];
                sums[c][a] = sums[a][c];
            }
        }
    }

    let mut clusters: Vec<(u64, &Vec<usize>)> =
        (0..n).filter(|&a| active[a]).map(|a| (min_id[a], &members[a])).collect();
    clusters.sort();
    let mut labels = vec![0u64; n];
    for (k, (_, m)) in clusters.iter().enumerate() {
        for &i in m.iter() {
            labels[i] = k as u64 + 1;
        }
    }
    Ok(labels)
}

fn pair_key(min_id: &[u64], a: usize, b: usize) -> (u64, u64) {
    let (x, y) = (min_id[a], min_id[b]);
    (x.min(y), x.max(y))
}

/// Clusters every concept independently and fills `cogid`. Ids are unique
/// across the wordlist: concepts are numbered in declared order, classes
/// within a concept by smallest row id.
pub fn assign_cognates(wordlist: &Wordlist, params: &ClusterParams, table: &SoundClassTable) -> Result<Wordlist> {
    params.validate()?;
    let missing: Vec<String> = wordlist
        .rows()
        .iter()
        .filter(|r| r.tokens.as_ref().is_none_or(Vec::is_empty))
        .map(|r| r.id.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::data(format!("rows without tokens: {}", missing.join(", "))));
    }
    let classes: Vec<Vec<char>> = wordlist
        .rows()
        .iter()
        .map(|r| to_sound_classes(r.tokens.as_deref().unwrap_or_default(), table, false))
        .collect::<Result<_>>()?;

    let scorer = match params.method {
        Method::LexStat if wordlist.doculects().len() >= 2 => {
            let words: Vec<ScoredWord> = wordlist
                .rows()
                .iter()
                .zip(&classes)
                .map(|(r, c)| ScoredWord {
                    doculect: &r.doculect,
                    concept: &r.concept,
                    classes: c.clone(),
                })
                .collect();
            let doculects: Vec<String> = wordlist.doculects().iter().cloned().collect();
            Some(build_lexstat_scorer(&words, &doculects, &params.scheme, params.lexstat)?)
        }
        _ => None,
    };
    // A single doculect has nothing to compare; plain SCA is equivalent.
    let effective = match (&scorer, params.method) {
        (None, Method::LexStat) => ClusterParams {
            method: Method::Sca,
            ..params.clone()
        },
        _ => params.clone(),
    };

    let groups = wordlist.concept_groups();
    let local: Vec<Vec<u64>> = groups
        .par_iter()
        .map(|(_, rows)| {
            let items: Vec<ClusterItem> = rows
                .iter()
                .map(|&i| ClusterItem {
                    id: wordlist.rows()[i].id,
                    doculect: &wordlist.rows()[i].doculect,
                    classes: classes[i].clone(),
                })
                .collect();
            cluster_concept(&items, &effective, scorer.as_ref())
        })
        .collect::<Result<_>>()?;

    let mut cogids: HashMap<usize, u64> = HashMap::new();
    let mut offset = 0u64;
    for ((_, rows), labels) in groups.iter().zip(&local) {
        for (&i, &l) in rows.iter().zip(labels) {
            cogids.insert(i, offset + l);
        }
        offset += labels.iter().copied().max().unwrap_or(0);
    }
    let mut k = 0;
    wordlist.try_map_rows(|row| {
        let row = row.clone().with_cogid(cogids[&k]);
        k += 1;
        Ok(row)
    })
}

/// B-cubed F-score of a predicted labelling against a reference labelling
/// of the same items.
pub fn bcubed_f<P: Eq + std::hash::Hash + Ord, G: Eq + std::hash::Hash + Ord>(predicted: &[P], gold: &[G]) -> Result<f64> {
    if predicted.len() != gold.len() {
        return Err(Error::Param("labellings differ in length".into()));
    }
    if predicted.is_empty() {
        return Err(Error::Param("B-cubed needs at least one item".into()));
    }
    let mut pred_size: BTreeMap<&P, usize> = BTreeMap::new();
    let mut gold_size: BTreeMap<&G, usize> = BTreeMap::new();
    let mut both: BTreeMap<(&P, &G), usize> = BTreeMap::new();
    for (p, g) in predicted.iter().zip(gold) {
        *pred_size.entry(p).or_default() += 1;
        *gold_size.entry(g).or_default() += 1;
        *both.entry((p, g)).or_default() += 1;
    }
    let n = predicted.len() as f64;
    let (mut precision, mut recall) = (0.0, 0.0);
    for (p, g) in predicted.iter().zip(gold) {
        let overlap = both[&(p, g)] as f64;
        precision += overlap / pred_size[p] as f64;
        recall += overlap / gold_size[g] as f64;
    }
    let (precision, recall) = (precision / n, recall / n);
    Ok(2.0 * precision * recall / (precision + recall))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::WordRow;

    fn item(id: u64, s: &str) -> ClusterItem<'static> {
        ClusterItem {
            id,
            doculect: "x",
            classes: s.chars().collect(),
        }
    }

    #[test]
    fn small_concepts() {
        let p = ClusterParams::default();
        assert_eq!(cluster_concept(&[item(1, "TVM")], &p, None).unwrap(), [1]);
        let items = [item(1, "TVM"), item(2, "TVM"), item(3, "PVK")];
        assert_eq!(cluster_concept(&items, &p, None).unwrap(), [1, 1, 2]);
        let all = p.clone().with_threshold(1.0);
        assert_eq!(cluster_concept(&items, &all, None).unwrap(), [1, 1, 1]);
        assert!(cluster_concept(&items, &p.with_threshold(0.0), None).is_err());
    }

    #[test]
    fn permutation_relabels_only() {
        let p = ClusterParams::default();
        let items = [item(5, "TVMVK"), item(2, "PVRVK"), item(9, "TVMVK"), item(4, "PVRV")];
        let reversed: Vec<_> = items.iter().rev().cloned().collect();
        let a = cluster_concept(&items, &p, None).unwrap();
        let mut b = cluster_concept(&reversed, &p, None).unwrap();
        b.reverse();
        assert_eq!(a, b);
    }

    #[test]
    fn cognates_over_wordlist() {
        let table = SoundClassTable::dolgo();
        assert!(assign_cognates(&Wordlist::default(), &ClusterParams::default(), &table).unwrap().is_empty());
        let rows = vec![
            WordRow::new(1, "a", "hand", "x").with_ipa("hand").with_tokens(&["h", "a", "n", "d"]),
            WordRow::new(2, "b", "hand", "x").with_ipa("hant").with_tokens(&["h", "a", "n", "t"]),
            WordRow::new(3, "a", "foot", "x").with_ipa("fus").with_tokens(&["f", "u", "s"]),
            WordRow::new(4, "b", "foot", "x").with_ipa("pes").with_tokens(&["p", "e", "s"]),
        ];
        let wl = Wordlist::new(rows).unwrap();
        let out = assign_cognates(&wl, &ClusterParams::default(), &table).unwrap();
        let ids: Vec<u64> = out.rows().iter().map(|r| r.cogid.unwrap()).collect();
        assert_eq!(ids[0], ids[1]);
        assert_eq!(ids[2], ids[3]);
        assert_ne!(ids[0], ids[2]);

        let bare = Wordlist::new(vec![WordRow::new(7, "a", "hand", "x")]).unwrap();
        let err = assign_cognates(&bare, &ClusterParams::default(), &table).unwrap_err();
        assert!(err.to_string().contains('7'));
    }

    #[test]
    fn bcubed() {
        assert_eq!(bcubed_f(&[1, 1, 2], &["a", "a", "b"]).unwrap(), 1.0);
        // one cluster for two gold classes of size 2: P = 0.5, R = 1
        let f = bcubed_f(&[1, 1, 1, 1], &[1, 1, 2, 2]).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-12);
        assert!(bcubed_f::<u8, u8>(&[], &[]).is_err());
    }
}
