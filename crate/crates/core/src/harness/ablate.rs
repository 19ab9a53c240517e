//! Three-variant comparison of reference and automatic transcriptions by
//! the quartet distance of the resulting trees to a gold tree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::cluster::{assign_cognates, ClusterParams};
use crate::corpus::{WordRow, Wordlist};
use crate::g2p::G2pRegistry;
use crate::ipa::{tokenize, SoundClassTable, TokenizeOptions};
use crate::matrix::encode_binary;
use crate::tree::{gq_distance, hamming_matrix, nj_tree, StarPolicy, Tree};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Variant {
    /// Reference IPA and reference tokens.
    Original,
    /// Reference IPA, automatic tokenization.
    AutoToken,
    /// Automatic transcription of the form, automatic tokenization.
    AutoBoth,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Original, Variant::AutoToken, Variant::AutoBoth];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::AutoToken => "auto-token",
            Variant::AutoBoth => "auto-both",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Param(format!("unknown variant {s:?}")))
    }
}

/// Where the tree for each variant comes from.
#[derive(Debug, Clone)]
pub enum TreeSource {
    /// Neighbor joining on Hamming distances of the binary matrix.
    NeighborJoining,
    /// Externally inferred trees; variants without a tree are skipped.
    External(BTreeMap<Variant, Tree>),
}

#[derive(Debug, Clone)]
pub struct AblationConfig<'a> {
    pub registry: &'a G2pRegistry,
    pub table: &'a SoundClassTable,
    pub cluster: ClusterParams,
    pub tokenizer: TokenizeOptions,
    pub star_policy: StarPolicy,
    pub trees: TreeSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub variant: Variant,
    pub gq_distance: f64,
    /// Leaves shared by the inferred and the gold tree.
    pub n_taxa: usize,
    pub tree: Tree,
}

pub fn ablation_tsv(rows: &[AblationRow]) -> String {
    let mut out = String::from("variant\tgq_distance\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{:.6}", r.variant.as_str(), r.gq_distance);
    }
    out
}

fn retokenized(rows: &[WordRow], options: TokenizeOptions, stage: &str) -> Vec<WordRow> {
    let mut dropped = 0;
    let out = rows
        .iter()
        .filter_map(|r| {
            let tokens = r.ipa.as_deref().and_then(|ipa| tokenize(ipa, options).ok());
            match tokens {
                Some(t) if !t.is_empty() => {
                    let t: Vec<String> = t.into_iter().map(|t| t.nfc()).collect();
                    Some(r.clone().with_tokens(&t))
                }
                _ => {
                    dropped += 1;
                    None
                }
            }
        })
        .collect();
    if dropped > 0 {
        log::warn!(target: "ablate", "{stage}: dropped {dropped} rows that failed tokenization");
    }
    out
}

/// Rows for one variant. The input rows must carry reference IPA and tokens.
pub fn variant_rows(wordlist: &Wordlist, variant: Variant, config: &AblationConfig<'_>) -> Result<Wordlist> {
    if let Some(r) = wordlist.rows().iter().find(|r| r.ipa.is_none() || r.tokens.is_none()) {
        return Err(Error::data(format!("row {} lacks reference IPA or tokens", r.id)));
    }
    let rows = match variant {
        Variant::Original => wordlist.rows().to_vec(),
        Variant::AutoToken => retokenized(wordlist.rows(), config.tokenizer, variant.as_str()),
        Variant::AutoBoth => {
            let mut missing = BTreeSet::new();
            let mut failed = 0;
            let transcribed: Vec<WordRow> = wordlist
                .rows()
                .iter()
                .filter_map(|r| match config.registry.transcribe(&r.doculect, &r.form) {
                    None => {
                        missing.insert(r.doculect.as_str());
                        None
                    }
                    Some(Err(_)) => {
                        failed += 1;
                        None
                    }
                    Some(Ok(ipa)) => {
                        let mut row = WordRow::new(r.id, &r.doculect, &r.concept, &r.form).with_ipa(&ipa);
                        row.cogid = r.cogid;
                        Some(row)
                    }
                })
                .collect();
            for d in &missing {
                log::warn!(target: "ablate", "no G2P ruleset for {d}; dropped from auto-both");
            }
            if failed > 0 {
                log::warn!(target: "ablate", "auto-both: {failed} forms failed to transcribe");
            }
            retokenized(&transcribed, config.tokenizer, variant.as_str())
        }
    };
    if wordlist.allows_synonyms() {
        Wordlist::with_synonyms(rows)
    } else {
        Wordlist::new(rows)
    }
}

/// Clusters, encodes and builds the NJ tree of a tokenized wordlist.
pub fn infer_tree(wordlist: &Wordlist, cluster: &ClusterParams, table: &SoundClassTable) -> Result<Tree> {
    let cognates = assign_cognates(wordlist, cluster, table)?;
    let matrix = encode_binary(&cognates)?;
    nj_tree(&hamming_matrix(&matrix)?)
}

/// Scores `inferred` against `gold` on their common leaves.
pub fn score_on_common_leaves(inferred: &Tree, gold: &Tree, policy: StarPolicy) -> Result<(f64, usize)> {
    let common: BTreeSet<String> = inferred.leaf_labels().intersection(&gold.leaf_labels()).cloned().collect();
    if common.len() < 4 {
        return Err(Error::data(format!(
            "only {} leaves shared by inferred and gold tree; need 4",
            common.len()
        )));
    }
    let d = gq_distance(&inferred.restrict(&common)?, &gold.restrict(&common)?, policy)?;
    Ok((d, common.len()))
}

pub fn ablate(wordlist: &Wordlist, gold: &Tree, config: &AblationConfig<'_>) -> Result<Vec<AblationRow>> {
    let doculects: BTreeSet<String> = wordlist.doculects().iter().cloned().collect();
    let outside: Vec<String> = gold.leaf_labels().difference(&doculects).cloned().collect();
    if !outside.is_empty() {
        log::warn!(target: "ablate", "gold leaves without data: {}", outside.join(", "));
    }
    let mut rows = Vec::new();
    for variant in Variant::ALL {
        let tree = match &config.trees {
            TreeSource::NeighborJoining => {
                let wl = variant_rows(wordlist, variant, config)?;
                infer_tree(&wl, &config.cluster, config.table)?
            }
            TreeSource::External(trees) => match trees.get(&variant) {
                Some(t) => t.clone(),
                None => continue,
            },
        };
        let (gq_distance, n_taxa) = score_on_common_leaves(&tree, gold, config.star_policy)?;
        rows.push(AblationRow {
            variant,
            gq_distance,
            n_taxa,
            tree,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::g2p::Ruleset;

    fn toy() -> Wordlist {
        // two clear cognate sets per concept split {a,b} from {c,d}
        let words = [
            ("a", "1", "pata"), ("b", "1", "pata"), ("c", "1", "kumu"), ("d", "1", "kumu"),
            ("a", "2", "lini"), ("b", "2", "lini"), ("c", "2", "sore"), ("d", "2", "sore"),
            ("a", "3", "mesa"), ("b", "3", "mesa"), ("c", "3", "mesa"), ("d", "3", "mesa"),
            ("a", "4", "toko"), ("b", "4", "ruwe"), ("c", "4", "ruwe"), ("d", "4", "ruwe"),
        ];
        let rows = words
            .iter()
            .enumerate()
            .map(|(i, (d, c, w))| {
                let t: Vec<String> = w.chars().map(String::from).collect();
                WordRow::new(i as u64 + 1, d, c, w).with_ipa(w).with_tokens(&t)
            })
            .collect();
        Wordlist::new(rows).unwrap()
    }

    fn identity_registry() -> G2pRegistry {
        let letters: Vec<(String, String)> = "ptkmnlsrwaeiou".chars().map(|c| (c.to_string(), c.to_string())).collect();
        let mut reg = G2pRegistry::new();
        for d in ["a", "b", "c", "d"] {
            reg.insert(d, Ruleset::new("id", &letters).unwrap());
        }
        reg
    }

    #[test]
    fn identity_g2p_matches_original() {
        let reg = identity_registry();
        let table = SoundClassTable::dolgo();
        let config = AblationConfig {
            registry: &reg,
            table: &table,
            cluster: ClusterParams::default(),
            tokenizer: TokenizeOptions::default(),
            star_policy: StarPolicy::Exclude,
            trees: TreeSource::NeighborJoining,
        };
        let gold = Tree::parse("((a,b),(c,d));").unwrap();
        let rows = ablate(&toy(), &gold, &config).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].gq_distance, 0.0);
        assert_eq!(rows[0].tree, rows[2].tree);
        assert_eq!(ablation_tsv(&rows).lines().next(), Some("variant\tgq_distance"));
    }

    #[test]
    fn missing_ruleset_drops_doculect() {
        let full = identity_registry();
        let mut reg = G2pRegistry::new();
        for d in ["a", "b", "c"] {
            reg.insert(d, full.get(d).unwrap()[0].clone());
        }
        let table = SoundClassTable::dolgo();
        let config = AblationConfig {
            registry: &reg,
            table: &table,
            cluster: ClusterParams::default(),
            tokenizer: TokenizeOptions::default(),
            star_policy: StarPolicy::Exclude,
            trees: TreeSource::NeighborJoining,
        };
        let wl = variant_rows(&toy(), Variant::AutoBoth, &config).unwrap();
        assert!(!wl.doculects().contains("d"));
        assert_eq!(wl.len(), 12);
    }

    #[test]
    fn external_trees() {
        let reg = G2pRegistry::new();
        let table = SoundClassTable::dolgo();
        let mut trees = BTreeMap::new();
        trees.insert(Variant::Original, Tree::parse("((a,c),(b,d),e);").unwrap());
        let config = AblationConfig {
            registry: &reg,
            table: &table,
            cluster: ClusterParams::default(),
            tokenizer: TokenizeOptions::default(),
            star_policy: StarPolicy::Exclude,
            trees: TreeSource::External(trees),
        };
        let gold = Tree::parse("((a,b),(c,d));").unwrap();
        let rows = ablate(&toy(), &gold, &config).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].gq_distance, rows[0].n_taxa), (1.0, 4));
    }
}
