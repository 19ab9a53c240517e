use rayon::prelude::*;

use super::Tree;
use crate::{Error, Result};

/// Induced topology of four leaves `(a, b, c, d)`, named relative to the
/// order in which they were given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuartetTopology {
    AbCd,
    AcBd,
    AdBc,
    Star,
}

/// How a quartet resolved in the gold tree but unresolved in the inferred
/// tree is scored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum StarPolicy {
    /// Not a contradiction (counts toward the resolved total only).
    #[default]
    Exclude,
    /// Counted as a contradiction.
    Contradict,
}

impl std::str::FromStr for StarPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exclude" => Ok(StarPolicy::Exclude),
            "contradict" => Ok(StarPolicy::Contradict),
            _ => Err(Error::Param(format!("unknown star policy {s:?}"))),
        }
    }
}

/// Four-point condition: the pairing with the strictly smallest sum of path
/// lengths is the split; no strict minimum means the four paths meet in one node.
fn four_point(ab: u32, cd: u32, ac: u32, bd: u32, ad: u32, bc: u32) -> QuartetTopology {
    let s1 = ab + cd;
    let s2 = ac + bd;
    let s3 = ad + bc;
    if s1 < s2 && s1 < s3 {
        QuartetTopology::AbCd
    } else if s2 < s1 && s2 < s3 {
        QuartetTopology::AcBd
    } else if s3 < s1 && s3 < s2 {
        QuartetTopology::AdBc
    } else {
        QuartetTopology::Star
    }
}

pub fn quartet_topology(tree: &Tree, leaves: [&str; 4]) -> Result<QuartetTopology> {
    let d = tree.path_lengths(&leaves)?;
    Ok(four_point(d[0][1], d[2][3], d[0][2], d[1][3], d[0][3], d[1][2]))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GqCounts {
    /// Quartets resolved in the gold tree.
    pub resolved: u64,
    /// Gold-resolved quartets scored as contradicted.
    pub contradicted: u64,
    /// Gold-resolved quartets left unresolved by the inferred tree.
    pub unresolved_in_inferred: u64,
}

impl GqCounts {
    pub fn distance(&self) -> f64 {
        self.contradicted as f64 / self.resolved as f64
    }
}

struct Distances {
    n: usize,
    d: Vec<u32>,
}

impl Distances {
    fn new(tree: &Tree, labels: &[&str]) -> Result<Self> {
        let rows = tree.path_lengths(labels)?;
        Ok(Distances {
            n: labels.len(),
            d: rows.into_iter().flatten().collect(),
        })
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> u32 {
        self.d[i * self.n + j]
    }

    #[inline]
    fn topology(&self, a: usize, b: usize, c: usize, d: usize) -> QuartetTopology {
        four_point(
            self.get(a, b),
            self.get(c, d),
            self.get(a, c),
            self.get(b, d),
            self.get(a, d),
            self.get(b, c),
        )
    }
}

/// Scans all C(n,4) quartets of the shared leaf set.
pub fn gq_counts(inferred: &Tree, gold: &Tree, policy: StarPolicy) -> Result<GqCounts> {
    let li = inferred.leaf_labels();
    let lg = gold.leaf_labels();
    if li != lg {
        let diff: Vec<&str> = li.symmetric_difference(&lg).map(String::as_str).collect();
        return Err(Error::data(format!("leaf sets differ: {}", diff.join(", "))));
    }
    let labels: Vec<&str> = lg.iter().map(String::as_str).collect();
    let n = labels.len();
    if n < 4 {
        return Err(Error::data(format!("quartet distance needs at least 4 leaves, got {n}")));
    }
    let dg = Distances::new(gold, &labels)?;
    let di = Distances::new(inferred, &labels)?;
    let counts = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut acc = GqCounts::default();
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        let g = dg.topology(a, b, c, d);
                        if g == QuartetTopology::Star {
                            continue;
                        }
                        acc.resolved += 1;
                        let t = di.topology(a, b, c, d);
                        if t == QuartetTopology::Star {
                            acc.unresolved_in_inferred += 1;
                            if policy == StarPolicy::Contradict {
                                acc.contradicted += 1;
                            }
                        } else if t != g {
                            acc.contradicted += 1;
                        }
                    }
                }
            }
            acc
        })
        .reduce(GqCounts::default, |x, y| GqCounts {
            resolved: x.resolved + y.resolved,
            contradicted: x.contradicted + y.contradicted,
            unresolved_in_inferred: x.unresolved_in_inferred + y.unresolved_in_inferred,
        });
    if counts.resolved == 0 {
        return Err(Error::data("gold tree fully unresolved"));
    }
    Ok(counts)
}

/// Generalized quartet distance: the share of gold-resolved quartets whose
/// topology the inferred tree contradicts.
pub fn gq_distance(inferred: &Tree, gold: &Tree, policy: StarPolicy) -> Result<f64> {
    gq_counts(inferred, gold, policy).map(|c| c.distance())
}
