use super::{Subtree, Tree};
use crate::matrix::{Cell, CharacterMatrix};
use crate::{Error, Result};

/// Symmetric pairwise distances between labelled taxa.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::data("distance matrix is not square"));
        }
        for i in 0..n {
            if values[i][i] != 0.0 {
                return Err(Error::data(format!("non-zero diagonal for {}", labels[i])));
            }
            for j in 0..i {
                let (a, b) = (values[i][j], values[j][i]);
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::data(format!("invalid distance {a} for ({}, {})", labels[i], labels[j])));
                }
                if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                    return Err(Error::data(format!(
                        "asymmetric distances for ({}, {}): {a} vs {b}",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(DistanceMatrix { labels, values })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Relaxed PHYLIP square distance matrix.
    pub fn to_phylip(&self) -> String {
        let mut out = format!("{}\n", self.len());
        for (label, row) in self.labels.iter().zip(&self.values) {
            out.push_str(label);
            for v in row {
                out.push_str(&format!(" {v:.6}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Proportion of differing cells over sites where both taxa have data.
pub fn hamming_matrix(matrix: &CharacterMatrix) -> Result<DistanceMatrix> {
    let n = matrix.taxa().len();
    if n < 2 {
        return Err(Error::data("hamming distances need at least 2 taxa"));
    }
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..i {
            let (mut comparable, mut diff) = (0usize, 0usize);
            for (a, b) in matrix.row(i).iter().zip(matrix.row(j)) {
                if *a != Cell::Missing && *b != Cell::Missing {
                    comparable += 1;
                    diff += usize::from(a != b);
                }
            }
            if comparable == 0 {
                return Err(Error::data(format!(
                    "no comparable sites between {} and {}",
                    matrix.taxa()[i],
                    matrix.taxa()[j]
                )));
            }
            let d = diff as f64 / comparable as f64;
            values[i][j] = d;
            values[j][i] = d;
        }
    }
    DistanceMatrix::new(matrix.taxa().to_vec(), values)
}

fn leaf(label: &str) -> Subtree {
    Subtree {
        label: Some(label.to_string()),
        length: None,
        children: Vec::new(),
    }
}

fn with_length(mut s: Subtree, len: f64) -> Subtree {
    s.length = Some(len.max(0.0));
    s
}

/// Neighbor joining. Equal Q-values are broken toward the smallest
/// (i, j) pair in the current working order; negative branch lengths are
/// clamped to zero. The result hangs from the final three-way join.
pub fn nj_tree(dist: &DistanceMatrix) -> Result<Tree> {
    let dist = DistanceMatrix::new(dist.labels.clone(), dist.values.clone())?;
    let n = dist.len();
    if n < 3 {
        return Err(Error::data(format!("neighbor joining needs at least 3 taxa, got {n}")));
    }
    let mut d = dist.values;
    let mut nodes: Vec<Subtree> = dist.labels.iter().map(|l| leaf(l)).collect();
    while nodes.len() > 3 {
        let r = nodes.len();
        let sums: Vec<f64> = d.iter().map(|row| row.iter().sum()).collect();
        let (mut bi, mut bj, mut best) = (0, 1, f64::INFINITY);
        for i in 0..r {
            for j in i + 1..r {
                let q = (r as f64 - 2.0) * d[i][j] - sums[i] - sums[j];
                if q < best {
                    (bi, bj, best) = (i, j, q);
                }
            }
        }
        let dij = d[bi][bj];
        let li = 0.5 * dij + (sums[bi] - sums[bj]) / (2.0 * (r as f64 - 2.0));
        let lj = dij - li;
        let new_row: Vec<f64> = (0..r).map(|k| 0.5 * (d[bi][k] + d[bj][k] - dij)).collect();

        let nj_node = nodes.remove(bj);
        let ni_node = std::mem::replace(
            &mut nodes[bi],
            Subtree {
                label: None,
                length: None,
                children: Vec::new(),
            },
        );
        nodes[bi].children = vec![with_length(ni_node, li), with_length(nj_node, lj)];
        for k in 0..r {
            d[bi][k] = new_row[k];
            d[k][bi] = new_row[k];
        }
        d[bi][bi] = 0.0;
        d.remove(bj);
        for row in &mut d {
            row.remove(bj);
        }
    }
    let l0 = 0.5 * (d[0][1] + d[0][2] - d[1][2]);
    let l1 = 0.5 * (d[0][1] + d[1][2] - d[0][2]);
    let l2 = 0.5 * (d[0][2] + d[1][2] - d[0][1]);
    let mut it = nodes.into_iter();
    let children = vec![
        with_length(it.next().unwrap(), l0),
        with_length(it.next().unwrap(), l1),
        with_length(it.next().unwrap(), l2),
    ];
    Tree::from_subtree(Subtree {
        label: None,
        length: None,
        children,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{gq_distance, StarPolicy};

    fn dm(labels: &[&str], v: Vec<Vec<f64>>) -> DistanceMatrix {
        DistanceMatrix::new(labels.iter().map(|s| s.to_string()).collect(), v).unwrap()
    }

    #[test]
    fn three_taxa() {
        let d = dm(&["a", "b", "c"], vec![vec![0.0, 3.0, 4.0], vec![3.0, 0.0, 5.0], vec![4.0, 5.0, 0.0]]);
        let t = nj_tree(&d).unwrap();
        assert_eq!(t.to_newick(), "(a:1,b:2,c:3);");
    }

    #[test]
    fn additive_recovery() {
        // ((a:1,b:2):1,(c:1,d:3):2,e:1)
        let gold = Tree::parse("((a:1,b:2):1,(c:1,d:3):2,e:1);").unwrap();
        let labels = ["a", "b", "c", "d", "e"];
        let raw = [
            [0.0, 3.0, 5.0, 7.0, 3.0],
            [3.0, 0.0, 6.0, 8.0, 4.0],
            [5.0, 6.0, 0.0, 4.0, 4.0],
            [7.0, 8.0, 4.0, 0.0, 6.0],
            [3.0, 4.0, 4.0, 6.0, 0.0],
        ];
        let d = dm(&labels, raw.iter().map(|r| r.to_vec()).collect());
        let t = nj_tree(&d).unwrap();
        assert_eq!(gq_distance(&t, &gold, StarPolicy::Exclude).unwrap(), 0.0);
    }

    #[test]
    fn equal_distances_are_deterministic() {
        let v = vec![vec![0.0, 1.0, 1.0, 1.0], vec![1.0, 0.0, 1.0, 1.0], vec![1.0, 1.0, 0.0, 1.0], vec![1.0, 1.0, 1.0, 0.0]];
        let d = dm(&["a", "b", "c", "d"], v);
        let first = nj_tree(&d).unwrap().to_newick();
        assert_eq!(first, "((a:0.5,b:0.5):0,c:0.5,d:0.5);");
        for _ in 0..5 {
            assert_eq!(nj_tree(&d).unwrap().to_newick(), first);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let asym = vec![vec![0.0, 1.0, 2.0], vec![1.5, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        assert!(DistanceMatrix::new(labels.clone(), asym).is_err());
        let two = dm(&["a", "b"], vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(nj_tree(&two).is_err());
    }
}
