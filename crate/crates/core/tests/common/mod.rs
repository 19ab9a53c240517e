#![allow(dead_code, clippy::too_many_arguments)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent nested tree used by the oracles. Edge lengths sit on children.
#[derive(Debug, Clone)]
pub enum T {
    Leaf(String, f64),
    Node(Vec<T>, f64),
}

impl T {
    pub fn length(&self) -> f64 {
        match self {
            T::Leaf(_, l) | T::Node(_, l) => *l,
        }
    }

    pub fn leaves(&self) -> Vec<String> {
        match self {
            T::Leaf(s, _) => vec![s.clone()],
            T::Node(c, _) => c.iter().flat_map(T::leaves).collect(),
        }
    }

    pub fn newick(&self, lengths: bool) -> String {
        fn go(t: &T, lengths: bool, root: bool) -> String {
            let body = match t {
                T::Leaf(s, _) => s.clone(),
                T::Node(c, _) => {
                    let parts: Vec<String> = c.iter().map(|x| go(x, lengths, false)).collect();
                    format!("({})", parts.join(","))
                }
            };
            if lengths && !root {
                format!("{body}:{}", t.length())
            } else {
                body
            }
        }
        format!("{};", go(self, lengths, true))
    }

    fn internal_count(&self) -> usize {
        match self {
            T::Leaf(..) => 0,
            T::Node(c, _) => 1 + c.iter().map(T::internal_count).sum::<usize>(),
        }
    }

    /// Contracts the `k`-th non-root internal node in preorder.
    fn contract(&mut self, k: &mut usize) -> bool {
        let T::Node(children, _) = self else { return false };
        let mut i = 0;
        while i < children.len() {
            if let T::Node(..) = children[i] {
                if *k == 0 {
                    let T::Node(grand, _) = children.remove(i) else { unreachable!() };
                    for (off, g) in grand.into_iter().enumerate() {
                        children.insert(i + off, g);
                    }
                    return true;
                }
                *k -= 1;
                if children[i].contract(k) {
                    return true;
                }
            }
            i += 1;
        }
        false
    }

    /// Leaf sets below every non-root node.
    pub fn clusters(&self) -> Vec<BTreeSet<String>> {
        fn go(t: &T, out: &mut Vec<BTreeSet<String>>) -> BTreeSet<String> {
            match t {
                T::Leaf(s, _) => [s.clone()].into(),
                T::Node(c, _) => {
                    let mut all = BTreeSet::new();
                    for x in c {
                        let s = go(x, out);
                        out.push(s.clone());
                        all.extend(s);
                    }
                    all
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }
}

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("t{i}")).collect()
}

/// Random rooted binary tree on `n` labelled leaves, built by joining random
/// pairs. Edge lengths are integers in 1..=9 to keep path sums exact.
pub fn random_binary(n: usize, rng: &mut impl Rng) -> T {
    let mut pool: Vec<T> = labels(n)
        .into_iter()
        .map(|l| T::Leaf(l, rng.gen_range(1..=9) as f64))
        .collect();
    while pool.len() > 1 {
        pool.shuffle(rng);
        let a = pool.pop().unwrap();
        let b = pool.pop().unwrap();
        pool.push(T::Node(vec![a, b], rng.gen_range(1..=9) as f64));
    }
    pool.pop().unwrap()
}

/// Contracts `k` random internal edges.
pub fn contract_random(mut t: T, k: usize, rng: &mut impl Rng) -> T {
    for _ in 0..k {
        let internal = t.internal_count() - 1;
        if internal == 0 {
            break;
        }
        let mut idx = rng.gen_range(0..internal);
        assert!(t.contract(&mut idx));
    }
    t
}

/// Quartet topology from splits: 0 star, 1 ab|cd, 2 ac|bd, 3 ad|bc.
pub fn split_topology(clusters: &[BTreeSet<String>], q: [&str; 4]) -> u8 {
    for c in clusters {
        let inside: Vec<bool> = q.iter().map(|x| c.contains(*x)).collect();
        if inside.iter().filter(|&&b| b).count() != 2 {
            continue;
        }
        // the pair containing q[0] on one side
        let partner = (1..4).find(|&i| inside[i] == inside[0]).unwrap();
        return partner as u8;
    }
    0
}

/// Brute-force (resolved, contradicted) counts with stars in the inferred
/// tree not counted as contradictions.
pub fn oracle_quartets(inferred: &T, gold: &T) -> (u64, u64) {
    let ci = inferred.clusters();
    let cg = gold.clusters();
    let mut l = gold.leaves();
    l.sort();
    let n = l.len();
    let (mut resolved, mut contradicted) = (0, 0);
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let q = [l[a].as_str(), l[b].as_str(), l[c].as_str(), l[d].as_str()];
                    let g = split_topology(&cg, q);
                    if g == 0 {
                        continue;
                    }
                    resolved += 1;
                    let t = split_topology(&ci, q);
                    if t != 0 && t != g {
                        contradicted += 1;
                    }
                }
            }
        }
    }
    (resolved, contradicted)
}

/// Path-length distances between all leaves, in preorder leaf order.
pub fn path_distances(t: &T) -> (Vec<String>, Vec<Vec<f64>>) {
    // depth of each leaf plus the list of ancestors, by walking the nesting
    fn go(t: &T, path: &mut Vec<usize>, depth: f64, next: &mut usize, out: &mut Vec<(String, Vec<usize>, Vec<f64>)>, depths: &mut Vec<f64>) {
        match t {
            T::Leaf(s, _) => out.push((s.clone(), path.clone(), depths.clone())),
            T::Node(c, _) => {
                let id = *next;
                *next += 1;
                path.push(id);
                depths.push(depth);
                for x in c {
                    go(x, path, depth + x.length(), next, out, depths);
                }
                path.pop();
                depths.pop();
            }
        }
    }
    fn leaf_depths(t: &T, depth: f64, out: &mut Vec<f64>) {
        match t {
            T::Leaf(..) => out.push(depth),
            T::Node(c, _) => c.iter().for_each(|x| leaf_depths(x, depth + x.length(), out)),
        }
    }
    let mut info = Vec::new();
    go(t, &mut Vec::new(), 0.0, &mut 0, &mut info, &mut Vec::new());
    let mut ld = Vec::new();
    leaf_depths(t, 0.0, &mut ld);
    let n = info.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (pi, pj) = (&info[i].1, &info[j].1);
            let common = pi.iter().zip(pj).take_while(|(a, b)| a == b).count();
            let lca_depth = info[i].2[common - 1];
            values[i][j] = ld[i] + ld[j] - 2.0 * lca_depth;
        }
    }
    (info.into_iter().map(|x| x.0).collect(), values)
}

#[derive(Clone, Copy, PartialEq)]
enum Op {
    M,
    GapA,
    GapB,
}

/// Best global alignment score by enumerating every alignment. A run of
/// `L` gap columns of one kind costs `open + (L - 1) * extend`.
pub fn exhaustive_alignment_score(
    a: &[char],
    b: &[char],
    score: &impl Fn(char, char) -> f64,
    open: f64,
    extend: f64,
) -> f64 {
    fn go(
        a: &[char],
        b: &[char],
        i: usize,
        j: usize,
        prev: Option<Op>,
        score: &impl Fn(char, char) -> f64,
        open: f64,
        extend: f64,
    ) -> f64 {
        if i == a.len() && j == b.len() {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        if i < a.len() && j < b.len() {
            best = best.max(score(a[i], b[j]) + go(a, b, i + 1, j + 1, Some(Op::M), score, open, extend));
        }
        if j < b.len() {
            let c = if prev == Some(Op::GapA) { extend } else { open };
            best = best.max(c + go(a, b, i, j + 1, Some(Op::GapA), score, open, extend));
        }
        if i < a.len() {
            let c = if prev == Some(Op::GapB) { extend } else { open };
            best = best.max(c + go(a, b, i + 1, j, Some(Op::GapB), score, open, extend));
        }
        best
    }
    go(a, b, 0, 0, None, score, open, extend)
}

/// Score of an alignment recomputed from its columns.
pub fn rescore(
    a: &[char],
    b: &[char],
    columns: &[(Option<usize>, Option<usize>)],
    score: &impl Fn(char, char) -> f64,
    open: f64,
    extend: f64,
) -> f64 {
    let mut total = 0.0;
    let mut prev = None;
    for &col in columns {
        let op = match col {
            (Some(i), Some(j)) => {
                total += score(a[i], b[j]);
                Op::M
            }
            (None, Some(_)) => {
                total += if prev == Some(Op::GapA) { extend } else { open };
                Op::GapA
            }
            (Some(_), None) => {
                total += if prev == Some(Op::GapB) { extend } else { open };
                Op::GapB
            }
            (None, None) => panic!("empty column"),
        };
        prev = Some(op);
    }
    total
}
