//! Global alignment of sound-class sequences with affine gaps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::read_to_string;
use crate::{Error, Result};

/// Pairwise class scores plus affine gap penalties.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringScheme {
    /// Explicit scores, keyed with the smaller class first.
    pairs: BTreeMap<(char, char), f64>,
    match_score: f64,
    mismatch_score: f64,
    gap_open: f64,
    gap_extend: f64,
}

fn ordered(a: char, b: char) -> (char, char) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

const CONSONANTS: [char; 10] = ['P', 'T', 'S', 'K', 'M', 'N', 'R', 'W', 'J', 'H'];

impl ScoringScheme {
    pub fn new(match_score: f64, mismatch_score: f64, gap_open: f64, gap_extend: f64) -> Result<Self> {
        ScoringScheme {
            pairs: BTreeMap::new(),
            match_score,
            mismatch_score,
            gap_open,
            gap_extend,
        }
        .validated()
    }

    /// match 1, mismatch -1, every gap position -1.
    pub fn unit() -> Self {
        Self::new(1.0, -1.0, -1.0, -1.0).expect("valid")
    }

    /// Scheme over the Dolgopolsky classes used for SCA distances.
    pub fn sca() -> Self {
        let mut pairs = BTreeMap::new();
        for c in CONSONANTS {
            pairs.insert((c, c), 10.0);
            pairs.insert(ordered(c, 'V'), -10.0);
        }
        pairs.insert(('V', 'V'), 5.0);
        for (a, b) in [('P', 'W'), ('M', 'N'), ('K', 'H'), ('T', 'S'), ('S', 'K'), ('R', 'J'), ('J', 'W')] {
            pairs.insert(ordered(a, b), 2.0);
        }
        pairs.insert(('?', '?'), 5.0);
        ScoringScheme {
            pairs,
            match_score: 5.0,
            mismatch_score: -5.0,
            gap_open: -10.0,
            gap_extend: -5.0,
        }
        .validated()
        .expect("valid")
    }

    pub fn with_pair(mut self, a: char, b: char, score: f64) -> Result<Self> {
        self.pairs.insert(ordered(a, b), score);
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        let all = [self.match_score, self.mismatch_score, self.gap_open, self.gap_extend];
        if all.iter().chain(self.pairs.values()).any(|x| !x.is_finite()) {
            return Err(Error::Param("scores must be finite".into()));
        }
        if self.gap_open >= 0.0 || self.gap_extend >= 0.0 {
            return Err(Error::Param("gap penalties must be negative".into()));
        }
        let identical = self
            .pairs
            .iter()
            .filter(|((a, b), _)| a == b)
            .map(|(_, &s)| s)
            .chain([self.match_score])
            .fold(f64::INFINITY, f64::min);
        let mismatch = self
            .pairs
            .iter()
            .filter(|((a, b), _)| a != b)
            .map(|(_, &s)| s)
            .chain([self.mismatch_score])
            .fold(f64::NEG_INFINITY, f64::max);
        if identical <= mismatch {
            return Err(Error::Param(format!(
                "identical-class score {identical} must exceed every mismatch score ({mismatch})"
            )));
        }
        Ok(self)
    }

    pub fn score(&self, a: char, b: char) -> f64 {
        match self.pairs.get(&ordered(a, b)) {
            Some(&s) => s,
            None if a == b => self.match_score,
            None => self.mismatch_score,
        }
    }

    pub fn gap_open(&self) -> f64 {
        self.gap_open
    }

    pub fn gap_extend(&self) -> f64 {
        self.gap_extend
    }

    /// CSV with header `a,b,score`. Rows with first field `match`,
    /// `mismatch`, `gap_open` or `gap_extend` and an empty second field set
    /// the defaults; the rest are single-character class pairs.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let ctx = "scoring scheme";
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "a,b,score" => {}
            _ => return Err(Error::parse(ctx, 1, "expected header `a,b,score`")),
        }
        let base = ScoringScheme::unit();
        let mut scheme = ScoringScheme { pairs: BTreeMap::new(), ..base };
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [a, b, s] = fields[..] else {
                return Err(Error::parse(ctx, i + 1, "expected 3 fields"));
            };
            let s: f64 = s
                .parse()
                .map_err(|_| Error::parse(ctx, i + 1, format!("invalid score {s:?}")))?;
            let single = |x: &str| {
                let mut it = x.chars();
                match (it.next(), it.next()) {
                    (Some(c), None) => Ok(c),
                    _ => Err(Error::parse(ctx, i + 1, format!("expected one class symbol, got {x:?}"))),
                }
            };
            match (a, b) {
                ("match", "") => scheme.match_score = s,
                ("mismatch", "") => scheme.mismatch_score = s,
                ("gap_open", "") => scheme.gap_open = s,
                ("gap_extend", "") => scheme.gap_extend = s,
                _ => {
                    scheme.pairs.insert(ordered(single(a)?, single(b)?), s);
                }
            }
        }
        scheme.validated()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_csv(&read_to_string(path)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,score\n");
        let _ = writeln!(out, "match,,{}", self.match_score);
        let _ = writeln!(out, "mismatch,,{}", self.mismatch_score);
        let _ = writeln!(out, "gap_open,,{}", self.gap_open);
        let _ = writeln!(out, "gap_extend,,{}", self.gap_extend);
        for ((a, b), s) in &self.pairs {
            let _ = writeln!(out, "{a},{b},{s}");
        }
        out
    }
}

impl Default for ScoringScheme {
    fn default() -> Self {
        Self::sca()
    }
}

/// Alignment column: indices into `a` and `b`; `None` is a gap.
pub type Column = (Option<usize>, Option<usize>);

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub columns: Vec<Column>,
    pub score: f64,
}

impl Alignment {
    /// Index pairs of the non-gap columns.
    pub fn matched(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.columns.iter().filter_map(|&(i, j)| Some((i?, j?)))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Match,
    /// `b` has a gap; `a[i]` consumed.
    GapB,
    /// `a` has a gap; `b[j]` consumed.
    GapA,
}

pub fn align(a: &[char], b: &[char], scheme: &ScoringScheme) -> Result<Alignment> {
    align_with(a, b, |x, y| scheme.score(x, y), scheme.gap_open, scheme.gap_extend)
}

/// Gotoh alignment with an arbitrary substitution function. A run of `L`
/// gap columns of one kind costs `open + (L - 1) * extend`.
pub fn align_with(
    a: &[char],
    b: &[char],
    score: impl Fn(char, char) -> f64,
    gap_open: f64,
    gap_extend: f64,
) -> Result<Alignment> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Param("cannot align an empty sequence".into()));
    }
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    let ninf = f64::NEG_INFINITY;
    let mut mm = vec![ninf; (n + 1) * w];
    let mut gb = vec![ninf; (n + 1) * w];
    let mut ga = vec![ninf; (n + 1) * w];
    mm[0] = 0.0;
    for i in 1..=n {
        gb[i * w] = gap_open + (i - 1) as f64 * gap_extend;
    }
    for j in 1..=m {
        ga[j] = gap_open + (j - 1) as f64 * gap_extend;
    }
    for i in 1..=n {
        for j in 1..=m {
            let d = (i - 1) * w + j - 1;
            mm[i * w + j] = score(a[i - 1], b[j - 1]) + mm[d].max(ga[d]).max(gb[d]);
            let up = (i - 1) * w + j;
            gb[i * w + j] = (mm[up] + gap_open).max(ga[up] + gap_open).max(gb[up] + gap_extend);
            let left = i * w + j - 1;
            ga[i * w + j] = (mm[left] + gap_open).max(ga[left] + gap_extend).max(gb[left] + gap_open);
        }
    }

    let at = |s: State, k: usize| match s {
        State::Match => mm[k],
        State::GapA => ga[k],
        State::GapB => gb[k],
    };
    // Preference order on ties.
    let order = [State::Match, State::GapA, State::GapB];
    let end = n * w + m;
    let best_of = |k: usize, cost: &dyn Fn(State) -> f64| {
        let mut best = order[0];
        for &s in &order[1..] {
            if at(s, k) + cost(s) > at(best, k) + cost(best) {
                best = s;
            }
        }
        best
    };
    let mut state = best_of(end, &|_| 0.0);
    let total = at(state, end);

    let (mut i, mut j) = (n, m);
    let mut columns = Vec::with_capacity(n + m);
    while i > 0 || j > 0 {
        match state {
            State::Match => {
                columns.push((Some(i - 1), Some(j - 1)));
                i -= 1;
                j -= 1;
                if i == 0 && j == 0 {
                    break;
                }
                state = best_of(i * w + j, &|_| 0.0);
            }
            State::GapB => {
                columns.push((Some(i - 1), None));
                i -= 1;
                if i == 0 && j == 0 {
                    break;
                }
                state = best_of(i * w + j, &|s| if s == State::GapB { gap_extend } else { gap_open });
            }
            State::GapA => {
                columns.push((None, Some(j - 1)));
                j -= 1;
                if i == 0 && j == 0 {
                    break;
                }
                state = best_of(i * w + j, &|s| if s == State::GapA { gap_extend } else { gap_open });
            }
        }
    }
    columns.reverse();
    Ok(Alignment { columns, score: total })
}

/// Self-normalized distance `1 - 2 S(a,b) / (S(a,a) + S(b,b))`, clamped to
/// `[0, 1]`. A non-positive denominator yields 1.
pub fn normalized_distance(sab: f64, saa: f64, sbb: f64) -> f64 {
    let denom = saa + sbb;
    if denom <= 0.0 {
        return 1.0;
    }
    (1.0 - 2.0 * sab / denom).clamp(0.0, 1.0)
}

pub fn sca_distance(a: &[char], b: &[char], scheme: &ScoringScheme) -> Result<f64> {
    if a == b {
        align(a, a, scheme)?;
        return Ok(0.0);
    }
    let sab = align(a, b, scheme)?.score;
    let saa = align(a, a, scheme)?.score;
    let sbb = align(b, b, scheme)?.score;
    Ok(normalized_distance(sab, saa, sbb))
}
