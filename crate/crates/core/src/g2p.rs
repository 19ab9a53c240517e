//! Table-driven grapheme-to-phoneme transcription.
//!
//! A ruleset is a grapheme→phoneme map applied greedily leftmost-longest,
//! bracketed by two lists of context-sensitive rewrite rules:
//!
//! ```text
//! % comment
//! n -> m / _ p        rewrite n before p
//! e -> 0 / # _        delete word-initial e
//! ```
//!
//! Pre-rules run on the orthography, post-rules on the phoneme string.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use crate::error::read_to_string;
use crate::{Error, Result};

/// What to do with characters the map does not cover.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum UnknownPolicy {
    Strict,
    #[default]
    PassThrough,
    Drop,
}

impl std::str::FromStr for UnknownPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(UnknownPolicy::Strict),
            "pass" | "pass-through" => Ok(UnknownPolicy::PassThrough),
            "drop" => Ok(UnknownPolicy::Drop),
            _ => Err(Error::Param(format!("unknown policy {s:?}"))),
        }
    }
}

/// `from -> to / left _ right`, `#` anchoring a context at the word edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteRule {
    from: Vec<char>,
    to: String,
    left: Vec<char>,
    left_anchored: bool,
    right: Vec<char>,
    right_anchored: bool,
}

impl RewriteRule {
    pub fn parse(line: &str) -> Result<Self> {
        let (change, context) = match line.split_once('/') {
            Some((c, ctx)) => (c, Some(ctx)),
            None => (line, None),
        };
        let (from, to) = change
            .split_once("->")
            .ok_or_else(|| Error::Data("missing `->`".into()))?;
        let from: String = from.trim().nfc().collect();
        if from.is_empty() || from.contains('#') {
            return Err(Error::Data("rule needs a non-empty target without `#`".into()));
        }
        let to = match to.trim() {
            "0" => String::new(),
            t => t.nfc().collect(),
        };
        let (mut left, mut right) = (String::new(), String::new());
        if let Some(ctx) = context {
            let (l, r) = ctx
                .split_once('_')
                .ok_or_else(|| Error::Data("context needs `_`".into()))?;
            left = l.trim().nfc().collect();
            right = r.trim().nfc().collect();
        }
        let left_anchored = left.starts_with('#');
        let right_anchored = right.ends_with('#');
        let left = left.trim_start_matches('#').to_string();
        let right = right.trim_end_matches('#').to_string();
        if left.contains('#') || right.contains('#') || to.contains('#') {
            return Err(Error::Data("`#` only allowed at the outer edge of a context".into()));
        }
        Ok(RewriteRule {
            from: from.chars().collect(),
            to,
            left: left.chars().collect(),
            left_anchored,
            right: right.chars().collect(),
            right_anchored,
        })
    }

    fn matches_at(&self, s: &[char], i: usize) -> bool {
        let end = i + self.from.len();
        if end > s.len() || s[i..end] != self.from[..] {
            return false;
        }
        if self.left.len() > i || s[i - self.left.len()..i] != self.left[..] {
            return false;
        }
        if self.left_anchored && i != self.left.len() {
            return false;
        }
        let rend = end + self.right.len();
        if rend > s.len() || s[end..rend] != self.right[..] {
            return false;
        }
        !self.right_anchored || rend == s.len()
    }

    /// Rewrites every non-overlapping match, scanning left to right. Contexts
    /// are matched against the input of this rule.
    pub fn apply(&self, word: &str) -> String {
        let s: Vec<char> = word.chars().collect();
        let mut out = String::with_capacity(word.len());
        let mut i = 0;
        while i < s.len() {
            if self.matches_at(&s, i) {
                out.push_str(&self.to);
                i += self.from.len();
            } else {
                out.push(s[i]);
                i += 1;
            }
        }
        out
    }
}

fn parse_rules(text: &str, context: &str) -> Result<Vec<RewriteRule>> {
    let mut rules = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('%').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let rule = RewriteRule::parse(line).map_err(|e| Error::parse(context, idx + 1, e.to_string()))?;
        rules.push(rule);
    }
    Ok(rules)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcription {
    pub ipa: String,
    /// Characters with no mapping, in order of occurrence.
    pub unmapped: Vec<char>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ruleset {
    name: String,
    /// Sorted longest grapheme first, ties by grapheme.
    map: Vec<(String, String)>,
    lookup: HashMap<String, String>,
    max_key_chars: usize,
    pre_rules: Vec<RewriteRule>,
    post_rules: Vec<RewriteRule>,
    policy: UnknownPolicy,
}

impl Ruleset {
    pub fn new<S: AsRef<str>>(name: &str, pairs: &[(S, S)]) -> Result<Self> {
        let mut lookup = HashMap::new();
        for (g, p) in pairs {
            let g: String = g.as_ref().nfc().collect::<String>().to_lowercase();
            if g.is_empty() {
                return Err(Error::data(format!("{name}: empty grapheme key")));
            }
            let p: String = p.as_ref().nfc().collect();
            if lookup.insert(g.clone(), p).is_some() {
                return Err(Error::data(format!("{name}: duplicate grapheme {g:?}")));
            }
        }
        let mut map: Vec<(String, String)> = lookup.iter().map(|(g, p)| (g.clone(), p.clone())).collect();
        map.sort_by(|a, b| b.0.chars().count().cmp(&a.0.chars().count()).then_with(|| a.0.cmp(&b.0)));
        let max_key_chars = map.first().map_or(0, |(g, _)| g.chars().count());
        Ok(Ruleset {
            name: name.to_string(),
            map,
            lookup,
            max_key_chars,
            pre_rules: Vec::new(),
            post_rules: Vec::new(),
            policy: UnknownPolicy::default(),
        })
    }

    /// Reads an `orth,phon` map CSV and optional pre/post rule files.
    pub fn compile(map_path: &Path, pre_path: Option<&Path>, post_path: Option<&Path>) -> Result<Self> {
        let name = map_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let pre = pre_path.map(read_to_string).transpose()?;
        let post = post_path.map(read_to_string).transpose()?;
        Self::compile_str(&name, &read_to_string(map_path)?, pre.as_deref(), post.as_deref())
    }

    pub fn compile_str(name: &str, map_csv: &str, pre: Option<&str>, post: Option<&str>) -> Result<Self> {
        let ctx = format!("g2p map {name}");
        let mut lines = map_csv.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_start_matches('\u{feff}').trim() == "orth,phon" => {}
            _ => return Err(Error::parse(ctx, 1, "expected header `orth,phon`")),
        }
        let mut pairs = Vec::new();
        let mut seen = BTreeSet::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (g, p) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(&ctx, idx + 1, "expected `orth,phon`"))?;
            let key = g.nfc().collect::<String>().to_lowercase();
            if !seen.insert(key.clone()) {
                return Err(Error::parse(&ctx, idx + 1, format!("duplicate grapheme {key:?}")));
            }
            pairs.push((g.to_string(), p.to_string()));
        }
        let mut rs = Ruleset::new(name, &pairs).map_err(|e| Error::parse(&ctx, 0, e.to_string()))?;
        if let Some(text) = pre {
            rs.pre_rules = parse_rules(text, &format!("g2p pre-rules {name}"))?;
        }
        if let Some(text) = post {
            rs.post_rules = parse_rules(text, &format!("g2p post-rules {name}"))?;
        }
        Ok(rs)
    }

    pub fn with_policy(mut self, policy: UnknownPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_pre_rules(mut self, rules: Vec<RewriteRule>) -> Self {
        self.pre_rules = rules;
        self
    }

    pub fn with_post_rules(mut self, rules: Vec<RewriteRule>) -> Self {
        self.post_rules = rules;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn policy(&self) -> UnknownPolicy {
        self.policy
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.map
    }

    pub fn pre_rules(&self) -> &[RewriteRule] {
        &self.pre_rules
    }

    pub fn post_rules(&self) -> &[RewriteRule] {
        &self.post_rules
    }

    /// Longest phoneme string in the map, in chars.
    pub fn max_phoneme_chars(&self) -> usize {
        self.map.iter().map(|(_, p)| p.chars().count()).max().unwrap_or(0)
    }

    /// Transcribes without failing on unmapped characters; they are recorded
    /// and kept or dropped according to the policy (strict keeps them).
    pub fn transcribe_detailed(&self, word: &str) -> Transcription {
        let mut s: String = word.to_lowercase().nfc().collect();
        for rule in &self.pre_rules {
            s = rule.apply(&s);
        }
        let chars: Vec<char> = s.chars().collect();
        let mut ipa = String::with_capacity(s.len());
        let mut unmapped = Vec::new();
        let mut key = String::new();
        let mut i = 0;
        'outer: while i < chars.len() {
            for len in (1..=self.max_key_chars.min(chars.len() - i)).rev() {
                key.clear();
                key.extend(&chars[i..i + len]);
                if let Some(p) = self.lookup.get(&key) {
                    ipa.push_str(p);
                    i += len;
                    continue 'outer;
                }
            }
            let ch = chars[i];
            if ch.is_whitespace() {
                ipa.push(ch);
            } else {
                unmapped.push(ch);
                if self.policy != UnknownPolicy::Drop {
                    ipa.push(ch);
                }
            }
            i += 1;
        }
        for rule in &self.post_rules {
            ipa = rule.apply(&ipa);
        }
        Transcription { ipa, unmapped }
    }

    pub fn transcribe(&self, word: &str) -> Result<String> {
        finish(self, self.transcribe_detailed(word))
    }
}

fn finish(ruleset: &Ruleset, t: Transcription) -> Result<String> {
    match (ruleset.policy, t.unmapped.first()) {
        (UnknownPolicy::Strict, Some(&ch)) => Err(Error::Unmapped { ch }),
        _ => Ok(t.ipa),
    }
}

/// Tries each ruleset in order and returns the first transcription that
/// covers every character; failing that, the one with the fewest unmapped
/// characters (earlier ruleset on ties).
pub fn backoff_transcribe(rulesets: &[Ruleset], word: &str) -> Result<String> {
    let mut best: Option<(&Ruleset, Transcription)> = None;
    for rs in rulesets {
        let t = rs.transcribe_detailed(word);
        if t.unmapped.is_empty() {
            return Ok(t.ipa);
        }
        if best.as_ref().is_none_or(|(_, b)| t.unmapped.len() < b.unmapped.len()) {
            best = Some((rs, t));
        }
    }
    match best {
        Some((rs, t)) => finish(rs, t),
        None => Err(Error::Param("backoff needs at least one ruleset".into())),
    }
}

/// Rulesets per doculect; more than one ruleset means backoff across scripts.
#[derive(Debug, Clone, Default)]
pub struct G2pRegistry {
    rulesets: BTreeMap<String, Vec<Ruleset>>,
}

impl G2pRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, doculect: &str, ruleset: Ruleset) {
        self.rulesets.entry(doculect.to_string()).or_default().push(ruleset);
    }

    /// Loads every `<doculect>[.<variant>].csv` in `dir`. Optional rule files
    /// sit next to the map as `<stem>.pre` and `<stem>.post`. Several maps for
    /// one doculect form a backoff chain in file-name order.
    pub fn load_dir(dir: &Path, policy: UnknownPolicy) -> Result<Self> {
        let mut maps: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        maps.sort();
        let mut reg = G2pRegistry::new();
        for map in maps {
            let stem = map.file_stem().unwrap().to_string_lossy().into_owned();
            let doculect = stem.split('.').next().unwrap_or(&stem).to_string();
            let pre = map.with_extension("pre");
            let post = map.with_extension("post");
            let rs = Ruleset::compile(
                &map,
                pre.exists().then_some(pre.as_path()),
                post.exists().then_some(post.as_path()),
            )?
            .with_policy(policy);
            reg.insert(&doculect, rs);
        }
        Ok(reg)
    }

    pub fn get(&self, doculect: &str) -> Option<&[Ruleset]> {
        self.rulesets.get(doculect).map(Vec::as_slice)
    }

    pub fn supported(&self) -> BTreeSet<String> {
        self.rulesets.keys().cloned().collect()
    }

    pub fn contains(&self, doculect: &str) -> bool {
        self.rulesets.contains_key(doculect)
    }

    pub fn transcribe(&self, doculect: &str, word: &str) -> Option<Result<String>> {
        self.get(doculect).map(|rs| backoff_transcribe(rs, word))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hungarian() -> Ruleset {
        Ruleset::new("hun", &[("a", "ɒ"), ("sz", "s"), ("ó", "oː")]).unwrap()
    }

    #[test]
    fn longest_key_first() {
        let rs = hungarian();
        assert_eq!(rs.entries().len(), 3);
        assert_eq!(rs.entries()[0].0, "sz");
    }

    #[test]
    fn greedy_longest_match() {
        assert_eq!(hungarian().transcribe("szó").unwrap(), "soː");
        assert_eq!(hungarian().transcribe("Szó").unwrap(), "soː");
        assert_eq!(hungarian().transcribe("").unwrap(), "");
    }

    #[test]
    fn unknown_policies() {
        let rs = Ruleset::new("x", &[("a", "ɒ")]).unwrap();
        let strict = rs.clone().with_policy(UnknownPolicy::Strict);
        assert!(matches!(strict.transcribe("ab"), Err(Error::Unmapped { ch: 'b' })));
        assert_eq!(rs.transcribe("ab").unwrap(), "ɒb");
        assert_eq!(rs.with_policy(UnknownPolicy::Drop).transcribe("ab").unwrap(), "ɒ");
    }

    #[test]
    fn duplicate_key_rejected() {
        assert!(Ruleset::new("x", &[("a", "ɒ"), ("a", "a")]).is_err());
        assert!(Ruleset::compile_str("x", "orth,phon\na,ɒ\nA,a\n", None, None).is_err());
        assert!(Ruleset::new("x", &[("", "a")]).is_err());
    }

    #[test]
    fn rule_file_parsing() {
        let rs = Ruleset::compile_str("x", "orth,phon\nn,n\np,p\n", None, Some("% nasal assimilation\nn -> m / _ p\n"))
            .unwrap();
        assert_eq!(rs.post_rules().len(), 1);
        assert_eq!(rs.transcribe("np").unwrap(), "mp");
        assert_eq!(rs.transcribe("nn").unwrap(), "nn");
        let err = Ruleset::compile_str("x", "orth,phon\n", Some("a -> b\n\nc d\n"), None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn boundary_contexts() {
        let initial = RewriteRule::parse("e -> 0 / # _").unwrap();
        assert_eq!(initial.apply("eke"), "ke");
        let final_ = RewriteRule::parse("d -> t / _ #").unwrap();
        assert_eq!(final_.apply("dad"), "dat");
        let between = RewriteRule::parse("s -> z / a _ a").unwrap();
        assert_eq!(between.apply("asas"), "azas");
        assert!(RewriteRule::parse("a -> b / x#_").is_err());
    }

    #[test]
    fn backoff_picks_covering_script() {
        let latin = Ruleset::new("lat", &[("d", "d"), ("a", "a")]).unwrap();
        let cyr = Ruleset::new("cyr", &[("д", "d"), ("а", "a")]).unwrap();
        assert_eq!(backoff_transcribe(&[latin.clone(), cyr.clone()], "да").unwrap(), "da");
        assert_eq!(backoff_transcribe(std::slice::from_ref(&latin), "da").unwrap(), latin.transcribe("da").unwrap());
        // both leave one character unmapped: earlier ruleset wins
        let mixed = "dд";
        assert_eq!(latin.transcribe_detailed(mixed).unmapped.len(), 1);
        assert_eq!(cyr.transcribe_detailed(mixed).unmapped.len(), 1);
        assert_eq!(backoff_transcribe(&[latin.clone(), cyr.clone()], mixed).unwrap(), "dд");
        assert_eq!(backoff_transcribe(&[cyr, latin], mixed).unwrap(), "dd");
        assert!(backoff_transcribe(&[], "x").is_err());
    }

    /// Independent leftmost-longest segmentation by trying every key at each position.
    fn oracle(pairs: &[(String, String)], word: &str) -> String {
        let mut out = String::new();
        let mut rest = word;
        while !rest.is_empty() {
            let best = pairs
                .iter()
                .filter(|(g, _)| rest.starts_with(g.as_str()))
                .max_by_key(|(g, _)| g.len());
            match best {
                Some((g, p)) => {
                    out.push_str(p);
                    rest = &rest[g.len()..];
                }
                None => {
                    let c = rest.chars().next().unwrap();
                    out.push(c);
                    rest = &rest[c.len_utf8()..];
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn matches_leftmost_longest_oracle(
            keys in prop::collection::btree_map("[abc]{1,3}", "[xyz]{0,2}", 1..8),
            word in "[abcd]{0,10}",
        ) {
            let pairs: Vec<(String, String)> = keys.into_iter().collect();
            let rs = Ruleset::new("r", &pairs).unwrap();
            let t = rs.transcribe(&word).unwrap();
            prop_assert_eq!(&t, &oracle(&pairs, &word));
            let bound = rs.max_phoneme_chars().max(1) * word.chars().count();
            prop_assert!(t.chars().count() <= bound);
        }

        #[test]
        fn covering_first_ruleset_equals_plain(word in "[abc]{0,8}") {
            let first = Ruleset::new("a", &[("a", "ɑ"), ("b", "β"), ("c", "ts"), ("ab", "p")]).unwrap();
            let second = Ruleset::new("b", &[("a", "e")]).unwrap();
            prop_assert_eq!(backoff_transcribe(&[first.clone(), second], &word).unwrap(), first.transcribe(&word).unwrap());
        }
    }
}
