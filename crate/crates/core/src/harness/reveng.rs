//! Transcription error rates of automatic G2P output against reference IPA.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use unicode_normalization::UnicodeNormalization;

use crate::corpus::Wordlist;
use crate::g2p::G2pRegistry;
use crate::ipa::{to_sound_classes, tokenize, SoundClassTable, TokenizeOptions};
use crate::{Error, Result};

/// A reference transcription and an automatic one for the same word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptionPair {
    pub doculect: String,
    pub reference: String,
    pub candidate: String,
}

impl TranscriptionPair {
    pub fn new(doculect: &str, reference: &str, candidate: &str) -> Self {
        TranscriptionPair {
            doculect: doculect.into(),
            reference: reference.into(),
            candidate: candidate.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageErrorRate {
    pub doculect: String,
    pub n: usize,
    /// Share of words whose transcription differs from the reference.
    pub e1: Option<f64>,
    /// Share of words whose sound-class sequence differs.
    pub e2: Option<f64>,
    /// Words where either side failed to tokenize; included in e2.
    pub untokenizable: usize,
}

impl LanguageErrorRate {
    pub fn e2_exceeds_e1(&self) -> bool {
        matches!((self.e1, self.e2), (Some(e1), Some(e2)) if e2 > e1)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorRateReport {
    pub languages: Vec<LanguageErrorRate>,
}

impl ErrorRateReport {
    pub fn get(&self, doculect: &str) -> Option<&LanguageErrorRate> {
        self.languages.iter().find(|l| l.doculect == doculect)
    }

    /// Merges the e1 and e2 parts of two reports over the same pairs.
    pub fn merge(mut self, other: ErrorRateReport) -> Self {
        for o in other.languages {
            match self.languages.iter_mut().find(|l| l.doculect == o.doculect) {
                Some(l) => {
                    l.e1 = l.e1.or(o.e1);
                    l.e2 = l.e2.or(o.e2);
                    l.untokenizable = l.untokenizable.max(o.untokenizable);
                }
                None => self.languages.push(o),
            }
        }
        self.languages.sort_by(|a, b| a.doculect.cmp(&b.doculect));
        self
    }

    /// One row per language; rates are word-level proportions.
    pub fn to_tsv(&self) -> String {
        let fmt = |x: Option<f64>| x.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"));
        let mut out = String::from("# e1, e2: proportion of words with an incorrect transcription / sound-class sequence\n");
        out.push_str("doculect\tn\te1\te2\tuntokenizable\te2_gt_e1\n");
        for l in &self.languages {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                l.doculect,
                l.n,
                fmt(l.e1),
                fmt(l.e2),
                l.untokenizable,
                l.e2_exceeds_e1() as u8
            );
        }
        out
    }
}

fn group(pairs: &[TranscriptionPair]) -> Result<BTreeMap<&str, Vec<&TranscriptionPair>>> {
    if pairs.is_empty() {
        return Err(Error::Param("no transcription pairs".into()));
    }
    let mut by_lang: BTreeMap<&str, Vec<&TranscriptionPair>> = BTreeMap::new();
    for p in pairs {
        by_lang.entry(&p.doculect).or_default().push(p);
    }
    Ok(by_lang)
}

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

pub fn error_rate_exact(pairs: &[TranscriptionPair]) -> Result<ErrorRateReport> {
    let languages = group(pairs)?
        .into_iter()
        .map(|(d, ps)| {
            let wrong = ps.iter().filter(|p| nfc(&p.reference) != nfc(&p.candidate)).count();
            LanguageErrorRate {
                doculect: d.to_string(),
                n: ps.len(),
                e1: Some(wrong as f64 / ps.len() as f64),
                e2: None,
                untokenizable: 0,
            }
        })
        .collect();
    Ok(ErrorRateReport { languages })
}

fn classes(ipa: &str, options: TokenizeOptions, table: &SoundClassTable) -> Option<Vec<char>> {
    let tokens = tokenize(ipa, options).ok()?;
    to_sound_classes(&tokens, table, false).ok()
}

/// Both sides are tokenized and mapped to classes; a word is correct when
/// the class sequences agree. Untokenizable words count as errors.
pub fn error_rate_soundclass(
    pairs: &[TranscriptionPair],
    options: TokenizeOptions,
    table: &SoundClassTable,
) -> Result<ErrorRateReport> {
    let languages = group(pairs)?
        .into_iter()
        .map(|(d, ps)| {
            let mut wrong = 0;
            let mut untokenizable = 0;
            for p in &ps {
                match (classes(&p.reference, options, table), classes(&p.candidate, options, table)) {
                    (Some(a), Some(b)) => wrong += (a != b) as usize,
                    _ => {
                        wrong += 1;
                        untokenizable += 1;
                    }
                }
            }
            LanguageErrorRate {
                doculect: d.to_string(),
                n: ps.len(),
                e1: None,
                e2: Some(wrong as f64 / ps.len() as f64),
                untokenizable,
            }
        })
        .collect();
    Ok(ErrorRateReport { languages })
}

pub fn error_rates(
    pairs: &[TranscriptionPair],
    options: TokenizeOptions,
    table: &SoundClassTable,
) -> Result<ErrorRateReport> {
    let report = error_rate_exact(pairs)?.merge(error_rate_soundclass(pairs, options, table)?);
    for l in report.languages.iter().filter(|l| l.e2_exceeds_e1()) {
        log::warn!(target: "reveng", "{}: sound-class error rate exceeds exact error rate", l.doculect);
    }
    Ok(report)
}

/// Pairs each row's IPA with the G2P transcription of its form. Rows of
/// doculects without a ruleset, or without IPA or form, are skipped; a
/// failed transcription becomes an empty candidate.
pub fn transcription_pairs(wordlist: &Wordlist, registry: &G2pRegistry) -> Vec<TranscriptionPair> {
    wordlist
        .rows()
        .iter()
        .filter(|r| !r.form.is_empty())
        .filter_map(|r| {
            let reference = r.ipa.as_deref()?;
            let candidate = registry.transcribe(&r.doculect, &r.form)?.unwrap_or_default();
            Some(TranscriptionPair::new(&r.doculect, reference, &candidate))
        })
        .collect()
}

/// Share of words whose automatic tokenization differs from the reference
/// segmentation. Tokenizer failures count as mismatches.
pub fn tokenization_error_rate<S: AsRef<str>>(pairs: &[(S, Vec<S>)], options: TokenizeOptions) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Param("no tokenization pairs".into()));
    }
    let wrong = pairs
        .iter()
        .filter(|(ipa, reference)| match tokenize(ipa.as_ref(), options) {
            Ok(tokens) => {
                tokens.len() != reference.len()
                    || tokens.iter().zip(reference).any(|(t, r)| t.as_str() != nfd(r.as_ref()))
            }
            Err(_) => true,
        })
        .count();
    Ok(wrong as f64 / pairs.len() as f64)
}

fn nfd(s: &str) -> String {
    s.nfd().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Vec<TranscriptionPair> {
        items.iter().map(|(a, b)| TranscriptionPair::new("x", a, b)).collect()
    }

    #[test]
    fn exact() {
        let r = error_rate_exact(&pairs(&[("ab", "ab"), ("ab", "ba")])).unwrap();
        assert_eq!(r.get("x").unwrap().e1, Some(0.5));
        let r = error_rate_exact(&pairs(&[("ab", "ab")])).unwrap();
        assert_eq!(r.get("x").unwrap().e1, Some(0.0));
        // composed and decomposed forms are equal
        let r = error_rate_exact(&pairs(&[("\u{e3}", "a\u{303}")])).unwrap();
        assert_eq!(r.get("x").unwrap().e1, Some(0.0));
        assert!(error_rate_exact(&[]).is_err());
    }

    #[test]
    fn sound_class() {
        let t = SoundClassTable::dolgo();
        let o = TokenizeOptions::default();
        let r = error_rate_soundclass(&pairs(&[("tam", "dam")]), o, &t).unwrap();
        assert_eq!(r.get("x").unwrap().e2, Some(0.0));
        let r = error_rate_soundclass(&pairs(&[("tam", "sam")]), o, &t).unwrap();
        assert_eq!(r.get("x").unwrap().e2, Some(1.0));
        let r = error_rate_soundclass(&pairs(&[("tam", "t@m")]), TokenizeOptions::strict(), &t).unwrap();
        assert_eq!(r.get("x").unwrap().untokenizable, 1);
        assert!(error_rate_soundclass(&[], o, &t).is_err());
    }

    #[test]
    fn flags_and_tsv() {
        let t = SoundClassTable::dolgo();
        let ps = vec![
            TranscriptionPair::new("b", "tam", "dam"),
            TranscriptionPair::new("a", "tam", "tam"),
            TranscriptionPair::new("a", "tam", "t@m"),
        ];
        let r = error_rates(&ps, TokenizeOptions::strict(), &t).unwrap();
        assert_eq!(r.languages.len(), 2);
        assert_eq!(r.languages[0].doculect, "a");
        assert!(!r.languages[0].e2_exceeds_e1());
        let tsv = r.to_tsv();
        assert!(tsv.contains("a\t2\t0.500000\t0.500000\t1\t0\n"));
        assert!(tsv.contains("b\t1\t1.000000\t0.000000\t0\t0\n"));
    }

    #[test]
    fn tokenization() {
        let o = TokenizeOptions::default();
        let good: Vec<(&str, Vec<&str>)> = vec![("tam", vec!["t", "a", "m"])];
        assert_eq!(tokenization_error_rate(&good, o).unwrap(), 0.0);
        let mixed: Vec<(&str, Vec<&str>)> = vec![
            ("tam", vec!["t", "a", "m"]),
            ("tʃa", vec!["tʃ", "a"]),
            ("t͡ʃa", vec!["t͡ʃ", "a"]),
            ("aː", vec!["aː"]),
            ("pʰa", vec!["p", "ʰ", "a"]),
        ];
        assert_eq!(tokenization_error_rate(&mixed, o).unwrap(), 0.4);
        assert!(tokenization_error_rate::<&str>(&[], o).is_err());
    }
}
