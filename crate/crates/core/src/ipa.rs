//! IPA tokenization and sound-class conversion.
//!
//! A token is one base letter followed by everything that modifies it:
//! combining diacritics, superscript modifiers, length marks and tone
//! letters. A tie bar joins the letters on either side into one token.
//! Stress marks, syllable dots, intonation bars and whitespace are dropped.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::read_to_string;
use crate::{Error, Result};

/// Base letters accepted by the strict tokenizer.
pub const IPA_LETTERS: &str = "aeiouyæøœɶɑɒɐɘəɵɜɞɤɯʉɨɪʏʊɛɔʌɚɝ\
pbfɸɓvβʋwʍɥtdθðʈɖɗszʃʒɕʑʂʐɧkgɡxɣqɢχʁcɟɠʄʛʦʣʧʤʨʥʘǀǃǂǁ\
mɱnɲŋɳɴrlɾɽɹɻʀɭʎʟɺɬɮʙjʝɰhɦʔħʕʜʢʡ";

pub const IPA_VOWELS: &str = "aeiouyæøœɶɑɒɐɘəɵɜɞɤɯʉɨɪʏʊɛɔʌɚɝ";

const BUNDLED_DOLGO: &str = include_str!("../data/dolgo.csv");

/// Label emitted in lenient mode for segments missing from the class table.
pub const UNKNOWN_CLASS: char = '?';

pub fn is_tie_bar(ch: char) -> bool {
    matches!(ch, '\u{0361}' | '\u{035C}')
}

/// Stress, syllable and intonation marks plus whitespace.
pub fn is_discardable(ch: char) -> bool {
    ch.is_whitespace() || matches!(ch, 'ˈ' | 'ˌ' | '.' | '|' | '‖' | '‿')
}

/// Spacing characters that attach to the preceding letter: superscripts,
/// length marks, tone letters, the ejective apostrophe.
pub fn is_modifier(ch: char) -> bool {
    let c = ch as u32;
    ((0x02B0..=0x02FF).contains(&c) && !matches!(ch, 'ˈ' | 'ˌ'))
        || (0x1D2C..=0x1D6A).contains(&c)
        || (0x1D9B..=0x1DBF).contains(&c)
        || matches!(ch, 'ⁿ' | 'ⁱ')
}

fn is_attachment(ch: char) -> bool {
    (is_combining_mark(ch) && !is_tie_bar(ch)) || is_modifier(ch)
}

pub fn is_ipa_letter(ch: char) -> bool {
    IPA_LETTERS.contains(ch)
}

pub fn is_vowel(ch: char) -> bool {
    IPA_VOWELS.contains(ch)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TokenizeOptions {
    /// Reject characters that are not IPA letters, diacritics, modifiers,
    /// tie bars or discardable marks.
    pub strict: bool,
    /// Join adjacent vowel tokens into one.
    pub merge_diphthongs: bool,
}

impl TokenizeOptions {
    pub fn strict() -> Self {
        TokenizeOptions {
            strict: true,
            merge_diphthongs: false,
        }
    }
}

/// One IPA segment: base letter(s) plus attached diacritics, in NFD.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IpaToken(String);

impl IpaToken {
    /// The token in NFD, as produced by the tokenizer.
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The token in NFC, for serialization.
    pub fn nfc(&self) -> String {
        self.0.nfc().collect()
    }

    /// The token with all diacritics, modifiers and tie bars removed.
    pub fn base(&self) -> String {
        base_symbol(&self.0)
    }

    fn is_vowel(&self) -> bool {
        let base = self.base();
        !base.is_empty() && base.chars().all(is_vowel)
    }
}

impl fmt::Display for IpaToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<IpaToken> for String {
    fn from(t: IpaToken) -> String {
        t.0
    }
}

impl AsRef<str> for IpaToken {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

pub fn base_symbol(segment: &str) -> String {
    segment
        .nfd()
        .filter(|&c| !is_attachment(c) && !is_tie_bar(c))
        .collect()
}

pub fn tokenize(ipa: &str, options: TokenizeOptions) -> Result<Vec<IpaToken>> {
    let nfd: String = ipa.nfd().collect();
    let mut tokens: Vec<String> = Vec::new();
    let mut join_next = false;
    for (offset, ch) in nfd.char_indices() {
        if is_discardable(ch) {
            continue;
        }
        if is_tie_bar(ch) || is_attachment(ch) {
            match tokens.last_mut() {
                Some(last) => last.push(ch),
                None if options.strict => return Err(Error::Tokenize { ch, offset }),
                None => tokens.push(ch.to_string()),
            }
            if is_tie_bar(ch) {
                join_next = true;
            }
            continue;
        }
        if options.strict && !is_ipa_letter(ch) {
            return Err(Error::Tokenize { ch, offset });
        }
        match tokens.last_mut() {
            Some(last) if join_next => last.push(ch),
            _ => tokens.push(ch.to_string()),
        }
        join_next = false;
    }
    let mut tokens: Vec<IpaToken> = tokens.into_iter().map(IpaToken).collect();
    if options.merge_diphthongs {
        tokens = merge_vowel_runs(tokens);
    }
    Ok(tokens)
}

fn merge_vowel_runs(tokens: Vec<IpaToken>) -> Vec<IpaToken> {
    let mut out: Vec<IpaToken> = Vec::with_capacity(tokens.len());
    let mut prev_vowel = false;
    for tok in tokens {
        let vowel = tok.is_vowel();
        match out.last_mut() {
            Some(last) if vowel && prev_vowel => last.0.push_str(&tok.0),
            _ => out.push(tok),
        }
        prev_vowel = vowel;
    }
    out
}

/// Mapping from IPA base symbols to sound-class labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoundClassTable {
    entries: HashMap<String, char>,
}

impl SoundClassTable {
    /// Parses a `symbol,class` CSV.
    pub fn parse(text: &str) -> Result<Self> {
        let ctx = "sound-class table";
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "symbol,class" => {}
            _ => return Err(Error::parse(ctx, 1, "expected header `symbol,class`")),
        }
        let mut entries = HashMap::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (sym, class) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(ctx, lineno, "expected `symbol,class`"))?;
            let mut chars = class.trim().chars();
            let label = match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii_uppercase() || c.is_ascii_digit() => c,
                _ => return Err(Error::parse(ctx, lineno, format!("invalid class label {class:?}"))),
            };
            let sym: String = sym.trim().nfd().collect();
            if sym.is_empty() {
                return Err(Error::parse(ctx, lineno, "empty symbol"));
            }
            if entries.insert(sym.clone(), label).is_some() {
                return Err(Error::parse(ctx, lineno, format!("duplicate symbol {sym:?}")));
            }
        }
        Ok(SoundClassTable { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?)
    }

    /// The bundled Dolgopolsky class table.
    pub fn dolgo() -> Self {
        Self::parse(BUNDLED_DOLGO).expect("bundled table is valid")
    }

    pub fn get(&self, symbol: &str) -> Option<char> {
        self.entries.get(symbol).copied()
    }

    /// Class of a token: its full base symbol if listed (affricates such as
    /// `ts`), otherwise the class of its first base letter.
    pub fn class_of(&self, token: &str) -> Option<char> {
        let base = base_symbol(token);
        if let Some(c) = self.get(&base) {
            return Some(c);
        }
        let first = base.chars().next()?;
        self.get(first.encode_utf8(&mut [0; 4]))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Maps each token to its class label. In lenient mode unknown segments
/// become [`UNKNOWN_CLASS`].
pub fn to_sound_classes<S: AsRef<str>>(
    tokens: &[S],
    table: &SoundClassTable,
    strict: bool,
) -> Result<Vec<char>> {
    tokens
        .iter()
        .map(|t| match table.class_of(t.as_ref()) {
            Some(c) => Ok(c),
            None if strict => Err(Error::UnknownSoundClass(t.as_ref().to_string())),
            None => Ok(UNKNOWN_CLASS),
        })
        .collect()
}
