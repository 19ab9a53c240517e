use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::{is_glottocode, is_iso_code};
use crate::error::read_to_string;
use crate::{Error, Result};

const HEADER: &str = "iso,glottocode,priority";

/// Many-to-many ISO-639-3 to Glottocode table. Each ISO code maps to its
/// candidate glottocodes in ascending priority order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LanguageMap {
    entries: BTreeMap<String, Vec<String>>,
}

impl LanguageMap {
    pub fn parse(text: &str) -> Result<Self> {
        let ctx = "language map";
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_start_matches('\u{feff}').trim() == HEADER => {}
            _ => return Err(Error::parse(ctx, 1, format!("expected header `{HEADER}`"))),
        }
        let mut seen = BTreeSet::new();
        let mut raw: BTreeMap<String, Vec<(i64, usize, String)>> = BTreeMap::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [iso, glotto, priority] = fields[..] else {
                return Err(Error::parse(ctx, lineno, "expected 3 fields"));
            };
            if !is_iso_code(iso) {
                return Err(Error::parse(ctx, lineno, format!("invalid ISO code {iso:?}")));
            }
            if !is_glottocode(glotto) {
                return Err(Error::parse(ctx, lineno, format!("invalid glottocode {glotto:?}")));
            }
            let priority: i64 = priority
                .parse()
                .map_err(|_| Error::parse(ctx, lineno, format!("invalid priority {priority:?}")))?;
            if !seen.insert((iso.to_string(), glotto.to_string())) {
                return Err(Error::parse(
                    ctx,
                    lineno,
                    format!("duplicate mapping {iso},{glotto}"),
                ));
            }
            raw.entry(iso.to_string())
                .or_default()
                .push((priority, lineno, glotto.to_string()));
        }
        let entries = raw
            .into_iter()
            .map(|(iso, mut cands)| {
                cands.sort();
                (iso, cands.into_iter().map(|(_, _, g)| g).collect())
            })
            .collect();
        Ok(LanguageMap { entries })
    }

    pub fn candidates(&self, iso: &str) -> Option<&[String]> {
        self.entries.get(iso).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn load_language_map(path: &Path) -> Result<LanguageMap> {
    LanguageMap::parse(&read_to_string(path)?)
}

/// First-priority glottocode for `iso`, if the code is mapped at all.
pub fn resolve_language<'m>(iso: &str, map: &'m LanguageMap) -> Option<&'m str> {
    map.candidates(iso)
        .and_then(|c| c.first())
        .map(String::as_str)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row() {
        let map = LanguageMap::parse("iso,glottocode,priority\nhun,hung1274,1\n").unwrap();
        assert_eq!(map.candidates("hun").unwrap(), ["hung1274"]);
        assert_eq!(resolve_language("hun", &map), Some("hung1274"));
        assert_eq!(resolve_language("zzz", &map), None);
    }

    #[test]
    fn header_only_is_empty() {
        assert!(LanguageMap::parse("iso,glottocode,priority\n").unwrap().is_empty());
    }

    #[test]
    fn sorted_by_priority() {
        let map =
            LanguageMap::parse("iso,glottocode,priority\nxx,abcd1234,2\nxx,efgh5678,1\n").unwrap();
        assert_eq!(map.candidates("xx").unwrap(), ["efgh5678", "abcd1234"]);
        assert_eq!(resolve_language("xx", &map), Some("efgh5678"));
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = LanguageMap::parse("iso,glottocode,priority\nhun,hung1274,1\nhun;x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = LanguageMap::parse("iso,glottocode,priority\nhun,hung1274,one\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn duplicate_pair_rejected() {
        let err =
            LanguageMap::parse("iso,glottocode,priority\nhun,hung1274,1\nhun,hung1274,2\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn missing_header_rejected() {
        assert!(LanguageMap::parse("hun,hung1274,1\n").is_err());
    }
}
