use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use proptest::prelude::*;

use cogforge::corpus::{
    load_language_map, load_synset_dump, load_wordlist, parse_synset_dump, resolve_language, synset_dump_to_string,
    write_wordlist, LanguageRef, Sense, Synset, SynsetKind, SynsetStore,
};
use cogforge::select::filter_concept_synsets;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn language_map_fixture() {
    let map = load_language_map(&fixture("langmap.csv")).unwrap();
    assert_eq!(resolve_language("hun", &map), Some("hung1274"));
    assert_eq!(resolve_language("zzz", &map), None);
    assert_eq!(resolve_language("xx", &map), Some("efgh5678"));
    assert_eq!(resolve_language("est", &map), Some("esto1258"));
}

#[test]
fn three_line_dump_languages_are_the_union() {
    let store = load_synset_dump(&fixture("dump3.jsonl")).unwrap();
    assert_eq!(store.len(), 3);
    let langs: BTreeSet<&str> = store.languages().iter().map(|l| l.iso()).collect();
    assert_eq!(langs, ["deu", "eng", "est", "fin", "hun"].into());
    let recount: BTreeSet<&str> = store.synsets().flat_map(|s| s.senses.iter().map(|x| x.lang.iso())).collect();
    assert_eq!(recount, langs);
}

#[test]
fn entity_filter_on_ten_synsets() {
    let store = load_synset_dump(&fixture("dump10.jsonl")).unwrap();
    assert_eq!(store.len(), 10);
    let concepts = filter_concept_synsets(&store);
    assert_eq!(concepts.len(), 7);
    assert!(concepts.synsets().all(|s| s.kind == SynsetKind::Concept));
}

#[test]
fn dump_serialization_is_identity_on_fixture() {
    let store = load_synset_dump(&fixture("dump3.jsonl")).unwrap();
    let again = parse_synset_dump(&synset_dump_to_string(&store)).unwrap();
    assert_eq!(again, store);
}

#[test]
fn wordlist_write_load_is_byte_identical() {
    let path = fixture("wordlist20.tsv");
    let original = std::fs::read(&path).unwrap();
    let wl = load_wordlist(&path).unwrap();
    assert_eq!(wl.len(), 20);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.tsv");
    write_wordlist(&wl, &out).unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), original);
}

fn arb_store() -> impl Strategy<Value = SynsetStore> {
    let lang = prop::sample::select(vec!["eng", "deu", "hun", "fin", "fra"]);
    let sense = (lang, "[a-zA-Z]{1,8}", any::<bool>(), prop::option::of("[ptkaeiou]{1,5}"));
    let synset = (prop::collection::vec(sense, 1..5), any::<bool>());
    prop::collection::vec(synset, 0..8).prop_map(|synsets| {
        let synsets = synsets.into_iter().enumerate().map(|(i, (senses, entity))| {
            let mut main_seen = BTreeSet::new();
            Synset {
                id: format!("bn:{i:08}n"),
                kind: if entity { SynsetKind::Entity } else { SynsetKind::Concept },
                senses: senses
                    .into_iter()
                    .map(|(l, lemma, key, ipa)| Sense {
                        lang: LanguageRef::new(l, None).unwrap(),
                        lemma,
                        is_main: main_seen.insert(l),
                        is_key: key,
                        ipa,
                    })
                    .collect(),
            }
        });
        SynsetStore::from_synsets(synsets).unwrap()
    })
}

proptest! {
    #[test]
    fn dump_round_trip(store in arb_store()) {
        let text = synset_dump_to_string(&store);
        let again = parse_synset_dump(&text).unwrap();
        prop_assert_eq!(&again, &store);
        let recount: BTreeSet<&str> = again.synsets().flat_map(|s| s.senses.iter().map(|x| x.lang.iso())).collect();
        prop_assert_eq!(again.languages().len(), recount.len());
    }
}
