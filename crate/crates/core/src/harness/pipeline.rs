//! End-to-end run driven by a TOML config: selection, transcription,
//! clustering, encoding, statistics and tree evaluation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::cluster::{assign_cognates, ClusterParams, Method, ScoringScheme};
use crate::corpus::{load_language_map, load_synset_dump, load_wordlist, Wordlist};
use crate::error::{read_to_string, write_string};
use crate::g2p::{G2pRegistry, UnknownPolicy};
use crate::ipa::{tokenize, SoundClassTable, TokenizeOptions};
use crate::matrix::{dataset_stats, drop_constant_columns, encode_binary, sparsity_grid, DatasetStats};
use crate::select::{
    availability_counts, availability_histogram, filter_concept_synsets, histogram_tsv, materialize_wordlist,
    parse_concept_list, select_by_concept_list, select_top_k, DropCounts, DropReason, Selection, SelectionParams,
};
use crate::tree::{hamming_matrix, nj_tree, StarPolicy, Tree};
use crate::{Error, Result};

use super::ablate::score_on_common_leaves;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output directory.
    pub output: PathBuf,
    /// Stop after statistics; no clustering, matrices or trees.
    #[serde(default)]
    pub stats_only: bool,
    pub input: InputConfig,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub cluster: ClusterConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(skip)]
    config_sha256: String,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    /// Synset dump (JSON lines). Exclusive with `wordlist`.
    pub dump: Option<PathBuf>,
    /// Ready wordlist TSV; skips selection.
    pub wordlist: Option<PathBuf>,
    pub language_map: Option<PathBuf>,
    /// Glottocodes under study; defaults to every mapped language.
    pub languages: Option<Vec<String>>,
    pub concept_list: Option<PathBuf>,
    pub g2p_dir: Option<PathBuf>,
    #[serde(default = "default_policy")]
    pub g2p_policy: String,
    pub sound_classes: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionConfig {
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_true")]
    pub use_g2p: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    #[serde(default = "default_method")]
    pub method: String,
    pub threshold: Option<f64>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    pub scheme: Option<PathBuf>,
    #[serde(default)]
    pub drop_constant_columns: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    pub gold_tree: Option<PathBuf>,
    /// Gold leaf labels carry the glottocode in brackets, as in Glottolog.
    #[serde(default)]
    pub glottolog_labels: bool,
    /// Externally inferred tree scored alongside the NJ tree.
    pub inferred_tree: Option<PathBuf>,
    #[serde(default = "default_star_policy")]
    pub star_policy: String,
}

fn default_seed() -> u64 {
    42
}
fn default_policy() -> String {
    "pass".into()
}
fn default_mode() -> String {
    "topk".into()
}
fn default_k() -> usize {
    crate::select::DEFAULT_TOP_K
}
fn default_true() -> bool {
    true
}
fn default_method() -> String {
    "sca".into()
}
fn default_runs() -> usize {
    crate::cluster::DEFAULT_RUNS
}
fn default_star_policy() -> String {
    "exclude".into()
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            mode: default_mode(),
            k: default_k(),
            use_g2p: true,
        }
    }
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            method: default_method(),
            threshold: None,
            runs: default_runs(),
            scheme: None,
            drop_constant_columns: false,
        }
    }
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            gold_tree: None,
            glottolog_labels: false,
            inferred_tree: None,
            star_policy: default_star_policy(),
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl PipelineConfig {
    /// Parses a config; relative paths are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Param(format!("config: {}", e.message())))?;
        config.config_sha256 = sha256_hex(text.as_bytes());
        let abs = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        };
        abs(&mut config.output);
        let i = &mut config.input;
        for p in [
            &mut i.dump,
            &mut i.wordlist,
            &mut i.language_map,
            &mut i.concept_list,
            &mut i.g2p_dir,
            &mut i.sound_classes,
            &mut config.cluster.scheme,
            &mut config.evaluation.gold_tree,
            &mut config.evaluation.inferred_tree,
        ]
        .into_iter()
        .flatten()
        {
            abs(p);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn config_sha256(&self) -> &str {
        &self.config_sha256
    }

    fn validate(&self) -> Result<()> {
        let i = &self.input;
        match (&i.dump, &i.wordlist) {
            (Some(_), Some(_)) => return Err(Error::Param("set either input.dump or input.wordlist, not both".into())),
            (None, None) => return Err(Error::Param("input.dump or input.wordlist is required".into())),
            (Some(_), None) if i.language_map.is_none() => {
                return Err(Error::Param("input.dump requires input.language_map".into()))
            }
            _ => {}
        }
        match self.selection.mode.as_str() {
            "topk" => {}
            "conceptlist" if i.concept_list.is_some() => {}
            "conceptlist" => return Err(Error::Param("selection.mode = conceptlist needs input.concept_list".into())),
            m => return Err(Error::Param(format!("unknown selection.mode {m:?}"))),
        }
        if self.selection.k == 0 {
            return Err(Error::Param("selection.k must be at least 1".into()));
        }
        self.cluster_params()?;
        self.g2p_policy()?;
        self.star_policy()?;
        let paths = [
            &i.dump,
            &i.wordlist,
            &i.language_map,
            &i.concept_list,
            &i.g2p_dir,
            &i.sound_classes,
            &self.cluster.scheme,
            &self.evaluation.gold_tree,
            &self.evaluation.inferred_tree,
        ];
        if let Some(p) = paths.into_iter().flatten().find(|p| !p.exists()) {
            return Err(Error::Param(format!("{} does not exist", p.display())));
        }
        Ok(())
    }

    fn g2p_policy(&self) -> Result<UnknownPolicy> {
        self.input.g2p_policy.parse()
    }

    fn star_policy(&self) -> Result<StarPolicy> {
        self.evaluation.star_policy.parse()
    }

    pub fn cluster_params(&self) -> Result<ClusterParams> {
        let method: Method = self.cluster.method.parse()?;
        let mut params = ClusterParams::new(method).with_seed(self.seed);
        if let Some(t) = self.cluster.threshold {
            params = params.with_threshold(t);
        }
        params.lexstat.runs = self.cluster.runs;
        if self.cluster.runs == 0 {
            return Err(Error::Param("cluster.runs must be at least 1".into()));
        }
        if let Some(p) = &self.cluster.scheme {
            if p.exists() {
                params.scheme = ScoringScheme::load(p)?;
            }
        }
        params.validate()?;
        Ok(params)
    }
}

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output: PathBuf,
    pub files: BTreeMap<String, String>,
    pub manifest_sha256: String,
    pub drops: DropCounts,
    pub stats: Option<DatasetStats>,
}

fn stage<T>(name: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

struct Artifacts {
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

impl Artifacts {
    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        write_string(&self.dir.join(name), text)?;
        self.files.insert(name.to_string(), sha256_hex(text.as_bytes()));
        Ok(())
    }
}

fn partial_dir(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    out.with_file_name(name)
}

/// Runs every stage into `<output>.partial` and renames it to `<output>`
/// on success. On failure the partial directory is left in place and the
/// error names the failing stage.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunSummary> {
    let partial = partial_dir(&config.output);
    stage("setup", || {
        if partial.exists() {
            std::fs::remove_dir_all(&partial).map_err(|e| Error::io(&partial, e))?;
        }
        std::fs::create_dir_all(&partial).map_err(|e| Error::io(&partial, e))
    })?;
    let mut art = Artifacts {
        dir: partial.clone(),
        files: BTreeMap::new(),
    };

    let table = stage("setup", || match &config.input.sound_classes {
        Some(p) => SoundClassTable::load(p),
        None => Ok(SoundClassTable::dolgo()),
    })?;
    let registry = stage("g2p", || match &config.input.g2p_dir {
        Some(dir) => G2pRegistry::load_dir(dir, config.g2p_policy()?),
        None => Ok(G2pRegistry::new()),
    })?;

    let (wordlist, drops) = match (&config.input.dump, &config.input.wordlist) {
        (Some(dump), _) => select_stage(config, dump, &registry, &mut art)?,
        (None, Some(path)) => stage("ingest", || ingest_wordlist(path))?,
        (None, None) => unreachable!("validated"),
    };
    stage("select", || {
        art.write("wordlist.tsv", &wordlist.to_tsv())?;
        art.write("drops.tsv", &drops.to_tsv())
    })?;

    let stats = stage("stats", || {
        let doculects: Vec<String> = wordlist.doculects().iter().cloned().collect();
        let concepts: Vec<String> = wordlist.concepts().iter().cloned().collect();
        let grid = sparsity_grid(&wordlist, &doculects, &concepts)?;
        art.write("sparsity.svg", &grid.to_svg())?;
        art.write("sparsity.tsv", &grid.to_tsv())?;
        match dataset_stats(&wordlist) {
            Ok(s) => {
                art.write("stats.tsv", &s.to_tsv())?;
                Ok(Some(s))
            }
            Err(e) => {
                log::warn!(target: "stats", "{e}");
                Ok(None)
            }
        }
    })?;

    if !config.stats_only {
        let cluster = config.cluster_params().map_err(|e| Error::Stage {
            stage: "cluster",
            source: Box::new(e),
        })?;
        let cognates = stage("cluster", || assign_cognates(&wordlist, &cluster, &table))?;
        art.write("cognates.tsv", &cognates.to_tsv())?;
        let matrix = stage("encode", || {
            let matrix = encode_binary(&cognates)?;
            let matrix = if config.cluster.drop_constant_columns {
                let (reduced, removed) = drop_constant_columns(&matrix);
                log::info!(target: "encode", "dropped {} constant columns", removed.len());
                reduced
            } else {
                matrix
            };
            art.write("matrix.phy", &matrix.to_phylip()?)?;
            art.write("matrix.nex", &matrix.to_nexus()?)?;
            art.write("columns.tsv", &matrix.columns_meta())?;
            Ok(matrix)
        })?;
        stage("tree", || {
            let mut trees: Vec<(&str, Tree)> = Vec::new();
            if matrix.taxa().len() >= 3 {
                let nj = nj_tree(&hamming_matrix(&matrix)?)?;
                art.write("nj.nwk", &format!("{}\n", nj.to_newick()))?;
                trees.push(("nj", nj));
            } else {
                log::warn!(target: "tree", "fewer than 3 taxa; no NJ tree");
            }
            if let Some(p) = &config.evaluation.inferred_tree {
                trees.push(("external", Tree::parse(read_to_string(p)?.trim())?));
            }
            let Some(gold_path) = &config.evaluation.gold_tree else { return Ok(()) };
            let mut gold = Tree::parse(read_to_string(gold_path)?.trim())?;
            if config.evaluation.glottolog_labels {
                gold = gold.relabel(crate::tree::glottocode_in_label)?;
            }
            let policy = config.star_policy()?;
            let mut report = String::from("tree\tn_taxa\tgq_distance\n");
            for (name, t) in &trees {
                let (d, n) = score_on_common_leaves(t, &gold, policy)?;
                let _ = writeln!(report, "{name}\t{n}\t{d:.6}");
            }
            art.write("gqd.tsv", &report)
        })?;
    }

    let manifest = stage("manifest", || {
        let mut m = serde_json::Map::new();
        m.insert("config_sha256".into(), config.config_sha256.clone().into());
        m.insert("seed".into(), config.seed.into());
        m.insert("tool_version".into(), TOOL_VERSION.into());
        let files: serde_json::Map<String, serde_json::Value> =
            art.files.iter().map(|(k, v)| (k.clone(), v.clone().into())).collect();
        m.insert("files".into(), files.into());
        let text = serde_json::to_string_pretty(&serde_json::Value::Object(m)).expect("json") + "\n";
        write_string(&art.dir.join(MANIFEST), &text)?;
        Ok(sha256_hex(text.as_bytes()))
    })?;

    stage("finalize", || {
        let out = &config.output;
        if out.exists() {
            std::fs::remove_dir_all(out).map_err(|e| Error::io(out, e))?;
        }
        std::fs::rename(&partial, out).map_err(|e| Error::io(out, e))
    })?;
    Ok(RunSummary {
        output: config.output.clone(),
        files: art.files,
        manifest_sha256: manifest,
        drops,
        stats,
    })
}

fn select_stage(
    config: &PipelineConfig,
    dump: &Path,
    registry: &G2pRegistry,
    art: &mut Artifacts,
) -> Result<(Wordlist, DropCounts)> {
    let store = stage("ingest", || {
        let map = load_language_map(config.input.language_map.as_deref().expect("validated"))?;
        let (store, unmapped) = load_synset_dump(dump)?.resolve_languages(&map)?;
        if !unmapped.is_empty() {
            log::warn!(target: "ingest", "no glottocode for {}", unmapped.join(", "));
        }
        Ok(filter_concept_synsets(&store))
    })?;
    stage("select", || {
        let languages: BTreeSet<String> = match &config.input.languages {
            Some(l) => l.iter().cloned().collect(),
            None => store.languages().iter().map(|l| l.doculect().to_string()).collect(),
        };
        let mut params = SelectionParams::top_k(languages, config.selection.use_g2p, config.selection.k);
        params.validate()?;
        let g2p_languages: BTreeSet<String> = if params.use_g2p {
            registry.supported().intersection(&params.languages).cloned().collect()
        } else {
            BTreeSet::new()
        };
        let counts = availability_counts(&store, &params, &g2p_languages);
        art.write("availability_ipa.tsv", &histogram_tsv(&availability_histogram(&counts, false)))?;
        art.write("availability_ipa_g2p.tsv", &histogram_tsv(&availability_histogram(&counts, true)))?;

        let selection: Vec<Selection> = if config.selection.mode == "conceptlist" {
            let list = parse_concept_list(&read_to_string(config.input.concept_list.as_deref().expect("validated"))?);
            params.concept_list = Some(list.clone());
            let chosen = select_by_concept_list(&store, &list, &params);
            let mut unresolved = String::from("LEMMA\n");
            for l in &chosen.unresolved {
                unresolved.push_str(l);
                unresolved.push('\n');
            }
            if !chosen.unresolved.is_empty() {
                log::warn!(target: "select", "{} concepts unresolved", chosen.unresolved.len());
            }
            art.write("unresolved.tsv", &unresolved)?;
            chosen.selected
        } else {
            Selection::from_ids(&select_top_k(&counts, &params))
        };
        let mut selected = String::from("CONCEPT\tSYNSET\n");
        for s in &selection {
            let _ = writeln!(selected, "{}\t{}", s.concept, s.synset_id);
        }
        art.write("selected.tsv", &selected)?;
        let m = materialize_wordlist(&store, &selection, &params, registry, &g2p_languages)?;
        Ok((m.wordlist, m.drops))
    })
}

/// Loads a wordlist and tokenizes rows that carry IPA but no tokens.
fn ingest_wordlist(path: &Path) -> Result<(Wordlist, DropCounts)> {
    let wordlist = load_wordlist(path)?;
    let mut drops = DropCounts::default();
    let rows = wordlist
        .rows()
        .iter()
        .filter_map(|r| {
            if r.tokens.is_some() {
                return Some(r.clone());
            }
            let reason = match r.ipa.as_deref().map(|ipa| tokenize(ipa, TokenizeOptions::strict())) {
                None => DropReason::NoIpa,
                Some(Err(_)) => DropReason::InvalidIpa,
                Some(Ok(t)) if t.is_empty() => DropReason::EmptyIpa,
                Some(Ok(t)) => {
                    let t: Vec<String> = t.into_iter().map(|t| t.nfc()).collect();
                    return Some(r.clone().with_tokens(&t));
                }
            };
            *drops.counts.entry(reason).or_insert(0) += 1;
            None
        })
        .collect();
    Ok((Wordlist::new(rows)?, drops))
}
