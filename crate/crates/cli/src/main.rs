use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, BufRead, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cogforge::cluster::{assign_cognates, ClusterParams, Method, ScoringScheme};
use cogforge::corpus::{load_language_map, load_synset_dump, load_wordlist, synset_dump_to_string, Wordlist};
use cogforge::g2p::{G2pRegistry, UnknownPolicy};
use cogforge::harness::{
    ablate, ablation_tsv, error_rates, run_pipeline, tokenization_error_rate, transcription_pairs, AblationConfig,
    PipelineConfig, TranscriptionPair, TreeSource, Variant,
};
use cogforge::ipa::{to_sound_classes, tokenize, SoundClassTable, TokenizeOptions};
use cogforge::matrix::{dataset_stats, drop_constant_columns, encode_binary, sparsity_grid};
use cogforge::select::{
    availability_counts, availability_histogram, filter_concept_synsets, histogram_tsv, materialize_wordlist,
    parse_concept_list, select_by_concept_list, select_top_k, Selection, SelectionParams,
};
use cogforge::tree::{glottocode_in_label, gq_counts, StarPolicy, Tree};

#[derive(Parser)]
#[command(name = "cogforge", version, about = "Build and evaluate cognate datasets from multilingual wordlists")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve a synset dump to glottocodes and keep concept synsets.
    Ingest(IngestArgs),
    /// Select synsets and materialize a wordlist.
    Select(SelectArgs),
    /// Transcribe orthographic words with G2P rules.
    #[command(alias = "g2p")]
    Transcribe(TranscribeArgs),
    /// Segment IPA strings into tokens and sound classes.
    Tokenize(TokenizeArgs),
    /// Assign cognate ids to a tokenized wordlist.
    Cluster(ClusterArgs),
    /// Encode a cognate wordlist as a binary character matrix.
    Encode(EncodeArgs),
    /// Dataset statistics (languages, synsets, coverage).
    Stats(StatsArgs),
    /// Doculect x concept presence grid as SVG and TSV.
    Sparsity(SparsityArgs),
    /// Generalized quartet distance between an inferred and a gold tree.
    Gqd(GqdArgs),
    /// Error rates of G2P output against reference transcriptions.
    Reveng(RevengArgs),
    /// Compare reference and automatic transcriptions by tree quality.
    Ablate(AblateArgs),
    /// Run the configured end-to-end pipeline.
    Run(RunArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    dump: PathBuf,
    #[arg(long)]
    language_map: PathBuf,
    /// Write the resolved dump here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    dump: PathBuf,
    #[arg(long)]
    language_map: PathBuf,
    #[arg(long, default_value = "topk", value_parser = ["topk", "conceptlist"])]
    mode: String,
    #[arg(long, default_value_t = cogforge::select::DEFAULT_TOP_K)]
    k: usize,
    #[arg(long)]
    concept_list: Option<PathBuf>,
    /// Comma-separated glottocodes; defaults to every mapped language.
    #[arg(long, value_delimiter = ',')]
    languages: Option<Vec<String>>,
    #[arg(long)]
    g2p_dir: Option<PathBuf>,
    #[arg(long, default_value = "pass")]
    g2p_policy: UnknownPolicy,
    /// Count and use dump IPA only.
    #[arg(long)]
    no_g2p: bool,
    /// Output wordlist TSV.
    #[arg(long)]
    out: PathBuf,
    /// Write availability histograms to `<prefix>_ipa.tsv` and `<prefix>_ipa_g2p.tsv`.
    #[arg(long)]
    histograms: Option<PathBuf>,
}

#[derive(Args)]
struct TranscribeArgs {
    #[arg(long)]
    g2p_dir: PathBuf,
    #[arg(long)]
    doculect: String,
    #[arg(long, default_value = "pass")]
    policy: UnknownPolicy,
    /// Words to transcribe; read from standard input when absent.
    words: Vec<String>,
}

#[derive(Args)]
struct TokenizeArgs {
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    merge_diphthongs: bool,
    /// Also print the sound-class string.
    #[arg(long)]
    classes: bool,
    #[arg(long)]
    sound_classes: Option<PathBuf>,
    /// IPA strings; read from standard input when absent.
    words: Vec<String>,
}

#[derive(Args)]
struct ClusterOpts {
    #[arg(long, default_value = "sca")]
    method: Method,
    /// Defaults to 0.45 for sca and 0.60 for lexstat.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = cogforge::cluster::DEFAULT_RUNS)]
    runs: usize,
    /// Scoring scheme CSV (`a,b,score`).
    #[arg(long)]
    scheme: Option<PathBuf>,
    #[arg(long)]
    sound_classes: Option<PathBuf>,
}

impl ClusterOpts {
    fn params(&self) -> Result<ClusterParams> {
        let mut p = ClusterParams::new(self.method).with_seed(self.seed);
        if let Some(t) = self.threshold {
            p = p.with_threshold(t);
        }
        p.lexstat.runs = self.runs;
        if let Some(s) = &self.scheme {
            p.scheme = ScoringScheme::load(s)?;
        }
        p.validate()?;
        if self.runs == 0 {
            return Err(cogforge::Error::Param("--runs must be at least 1".into()).into());
        }
        Ok(p)
    }
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    opts: ClusterOpts,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    phylip: Option<PathBuf>,
    #[arg(long)]
    nexus: Option<PathBuf>,
    #[arg(long)]
    columns: Option<PathBuf>,
    #[arg(long)]
    drop_constant: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SparsityArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    svg: PathBuf,
    #[arg(long)]
    tsv: Option<PathBuf>,
    /// Row order, one doculect per line; defaults to wordlist order.
    #[arg(long)]
    language_order: Option<PathBuf>,
    /// Column order, one concept per line; defaults to wordlist order.
    #[arg(long)]
    concept_order: Option<PathBuf>,
}

#[derive(Args)]
struct GqdArgs {
    #[arg(long)]
    inferred: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long, default_value = "exclude")]
    star_policy: StarPolicy,
    /// Gold leaf labels carry bracketed glottocodes, as in Glottolog.
    #[arg(long)]
    glottolog_labels: bool,
}

#[derive(Args)]
struct RevengArgs {
    /// Wordlist with reference IPA and orthographic forms.
    #[arg(long, conflicts_with = "pairs")]
    wordlist: Option<PathBuf>,
    #[arg(long, requires = "wordlist")]
    g2p_dir: Option<PathBuf>,
    /// TSV with header `DOCULECT\tREFERENCE\tCANDIDATE`.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Report the tokenization error rate of the wordlist's IPA against its TOKENS.
    #[arg(long, requires = "wordlist")]
    tokens: bool,
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    sound_classes: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    /// Wordlist with forms, reference IPA and reference tokens.
    #[arg(long)]
    wordlist: PathBuf,
    #[arg(long)]
    g2p_dir: Option<PathBuf>,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    glottolog_labels: bool,
    /// Directory with `<variant>.nwk` trees used instead of neighbor joining.
    #[arg(long)]
    trees_dir: Option<PathBuf>,
    #[arg(long, default_value = "exclude")]
    star_policy: StarPolicy,
    #[command(flatten)]
    opts: ClusterOpts,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn input_lines(words: &[String]) -> Result<Vec<String>> {
    if !words.is_empty() {
        return Ok(words.to_vec());
    }
    let mut out = Vec::new();
    for line in io::stdin().lock().lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(line.trim().to_string());
        }
    }
    Ok(out)
}

fn class_table(path: Option<&Path>) -> Result<SoundClassTable> {
    Ok(match path {
        Some(p) => SoundClassTable::load(p)?,
        None => SoundClassTable::dolgo(),
    })
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

fn load_gold(path: &Path, glottolog_labels: bool) -> Result<Tree> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let tree = Tree::parse(text.trim())?;
    Ok(if glottolog_labels { tree.relabel(glottocode_in_label)? } else { tree })
}

fn ingest(a: IngestArgs) -> Result<()> {
    let map = load_language_map(&a.language_map)?;
    let (store, unmapped) = load_synset_dump(&a.dump)?.resolve_languages(&map)?;
    if !unmapped.is_empty() {
        log::warn!(target: "ingest", "no glottocode for {}", unmapped.join(", "));
    }
    let store = filter_concept_synsets(&store);
    log::info!(target: "ingest", "{} concept synsets, {} languages", store.len(), store.languages().len());
    emit(a.out.as_deref(), &synset_dump_to_string(&store))
}

fn select(a: SelectArgs) -> Result<()> {
    let map = load_language_map(&a.language_map)?;
    let (store, unmapped) = load_synset_dump(&a.dump)?.resolve_languages(&map)?;
    if !unmapped.is_empty() {
        log::warn!(target: "select", "no glottocode for {}", unmapped.join(", "));
    }
    let store = filter_concept_synsets(&store);
    let languages: BTreeSet<String> = match a.languages {
        Some(l) => l.into_iter().collect(),
        None => store.languages().iter().map(|l| l.doculect().to_string()).collect(),
    };
    let params = SelectionParams::top_k(languages, !a.no_g2p, a.k);
    params.validate()?;
    let registry = match &a.g2p_dir {
        Some(d) => G2pRegistry::load_dir(d, a.g2p_policy)?,
        None => G2pRegistry::new(),
    };
    let g2p_languages: BTreeSet<String> = if params.use_g2p {
        registry.supported().intersection(&params.languages).cloned().collect()
    } else {
        BTreeSet::new()
    };
    let counts = availability_counts(&store, &params, &g2p_languages);
    if let Some(prefix) = &a.histograms {
        let with_suffix = |s: &str| {
            let mut name = prefix.file_name().unwrap_or_default().to_os_string();
            name.push(s);
            prefix.with_file_name(name)
        };
        emit(Some(&with_suffix("_ipa.tsv")), &histogram_tsv(&availability_histogram(&counts, false)))?;
        emit(Some(&with_suffix("_ipa_g2p.tsv")), &histogram_tsv(&availability_histogram(&counts, true)))?;
    }
    let selection = if a.mode == "conceptlist" {
        let Some(list_path) = &a.concept_list else {
            bail!(cogforge::Error::Param("--mode conceptlist needs --concept-list".into()));
        };
        let list = parse_concept_list(&std::fs::read_to_string(list_path)?);
        let chosen = select_by_concept_list(&store, &list, &params);
        for l in &chosen.unresolved {
            log::warn!(target: "select", "unresolved concept {l}");
        }
        chosen.selected
    } else {
        Selection::from_ids(&select_top_k(&counts, &params))
    };
    let m = materialize_wordlist(&store, &selection, &params, &registry, &g2p_languages)?;
    emit(Some(&a.out), &m.wordlist.to_tsv())
}

fn transcribe(a: TranscribeArgs) -> Result<()> {
    let registry = G2pRegistry::load_dir(&a.g2p_dir, a.policy)?;
    if !registry.contains(&a.doculect) {
        bail!(cogforge::Error::Data(format!("no G2P ruleset for {}", a.doculect)));
    }
    let mut out = String::new();
    for w in input_lines(&a.words)? {
        let ipa = registry.transcribe(&a.doculect, &w).expect("checked")?;
        out.push_str(&format!("{w}\t{ipa}\n"));
    }
    emit(None, &out)
}

fn tokenize_cmd(a: TokenizeArgs) -> Result<()> {
    let options = TokenizeOptions {
        strict: a.strict,
        merge_diphthongs: a.merge_diphthongs,
    };
    let table = class_table(a.sound_classes.as_deref())?;
    let mut out = String::new();
    for w in input_lines(&a.words)? {
        let tokens = tokenize(&w, options)?;
        let joined: Vec<String> = tokens.iter().map(|t| t.nfc()).collect();
        out.push_str(&format!("{w}\t{}", joined.join(" ")));
        if a.classes {
            let classes: String = to_sound_classes(&tokens, &table, false)?.into_iter().collect();
            out.push_str(&format!("\t{classes}"));
        }
        out.push('\n');
    }
    emit(None, &out)
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let params = a.opts.params()?;
    let table = class_table(a.opts.sound_classes.as_deref())?;
    let wl = load_wordlist(&a.input)?;
    let out = assign_cognates(&wl, &params, &table)?;
    emit(Some(&a.out), &out.to_tsv())
}

fn encode(a: EncodeArgs) -> Result<()> {
    let wl = load_wordlist(&a.input)?;
    let mut matrix = encode_binary(&wl)?;
    if a.drop_constant {
        let (reduced, removed) = drop_constant_columns(&matrix);
        log::info!(target: "encode", "dropped {} constant columns", removed.len());
        matrix = reduced;
    }
    if a.phylip.is_none() && a.nexus.is_none() {
        emit(None, &matrix.to_phylip()?)?;
    }
    if let Some(p) = &a.phylip {
        matrix.write_phylip(p)?;
    }
    if let Some(p) = &a.nexus {
        matrix.write_nexus(p)?;
    }
    if let Some(p) = &a.columns {
        matrix.write_columns_meta(p)?;
    }
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let wl = load_wordlist(&a.input)?;
    emit(a.out.as_deref(), &dataset_stats(&wl)?.to_tsv())
}

fn sparsity(a: SparsityArgs) -> Result<()> {
    let wl = load_wordlist(&a.input)?;
    let doculects = match &a.language_order {
        Some(p) => read_lines(p)?,
        None => wl.doculects().iter().cloned().collect(),
    };
    let concepts = match &a.concept_order {
        Some(p) => read_lines(p)?,
        None => wl.concepts().iter().cloned().collect(),
    };
    let grid = sparsity_grid(&wl, &doculects, &concepts)?;
    emit(Some(&a.svg), &grid.to_svg())?;
    if let Some(p) = &a.tsv {
        emit(Some(p), &grid.to_tsv())?;
    }
    Ok(())
}

fn gqd(a: GqdArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.inferred).with_context(|| format!("reading {}", a.inferred.display()))?;
    let inferred = Tree::parse(text.trim())?;
    let gold = load_gold(&a.gold, a.glottolog_labels)?;
    let c = gq_counts(&inferred, &gold, a.star_policy)?;
    emit(
        None,
        &format!(
            "gq_distance\tresolved\tcontradicted\tunresolved_in_inferred\n{:.6}\t{}\t{}\t{}\n",
            c.distance(),
            c.resolved,
            c.contradicted,
            c.unresolved_in_inferred
        ),
    )
}

fn read_pairs(path: &Path) -> Result<Vec<TranscriptionPair>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "DOCULECT\tREFERENCE\tCANDIDATE")) => {}
        _ => bail!(cogforge::Error::Data("pairs file needs header DOCULECT\\tREFERENCE\\tCANDIDATE".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines.filter(|(_, l)| !l.is_empty()) {
        let f: Vec<&str> = line.split('\t').collect();
        let [d, r, c] = f[..] else {
            bail!(cogforge::Error::Data(format!("pairs file line {}: expected 3 fields", i + 1)));
        };
        out.push(TranscriptionPair::new(d, r, c));
    }
    Ok(out)
}

fn reveng(a: RevengArgs) -> Result<()> {
    let options = TokenizeOptions {
        strict: a.strict,
        merge_diphthongs: false,
    };
    if a.tokens {
        let wl = load_wordlist(a.wordlist.as_deref().expect("required by clap"))?;
        let pairs: Vec<(String, Vec<String>)> = wl
            .rows()
            .iter()
            .filter_map(|r| Some((r.ipa.clone()?, r.tokens.clone()?)))
            .collect();
        let rate = tokenization_error_rate(&pairs, options)?;
        return emit(a.out.as_deref(), &format!("n\ttokenization_error_rate\n{}\t{rate:.6}\n", pairs.len()));
    }
    let pairs = match (&a.pairs, &a.wordlist) {
        (Some(p), _) => read_pairs(p)?,
        (None, Some(w)) => {
            let Some(dir) = &a.g2p_dir else {
                bail!(cogforge::Error::Param("--wordlist needs --g2p-dir (or --tokens)".into()));
            };
            let registry = G2pRegistry::load_dir(dir, UnknownPolicy::PassThrough)?;
            transcription_pairs(&load_wordlist(w)?, &registry)
        }
        (None, None) => bail!(cogforge::Error::Param("give --pairs or --wordlist".into())),
    };
    let table = class_table(a.sound_classes.as_deref())?;
    emit(a.out.as_deref(), &error_rates(&pairs, options, &table)?.to_tsv())
}

fn ablate_cmd(a: AblateArgs) -> Result<()> {
    let params = a.opts.params()?;
    let table = class_table(a.opts.sound_classes.as_deref())?;
    let registry = match &a.g2p_dir {
        Some(d) => G2pRegistry::load_dir(d, UnknownPolicy::PassThrough)?,
        None => G2pRegistry::new(),
    };
    let trees = match &a.trees_dir {
        None => TreeSource::NeighborJoining,
        Some(dir) => {
            let mut trees = BTreeMap::new();
            for v in Variant::ALL {
                let p = dir.join(format!("{}.nwk", v.as_str()));
                if p.exists() {
                    let text = std::fs::read_to_string(&p)?;
                    trees.insert(v, Tree::parse(text.trim())?);
                } else {
                    log::warn!(target: "ablate", "no tree {}", p.display());
                }
            }
            TreeSource::External(trees)
        }
    };
    let config = AblationConfig {
        registry: &registry,
        table: &table,
        cluster: params,
        tokenizer: TokenizeOptions::default(),
        star_policy: a.star_policy,
        trees,
    };
    let wl: Wordlist = load_wordlist(&a.wordlist)?;
    let gold = load_gold(&a.gold, a.glottolog_labels)?;
    let rows = ablate(&wl, &gold, &config)?;
    emit(a.out.as_deref(), &ablation_tsv(&rows))
}

fn run(a: RunArgs) -> Result<()> {
    let mut config = PipelineConfig::load(&a.config)?;
    if let Some(out) = a.out {
        config.output = out;
    }
    let summary = run_pipeline(&config)?;
    println!("{}\t{}", summary.output.display(), summary.manifest_sha256);
    Ok(())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Select(a) => select(a),
        Command::Transcribe(a) => transcribe(a),
        Command::Tokenize(a) => tokenize_cmd(a),
        Command::Cluster(a) => cluster(a),
        Command::Encode(a) => encode(a),
        Command::Stats(a) => stats(a),
        Command::Sparsity(a) => sparsity(a),
        Command::Gqd(a) => gqd(a),
        Command::Reveng(a) => reveng(a),
        Command::Ablate(a) => ablate_cmd(a),
        Command::Run(a) => run(a),
    }
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format(|buf, record| writeln!(buf, "{} {}: {}", record.level(), record.target(), record.args()))
        .init();
}

/// Parameter errors are usage errors (exit 1); everything else is a data error (exit 2).
fn exit_code(err: &anyhow::Error) -> u8 {
    let usage = err.chain().any(|e| {
        matches!(e.downcast_ref::<cogforge::Error>(), Some(cogforge::Error::Param(_)))
    });
    if usage {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
