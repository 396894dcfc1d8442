use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use patchem::adapter::{mock_reply, MockMode};
use patchem::config::PipelineConfig;
use patchem::error::{exit, Error, Result};
use patchem::ingest::{compounds_csv, read_bundles, PatentBundle};
use patchem::ocsr::{read_manifest, run_ocsr, AdapterSet};
use patchem::pipeline::{run_eval, run_rank, run_train, stack_features};
use patchem::report::{cell, write_report};
use patchem::synth::{synth_corpus, SynthConfig};
use patchem::ModelArtifact;
use patchem_core::arbiter::IssueKind;
use patchem_core::coreid::{assemble_features_with, prepare, CompoundRecord};
use patchem_core::hash::derive_seed;
use patchem_core::learn::{boruta_select, BorutaConfig, FeatureStatus};
use patchem_core::simnet::{build_graph, network_features, Edge, NodeFeatures};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "patchem",
    version,
    about = "Patent core-compound identification and OCSR arbitration"
)]
struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the logical core count.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// TOML configuration file.
    #[arg(long, global = true, env = "PATCHEM_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Markdown,
    Json,
}

#[derive(Args)]
struct Output {
    /// Also write <name>.json and <name>.md into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// What to print on stdout.
    #[arg(long, value_enum, default_value = "markdown")]
    format: Format,
}

#[derive(Args)]
struct Input {
    /// Compounds CSV, or patent bundle JSON (.json).
    input: Option<PathBuf>,
    /// Literal SMILES instead of an input file.
    #[arg(long)]
    smiles: Vec<String>,
    /// Keep only the patents listed in this file, one id per line.
    #[arg(long)]
    patents: Option<PathBuf>,
}

#[derive(Args)]
struct FeatureFlags {
    /// ECFP radius
    #[arg(long)]
    radius: Option<u32>,
    /// Fingerprint width in bits
    #[arg(long)]
    width: Option<usize>,
    /// Comma-separated similarity cutoffs.
    #[arg(long, value_delimiter = ',')]
    cutoffs: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and canonicalize SMILES.
    Parse {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    /// Compute ECFP fingerprints.
    Fp {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        features: FeatureFlags,
        #[command(flatten)]
        output: Output,
    },
    /// Build the similarity network of each patent at one cutoff.
    Graph {
        #[command(flatten)]
        input: Input,
        /// Tanimoto similarity cutoff for an edge
        #[arg(long)]
        cutoff: f64,
        #[command(flatten)]
        features: FeatureFlags,
        #[command(flatten)]
        output: Output,
    },
    /// Write the per-compound feature matrix as CSV.
    Features {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        features: FeatureFlags,
        /// Destination file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run Boruta feature selection over labeled patents.
    Select {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        features: FeatureFlags,
        #[command(flatten)]
        output: Output,
    },
    /// Train a ranking model and write the artifact.
    Train {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        features: FeatureFlags,
        /// Artifact destination.
        #[arg(long)]
        model: PathBuf,
        /// Keep every feature column
        #[arg(long)]
        no_boruta: bool,
        /// Use the configured hyperparameters as given
        #[arg(long)]
        no_search: bool,
        /// Hyperparameter search evaluations.
        #[arg(long)]
        budget: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Rank the compounds of each patent.
    Rank {
        #[command(flatten)]
        input: Input,
        /// Model artifact from `train`
        #[arg(long)]
        model: PathBuf,
        /// Report the common scaffold of this many top-ranked compounds.
        #[arg(long)]
        scaffold: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Top-k evaluation over labeled patents.
    Eval {
        #[command(flatten)]
        input: Input,
        /// Model artifact from `train`
        #[arg(long)]
        model: PathBuf,
        /// Model name in the metrics table.
        #[arg(long, default_value = "Model")]
        label: String,
        /// Add a Top 1% column.
        #[arg(long)]
        top1pct: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Arbitrate recognizers over an image manifest.
    Ocsr {
        /// JSON-lines manifest of {"image_path", "truth_smiles"}.
        manifest: PathBuf,
        /// Recognizer command line, split on whitespace; repeat in model order.
        #[arg(long)]
        recognizer: Vec<String>,
        /// Renderer command line; built-in when absent
        #[arg(long)]
        renderer: Option<String>,
        /// Evaluator command line; built-in fingerprint comparison when absent
        #[arg(long)]
        evaluator: Option<String>,
        /// Per-request adapter timeout
        #[arg(long)]
        timeout_ms: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Generate synthetic labeled patents.
    Synth {
        #[arg(long, default_value_t = 8)]
        n_patents: usize,
        #[arg(long, default_value_t = 14)]
        compounds: usize,
        /// Destination (.csv or .json); CSV on stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in adapter answering one request on stdin.
    #[command(hide = true)]
    MockAdapter {
        #[arg(long, default_value = "truth")]
        mode: MockMode,
    },
}

fn emit<T: Serialize>(output: &Output, stem: &str, value: &T, markdown: &str) -> Result<()> {
    if let Some(dir) = &output.out_dir {
        write_report(dir, stem, value, markdown)?;
    }
    let text = match output.format {
        Format::Markdown => markdown.to_string(),
        Format::Json => serde_json::to_string_pretty(value).expect("report serializes") + "\n",
    };
    print(&text)
}

fn print(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io("<stdout>", e))
}

fn apply_features(cfg: &mut PipelineConfig, f: &FeatureFlags) -> Result<()> {
    if let Some(r) = f.radius {
        cfg.features.radius = r;
    }
    if let Some(w) = f.width {
        cfg.features.width = w;
    }
    if let Some(c) = &f.cutoffs {
        cfg.features.cutoffs = c.clone();
    }
    cfg.validate()
}

fn load_input(input: &Input) -> Result<Vec<PatentBundle>> {
    let mut bundles = match (&input.input, input.smiles.is_empty()) {
        (Some(path), true) => read_bundles(path)?,
        (None, false) => {
            let compounds = input
                .smiles
                .iter()
                .enumerate()
                .map(|(i, s)| CompoundRecord::new("", &format!("{}", i + 1), s, None))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            vec![PatentBundle {
                patent_id: String::new(),
                compounds,
                provenance: vec!["command line".into()],
            }]
        }
        _ => return Err(Error::Usage("give either an input file or --smiles".into())),
    };
    if let Some(split) = &input.patents {
        let text = std::fs::read_to_string(split).map_err(|e| Error::io(split, e))?;
        let keep: HashSet<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let known: HashSet<&str> = bundles.iter().map(|b| b.patent_id.as_str()).collect();
        if let Some(missing) = keep.iter().find(|p| !known.contains(**p)) {
            return Err(Error::Data(format!(
                "{}: patent {missing} is not in the input",
                split.display()
            )));
        }
        bundles.retain(|b| keep.contains(b.patent_id.as_str()));
    }
    Ok(bundles)
}

fn split_command(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

#[derive(Serialize)]
struct ParsedCompound {
    patent_id: String,
    compound_id: String,
    smiles: String,
    canonical_smiles: String,
    atoms: usize,
    bonds: usize,
}

fn cmd_parse(input: &Input, output: &Output) -> Result<()> {
    let mut rows = Vec::new();
    for b in load_input(input)? {
        for c in &b.compounds {
            let m = c.molecule()?;
            rows.push(ParsedCompound {
                patent_id: b.patent_id.clone(),
                compound_id: c.compound_id.clone(),
                smiles: c.smiles.clone(),
                canonical_smiles: c.canonical_smiles.clone(),
                atoms: m.atom_count(),
                bonds: m.bond_count(),
            });
        }
    }
    let mut md = String::from("| Patent | Compound | Canonical SMILES | Atoms | Bonds |\n|---|---|---|---:|---:|\n");
    for r in &rows {
        md.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            cell(&r.patent_id),
            cell(&r.compound_id),
            cell(&r.canonical_smiles),
            r.atoms,
            r.bonds
        ));
    }
    emit(output, "parse", &rows, &md)
}

#[derive(Serialize)]
struct FingerprintRow {
    patent_id: String,
    compound_id: String,
    radius: u32,
    width: usize,
    popcount: u32,
    bits: Vec<usize>,
    hex: String,
}

fn cmd_fp(cfg: &PipelineConfig, input: &Input, output: &Output) -> Result<()> {
    let mut rows = Vec::new();
    for b in load_input(input)? {
        for c in &b.compounds {
            let fp = prepare(c, &cfg.features)?.fingerprint;
            rows.push(FingerprintRow {
                patent_id: b.patent_id.clone(),
                compound_id: c.compound_id.clone(),
                radius: fp.radius(),
                width: fp.width(),
                popcount: fp.popcount(),
                bits: fp.ones().collect(),
                hex: fp.to_hex(),
            });
        }
    }
    let mut md = String::from("| Patent | Compound | Bits set | On bits |\n|---|---|---:|---|\n");
    for r in &rows {
        let bits: Vec<String> = r.bits.iter().map(usize::to_string).collect();
        md.push_str(&format!(
            "| {} | {} | {} | {} |\n",
            cell(&r.patent_id),
            cell(&r.compound_id),
            r.popcount,
            bits.join(" ")
        ));
    }
    emit(output, "fp", &rows, &md)
}

#[derive(Serialize)]
struct GraphReport {
    patent_id: String,
    cutoff: f64,
    nodes: Vec<String>,
    edges: Vec<Edge>,
    features: Vec<NodeFeatures>,
}

fn cmd_graph(cfg: &PipelineConfig, input: &Input, cutoff: f64, output: &Output) -> Result<()> {
    let mut reports = Vec::new();
    let mut md = String::new();
    for b in load_input(input)? {
        let fps = b
            .compounds
            .iter()
            .map(|c| prepare(c, &cfg.features).map(|p| (c.compound_id.clone(), p.fingerprint)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let g = build_graph(&fps, cutoff).map_err(patchem_core::coreid::CoreIdError::from)?;
        let features = network_features(&g);
        md.push_str(&format!(
            "## Patent {} at cutoff {cutoff:.2}: {} nodes, {} edges\n\n```\n{}```\n\n",
            b.patent_id,
            g.node_count(),
            g.edges().len(),
            g.edge_list()
        ));
        md.push_str("| Compound | Degree | Centrality | Clustering | Betweenness | Component | PageRank |\n");
        md.push_str("|---|---:|---:|---:|---:|---:|---:|\n");
        for (id, f) in g.node_ids().iter().zip(&features) {
            md.push_str(&format!(
                "| {} | {} | {:.4} | {:.4} | {:.4} | {} | {:.4} |\n",
                cell(id),
                f.degree,
                f.degree_centrality,
                f.clustering_coefficient,
                f.betweenness,
                f.component_size,
                f.pagerank
            ));
        }
        md.push('\n');
        reports.push(GraphReport {
            patent_id: b.patent_id.clone(),
            cutoff,
            nodes: g.node_ids().to_vec(),
            edges: g.edges().to_vec(),
            features,
        });
    }
    emit(output, "graph", &reports, &md)
}

fn cmd_features(cfg: &PipelineConfig, input: &Input, out: Option<&Path>) -> Result<()> {
    let columns = cfg.features.columns();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["patent_id".to_string(), "compound_id".to_string()];
    header.extend(columns.iter().cloned());
    header.push("is_core".into());
    let csv_err = |e: csv::Error| Error::Data(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for b in load_input(input)? {
        let m = assemble_features_with(&b.compounds, &cfg.features)?;
        for (i, c) in b.compounds.iter().enumerate() {
            let mut rec = vec![b.patent_id.clone(), c.compound_id.clone()];
            rec.extend(m.row(i).iter().map(f64::to_string));
            rec.push(match c.is_core {
                Some(true) => "1".into(),
                Some(false) => "0".into(),
                None => String::new(),
            });
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Error::io(p, e)),
        None => print(&String::from_utf8(bytes).expect("CSV is UTF-8")),
    }
}

fn cmd_select(cfg: &PipelineConfig, input: &Input, output: &Output) -> Result<()> {
    let bundles = load_input(input)?;
    let labeled: Vec<&PatentBundle> = bundles.iter().filter(|b| b.is_labeled()).collect();
    if labeled.is_empty() {
        return Err(Error::Data("feature selection needs labeled patents".into()));
    }
    let data = stack_features(&labeled, &cfg.features)?;
    let bc = BorutaConfig {
        seed: derive_seed(cfg.seed, 1),
        ..cfg.train.boruta_config.clone()
    };
    let r = boruta_select(&data.matrix, &bc)?;
    let mut md = format!(
        "## Boruta over {} rows, {} iterations\n\nConfirmed {}, tentative {}, rejected {}\n\n| Feature | Status | Hits |\n|---|---|---:|\n",
        data.matrix.n_rows(),
        r.iterations_run,
        r.confirmed().len(),
        r.tentative().len(),
        r.rejected().len()
    );
    for ((f, s), h) in r.features.iter().zip(&r.statuses).zip(&r.hit_counts) {
        let s = match s {
            FeatureStatus::Confirmed => "confirmed",
            FeatureStatus::Tentative => "tentative",
            FeatureStatus::Rejected => "rejected",
        };
        md.push_str(&format!("| {} | {s} | {h} |\n", cell(f)));
    }
    emit(output, "select", &r, &md)
}

#[derive(Serialize)]
struct TrainSummary {
    model: PathBuf,
    patents: usize,
    rows: usize,
    feature_columns: Vec<String>,
    best_objective: Option<f64>,
    best_params: patchem_core::learn::Params,
}

fn cmd_train(cfg: &PipelineConfig, input: &Input, model: &Path, output: &Output) -> Result<()> {
    let bundles = load_input(input)?;
    let artifact = run_train(&bundles, cfg)?;
    artifact.save(model)?;
    let meta = &artifact.training_metadata;
    let summary = TrainSummary {
        model: model.to_path_buf(),
        patents: meta.patents.len(),
        rows: meta.n_rows,
        feature_columns: artifact.feature_columns.clone(),
        best_objective: meta.best_objective,
        best_params: meta.best_params.clone(),
    };
    let mut md = format!(
        "## Trained on {} patents, {} rows\n\nModel: `{}`\n\nColumns kept: {} of {}\n",
        summary.patents,
        summary.rows,
        model.display(),
        summary.feature_columns.len(),
        meta.all_columns.len()
    );
    if let Some(o) = summary.best_objective {
        md.push_str(&format!(
            "\nBest leave-one-patent-out loss: {o:.4}\n\n| Parameter | Value |\n|---|---:|\n"
        ));
        for (k, v) in &summary.best_params {
            md.push_str(&format!("| {k} | {v} |\n"));
        }
    }
    emit(output, "train", &summary, &md)
}

fn cmd_rank(input: &Input, model: &Path, scaffold: Option<usize>, output: &Output) -> Result<()> {
    let artifact = ModelArtifact::load(model)?;
    let outputs = load_input(input)?
        .iter()
        .map(|b| run_rank(b, &artifact, scaffold))
        .collect::<Result<Vec<_>>>()?;
    let md: String = outputs.iter().map(|o| o.to_markdown() + "\n").collect();
    emit(output, "rank", &outputs, &md)
}

fn cmd_eval(input: &Input, model: &Path, label: &str, top1pct: bool, output: &Output) -> Result<()> {
    let artifact = ModelArtifact::load(model)?;
    let report = run_eval(&load_input(input)?, &artifact, label)?;
    emit(output, "eval", &report, &report.to_markdown(top1pct))
}

struct OcsrFlags<'a> {
    recognizer: &'a [String],
    renderer: Option<&'a str>,
    evaluator: Option<&'a str>,
    timeout_ms: Option<u64>,
}

fn cmd_ocsr(cfg: &PipelineConfig, manifest: &Path, flags: OcsrFlags, output: &Output) -> Result<()> {
    let mut ac = cfg.adapters.clone();
    if !flags.recognizer.is_empty() {
        ac.recognizers = flags.recognizer.iter().map(|s| split_command(s)).collect();
    }
    if let Some(r) = flags.renderer {
        ac.renderer = Some(split_command(r));
    }
    if let Some(e) = flags.evaluator {
        ac.evaluator = Some(split_command(e));
    }
    if flags.timeout_ms.is_some() {
        ac.timeout_ms = flags.timeout_ms;
    }
    let items = read_manifest(manifest)?;
    let report = run_ocsr(&items, &AdapterSet::from_config(&ac))?;
    emit(output, "ocsr", &report, &report.to_markdown())?;
    let any_reached = report.items.iter().any(|i| {
        i.candidates
            .iter()
            .any(|c| !matches!(c.issue.as_ref().map(|x| x.kind), Some(IssueKind::AdapterUnreachable)))
    });
    if !report.items.is_empty() && !any_reached {
        return Err(
            patchem_core::arbiter::AdapterError::Unreachable("no recognizer answered any request".into()).into(),
        );
    }
    Ok(())
}

fn cmd_synth(seed: u64, n_patents: usize, compounds: usize, out: Option<&Path>) -> Result<()> {
    if compounds < 2 {
        return Err(Error::Usage("--compounds must be at least 2".into()));
    }
    let bundles = synth_corpus(seed, n_patents, &SynthConfig::with_compounds(compounds));
    match out {
        Some(p) if p.extension().is_some_and(|e| e == "json") => {
            let text = serde_json::to_string_pretty(&bundles).expect("bundles serialize") + "\n";
            std::fs::write(p, text).map_err(|e| Error::io(p, e))
        }
        Some(p) => std::fs::write(p, compounds_csv(&bundles)).map_err(|e| Error::io(p, e)),
        None => print(&compounds_csv(&bundles)),
    }
}

fn mock_adapter(mode: &MockMode) -> ExitCode {
    let mut line = String::new();
    if std::io::stdin().lock().read_line(&mut line).is_err() {
        return ExitCode::from(1);
    }
    match mock_reply(mode, &line) {
        Some(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        None => ExitCode::from(1),
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = PipelineConfig::resolve(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    cfg.validate()?;
    if let Some(n) = cfg.workers {
        // only fails when a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Parse { input, output } => cmd_parse(input, output),
        Command::Fp {
            input,
            features,
            output,
        } => {
            apply_features(&mut cfg, features)?;
            cmd_fp(&cfg, input, output)
        }
        Command::Graph {
            input,
            cutoff,
            features,
            output,
        } => {
            apply_features(&mut cfg, features)?;
            cmd_graph(&cfg, input, *cutoff, output)
        }
        Command::Features { input, features, out } => {
            apply_features(&mut cfg, features)?;
            cmd_features(&cfg, input, out.as_deref())
        }
        Command::Select {
            input,
            features,
            output,
        } => {
            apply_features(&mut cfg, features)?;
            cmd_select(&cfg, input, output)
        }
        Command::Train {
            input,
            features,
            model,
            no_boruta,
            no_search,
            budget,
            output,
        } => {
            apply_features(&mut cfg, features)?;
            cfg.train.boruta &= !no_boruta;
            cfg.train.search &= !no_search;
            if let Some(b) = budget {
                cfg.train.budget = *b;
            }
            cfg.validate()?;
            cmd_train(&cfg, input, model, output)
        }
        Command::Rank {
            input,
            model,
            scaffold,
            output,
        } => cmd_rank(input, model, *scaffold, output),
        Command::Eval {
            input,
            model,
            label,
            top1pct,
            output,
        } => cmd_eval(input, model, label, *top1pct, output),
        Command::Ocsr {
            manifest,
            recognizer,
            renderer,
            evaluator,
            timeout_ms,
            output,
        } => cmd_ocsr(
            &cfg,
            manifest,
            OcsrFlags {
                recognizer,
                renderer: renderer.as_deref(),
                evaluator: evaluator.as_deref(),
                timeout_ms: *timeout_ms,
            },
            output,
        ),
        Command::Synth {
            n_patents,
            compounds,
            out,
        } => cmd_synth(cfg.seed, *n_patents, *compounds, out.as_deref()),
        Command::MockAdapter { .. } => unreachable!("handled before configuration"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::USAGE as u8
            } else {
                exit::OK as u8
            });
        }
    };
    if let Command::MockAdapter { mode } = &cli.command {
        return mock_adapter(mode);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("patchem: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
