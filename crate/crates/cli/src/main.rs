//! `olid`: preprocess tweets, train and evaluate classifiers, run experiment
//! grids and render their tables.
//!
//! Exit codes: 0 success, 1 usage, 2 data, configuration or integrity
//! error, 3 numeric failure during training.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use olid_core::data::{combine, ingest_tsv, read_texts, write_tsv, Subtask, TweetRecord};
use olid_core::fixture::{fixture_tsv, synthetic_glove};
use olid_core::harness::{load_config, run_cell, run_grid, ExperimentConfig, GridKind, PreparedData, CONFIG_REFERENCE};
use olid_core::metrics::{report, EvaluationReport};
use olid_core::neuralnet::{Checkpoint, Model};
use olid_core::preprocess::{preprocess, PipelineConfig, Resources};
use olid_core::representation::{EmbeddingChoice, EncodedBatch, Vocabulary};
use olid_core::store::{ResultsStore, StoredCell};
use olid_core::tables::{render_table, TableFormat};
use olid_core::{Error, Result};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "olid", version, about = "Offensive-tweet classification workbench")]
struct Cli {
    /// Log progress (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize tweets and write `id<TAB>tokens`.
    Preprocess {
        /// OLID file or two-column `id<TAB>text` file.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Experiment config whose [preprocess] section to use.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train one model and write a checkpoint plus reports.
    #[command(after_help = config_help())]
    Train {
        #[arg(long)]
        config: PathBuf,
        /// OLID file(s); overrides [data] path.
        #[arg(long)]
        data: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a checkpoint on a labelled OLID file.
    Evaluate {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Label raw tweets and write `id,label` CSV.
    Predict {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment grid and record every cell in a results directory.
    #[command(after_help = config_help())]
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        results: PathBuf,
        /// OLID file(s); overrides [data] path.
        #[arg(long)]
        data: Vec<PathBuf>,
    },
    /// Render a result table (2 to 7) from a results directory.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        table: u8,
        #[arg(long, default_value = "md")]
        format: String,
        /// Subtask whose sweep cells feed tables 5 to 7.
        #[arg(long, default_value = "A")]
        subtask: String,
    },
    /// Write the synthetic fixture corpus and matching GloVe-format vectors.
    Synth {
        #[arg(long)]
        out: PathBuf,
    },
}

fn config_help() -> String {
    format!("Config keys and defaults:\n\n{CONFIG_REFERENCE}")
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Preprocess { input, out, config } => cmd_preprocess(&input, &out, config.as_deref()),
        Command::Train { config, data, out } => cmd_train(&config, &data, &out),
        Command::Evaluate { ckpt, data } => cmd_evaluate(&ckpt, &data),
        Command::Predict { ckpt, input, out } => cmd_predict(&ckpt, &input, &out),
        Command::Experiment { config, results, data } => cmd_experiment(&config, &results, &data),
        Command::Report {
            results,
            table,
            format,
            subtask,
        } => {
            let store = open_existing_store(&results)?;
            let text = render_table(
                table,
                &store.entries()?,
                subtask.parse()?,
                format.parse::<TableFormat>()?,
            )?;
            print!("{text}");
            Ok(())
        }
        Command::Synth { out } => cmd_synth(&out),
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn tokenize_all(texts: &[String], cfg: &PipelineConfig) -> Result<Vec<Vec<String>>> {
    let resources = Resources::for_config(cfg)?;
    texts.iter().map(|t| preprocess(t, cfg, &resources)).collect()
}

fn cmd_preprocess(input: &Path, out: &Path, config: Option<&Path>) -> Result<()> {
    let cfg = match config {
        Some(p) => load_config(p)?.preprocess,
        None => PipelineConfig::default(),
    };
    let rows = read_texts(input)?;
    let texts: Vec<String> = rows.iter().map(|(_, t)| t.clone()).collect();
    let tokens = tokenize_all(&texts, &cfg)?;
    let mut text = String::from("id\ttokens\n");
    for ((id, _), toks) in rows.iter().zip(&tokens) {
        text.push_str(&format!("{id}\t{}\n", toks.join(" ")));
    }
    write_file(out, text.as_bytes())?;
    info!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn load_records(cfg: &ExperimentConfig, overrides: &[PathBuf]) -> Result<Vec<TweetRecord>> {
    let paths = if overrides.is_empty() {
        &cfg.data_paths
    } else {
        overrides
    };
    if paths.is_empty() {
        return Err(Error::Config("no data given: pass --data or set [data] path".into()));
    }
    combine(paths.iter().map(|p| ingest_tsv(p)).collect::<Result<Vec<_>>>()?)
}

fn predict_tokens(model: &Model, vocab: &Vocabulary, max_len: usize, tokens: &[Vec<String>]) -> Result<Vec<usize>> {
    if tokens.is_empty() {
        return Ok(Vec::new());
    }
    let batch = EncodedBatch::encode(tokens, &vec![0; tokens.len()], vocab, max_len)?;
    model.predict(batch.sequences.view())
}

fn subtask_of(ck: &Checkpoint) -> Result<Subtask> {
    Subtask::ALL
        .into_iter()
        .find(|s| s.class_names().iter().eq(ck.class_names.iter()))
        .ok_or_else(|| Error::Data(format!("checkpoint classes {:?} match no subtask", ck.class_names)))
}

fn cmd_train(config: &Path, data: &[PathBuf], out: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    if cfg.grid != GridKind::Single {
        return Err(Error::Config(format!(
            "train runs a single model; `{}` sets grid = {} (use `experiment`)",
            config.display(),
            cfg.grid.key()
        )));
    }
    let records = load_records(&cfg, data)?;
    let cell = cfg.plan()?.remove(0);
    let prepared = PreparedData::prepare(&records, cfg.subtask, &cfg.preprocess)?;
    let table = match (cell.embedding, &cell.embedding_path) {
        (EmbeddingChoice::None, _) => None,
        (choice, Some(p)) => Some(olid_core::representation::load_embeddings(
            p,
            choice.dimension().expect("pretrained choices have a width"),
        )?),
        (choice, None) => return Err(Error::Config(format!("no file configured for embeddings `{choice}`"))),
    };
    let outcome = run_cell(&cell, &prepared, table.as_ref())?;

    let test_tokens: Vec<Vec<String>> = outcome.split.test.iter().map(|&i| prepared.tokens[i].clone()).collect();
    let test_labels: Vec<usize> = outcome.split.test.iter().map(|&i| prepared.labels[i]).collect();
    let best = &outcome.best;
    let pred = predict_tokens(&best.model, &best.vocab, cell.settings.max_len, &test_tokens)?;
    let test_report = report(&test_labels, &pred, cfg.subtask.num_classes())?;

    let ck = Checkpoint {
        model: best.model.clone(),
        vocab: best.vocab.clone(),
        max_len: cell.settings.max_len,
        class_names: cfg.subtask.class_names().iter().map(|s| s.to_string()).collect(),
        preprocess: cfg.preprocess.clone(),
    };
    ck.save(out)?;

    let by_id: std::collections::HashMap<&str, &TweetRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let test_records: Vec<TweetRecord> = outcome
        .split
        .test
        .iter()
        .map(|&i| by_id[prepared.ids[i].as_str()].clone())
        .collect();
    write_file(&out.join("test_split.tsv"), write_tsv(&test_records).as_bytes())?;

    let names = cfg.subtask.class_names();
    let mut text = format!(
        "cell_id = {}\nvariant = {}\nsubtask = {}\nparameters = {}\nmean_accuracy = {:.6}\nmean_macro_f1 = {:.6}\n",
        cell.cell_id(),
        cell.variant,
        cfg.subtask,
        ck.model.param_count(),
        outcome.result.mean_accuracy,
        outcome.result.mean_macro_f1
    );
    for (i, f) in outcome.result.folds.iter().enumerate() {
        text.push_str(&format!(
            "fold.{}.accuracy = {:.6}\nfold.{}.macro_f1 = {:.6}\nfold.{}.best_epoch = {}\n",
            i + 1,
            f.accuracy,
            i + 1,
            f.macro_f1,
            i + 1,
            f.best_epoch
        ));
    }
    text.push_str("\n[test]\n");
    text.push_str(&test_report.to_key_values(names));
    write_file(&out.join("report.txt"), text.as_bytes())?;
    let json = serde_json::json!({
        "cell": cell,
        "run": outcome.result,
        "test": test_report,
    });
    write_file(
        &out.join("report.json"),
        serde_json::to_string_pretty(&json).expect("serializable").as_bytes(),
    )?;
    print!("{text}");
    Ok(())
}

fn cmd_evaluate(ckpt: &Path, data: &Path) -> Result<()> {
    let ck = Checkpoint::load(ckpt)?;
    let subtask = subtask_of(&ck)?;
    let records = ingest_tsv(data)?;
    let labelled: Vec<&TweetRecord> = records.iter().filter(|r| r.label(subtask).is_some()).collect();
    if labelled.is_empty() {
        return Err(Error::Data(format!(
            "{} has no subtask {subtask} labels",
            data.display()
        )));
    }
    let texts: Vec<String> = labelled.iter().map(|r| r.text.clone()).collect();
    let labels: Vec<usize> = labelled.iter().filter_map(|r| r.label(subtask)).collect();
    let tokens = tokenize_all(&texts, &ck.preprocess)?;
    let pred = predict_tokens(&ck.model, &ck.vocab, ck.max_len, &tokens)?;
    let rep: EvaluationReport = report(&labels, &pred, subtask.num_classes())?;
    let names: Vec<&str> = ck.class_names.iter().map(String::as_str).collect();
    print!("rows = {}\n{}", labels.len(), rep.to_key_values(&names));
    Ok(())
}

fn cmd_predict(ckpt: &Path, input: &Path, out: &Path) -> Result<()> {
    let ck = Checkpoint::load(ckpt)?;
    let rows = read_texts(input)?;
    let texts: Vec<String> = rows.iter().map(|(_, t)| t.clone()).collect();
    let tokens = tokenize_all(&texts, &ck.preprocess)?;
    let pred = predict_tokens(&ck.model, &ck.vocab, ck.max_len, &tokens)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| Error::Data(format!("cannot write CSV: {e}"));
    w.write_record(["id", "label"]).map_err(io_err)?;
    for ((id, _), p) in rows.iter().zip(pred) {
        w.write_record([id.as_str(), ck.class_names[p].as_str()])
            .map_err(io_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Data(format!("cannot write CSV: {e}")))?;
    write_file(out, &bytes)?;
    info!("wrote {} predictions to {}", rows.len(), out.display());
    Ok(())
}

fn open_existing_store(dir: &Path) -> Result<ResultsStore> {
    if !dir.join("index.tsv").is_file() {
        return Err(Error::Data(format!("{} is not a results directory", dir.display())));
    }
    ResultsStore::open(dir)
}

fn cmd_experiment(config: &Path, results: &Path, data: &[PathBuf]) -> Result<()> {
    let cfg = load_config(config)?;
    let records = load_records(&cfg, data)?;
    let store = ResultsStore::open(results)?;
    if let Some(c) = cfg.plan()?.iter().find(|c| store.contains(&c.cell_id())) {
        return Err(Error::Data(format!(
            "{} already holds cell `{}`; use a fresh results directory",
            results.display(),
            c.cell_id()
        )));
    }
    let append_err = std::sync::Mutex::new(None);
    let rows = run_grid(&cfg, &records, |row| {
        if let Err(e) = store.append(&StoredCell::from_row(row)) {
            append_err.lock().unwrap_or_else(|p| p.into_inner()).get_or_insert(e);
        }
    })?;
    if let Some(e) = append_err.into_inner().unwrap_or_else(|p| p.into_inner()) {
        return Err(e);
    }
    let mut stdout = std::io::stdout().lock();
    for row in &rows {
        let line = match &row.outcome {
            Ok(r) => format!("{}\t{:.4}\t{:.4}", row.cell.cell_id(), r.mean_accuracy, r.mean_macro_f1),
            Err(e) => format!("{}\tfailed\t{e}", row.cell.cell_id()),
        };
        let _ = writeln!(stdout, "{line}");
    }
    Ok(())
}

fn cmd_synth(out: &Path) -> Result<()> {
    let tsv = fixture_tsv();
    write_file(&out.join("olid_fixture.tsv"), tsv.as_bytes())?;
    let records = olid_core::data::parse_tsv(&tsv, "fixture")?;
    let texts: Vec<String> = records.iter().map(|r| r.text.clone()).collect();
    let mut words: Vec<String> = tokenize_all(&texts, &PipelineConfig::default())?
        .into_iter()
        .flatten()
        .collect();
    words.sort();
    words.dedup();
    for (choice, seed) in [
        (EmbeddingChoice::Twitter100, 1),
        (EmbeddingChoice::Twitter200, 2),
        (EmbeddingChoice::CommonCrawl300, 3),
    ] {
        let dim = choice.dimension().expect("pretrained choices have a width");
        let text = synthetic_glove(words.iter().map(String::as_str), dim, seed);
        write_file(&out.join(format!("synthetic.{}.txt", choice.key())), text.as_bytes())?;
    }
    info!(
        "wrote fixture and vectors for {} words to {}",
        words.len(),
        out.display()
    );
    Ok(())
}
