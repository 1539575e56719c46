//! Experiment files: `key = value` lines grouped under `[section]`
//! headers, `#` or `;` comments. Every key is optional.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::{Ini, ParseOption};

use super::cell::{GridKind, Protocol};
use super::grid::ExperimentConfig;
use crate::data::Subtask;
use crate::error::{read_to_string, Error, Result};
use crate::representation::EmbeddingChoice;

/// Reference listing of every recognised key and its default.
pub const CONFIG_REFERENCE: &str = "\
[experiment]
grid = single            # single | architectures | imbalance | epochs | dropout | embeddings
subtask = A              # A | B | C
protocol = cv            # cv | holdout (default: cv for A, holdout for B and C)
folds = 5
holdout_ratio = 0.8      # train/validation share of the outer split
inner_ratio = 0.8        # training share of the inner split under holdout
seed = 42
epochs = 30              # epoch cap
patience = 10            # or `none` to train every epoch
balance = none           # none | smote | class_weights
batch_size = 64
learning_rate = 0.001
beta1 = 0.9
beta2 = 0.999
epsilon = 1e-8

[model]
variant = BiLSTM-CNN     # or `variants = a, b, ...`; empty uses the grid default
embedding_dim = 100      # used when no pretrained embeddings are chosen
embedding_trainable = true
rnn_units = 100
conv_filters = 64
kernel_size = 3
pool_size = 2
dense_units = 64
spatial_dropout = 0.2    # or `none`
rnn_dropout = 0.35
dense_dropout = false    # second dropout site after the dense layer

[embeddings]
choice = none            # none | twitter100 | twitter200 | commoncrawl300
twitter100 = path/to/glove.twitter.27B.100d.txt
twitter200 = path/to/glove.twitter.27B.200d.txt
commoncrawl300 = path/to/glove.42B.300d.txt

[sweep]
epochs = 5, 10, 20
dropout = 0.2, 0.35, 0.5, none
embeddings = twitter100, twitter200, commoncrawl300, none

[data]
path = path/to/train.tsv, path/to/trial.tsv   # combined in order; ids must be unique
max_len = 50
vocab_size = 20000
min_freq = 1
smote_k = 5

[preprocess]
strip_noise = true
expand_contractions = true
correct_spelling = true
lemmatize = true
lowercase = true
max_edit_distance = 3
";

struct Entries {
    source: String,
    values: BTreeMap<(String, String), String>,
}

impl Entries {
    fn take_raw(&mut self, section: &str, key: &str) -> Option<String> {
        self.values.remove(&(section.to_string(), key.to_string()))
    }

    fn take<T: FromStr>(&mut self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.take_raw(section, key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| Error::Config(format!("{}: [{section}] {key} = {raw}: {e}", self.source))),
        }
    }

    fn set<T: FromStr>(&mut self, section: &str, key: &str, slot: &mut T) -> Result<()>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = self.take(section, key)? {
            *slot = v;
        }
        Ok(())
    }

    fn list<T, F>(&mut self, section: &str, key: &str, parse: F) -> Result<Option<Vec<T>>>
    where
        F: Fn(&str) -> Result<T>,
    {
        let Some(raw) = self.take_raw(section, key) else {
            return Ok(None);
        };
        let items = raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(&parse)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.context(format!("{}: [{section}] {key}", self.source)))?;
        Ok(Some(items))
    }
}

fn parse_rate(s: &str) -> Result<f64> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(0.0);
    }
    let v: f64 = s.parse().map_err(|_| Error::Config(format!("`{s}` is not a rate")))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::Config(format!("rate {v} outside [0, 1)")))
    }
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Config(format!("`{s}` is not a non-negative integer")))
}

/// Parses config text. Relative embedding paths resolve against `base_dir`.
pub fn parse_config(text: &str, source: &str, base_dir: &Path) -> Result<ExperimentConfig> {
    let opt = ParseOption {
        enabled_quote: false,
        enabled_escape: false,
        ..ParseOption::default()
    };
    let ini = Ini::load_from_str_opt(text, opt).map_err(|e| Error::parse(source, e.line, e.msg.to_string()))?;
    let mut values = BTreeMap::new();
    for (section, props) in ini.iter() {
        let section = section.unwrap_or("").to_string();
        for (k, v) in props.iter() {
            if values
                .insert((section.clone(), k.to_string()), v.trim().to_string())
                .is_some()
            {
                return Err(Error::Config(format!("{source}: [{section}] {k} is set twice")));
            }
        }
    }
    let mut e = Entries {
        source: source.to_string(),
        values,
    };

    let grid: GridKind = e.take("experiment", "grid")?.unwrap_or(GridKind::Single);
    let subtask: Subtask = e.take("experiment", "subtask")?.unwrap_or(Subtask::A);
    let mut cfg = ExperimentConfig::new(grid, subtask);

    let folds: Option<usize> = e.take("experiment", "folds")?;
    match e.take_raw("experiment", "protocol").as_deref() {
        None => {
            if let (Some(k), Protocol::CrossValidation { .. }) = (folds, cfg.protocol) {
                cfg.protocol = Protocol::CrossValidation { k };
            }
        }
        Some("cv") => cfg.protocol = Protocol::CrossValidation { k: folds.unwrap_or(5) },
        Some("holdout") => cfg.protocol = Protocol::Holdout,
        Some(other) => return Err(Error::Config(format!("{source}: unknown protocol `{other}`"))),
    }
    let s = &mut cfg.settings;
    e.set("experiment", "holdout_ratio", &mut s.holdout_ratio)?;
    e.set("experiment", "inner_ratio", &mut s.inner_ratio)?;
    e.set("experiment", "seed", &mut cfg.seed)?;
    e.set("experiment", "epochs", &mut s.epochs)?;
    if let Some(p) = e.take_raw("experiment", "patience") {
        s.patience = if p.eq_ignore_ascii_case("none") {
            None
        } else {
            Some(parse_usize(&p).map_err(|err| err.context(format!("{source}: [experiment] patience")))?)
        };
    }
    e.set("experiment", "balance", &mut cfg.balance)?;
    e.set("experiment", "batch_size", &mut s.batch_size)?;
    e.set("experiment", "learning_rate", &mut s.adam.learning_rate)?;
    e.set("experiment", "beta1", &mut s.adam.beta1)?;
    e.set("experiment", "beta2", &mut s.adam.beta2)?;
    e.set("experiment", "epsilon", &mut s.adam.epsilon)?;

    if let Some(v) = e.take("model", "variant")? {
        cfg.variants = vec![v];
    }
    if let Some(vs) = e.list("model", "variants", |x| x.parse())? {
        if !cfg.variants.is_empty() {
            return Err(Error::Config(format!(
                "{source}: set either [model] variant or variants, not both"
            )));
        }
        cfg.variants = vs;
    }
    let s = &mut cfg.settings;
    e.set("model", "embedding_dim", &mut s.embedding_dim)?;
    e.set("model", "embedding_trainable", &mut s.embedding_trainable)?;
    e.set("model", "rnn_units", &mut s.rnn_units)?;
    e.set("model", "conv_filters", &mut s.conv_filters)?;
    e.set("model", "kernel_size", &mut s.kernel_size)?;
    e.set("model", "pool_size", &mut s.pool_size)?;
    e.set("model", "dense_units", &mut s.dense_units)?;
    if let Some(r) = e.take_raw("model", "spatial_dropout") {
        s.spatial_dropout = parse_rate(&r).map_err(|err| err.context(format!("{source}: [model] spatial_dropout")))?;
    }
    if let Some(r) = e.take_raw("model", "rnn_dropout") {
        s.rnn_dropout = parse_rate(&r).map_err(|err| err.context(format!("{source}: [model] rnn_dropout")))?;
    }
    e.set("model", "dense_dropout", &mut s.dense_dropout)?;

    e.set("embeddings", "choice", &mut cfg.embedding)?;
    for choice in EmbeddingChoice::ALL {
        if choice == EmbeddingChoice::None {
            continue;
        }
        if let Some(p) = e.take_raw("embeddings", choice.key()) {
            cfg.embedding_paths.insert(choice, base_dir.join(PathBuf::from(p)));
        }
    }

    if let Some(v) = e.list("sweep", "epochs", parse_usize)? {
        cfg.sweep_epochs = v;
    }
    if let Some(v) = e.list("sweep", "dropout", parse_rate)? {
        cfg.sweep_dropout = v;
    }
    if let Some(v) = e.list("sweep", "embeddings", |x| x.parse())? {
        cfg.sweep_embeddings = v;
    }

    if let Some(paths) = e.list("data", "path", |p| Ok(base_dir.join(p)))? {
        cfg.data_paths = paths;
    }
    let s = &mut cfg.settings;
    e.set("data", "max_len", &mut s.max_len)?;
    e.set("data", "vocab_size", &mut s.vocab_size)?;
    e.set("data", "min_freq", &mut s.min_freq)?;
    e.set("data", "smote_k", &mut s.smote_k)?;

    let p = &mut cfg.preprocess;
    e.set("preprocess", "strip_noise", &mut p.strip_noise)?;
    e.set("preprocess", "expand_contractions", &mut p.expand_contractions)?;
    e.set("preprocess", "correct_spelling", &mut p.correct_spelling)?;
    e.set("preprocess", "lemmatize", &mut p.lemmatize)?;
    e.set("preprocess", "lowercase", &mut p.lowercase)?;
    e.set("preprocess", "max_edit_distance", &mut p.max_edit_distance)?;

    if let Some(((section, key), _)) = e.values.into_iter().next() {
        let where_ = if section.is_empty() {
            String::new()
        } else {
            format!("[{section}] ")
        };
        return Err(Error::Config(format!("{source}: unknown setting {where_}{key}")));
    }
    cfg.settings.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, &path.display().to_string(), base)
}
