//! Experiment configuration and the flat `key=value` settings format shared
//! by config files and CLI flags.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "zd")]
    Zd,
    #[serde(rename = "phi-lambda")]
    PhiLambda,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Zd => "zd",
            Model::PhiLambda => "phi-lambda",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Mwm,
    Bh,
    Abcb,
    Ed,
}

impl DecoderKind {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderKind::Mwm => "mwm",
            DecoderKind::Bh => "bh",
            DecoderKind::Abcb => "abcb",
            DecoderKind::Ed => "ed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measurement {
    Perfect,
    Faulty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

macro_rules! parse_enum {
    ($t:ty, $($s:literal => $v:expr),+) => {
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($v),)+
                    _ => Err(Error::Config(format!("unknown {} `{}`", stringify!($t), s))),
                }
            }
        }
    };
}

parse_enum!(Model, "zd" => Model::Zd, "phi-lambda" => Model::PhiLambda);
parse_enum!(DecoderKind, "mwm" => DecoderKind::Mwm, "bh" => DecoderKind::Bh, "abcb" => DecoderKind::Abcb, "ed" => DecoderKind::Ed);
parse_enum!(Measurement, "perfect" => Measurement::Perfect, "faulty" => Measurement::Faulty);
parse_enum!(Format, "csv" => Format::Csv, "json" => Format::Json);

/// A single `(model, decoder, d, L, p)` batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: Model,
    pub decoder: DecoderKind,
    pub d: u32,
    pub l: usize,
    pub p: f64,
    pub trials: u64,
    /// Faulty rounds; `None` means `L`.
    pub rounds: Option<usize>,
    pub measurement: Measurement,
    pub shortcuts: bool,
    pub lambda: f64,
    pub dm1_factor: bool,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: Model::Zd,
            decoder: DecoderKind::Mwm,
            d: 3,
            l: 10,
            p: 0.1,
            trials: 1000,
            rounds: None,
            measurement: Measurement::Perfect,
            shortcuts: true,
            lambda: 0.3,
            dm1_factor: true,
            seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn rounds(&self) -> usize {
        self.rounds.unwrap_or(self.l)
    }

    pub fn validate(&self) -> Result<()> {
        crate::code::CodeParams::new(self.d, self.l)?;
        if self.model == Model::PhiLambda && self.d != 6 {
            return Err(Error::Config(format!("phi-lambda runs need d = 6, got {}", self.d)));
        }
        if self.rounds == Some(0) {
            return Err(Error::Config("rounds must be at least 1".into()));
        }
        let max = (self.d - 1) as f64 / self.d as f64;
        if !(self.p >= 0.0 && self.p < max) {
            return Err(Error::Probability { p: self.p, max });
        }
        Ok(())
    }
}

/// Parsed settings: a base config plus the `L` and `p` sweeps and output
/// options.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub base: ExperimentConfig,
    pub ls: Vec<usize>,
    pub ps: Vec<f64>,
    pub out: Option<String>,
    pub format: Format,
}

impl Default for Settings {
    fn default() -> Self {
        let base = ExperimentConfig::default();
        Self { ls: vec![base.l], ps: vec![base.p], base, out: None, format: Format::Csv }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    let out: Vec<T> = v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(key, s)).collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::Config(format!("empty list for `{key}`")));
    }
    Ok(out)
}

fn on_off(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        _ => Err(Error::Config(format!("`{key}` takes on|off, got `{v}`"))),
    }
}

/// Reads flat `key=value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl Settings {
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let b = &mut self.base;
        match key {
            "model" => b.model = v.parse()?,
            "decoder" => b.decoder = v.parse()?,
            "d" => b.d = parse(key, v)?,
            "L" => self.ls = parse_list(key, v)?,
            "p" => self.ps = parse_list(key, v)?,
            "trials" => b.trials = parse(key, v)?,
            "rounds" => b.rounds = Some(parse(key, v)?),
            "measurement" => b.measurement = v.parse()?,
            "shortcuts" => b.shortcuts = on_off(key, v)?,
            "lambda" => b.lambda = parse(key, v)?,
            "dm1-factor" => b.dm1_factor = on_off(key, v)?,
            "seed" => b.seed = parse(key, v)?,
            "out" => self.out = Some(v.to_string()),
            "format" => self.format = v.parse()?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies file entries first, then flag entries.
    pub fn from_layers<'a>(
        file: impl IntoIterator<Item = (&'a str, &'a str)>,
        flags: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self> {
        let mut s = Settings::default();
        for (k, v) in file.into_iter().chain(flags) {
            s.set(k, v)?;
        }
        s.base.l = s.ls[0];
        s.base.p = s.ps[0];
        Ok(s)
    }
}
