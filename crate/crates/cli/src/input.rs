use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use gdof_core::kuser::GenerationBudget;
use gdof_core::rational::{parse_rational, Rational};
use gdof_core::{cyclic_channel, ChannelMatrix};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: io::Error },
}

impl CliError {
    pub fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn read_text(path: &Path) -> CliResult<String> {
    let shown = path.display().to_string();
    if shown == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|source| CliError::Read { path: shown, source })?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|source| CliError::Read { path: shown, source })
}

/// Deserializes a JSON file, reporting the failing field path and line.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        CliError::Input(format!("{}: field `{field}`: {}", path.display(), e.inner()))
    })
}

/// A channel from a JSON file or the cyclic `(1, a, b)` family.
pub fn channel(file: Option<&Path>, cyclic: Option<&[Rational]>) -> CliResult<ChannelMatrix> {
    match (file, cyclic) {
        (Some(f), None) => read_json(f),
        (None, Some([a, b])) => cyclic_channel(a, b).map_err(CliError::input),
        (None, Some(_)) => Err(CliError::input("--cyclic takes exactly two values")),
        (Some(_), Some(_)) => Err(CliError::input("give either a channel file or --cyclic, not both")),
        (None, None) => Err(CliError::input("a channel file or --cyclic A B is required")),
    }
}

pub fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// Comma-separated exact rationals, e.g. `1.2,0.2,1/10`.
pub fn point(s: &str) -> Result<Vec<Rational>, String> {
    s.split(',').map(rational).collect()
}

pub fn floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect()
}

fn env_usize(name: &str) -> CliResult<Option<usize>> {
    match std::env::var(name) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Input(format!("{name}={v:?} is not a non-negative integer"))),
        Err(_) => Ok(None),
    }
}

/// Defaults, then `GDOF_BUDGET_MAX_{DEPTH,SIZE,PATTERNS}`, then the flag.
pub fn budget(depth: Option<usize>) -> CliResult<GenerationBudget> {
    let mut b = GenerationBudget::default();
    if let Some(v) = env_usize("GDOF_BUDGET_MAX_DEPTH")? {
        b.max_depth = v;
    }
    if let Some(v) = env_usize("GDOF_BUDGET_MAX_SIZE")? {
        b.max_size = v;
    }
    if let Some(v) = env_usize("GDOF_BUDGET_MAX_PATTERNS")? {
        b.max_patterns = v;
    }
    if let Some(d) = depth {
        b.max_depth = d;
    }
    Ok(b)
}

/// Where results go: a file when `--out` is given, stdout otherwise.
pub struct Sink {
    pub out: Option<PathBuf>,
}

impl Sink {
    pub fn bytes(&self, data: &[u8]) -> CliResult<()> {
        match &self.out {
            Some(p) => fs::write(p, data).map_err(|source| CliError::Write {
                path: p.display().to_string(),
                source,
            }),
            None => match io::stdout().write_all(data) {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(|source| CliError::Write {
                    path: "stdout".into(),
                    source,
                }),
            },
        }
    }

    pub fn json<T: Serialize>(&self, value: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(CliError::input)?;
        s.push('\n');
        self.bytes(s.as_bytes())
    }
}
