//! Loading corpora, conventions, spaces and cost tables from files.

use std::fs;
use std::path::{Path, PathBuf};

use ccwb_core::{
    builtin_convention, get_architecture, ArchId, Architecture, CallingConvention, Corpus, CostTables, SearchSpace,
    BUILTIN_CONVENTIONS,
};

/// Environment variable naming a cost table file or directory, used when
/// `--cost-tables` is absent.
pub const COST_TABLES_ENV: &str = "CCWB_COST_TABLES";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] ccwb_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    InFile { path: PathBuf, source: ccwb_core::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn in_file<T>(path: &Path, r: ccwb_core::Result<T>) -> CliResult<T> {
    r.map_err(|source| CliError::InFile { path: path.to_owned(), source })
}

/// `default` or a corpus file.
pub fn load_corpus(spec: &str) -> CliResult<Corpus> {
    if spec == "default" {
        return Ok(Corpus::builtin());
    }
    let path = Path::new(spec);
    in_file(path, Corpus::parse(&read(path)?))
}

/// A builtin name, a `.json` file or a convention document.
pub fn load_convention(spec: &str) -> CliResult<CallingConvention> {
    if BUILTIN_CONVENTIONS.contains(&spec) {
        return Ok(builtin_convention(spec)?);
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(ccwb_core::Error::UnknownConvention(spec.to_owned()).into());
    }
    let text = read(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        let conv: CallingConvention =
            serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_owned(), source })?;
        in_file(path, conv.validate())?;
        Ok(conv)
    } else {
        in_file(path, CallingConvention::parse(&text))
    }
}

pub fn load_space(path: &Path) -> CliResult<SearchSpace> {
    in_file(path, SearchSpace::parse(&read(path)?))
}

/// Tables from `path`: a table file, or a directory holding `<arch>.cost`.
pub fn load_cost_tables(path: &Path, arch: ArchId) -> CliResult<CostTables> {
    let file = if path.is_dir() { path.join(format!("{arch}.cost")) } else { path.to_owned() };
    in_file(&file, CostTables::parse(&read(&file)?))
}

/// Where cost tables come from: the flag, then the environment, then the
/// embedded defaults (`None`).
pub fn cost_table_source(flag: Option<&Path>) -> Option<PathBuf> {
    flag.map(Path::to_owned).or_else(|| std::env::var_os(COST_TABLES_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
}

/// The architecture `id` with the given reserved-register profile and the
/// selected cost tables.
pub fn architecture(id: ArchId, exclude_reserved: bool, tables: Option<&Path>) -> CliResult<Architecture> {
    let arch = get_architecture(id, exclude_reserved);
    match tables {
        None => Ok(arch),
        Some(path) => {
            let t = load_cost_tables(path, id)?;
            Ok(in_file(path, arch.with_cost_tables(t))?)
        }
    }
}
