use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::name::Name;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("invalid name `{0}`")]
    InvalidName(String),

    #[error("{module}:{line}: {message}")]
    Parse {
        module: String,
        line: usize,
        message: String,
    },

    #[error("blueprint attribute: {0}")]
    Attribute(String),

    #[error("{module}:{line}: `attribute [blueprint]` target `{target}` is neither a project declaration nor listed in the upstream index")]
    UnknownUpstreamTarget {
        module: Name,
        line: usize,
        target: String,
    },

    #[error("declaration `{0}` carries more than one blueprint attribute")]
    DuplicateAttribute(Name),

    #[error(
        "{module}:{line}: `sorry_using` argument `{argument}` does not resolve to any declaration"
    )]
    UnresolvedSorryUsing {
        module: Name,
        line: usize,
        argument: String,
    },

    #[error("`{node}`: explicitly used name `{target}` is not a blueprint node")]
    UnknownExplicitUse { node: Name, target: String },

    #[error("import cycle: {}", .0.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" -> "))]
    ImportCycle(Vec<Name>),

    #[error("duplicate module `{0}`")]
    DuplicateModule(Name),

    #[error("no blueprint node with label `{0}`")]
    UnknownLabel(String),

    #[error("no blueprint node named `{0}`")]
    UnknownNode(Name),

    #[error("node `{0}` has no proof part")]
    NoProofPart(Name),

    #[error("label `{label}` merges nodes with different environments: {}", .nodes.iter().map(|(n, e)| format!("{n} ({e})")).collect::<Vec<_>>().join(", "))]
    EnvMismatch {
        label: String,
        nodes: Vec<(Name, String)>,
    },

    #[error("{path}:{line}: {message}")]
    Latex {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("declaration `{decl}` is claimed by both legacy nodes `{first}` and `{second}`")]
    DoubleClaim {
        decl: Name,
        first: String,
        second: String,
    },

    #[error("{0} changed since the conversion plan was made; nothing was written")]
    StaleFile(PathBuf),

    #[error("configuration: {0}")]
    Config(String),

    #[error("output directory is locked by another archforge process ({0}); remove the lock file if no build is running")]
    Locked(PathBuf),

    #[error("{}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
    Multiple(Vec<Error>),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
