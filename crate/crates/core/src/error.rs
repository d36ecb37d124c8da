use std::path::PathBuf;

use thiserror::Error;

use crate::corrlib::PacketRef;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid library model: {0}")]
    Model(String),

    #[error("invalid caching distribution: {0}")]
    Distribution(String),

    #[error("invalid cache placement: {0}")]
    Placement(String),

    #[error("invalid demand: {0}")]
    Demand(String),

    #[error("library has no dynamic update model")]
    NotDynamic,

    #[error("receiver {receiver} has no reference for requested packet {packet}")]
    Unreferenced { receiver: usize, packet: PacketRef },

    #[error("invalid group coloring: {0}")]
    Coloring(String),

    #[error("graph has {vertices} vertices, oracle limit is {limit}")]
    OracleLimit { vertices: usize, limit: usize },

    #[error("invalid bound parameters: {0}")]
    Bounds(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("invalid experiment: {0}")]
    Experiment(String),

    #[error("decode failure: {0}")]
    Decode(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
