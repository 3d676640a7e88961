//! Dataset files and ingestion of external data.

pub mod format;
pub mod ingest;

pub use format::{read_dataset, write_dataset, Dataset};
pub use ingest::{
    ingest_expression_table, ingest_rankings, parse_expression_csv, parse_preflib, parse_rankings_csv,
    ExpressionTable,
};
