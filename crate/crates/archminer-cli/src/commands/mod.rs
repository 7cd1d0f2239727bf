//! One module per subcommand. Each `run` resolves its inputs, does the
//! work, writes artifacts atomically, and finishes a run manifest.

pub mod classify;
pub mod dict_expand;
pub mod diff_lit;
pub mod embed;
pub mod evaluate;
pub mod export_graph;
pub mod ingest;
pub mod relate;
pub mod report;
pub mod review;
pub mod train;
pub mod vectorize;
