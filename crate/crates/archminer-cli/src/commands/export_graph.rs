//! `export-graph`: write the dictionary's term network (seed and expanded
//! terms as nodes, similarity links as weighted edges) as GEXF and/or DOT.
//! The GEXF output is structurally validated before it is written.

use archminer_core::dictionary::{export_network, validate_gexf, NetworkFormat};

use crate::artifacts;
use crate::config::ResolvedConfig;
use crate::data;
use crate::error::Result;
use crate::manifest::ManifestBuilder;
use crate::GraphFormat;

pub fn run(resolved: &ResolvedConfig, epoch: Option<u64>, format: GraphFormat) -> Result<()> {
    let out = &resolved.out_dir;
    let mut builder = ManifestBuilder::new(
        "export-graph",
        resolved.seed(),
        resolved.config_hash.clone(),
        epoch,
    );

    builder.require_input(out, artifacts::DICTIONARY, "dict-expand")?;
    let dict = data::load_dictionary(out)?;

    let mut written = Vec::new();
    if matches!(format, GraphFormat::Gexf | GraphFormat::Both) {
        let gexf = export_network(&dict, NetworkFormat::Gexf);
        validate_gexf(&gexf)?;
        builder.write_output(out, artifacts::NETWORK_GEXF, gexf.as_bytes())?;
        written.push(artifacts::NETWORK_GEXF);
    }
    if matches!(format, GraphFormat::Dot | GraphFormat::Both) {
        let dot = export_network(&dict, NetworkFormat::Dot);
        builder.write_output(out, artifacts::NETWORK_DOT, dot.as_bytes())?;
        written.push(artifacts::NETWORK_DOT);
    }
    builder.finish(out)?;

    println!(
        "exported {} nodes and {} edges to {}",
        dict.len(),
        dict.edges().len(),
        written.join(", ")
    );
    Ok(())
}
