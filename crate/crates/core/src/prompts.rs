//! Versioned system instructions for the encode, edit and decode stages.
//! Changing any template changes request fingerprints, so edits go into a
//! new version directory.

pub const VERSION: &str = "v1";

pub const ENCODE: &str = include_str!("../prompts/v1/encode.txt");
pub const CONTENT_EDIT: &str = include_str!("../prompts/v1/content_edit.txt");
pub const DECODE_NOUNS: &str = include_str!("../prompts/v1/decode_nouns.txt");
pub const DECODE_NODES: &str = include_str!("../prompts/v1/decode_nodes.txt");
pub const DECODE_EDGES: &str = include_str!("../prompts/v1/decode_edges.txt");
const STRUCTURED_SUFFIX: &str = include_str!("../prompts/v1/structured_suffix.txt");

/// A system instruction followed by the JSON shape the stage must return.
pub fn with_schema(system: &str, schema_description: &str) -> String {
    format!("{}\n{}{}\n", system.trim_end(), STRUCTURED_SUFFIX, schema_description)
}
