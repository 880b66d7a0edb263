//! Fuzzy cognitive maps: simulation, mixing, and a text round trip that
//! encodes a map as prose and decodes prose back into a map.

pub mod decoder;
pub mod encoder;
pub mod eval;
pub mod fcm;
pub mod fixtures;
pub mod formats;
pub mod llm;
pub mod prompts;
pub mod text;

pub use decoder::{
    assemble_fcm, deterministic_decode, llm_decode, Backend, DecodeError, Decoded, Decoder, EdgeExtraction,
    ExtractedEdge, NodeCandidate, NounCandidate,
};
pub use encoder::{
    build_content_edit_prompt, build_encoding_prompt, deterministic_encode, llm_content_edit, llm_encode,
    quantize_weight, EncodeError, HedgeTable, LatentSummary, Provenance, Stage,
};
pub use eval::{
    adjust_flips, align_nodes, detect_flip, edge_preservation, evaluate, project_to_target, reconstruction_error,
    EvalError, EvalOptions, NodeAlignment, Norms, ReconstructionReport,
};
pub use fcm::{
    basin_map, find_equilibrium, mix, pad_edges, step, trajectory, ConceptNode, Equilibrium, Fcm, FcmError,
    MixWeights, SelfLoopPolicy, SquashSpec, StateVector,
};
pub use formats::{load_fcm, save_fcm, EdgeForm, FcmDocument, FormatError};
pub use llm::{LlmClient, LlmConfig, LlmError, Prompt, ProviderKind, TranscriptCache};
pub use text::NegationLexicon;
