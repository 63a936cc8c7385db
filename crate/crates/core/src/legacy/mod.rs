//! Converting a hand-written LaTeX blueprint into attributes on the Lean
//! sources plus `\inputleannode` references.

mod apply;
mod audit;
mod plan;
mod tex;

pub use apply::{apply_plan, preview_plan, ApplySummary};
pub use audit::{audit_legacy, legacy_graph};
pub use plan::{
    plan_conversion, reflow, ConversionPlan, ConvertOptions, LatexEdit, SkippedNode, SourceEdit,
    SourceFile,
};
pub use tex::{
    clean_text, macro_arguments, parse_legacy_blueprint, parse_legacy_str, LegacyDocument,
    LegacyNode, LegacyProof, TexSpan, NODE_ENVS,
};
