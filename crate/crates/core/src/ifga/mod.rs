//! Inter-frame graph attention between search and template features, and the
//! depthwise cross-correlation that turns features into response maps.
//!
//! Search positions act as queries and template positions as keys/values.
//! The module is a standalone kernel: choosing which pyramid levels it runs
//! on is left to the caller.

mod attention;
mod tensor;
mod xcorr;

pub use attention::{
    aggregate, attention_weights, ifga_forward, ifga_forward_with_attention, project_qkv,
    region_mask, template_saliency, AttentionMatrix, ProjectionWeights, Projections, Saliency,
    DEFAULT_REDUCTION,
};
pub use tensor::{FeatureMap, Matrix};
pub use xcorr::xcorr_depthwise;
