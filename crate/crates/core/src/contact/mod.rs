//! Sliding-cone contact sets and the quantities built on them.
//!
//! For a vertex `y` the concave cone of opening `K` slides up from below
//! until it first meets the graph of `u`; the slide constant is
//! `c(y) = min_x u(x) + K/(1+alpha) |x - y|^(1+alpha)` over the search
//! region and the nodes within `4 K h^(1+alpha)` of that minimum are the
//! touch points of `y`. Touching from above is the same construction
//! applied to `-u`.
//!
//! Also here: the opening function `K*` and its decay curve, the
//! touch-point-to-vertex map, quadratic inf/sup-convolutions, the discrete
//! maximal function and the pointwise `C^{1,alpha}` seminorm.

mod convolution;
pub mod export;
mod maximal;
mod opening;
mod seminorm;
mod slide;
mod vertex_map;

pub use crate::cones::Side;
pub use convolution::{inf_convolution, sup_convolution};
pub use maximal::{default_radii, maximal_function, maximal_function_with};
pub use opening::{
    decay_curve, decay_curve_with, opening_function, opening_function_with, touching_sets,
    touching_sets_with, DecayCurve, DecayLevel, FitStatus, OpeningField, TouchingSets,
};
pub use seminorm::{
    seminorm_field, seminorm_field_with, window_minimax, window_minimax_oracle, SeminormField,
    Window, FIT_SLACK,
};
pub use slide::{slide_transform, slide_transform_with, ContactSet, Variant, VertexRecord};
pub use vertex_map::{vertex_map, JacobianBranch, VertexMap, VertexMapEntry};
