//! Explicit equilibrium clusters, their quasi-equilibrium variants, and the
//! surgery that adds or removes a three-sided bubble at a junction.

mod basic;
mod catalog;
mod decorate;
mod flower;
mod presets;

pub use basic::{
    arc_triangle, double_bubble, double_bubble_center_distance, mobius_image, symmetric_triple_area,
    symmetric_triple_bubble, triple_bubble, triple_bubble_through, ArcTriangle,
};

pub use decorate::{decorate, four_bubble, scale_three_sided};
pub use catalog::PresetSpec;
pub use flower::flower;
pub use presets::{
    equilateral_polygon, flower_symmetric, necklace, quasi_variant, stretch, two_lens, two_lens_at, QuasiKind,
};
