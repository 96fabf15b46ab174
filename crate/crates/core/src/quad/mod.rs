//! Quadrature over trimmed parametric cells: reference tensor rules, an
//! adaptive quadtree with per-column height-function leaves for the trimmed
//! interior and boundary, and 1D rules on partially active conformal edges.

mod cutcell;
mod edge;
mod gauss;
mod rule;

pub use cutcell::{
    boundary_rule, complement_rule, cut_cell_rules, interior_rule, CutCellRules, CutLeafMode,
    QuadOptions,
};
pub use edge::{conformal_edge_rule, EdgeRule};
pub use gauss::{gauss_1d, legendre, Gauss1d};
pub use rule::{reference_rule, Column, InteriorStructure, LeafRule, QuadRule, Rect};
