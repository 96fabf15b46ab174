//! High-order unfitted element machinery: GLL basis, mapped material fields,
//! direct assembly, and the precontracted fast-assembly tensors.

mod assemble;
mod basis;
mod fast;
mod material;

pub use assemble::{assemble_force_full, assemble_full, ElementMatrices};
pub use basis::{gll_nodes, GllBasis};
pub use fast::{
    assemble_force_interp, build_fast_tensor, contract_stiffness, mirror_flat_index, reference_tensor,
    selected_entries, FastTensor, ForceRequest,
};
pub use material::{
    edge_slot, map_material, pullback_tensor, CellLoads, MaterialInterp, MaterialLaw,
    MaterialModel,
};

pub(crate) use fast::{stiffness_factors, StiffnessFactors};
