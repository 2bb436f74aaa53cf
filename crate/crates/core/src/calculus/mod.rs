//! Generic extension calculus over a [`Model`](crate::models::Model): the two
//! decompositions of `D(S*)`, the boundary maps and their `eps`-family, the
//! gap metric, and the reconstruction of `U_eps` and `T`.

mod extrapolate;
mod gap;
mod kvb;
mod maps;
mod vn;

pub use extrapolate::{richardson, Extrapolated};
pub use gap::{projection_difference_norm, projection_gap_norm, subspace_gap, SubspaceGap};
pub use kvb::{
    build_kvb_domain_vector, kvb_components, kvb_contains, kvb_from_components, kvb_spanning_probes, kvb_to_vn,
    reconstruct_t, reconstruct_t_default, KvbComponents, KvbParameter, KvbReconstruction, DEFAULT_T_GRID,
};
pub use maps::{
    decompose_kvb, decompose_vn, gamma0, gamma0_eps, gamma1, gamma1_eps, kernel_coordinates, project_onto_kernel,
    s_star_upsilon, upsilon_eps, KvbDecomposition, Sign, VnDecomposition,
};
pub use vn::{reconstruct_u, vn_components, vn_contains, vn_spanning_probes, VnComponents, VnParameter};
