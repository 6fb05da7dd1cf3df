//! Operators, superoperators and the GKLS / Kraus / Choi representations.

mod kossakowski;
mod kraus;
mod operator;
mod spin;
mod superop;
mod validate;

pub use kossakowski::{
    dissipator_from_kossakowski, kossakowski_to_jumps, BasisKind, HSBasis, KossakowskiMatrix, RANK_CUTOFF,
};
pub(crate) use kossakowski::dissipator_from_matrix_unit_kossakowski;
pub use kraus::{cptp_from_kraus, kraus_of_choi, kraus_rank, KrausSet, TP_TOL};
pub use operator::{devectorize, vectorize, Operator, Role, HERMITIAN_TOL};
pub use spin::{boson_operators, spin_operators, BosonOps, SpinOps};
pub use superop::{
    check_psd, choi_of_map, dissipator_from_cp_map, dissipator_from_jumps, hamiltonian_superop, map_of_choi,
    sandwich, superop_expm, Convention, Superoperator, PSD_TOL,
};
pub use validate::{
    conditional_choi, validate, DynamicsKind, ValidityReport, CHOI_TOL, CONJ_TOL, FIXED_POINT_TOL, RE_TOL, TRACE_TOL,
};
