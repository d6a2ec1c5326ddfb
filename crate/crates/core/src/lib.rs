//! Dense multiway tensors and the algebra around them.
//!
//! Tensors are stored in colexicographic order (first index fastest) and all
//! public indices and modes are 1-based. The crate covers:
//!
//! * multi-index orderings, mode permutations and contiguous partitions
//!   ([`shape`]);
//! * dense tensors, outer and Kronecker/Zehfuss products, matricization
//!   ([`tensor`]);
//! * contractions, traces and mode products ([`contract`]);
//! * CP and Tucker formats, HOSVD, CP-ALS and odeco recovery ([`decomp`]);
//! * Z/H eigenpairs per mode, ℓ²/ℓᴼ singular tuples and best rank-one
//!   approximation ([`spectra`]);
//! * JSON file formats ([`io`]).
//!
//! ```
//! use tensorspec::{golden, find_eigenpairs, EigenOptions, EigenVariant};
//!
//! let t = golden::counterexample();
//! let found = find_eigenpairs(&t, 3, EigenVariant::Z, &EigenOptions::default()).unwrap();
//! let top = &found.pairs[0];
//! assert!((top.lambda - 9.0 / 5f64.sqrt()).abs() < 1e-10);
//! ```

pub mod contract;
pub mod decomp;
pub mod error;
pub mod golden;
pub mod io;
pub mod linalg;
pub mod numeric;
pub mod shape;
pub mod spectra;
pub mod tensor;

pub use contract::{
    contract, contract_all, contract_all_but, contract_all_but_same, contract_pairs,
    contract_vectors, dot, mode_product, multi_mode_product, trace_pair,
};
pub use decomp::{
    cp_als, cp_eval, cp_normalize, cp_to_tucker, hosvd, multilinear_rank, odeco_decompose,
    relative_error, tucker_eval, AlsOptions, AlsReport, CpDecomposition, OdecoOptions,
    OdecoReport, OdecoStatus, TuckerDecomposition,
};
pub use error::{Result, TensorError};
pub use shape::{
    coarsen, is_coarser, ContiguousPartition, MultiIndex, Ordering, Permutation, Shape,
};
pub use spectra::{
    best_rank_one, eig_orbit, eig_residual, eig_singular_bridge, find_eigenpairs,
    find_singular_tuples, singular_orbit, singular_residual, BestRankOne, BridgeOutcome,
    EigenOptions, EigenPair, EigenSearch, EigenVariant, SingularOptions, SingularOrbitOp,
    SingularSearch, SingularTuple,
};
pub use tensor::{
    hyperdiagonal, kronecker, kronecker_chain, moment_tensor, outer, outer_vectors,
    unit_tensor, unit_vector, zehfuss, DenseTensor, Matrix,
};
