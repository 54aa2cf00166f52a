//! Thin coalgebras for analytic functors.
//!
//! The crate covers:
//!
//! * [`signature`]: analytic functor signatures, orbit canonical forms, contexts and plug-in;
//! * [`coalgebra`]: finite coalgebras, successor multigraphs, SCCs and minimization;
//! * [`thinness`]: the linear-time thinness check, witnesses and a brute-force oracle;
//! * [`terms`]: finitary terms whose G-nodes carry lasso streams of contexts;
//! * [`semantics`]: unfolding terms into coalgebras and semantic equality;
//! * [`normalform`]: state ranks, normal-form extraction and normalization;
//! * [`treeenc`]: tree encodings and Cantor-Bendixson ranks for polynomial signatures;
//! * [`io`] and [`gen`]: JSON file formats and seeded random instances.

pub mod coalgebra;
pub mod gen;
pub mod io;
pub mod normalform;
pub mod semantics;
pub mod signature;
pub mod terms;
pub mod thinness;
pub mod treeenc;

pub use coalgebra::{Coalgebra, CoalgebraError, Condensation, FinitePath, PointedCoalgebra};
pub use normalform::{
    brute_force_normal, extract_normal, normalize, state_ranks, BruteForceOracle, NormalFormError,
    StateKind, StateRankTable,
};
pub use semantics::{beh_equal_terms, check_constructible_thin, unfold, UnfoldResult, Unfolder};
pub use signature::{
    ContextElem, FElem, OpId, OperationSymbol, PermGroup, Signature, SignatureError, SignatureSpec,
    DEFAULT_ARITY_CAP,
};
pub use terms::{Lasso, Rank, Step, Term, TermError, TermNode};
pub use thinness::{
    count_infinite_paths_class, is_thin, oracle_is_thin, NonThinWitness, PathCountClass,
    ThinVerdict,
};
pub use treeenc::{assert_polynomial, cb_rank, dom_tree, enc, TreeEncError, WordTree};
