//! Structure scoring for space-time data, plus the simulations used to
//! exercise it: a conserved lattice gas, a kicked-spin Floquet circuit,
//! and Trotterized Heisenberg-ring dynamics on a sampled statevector.

// negated float comparisons reject NaN as well; index loops follow the
// written matrix algebra
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

#[cfg(feature = "compression")]
pub mod cid;
pub mod clg;
pub mod dtc;
pub mod fit;
pub mod grid;
pub mod qsim;
pub mod seeding;
pub mod transport;
