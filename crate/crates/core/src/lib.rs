//! Families of pairwise disjoint arithmetic progressions with distinct moduli.
//!
//! A progression `a mod q` is the residue class `{n : n ≡ a (mod q)}`. A family
//! `a_1 mod q_1, ..., a_k mod q_k` with `2 ≤ q_1 < ... < q_k ≤ x` is *disjoint*
//! when no integer lies in two of its classes; `f(x)` is the largest such `k`.
//!
//! The crate is organised by task:
//!
//! * [`numtheory`]: primes, factorizations, CRT, the `L(c, x)` scale and exact
//!   smooth-number counts.
//! * [`family`]: the progression and family model, the gcd disjointness
//!   criterion and the pairwise verifier.
//! * [`construction`]: the single-large-prime CRT-chain lower-bound family.
//! * [`solver`]: exact `f(x)` by branch and bound, plus a brute-force oracle.
//! * [`refinement`]: the nested-subset refinement chain for square-free families,
//!   emitted as a checkable certificate.
//! * [`bounds`]: exact counts set against their `L(c, x)` predictions.
//! * [`io`]: the JSON Lines family format.

pub mod bounds;
pub mod construction;
mod error;
pub mod family;
pub mod io;
pub mod numtheory;
pub mod refinement;
pub mod solver;

pub use error::{Error, Result};
pub use family::{disjoint, verify_family, Family, Progression, VerifyReport, Witness};
