//! Numerics for Haar random quantum error-correcting codes.
//!
//! The crate samples random encoding isometries `V: C^K -> C^N`, certifies how
//! close the shifted basis `{E_i V|j>}` of a unitary error set comes to an
//! orthonormal system (the code's `delta`), builds the rounded partial-isometry
//! decoder from that basis, and measures how well the decoder recovers states
//! that passed through noise channels supported on the error span.
//!
//! Module map:
//!
//! * [`linalg`] — dense complex matrices, Hermitian eigendecomposition, and the
//!   SVD-derived kernels (`singular_extrema`, `isometrize`,
//!   `partial_isometry_round`) everything else is built on.
//! * [`errorset`] — unitary error sets: compact generalized Paulis, monomial
//!   operators, generators for bounded-weight and erasure families, validation,
//!   and the JSON interchange format.
//! * [`codes`] — Gaussian/Haar sampling, the shifted-basis matrix, and
//!   nondegeneracy certification, plus the binary code-file format.
//! * [`decoder`] — the rounded decoding map `D`, the projective decode channel,
//!   and the raw pure-state decode used by the metrics.
//! * [`noise`] — Kraus channels whose operators lie in the span of an error
//!   set: mixtures, Haar-random local channels, coefficient decompositions,
//!   and Stinespring dilations.
//! * [`metrics`] — recovery-quality measurements: the decode residual on pure
//!   states with a reference system, and the entangled-input trace distance
//!   that brackets the channel disturbance from below.
//!
//! # Register conventions
//!
//! Composite vectors are stored with the *leftmost* ket factor varying
//! fastest: a state `|x> ⊗ |y>` with `x` in a `d_x`-dimensional space sits at
//! linear index `idx(y) * d_x + idx(x)`. Concretely:
//!
//! * the shifted-basis column for `(j, i)` (codeword `j`, error `i`) is column
//!   `i * K + j`, so the matrix is the column-block concatenation
//!   `[E_1 V | E_2 V | ... | E_m V]`;
//! * a Stinespring dilation stacks its Kraus blocks vertically, sending `|psi>`
//!   to the vector whose `r`-th block of length `N` is `K_r |psi>`;
//! * the channel coefficient vector stores `c[r, i]` at index `r * m + i`.
//!
//! Under this convention `M ⊗ I` acts on a vector by applying `M` to each
//! contiguous chunk, which is how every register-extended product below is
//! implemented.
//!
//! All per-seed computations are deterministic: the same seed produces
//! bit-identical matrices regardless of how many instances run concurrently.

pub mod codes;
pub mod decoder;
mod error;
pub mod errorset;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod seeding;

pub use error::{Error, Result};

/// Default cap on the number of complex entries any single dense matrix
/// materialization may use (2^28 entries = 4 GiB of complex doubles).
pub const DEFAULT_ELEMENT_CAP: usize = 1 << 28;
