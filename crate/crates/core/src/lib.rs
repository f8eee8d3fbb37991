//! Linear preservers of secant varieties of Segre–Veronese varieties.

pub mod combinat;
pub mod equations;
pub mod error;
pub mod interpolate;
pub mod linalg;
pub mod poly;
pub mod stabilizer;
pub mod tensor;

pub use combinat::{Bipartition, BoundReport, SetPartition};
pub use error::{Error, Result};
pub use interpolate::{BasisOptions, CandidateBasis, FactorMode, InterpolationConfig, InterpolationResult, WeylMode};
pub use linalg::{PrimeSet, SparseMatrix};
pub use poly::{LinearSubspace, Poly, Rational};
pub use stabilizer::{LieBasis, StabilizerReport, Verdict};
pub use tensor::{Monomial, TensorFormat};
