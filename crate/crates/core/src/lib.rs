//! Computational coarse geometry of sequences of finite marked groups.
//!
//! - [`group`]: finite marked groups, word metrics and group-algebra arithmetic.
//! - [`topology`]: Cayley-topology neighbourhoods, partial isomorphisms,
//!   convergence detection and quotient partitions.
//! - [`spectral`]: Laplacians and exact spectral gaps.
//! - [`sos`]: sum-of-squares certificates and the Roe-to-group averaging.
//! - [`roe`]: finite-propagation kernels over disjoint unions.
//! - [`cohomology`]: first cohomology of finite kernel algebras.
//!
//! Coefficient types are generic over [`Scalar`]; the aliases below fix the
//! common choices.

pub mod cohomology;
pub mod error;
pub mod group;
pub mod roe;
pub mod scalar;
pub mod sos;
pub mod spectral;
pub mod topology;

pub use error::{Error, Result};
pub use group::catalog::{Family, GroupSpec};
pub use group::{GroupAlgElement, Letter, MarkedGroup, QuotientMap, Word};
pub use roe::{DisjointUnionSpace, Kernel};
pub use scalar::Scalar;
pub use spectral::{Method, SpectrumReport};

pub type RealElement = GroupAlgElement<f64>;
pub type ComplexElement = GroupAlgElement<num_complex::Complex64>;
pub type ExactElement = GroupAlgElement<num_rational::Rational64>;

pub type RealKernel = Kernel<f64>;
pub type ComplexKernel = Kernel<num_complex::Complex64>;
