//! Laplacian-filtered Calderón boundary integral equations for 2D TE
//! scattering, with low-rank skeletons of the filtered compact part and a
//! Woodbury direct inverse, plus the 3D quasi-Helmholtz projector algebra.
//!
//! The 2D pipeline is
//!
//! 1. [`mesh2d`]: sample a smooth closed curve into a polygon carrying
//!    piecewise-linear hat functions;
//! 2. [`assembly2d`]: Galerkin matrices of the single layer `S`, double
//!    layer `D`, hypersingular `N`, the Gram matrix and the Laplacian;
//! 3. [`excitation2d`]: right-hand sides for line sources and plane waves;
//! 4. [`calderon2d`]: the normalized Calderón EFIE `Z₂ = I/4 + C₂`, the
//!    normalized MFIE and their Laplacian-filtered versions `βI + P·C`;
//! 5. [`compression`]: randomized skeleton `P·C ≈ U·Vᵀ` at tolerance `ε`;
//! 6. [`solver`]: `(βI + U·Vᵀ)⁻¹` through the Woodbury identity.
//!
//! [`spectral`] holds the eigen-machinery behind the filters and [`qh3d`]
//! the loop/star projectors on closed triangle meshes.

// Negated comparisons reject NaN; index loops mirror the matrix algebra.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly2d;
pub mod calderon2d;
pub mod compression;
pub mod dense;
pub mod error;
pub mod excitation2d;
pub mod geometry;
pub mod mesh2d;
pub mod qh3d;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
