//! Two-point superoperators, their kernels, and invariant structure.
//!
//! A family of divergence-free advection fields, truncated to a finite
//! Fourier band, acts on mode coefficients through anti-Hermitian matrices
//! A_k = iL_k. The stochastic flow dX = Σ_k A_k X ∘ dW^k preserves ‖X‖
//! path by path, and its second moment M_t = E[X_t X_t†] evolves by the
//! superoperator
//!
//! 𝕃(M) = ½ Σ_k \[A_k, \[A_k, M\]\] = −½ Σ_k \[L_k, \[L_k, M\]\],
//!
//! which is symmetric and negative semidefinite in the Hilbert–Schmidt
//! inner product: ⟨M, 𝕃(M)⟩ = −½ Σ_k ‖\[A_k, M\]‖². Its kernel is the
//! joint commutant {M : \[L_k, M\] = 0 for all k}. A kernel element is
//! structure the noise cannot mix, and the eigenspaces of a generic
//! Hermitian kernel element are subspaces left invariant by every
//! generator. Enhanced dissipation is obstructed exactly by invariant
//! subspaces of bounded H¹ cost, so the diagnostics in this module track
//! the kernel dimension and the H¹ content of the detected subspaces as
//! the truncation band grows.
//!
//! The module provides:
//!
//! * [`GeneratorFamily`]: validated anti-Hermitian generator matrices with
//!   optional Fourier-mode metadata,
//! * [`galerkin_shear`] and [`galerkin_2d`]: truncations of shear and
//!   general divergence-free trigonometric fields,
//! * [`build_superoperator`] and [`kernel_basis`]: the superoperator as a
//!   real symmetric matrix on Hermitian coordinates, and an orthonormal
//!   Hermitian basis of its kernel. For raw matrix families the kernel is
//!   the joint matrix commutant. Families built by the Galerkin
//!   constructors instead carry the exact action of the untruncated
//!   fields on a padded band, and their kernel is computed for the
//!   compression P𝕃P of the continuum superoperator: the compression
//!   kernel {M in band : \[L_k, M\] = 0 exactly} is free of pure
//!   truncation artifacts such as band-limited functions of a single
//!   generator, so it reflects the continuum commutant the diagnostics
//!   are after,
//! * [`invariant_subspaces`] and [`has_invariant_measure`]: spectral
//!   projections extracted from a generic kernel element, and stationarity
//!   of the two-point evolution on a restricted space,
//! * [`enhancement_diagnostic`]: the verdict over a ladder of cutoffs,
//! * [`SdePropagator`] and [`two_point_flow`]: the path-level unitary flow
//!   and the exact semigroup e^{t𝕃}, used to cross-check each other.

mod diagnostic;
mod galerkin;
mod invariant;
mod semigroup;
mod structured;
mod superop;

pub use diagnostic::{
    enhancement_diagnostic, shear_enhancing, CutoffDiagnostic, EnhancementReport, Verdict,
};
pub use galerkin::{galerkin_2d, galerkin_shear, VectorField2d};
pub use invariant::{
    has_invariant_measure, invariant_subspaces, HsProjector, InvariantDecomposition,
    MeasureWitness,
};
pub use semigroup::{two_point_flow, SdePropagator};
pub use superop::{
    build_superoperator, hermitian_basis, kernel_basis, KernelBasis, DENSE_DIM_CAP, GAP_RATIO,
    TOL_NULL,
};

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relative tolerance for the anti-Hermiticity of generator matrices.
pub const TOL_SKEW: f64 = 1e-12;

/// A finite family of anti-Hermitian matrices acting on one mode space.
///
/// Construction validates that the family is nonempty, that all matrices
/// are square of a common dimension with finite entries, and that each
/// satisfies ‖A + A†‖ ≤ [`TOL_SKEW`] · max(1, ‖A‖) in Frobenius norm.
/// Galerkin constructors attach the Fourier mode (m, n) behind each basis
/// index, which the enhancement diagnostic needs for discrete-H¹ weights,
/// along with a provenance string and the norm of any skew-symmetrization
/// correction they applied.
#[derive(Debug, Clone)]
pub struct GeneratorFamily {
    mats: Vec<DMatrix<Complex64>>,
    sparse: Vec<Vec<(usize, usize, Complex64)>>,
    modes: Option<Vec<(i64, i64)>>,
    provenance: Option<String>,
    correction: f64,
    ext: Option<FamilyExtension>,
}

/// Which slot of a (m, n) mode pair indexes the diagonal blocks of a
/// coordinate shear; the profile depends on the other coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BlockAxis {
    First,
    Second,
}

/// One generator that is a coordinate shear u(w)∂_v. In the two-point
/// picture its commutator preserves the transverse-mode pair (m, m') and
/// acts there as multiplication by i(m u(w) − m' u(w')).
#[derive(Debug, Clone)]
pub(crate) struct ShearGen {
    pub blocks_on: BlockAxis,
    pub u_hat: Vec<(i64, Complex64)>,
}

/// Exact action of the untruncated generators on a padded mode band.
///
/// The commutator \[L_k, M\] of an untruncated trigonometric field with a
/// band-supported M is supported on the band padded by the field degree,
/// and every entry there involves only exact convolution coefficients.
/// Storing the generators on the padded band therefore gives the
/// compression P𝕃P of the continuum superoperator exactly.
#[derive(Debug, Clone)]
pub(crate) struct FamilyExtension {
    pub dim_ext: usize,
    pub embed: Vec<usize>,
    pub mats: Vec<Vec<(usize, usize, Complex64)>>,
    pub shear: Option<Vec<ShearGen>>,
}

impl GeneratorFamily {
    /// Validates a raw family of anti-Hermitian matrices.
    pub fn new(mats: Vec<DMatrix<Complex64>>) -> Result<Self> {
        Self::with_metadata(mats, None, None, 0.0)
    }

    pub(crate) fn with_metadata(
        mats: Vec<DMatrix<Complex64>>,
        modes: Option<Vec<(i64, i64)>>,
        provenance: Option<String>,
        correction: f64,
    ) -> Result<Self> {
        Self::with_extension(mats, modes, provenance, correction, None)
    }

    pub(crate) fn with_extension(
        mats: Vec<DMatrix<Complex64>>,
        modes: Option<Vec<(i64, i64)>>,
        provenance: Option<String>,
        correction: f64,
        ext: Option<FamilyExtension>,
    ) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::Config("generator family must be nonempty".into()));
        }
        let d = mats[0].nrows();
        if d == 0 {
            return Err(Error::Config("generator matrices must be nonempty".into()));
        }
        for (k, a) in mats.iter().enumerate() {
            if a.nrows() != d || a.ncols() != d {
                return Err(Error::GridMismatch(format!(
                    "generator {k} is {}×{}, expected {d}×{d}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Config(format!(
                    "generator {k} contains a non-finite entry"
                )));
            }
            let skew = (a + a.adjoint()).norm();
            if skew > TOL_SKEW * a.norm().max(1.0) {
                return Err(Error::Config(format!(
                    "generator {k} is not anti-Hermitian: ‖A + A†‖ = {skew:.3e} exceeds {TOL_SKEW:.0e} · max(1, ‖A‖)"
                )));
            }
        }
        if let Some(ms) = &modes {
            if ms.len() != d {
                return Err(Error::GridMismatch(format!(
                    "mode metadata has {} entries for dimension {d}",
                    ms.len()
                )));
            }
        }
        let sparse = mats
            .iter()
            .map(|a| {
                let mut t = Vec::new();
                for c in 0..d {
                    for r in 0..d {
                        let v = a[(r, c)];
                        if v != Complex64::new(0.0, 0.0) {
                            t.push((r, c, v));
                        }
                    }
                }
                t
            })
            .collect();
        if let Some(e) = &ext {
            if e.embed.len() != d
                || e.mats.len() != mats.len()
                || e.embed.iter().any(|&i| i >= e.dim_ext)
                || e.mats
                    .iter()
                    .any(|t| t.iter().any(|&(r, c, _)| r >= e.dim_ext || c >= e.dim_ext))
                || e.shear.as_ref().is_some_and(|s| s.len() != mats.len())
            {
                return Err(Error::Config(
                    "padded-band extension is inconsistent with the family".into(),
                ));
            }
        }
        Ok(Self {
            mats,
            sparse,
            modes,
            provenance,
            correction,
            ext,
        })
    }

    /// The anti-Hermitian generators A_k.
    pub fn generators(&self) -> &[DMatrix<Complex64>] {
        &self.mats
    }

    /// Nonzero entries of each generator as (row, column, value) triplets.
    pub(crate) fn triplets(&self) -> &[Vec<(usize, usize, Complex64)>] {
        &self.sparse
    }

    /// The padded-band action of the untruncated fields, when the family
    /// was built by a Galerkin constructor.
    pub(crate) fn extension(&self) -> Option<&FamilyExtension> {
        self.ext.as_ref()
    }

    /// Dimension d of the mode space.
    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    /// Number of generators in the family.
    pub fn len(&self) -> usize {
        self.mats.len()
    }

    /// Whether the family holds no generators (never true after `new`).
    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    /// Fourier mode (m, n) behind each basis index, when known.
    pub fn modes(&self) -> Option<&[(i64, i64)]> {
        self.modes.as_deref()
    }

    /// Human-readable description of how the family was built.
    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    /// Frobenius norm of the skew-symmetrization correction applied when
    /// the family was truncated, zero for exact truncations.
    pub fn truncation_correction(&self) -> f64 {
        self.correction
    }

    /// The Hermitian parts L_k = −iA_k.
    pub fn hermitian_parts(&self) -> Vec<DMatrix<Complex64>> {
        self.mats
            .iter()
            .map(|a| a.map(|z| z * Complex64::new(0.0, -1.0)))
            .collect()
    }

    /// Largest generator Frobenius norm, the scale for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.mats.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Upper bound on the superoperator spectral norm,
    /// 2 Σ_k ‖A_k‖²_op, with each operator norm bounded by
    /// √(‖A‖₁ ‖A‖_∞).
    pub fn spectral_bound(&self) -> f64 {
        2.0 * self
            .mats
            .iter()
            .map(|a| {
                let d = a.nrows();
                let mut colmax: f64 = 0.0;
                let mut rows = vec![0.0f64; d];
                for c in 0..d {
                    let mut s = 0.0;
                    for r in 0..d {
                        let m = a[(r, c)].norm();
                        s += m;
                        rows[r] += m;
                    }
                    colmax = colmax.max(s);
                }
                let rowmax = rows.iter().cloned().fold(0.0, f64::max);
                colmax * rowmax
            })
            .sum::<f64>()
    }
}
