//! Hermitian matrix kernels: eigendecomposition, spectral functions on the
//! support, and positivity tests with explicit tolerances.
//!
//! Everything downstream (divergences, conditional expectations, semigroup
//! exponentials) is a function of spectral data computed here, so the support
//! cutoff rule lives in exactly one place: [`support_cutoff`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

/// Relative tolerance for the Hermitian symmetry check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// An eigenvalue `l` of a Hermitian matrix counts as zero (off the support)
/// iff `l <= SUPPORT_CUTOFF * max(1, l_max)`.
pub const SUPPORT_CUTOFF: f64 = 1e-10;

/// A square complex matrix verified to equal its conjugate transpose within
/// [`HERMITIAN_TOL`] relative to the largest absolute entry.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMatrix {
    mat: DMatrix<C64>,
}

impl HermMatrix {
    /// Validates Hermitian symmetry and wraps the matrix.
    ///
    /// The stored matrix is symmetrized as `(m + m*)/2` so later spectral
    /// calls see an exactly Hermitian input.
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::NonHermitian {
                asymmetry: f64::INFINITY,
            });
        }
        let scale = mat
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let asym = (&mat - mat.adjoint()).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if asym > HERMITIAN_TOL * scale.max(1.0) * 2.0 {
            return Err(Error::NonHermitian {
                asymmetry: asym / scale,
            });
        }
        let herm = (&mat + mat.adjoint()).map(|z| z * 0.5);
        Ok(Self { mat: herm })
    }

    /// Wraps a matrix that is Hermitian by construction (no check).
    pub(crate) fn new_unchecked(mat: DMatrix<C64>) -> Self {
        Self { mat }
    }

    /// Symmetrizes `(m + m^*)/2` without a tolerance check, for matrices
    /// Hermitian up to roundoff by construction (e.g. `B rho B` with
    /// Hermitian factors).
    pub fn new_symmetrized(mat: DMatrix<C64>) -> Self {
        let herm = (&mat + mat.adjoint()).map(|z| z * 0.5);
        Self { mat: herm }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }
}

/// Spectral decomposition of a Hermitian matrix.
///
/// `frame * diag(eigenvalues) * frame^*` reconstructs the input; eigenvalues
/// are sorted ascending and the frame columns are the matching eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: DVector<f64>,
    pub frame: DMatrix<C64>,
}

impl EigenSystem {
    /// Largest eigenvalue.
    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Smallest eigenvalue.
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Reassembles `frame * diag(f(lambda)) * frame^*`.
    pub fn assemble(&self, values: &[f64]) -> DMatrix<C64> {
        let n = self.eigenvalues.len();
        debug_assert_eq!(values.len(), n);
        // frame * diag scaled column-wise, then times frame^*
        let mut scaled = self.frame.clone();
        for (j, v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*v);
        }
        scaled * self.frame.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn herm_eig(h: &HermMatrix) -> EigenSystem {
    let se = h.mat.clone().symmetric_eigen();
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| se.eigenvalues[i]));
    let mut frame = DMatrix::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        frame.set_column(j, &se.eigenvectors.column(i));
    }
    EigenSystem { eigenvalues, frame }
}

/// Support cutoff: eigenvalues at or below this threshold count as zero.
pub fn support_cutoff(lambda_max: f64) -> f64 {
    SUPPORT_CUTOFF * lambda_max.max(1.0)
}

/// Applies a scalar function to a Hermitian matrix through its spectrum.
///
/// With `support_only` set, eigenvalues at or below the support cutoff map
/// to zero and `f` is applied only to the rest (the generalized inverse on
/// the support is `matrix_fn(h, |l| l.powf(-1.0), true)`).
///
/// Fails with `DomainError` when `f` produces a non-finite value on an
/// eigenvalue that the cutoff rule keeps.
pub fn matrix_fn(h: &HermMatrix, f: impl Fn(f64) -> f64, support_only: bool) -> Result<HermMatrix> {
    let es = herm_eig(h);
    let vals = eigen_map(&es, f, support_only)?;
    Ok(HermMatrix::new_unchecked(es.assemble(&vals)))
}

/// Same as [`matrix_fn`] but reuses an existing decomposition.
pub fn eigen_map(
    es: &EigenSystem,
    f: impl Fn(f64) -> f64,
    support_only: bool,
) -> Result<Vec<f64>> {
    let cutoff = support_cutoff(es.lambda_max());
    es.eigenvalues
        .iter()
        .map(|&l| {
            if support_only && l <= cutoff {
                Ok(0.0)
            } else {
                let v = f(l);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::DomainError { eigenvalue: l })
                }
            }
        })
        .collect()
}

/// Positive semidefiniteness within tolerance: true iff the minimum
/// eigenvalue is at least `-tol * max(1, lambda_max)`.
pub fn is_psd(h: &HermMatrix, tol: f64) -> bool {
    let es = herm_eig(h);
    es.lambda_min() >= -tol * es.lambda_max().max(1.0)
}

/// Orthogonal projection onto the support (range) of a PSD matrix.
pub fn support_projection(es: &EigenSystem) -> DMatrix<C64> {
    let cutoff = support_cutoff(es.lambda_max());
    let vals: Vec<f64> = es
        .eigenvalues
        .iter()
        .map(|&l| if l > cutoff { 1.0 } else { 0.0 })
        .collect();
    es.assemble(&vals)
}
