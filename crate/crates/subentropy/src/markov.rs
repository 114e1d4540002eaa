//! Self-adjoint quantum Markov semigroups at finite dimension: continuous
//! Schur-multiplier semigroups `T_t(x)_{ij} = e^{-b_ij t} x_ij`, discrete
//! Schur maps `T_a(x)_{ij} = a_ij x_ij`, and generic self-adjoint PSD
//! generators given as superoperators; their decoherence-free subalgebras,
//! spectral gaps, and the entropy-decay / decoherence-time certificates.
//!
//! Conventions: `T_t = e^{-A t}` with `A` positive semidefinite and
//! self-adjoint for the weighted trace inner product, so the same map serves
//! as Heisenberg and Schroedinger evolution. Superoperator matrices act on
//! the concatenation of the row-major vectorizations of the blocks.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::algebra::{same_algebra, AlgebraElement, CopySlot, Density, DirectSumAlgebra, Inclusion};
use crate::divergence::{trace_distance, umegaki, RenyiOrder};
use crate::index::{dcb_index, pimsner_popa_index};
use crate::linalg::{self, C64, HermMatrix};
use crate::projection::{divergence_to_subalgebra_seeded, SolverReport};
use crate::solver::SolverBudget;
use crate::{Error, Result};

/// Entries of a Schur generator at or below this tolerance (relative to the
/// largest entry) count as zero for the decoherence-free pattern.
pub const SCHUR_ZERO_TOL: f64 = 1e-12;

/// Tolerance for the conditionally-negative-definite test: the quadratic
/// form restricted to the zero-sum subspace may not exceed this.
pub const CND_TOL: f64 = 1e-10;

/// Generator of a continuous Schur-multiplier semigroup: a real symmetric
/// matrix with zero diagonal, nonnegative entries, and conditionally
/// negative definite quadratic form on zero-sum vectors.
#[derive(Debug, Clone)]
pub struct SchurGenerator {
    b: DMatrix<f64>,
}

impl SchurGenerator {
    pub fn new(b: DMatrix<f64>) -> Result<Self> {
        let m = b.nrows();
        if b.ncols() != m || m == 0 {
            return Err(Error::BadInput("generator must be square".into()));
        }
        for i in 0..m {
            for j in 0..m {
                if (b[(i, j)] - b[(j, i)]).abs() > 1e-12 * b[(i, j)].abs().max(1.0) {
                    return Err(Error::Asymmetric { i, j });
                }
            }
        }
        for i in 0..m {
            if b[(i, i)].abs() > 1e-12 {
                return Err(Error::BadDiagonal { index: i });
            }
        }
        // negative entries already violate conditional negativity on the
        // difference vector e_i - e_j
        for i in 0..m {
            for j in 0..m {
                if b[(i, j)] < -1e-12 {
                    let mut witness = vec![0.0; m];
                    witness[i] = 1.0;
                    witness[j] = -1.0;
                    return Err(Error::NotCnd {
                        value: -2.0 * b[(i, j)],
                        witness,
                    });
                }
            }
        }
        if m > 1 {
            let basis = zero_sum_basis(m);
            let restricted = basis.transpose() * &b * &basis;
            let sym = (&restricted + restricted.transpose()).map(|v| 0.5 * v);
            let se = sym.symmetric_eigen();
            let mut worst = 0usize;
            for i in 0..se.eigenvalues.len() {
                if se.eigenvalues[i] > se.eigenvalues[worst] {
                    worst = i;
                }
            }
            if se.eigenvalues[worst] > CND_TOL {
                let c = &basis * se.eigenvectors.column(worst);
                let witness: Vec<f64> = c.iter().copied().collect();
                let value = (c.transpose() * &b * c)[(0, 0)];
                return Err(Error::NotCnd { witness, value });
            }
        }
        Ok(Self { b })
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// The ambient algebra `M_m` with normalized trace.
    pub fn algebra(&self) -> Arc<DirectSumAlgebra> {
        DirectSumAlgebra::matrix(self.dim())
    }

    fn zero_tol(&self) -> f64 {
        SCHUR_ZERO_TOL * self.b.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0)
    }

    /// Lifted generator of `T_t ⊗ id` on `M_m ⊗ M_n`.
    pub fn amplify(&self, n: usize) -> SchurGenerator {
        if n == 1 {
            return self.clone();
        }
        let m = self.dim();
        let big = DMatrix::from_fn(m * n, m * n, |r, c| self.b[(r / n, c / n)]);
        SchurGenerator { b: big }
    }

    /// Sum construction for a tensor product of two Schur semigroups:
    /// `b(i,α),(j,β) = b1_ij + b2_αβ`.
    pub fn tensor_sum(&self, other: &SchurGenerator) -> SchurGenerator {
        let (m, n) = (self.dim(), other.dim());
        let big = DMatrix::from_fn(m * n, m * n, |r, c| {
            self.b[(r / n, c / n)] + other.b[(r % n, c % n)]
        });
        SchurGenerator { b: big }
    }
}

/// Orthonormal basis of the zero-sum subspace of `R^m`, as columns.
fn zero_sum_basis(m: usize) -> DMatrix<f64> {
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(m - 1);
    for i in 0..m - 1 {
        let mut v = DVector::zeros(m);
        v[i] = 1.0;
        v[i + 1] = -1.0;
        for c in &cols {
            let proj = c.dot(&v);
            v -= c.map(|x| x * proj);
        }
        let norm = v.norm();
        cols.push(v / norm);
    }
    DMatrix::from_columns(&cols)
}

/// A discrete quantum Markov Schur map: real symmetric PSD with unit
/// diagonal.
#[derive(Debug, Clone)]
pub struct SchurMap {
    a: DMatrix<f64>,
}

impl SchurMap {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let m = a.nrows();
        if a.ncols() != m || m == 0 {
            return Err(Error::InvalidSchurMap {
                reason: "matrix must be square".into(),
            });
        }
        for i in 0..m {
            for j in 0..m {
                if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidSchurMap {
                        reason: format!("asymmetric at ({i},{j})"),
                    });
                }
            }
        }
        for i in 0..m {
            if (a[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidSchurMap {
                    reason: format!("diagonal entry {i} is not 1"),
                });
            }
        }
        let se = a.clone().symmetric_eigen();
        let min = se.eigenvalues.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        if min < -1e-9 {
            return Err(Error::InvalidSchurMap {
                reason: format!("not positive semidefinite (min eigenvalue {min:.3e})"),
            });
        }
        Ok(Self { a })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn algebra(&self) -> Arc<DirectSumAlgebra> {
        DirectSumAlgebra::matrix(self.dim())
    }

    /// `mu = max_{i != j} |a_ij|`, the off-diagonal contraction rate.
    pub fn mu(&self) -> f64 {
        let m = self.dim();
        let mut mu = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    mu = mu.max(self.a[(i, j)].abs());
                }
            }
        }
        mu
    }

    /// `T ⊗ id` on `M_m ⊗ M_n`.
    pub fn amplify(&self, n: usize) -> SchurMap {
        if n == 1 {
            return self.clone();
        }
        let m = self.dim();
        let big = DMatrix::from_fn(m * n, m * n, |r, c| self.a[(r / n, c / n)]);
        SchurMap { a: big }
    }

    /// Applies `T_a^k` entrywise.
    pub fn iterate(&self, rho: &Density, k: u32) -> Result<Density> {
        let m = self.dim();
        let block = rho.block(0);
        if rho.algebra().num_blocks() != 1 || block.nrows() != m {
            return Err(Error::AlgebraMismatch);
        }
        let out = DMatrix::from_fn(m, m, |i, j| block[(i, j)] * self.a[(i, j)].powi(k as i32));
        Density::new(AlgebraElement::new(Arc::clone(rho.algebra()), vec![out])?)
    }
}

/// A generic self-adjoint PSD generator on a direct-sum algebra, stored as
/// a superoperator matrix on concatenated block vectorizations together
/// with its spectral data in the weighted-trace geometry.
#[derive(Debug, Clone)]
pub struct GeneralGenerator {
    algebra: Arc<DirectSumAlgebra>,
    matrix: DMatrix<C64>,
    /// Eigenvalues of the weighted-symmetric form, ascending.
    eigenvalues: Vec<f64>,
    /// Eigenframe of the weighted-symmetric form (unitary).
    frame: DMatrix<C64>,
    /// Square roots of the coordinate weights.
    wsqrt: Vec<f64>,
}

impl GeneralGenerator {
    pub fn new(algebra: Arc<DirectSumAlgebra>, matrix: DMatrix<C64>) -> Result<Self> {
        let dv = algebra.vector_dim();
        if matrix.nrows() != dv || matrix.ncols() != dv {
            return Err(Error::BadInput(format!(
                "superoperator must be {dv}x{dv} for this algebra, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let mut wsqrt = Vec::with_capacity(dv);
        for b in algebra.blocks() {
            let w = b.weight_f64().sqrt();
            for _ in 0..b.dim * b.dim {
                wsqrt.push(w);
            }
        }
        // symmetrized form W^{1/2} S W^{-1/2}
        let sym = DMatrix::from_fn(dv, dv, |r, c| matrix[(r, c)] * (wsqrt[r] / wsqrt[c]));
        let scale = sym.iter().map(|z| z.norm()).fold(1e-300, f64::max);
        let asym = (&sym - sym.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        if asym > 1e-9 * scale.max(1.0) {
            return Err(Error::BadInput(
                "superoperator is not self-adjoint for the weighted trace inner product".into(),
            ));
        }
        let es = linalg::herm_eig(&HermMatrix::new_symmetrized(sym));
        if es.lambda_min() < -1e-9 * es.lambda_max().max(1.0) {
            return Err(Error::BadInput(format!(
                "generator is not positive semidefinite (min eigenvalue {:.3e})",
                es.lambda_min()
            )));
        }
        let gen = Self {
            algebra,
            matrix,
            eigenvalues: es.eigenvalues.iter().copied().collect(),
            frame: es.frame,
            wsqrt,
        };
        let one = AlgebraElement::identity(&gen.algebra);
        let a_one = gen.apply(&one)?;
        if a_one.norm_l2() > 1e-9 {
            return Err(Error::BadInput(
                "generator does not annihilate the identity".into(),
            ));
        }
        for &t in &[0.1, 1.0] {
            if !gen.evolution_is_cp(t, 1e-8) {
                return Err(Error::BadInput(format!(
                    "e^(-At) fails the Choi positivity test at t = {t}"
                )));
            }
        }
        Ok(gen)
    }

    /// Builds the superoperator matrix by applying `action` to every matrix
    /// unit, then validates.
    pub fn from_action(
        algebra: &Arc<DirectSumAlgebra>,
        action: impl Fn(&AlgebraElement) -> AlgebraElement,
    ) -> Result<Self> {
        let dv = algebra.vector_dim();
        let mut mat = DMatrix::zeros(dv, dv);
        let mut col = 0usize;
        for (l, b) in algebra.blocks().iter().enumerate() {
            for i in 0..b.dim {
                for j in 0..b.dim {
                    let mut unit = AlgebraElement::zero(algebra);
                    unit.blocks_mut()[l][(i, j)] = C64::new(1.0, 0.0);
                    let img = action(&unit);
                    let mut row = 0usize;
                    for tb in img.blocks() {
                        for r in 0..tb.nrows() {
                            for c in 0..tb.ncols() {
                                mat[(row, col)] = tb[(r, c)];
                                row += 1;
                            }
                        }
                    }
                    col += 1;
                }
            }
        }
        GeneralGenerator::new(Arc::clone(algebra), mat)
    }

    pub fn algebra(&self) -> &Arc<DirectSumAlgebra> {
        &self.algebra
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    fn vectorize(&self, x: &AlgebraElement) -> DVector<C64> {
        let dv = self.algebra.vector_dim();
        let mut out = DVector::zeros(dv);
        let mut idx = 0;
        for b in x.blocks() {
            for i in 0..b.nrows() {
                for j in 0..b.ncols() {
                    out[idx] = b[(i, j)];
                    idx += 1;
                }
            }
        }
        out
    }

    fn unvectorize(&self, v: &DVector<C64>) -> AlgebraElement {
        let mut blocks = Vec::with_capacity(self.algebra.num_blocks());
        let mut idx = 0;
        for b in self.algebra.blocks() {
            let mut m = DMatrix::zeros(b.dim, b.dim);
            for i in 0..b.dim {
                for j in 0..b.dim {
                    m[(i, j)] = v[idx];
                    idx += 1;
                }
            }
            blocks.push(m);
        }
        AlgebraElement::new(Arc::clone(&self.algebra), blocks).unwrap()
    }

    /// Applies the generator to an element.
    pub fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        if !same_algebra(x.algebra(), &self.algebra) {
            return Err(Error::AlgebraMismatch);
        }
        let v = self.vectorize(x);
        Ok(self.unvectorize(&(&self.matrix * v)))
    }

    /// Applies a superoperator given in matrix form (e.g. the kernel
    /// projector) to an element.
    pub fn apply_matrix(&self, superop: &DMatrix<C64>, x: &AlgebraElement) -> Result<AlgebraElement> {
        if !same_algebra(x.algebra(), &self.algebra) {
            return Err(Error::AlgebraMismatch);
        }
        let v = self.vectorize(x);
        Ok(self.unvectorize(&(superop * v)))
    }

    /// Applies `e^{-At}` through the spectral decomposition.
    pub fn evolve_element(&self, x: &AlgebraElement, t: f64) -> Result<AlgebraElement> {
        if !same_algebra(x.algebra(), &self.algebra) {
            return Err(Error::AlgebraMismatch);
        }
        let v = self.vectorize(x);
        let dv = v.len();
        let scaled = DVector::from_fn(dv, |i, _| v[i] * C64::new(self.wsqrt[i], 0.0));
        let coeffs = self.frame.adjoint() * scaled;
        let evolved = DVector::from_fn(dv, |i, _| {
            coeffs[i] * C64::new((-self.eigenvalues[i] * t).exp(), 0.0)
        });
        let back = &self.frame * evolved;
        let out = DVector::from_fn(dv, |i, _| back[i] / C64::new(self.wsqrt[i], 0.0));
        Ok(self.unvectorize(&out))
    }

    /// Smallest nonzero eigenvalue (eigenvalues below the support cutoff
    /// count as kernel).
    pub fn gap(&self) -> Result<f64> {
        let top = self.eigenvalues.last().copied().unwrap_or(0.0);
        let cut = linalg::support_cutoff(top);
        self.eigenvalues
            .iter()
            .copied()
            .find(|&v| v > cut)
            .ok_or(Error::NoGap)
    }

    /// Projection (as a superoperator matrix) onto the kernel of the
    /// generator, orthogonal in the weighted geometry.
    pub fn kernel_projector(&self) -> DMatrix<C64> {
        let dv = self.eigenvalues.len();
        let top = self.eigenvalues.last().copied().unwrap_or(0.0);
        let cut = linalg::support_cutoff(top);
        let vals: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&v| if v <= cut { 1.0 } else { 0.0 })
            .collect();
        let mut scaled = self.frame.clone();
        for (j, v) in vals.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*v);
        }
        let proj_sym = scaled * self.frame.adjoint();
        DMatrix::from_fn(dv, dv, |r, c| proj_sym[(r, c)] * (self.wsqrt[c] / self.wsqrt[r]))
    }

    /// Basis of the kernel, as elements.
    pub fn kernel_basis(&self) -> Vec<AlgebraElement> {
        let top = self.eigenvalues.last().copied().unwrap_or(0.0);
        let cut = linalg::support_cutoff(top);
        let mut out = Vec::new();
        for (j, &v) in self.eigenvalues.iter().enumerate() {
            if v <= cut {
                let col = self.frame.column(j);
                let unweighted =
                    DVector::from_fn(col.len(), |i, _| col[i] / C64::new(self.wsqrt[i], 0.0));
                out.push(self.unvectorize(&unweighted));
            }
        }
        out
    }

    /// Choi positivity of `e^{-At}` between every pair of blocks.
    pub fn evolution_is_cp(&self, t: f64, tol: f64) -> bool {
        let alg = &self.algebra;
        for (l, b) in alg.blocks().iter().enumerate() {
            let dl = b.dim;
            let mut images: Vec<AlgebraElement> = Vec::with_capacity(dl * dl);
            for i in 0..dl {
                for j in 0..dl {
                    let mut unit = AlgebraElement::zero(alg);
                    unit.blocks_mut()[l][(i, j)] = C64::new(1.0, 0.0);
                    images.push(self.evolve_element(&unit, t).expect("same algebra"));
                }
            }
            for (l2, tb) in alg.blocks().iter().enumerate() {
                let dl2 = tb.dim;
                let choi = DMatrix::from_fn(dl * dl2, dl * dl2, |r, c| {
                    let (i, ip) = (r / dl2, r % dl2);
                    let (j, jp) = (c / dl2, c % dl2);
                    images[i * dl + j].block(l2)[(ip, jp)]
                });
                let asym = (&choi - choi.adjoint())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0f64, f64::max);
                if asym > 1e-8 {
                    return false;
                }
                if !linalg::is_psd(&HermMatrix::new_symmetrized(choi), tol) {
                    return false;
                }
            }
        }
        true
    }
}

/// A semigroup handle: either entrywise Schur evolution or a spectral
/// superoperator evolution.
#[derive(Debug, Clone)]
pub enum Semigroup {
    Schur(SchurGenerator),
    General(GeneralGenerator),
}

impl Semigroup {
    pub fn algebra(&self) -> Arc<DirectSumAlgebra> {
        match self {
            Semigroup::Schur(g) => g.algebra(),
            Semigroup::General(g) => Arc::clone(g.algebra()),
        }
    }

    /// `T_t(rho)`; the result is revalidated as a density.
    pub fn evolve(&self, rho: &Density, t: f64) -> Result<Density> {
        if t < 0.0 {
            return Err(Error::NegativeTime { t });
        }
        match self {
            Semigroup::Schur(g) => {
                let m = g.dim();
                let block = rho.block(0);
                if rho.algebra().num_blocks() != 1 || block.nrows() != m {
                    return Err(Error::AlgebraMismatch);
                }
                let out =
                    DMatrix::from_fn(m, m, |i, j| block[(i, j)] * (-g.b[(i, j)] * t).exp());
                Density::new(AlgebraElement::new(Arc::clone(rho.algebra()), vec![out])?)
            }
            Semigroup::General(g) => Density::new(g.evolve_element(rho.element(), t)?),
        }
    }

    /// Applies the generator.
    pub fn generator_apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        match self {
            Semigroup::Schur(g) => {
                let m = g.dim();
                let block = x.block(0);
                if x.algebra().num_blocks() != 1 || block.nrows() != m {
                    return Err(Error::AlgebraMismatch);
                }
                let out = DMatrix::from_fn(m, m, |i, j| block[(i, j)] * g.b[(i, j)]);
                AlgebraElement::new(Arc::clone(x.algebra()), vec![out])
            }
            Semigroup::General(g) => g.apply(x),
        }
    }
}

/// Spectral gap of a generator: the smallest nonzero Schur rate, or the
/// smallest nonzero superoperator eigenvalue.
pub fn spectral_gap(gen: &Semigroup) -> Result<f64> {
    match gen {
        Semigroup::Schur(g) => {
            let tol = g.zero_tol();
            let mut gap = f64::INFINITY;
            for v in g.b.iter() {
                if *v > tol {
                    gap = gap.min(*v);
                }
            }
            if gap.is_finite() {
                Ok(gap)
            } else {
                Err(Error::NoGap)
            }
        }
        Semigroup::General(g) => g.gap(),
    }
}

/// The decoherence-free subalgebra of a Schur generator, together with the
/// index classes defining it.
#[derive(Debug, Clone)]
pub struct DecoherenceFree {
    /// `N = ⊕_c M_|C_c| ⊂ M_m`, with the copy of each class placed on the
    /// class members (classes need not be contiguous).
    pub inclusion: Inclusion,
    /// The equivalence classes of the zero pattern, ordered by smallest
    /// member.
    pub classes: Vec<Vec<usize>>,
}

/// Derives the decoherence-free subalgebra `span{ e_ij : b_ij = 0 }` from
/// the zero pattern of a Schur generator.
///
/// The pattern must be an equivalence relation (conditional negativity
/// forces transitivity through the Hilbert-space embedding of the rates; a
/// violation means an invalid generator slipped past tolerances).
pub fn decoherence_free_subalgebra(gen: &SchurGenerator) -> Result<DecoherenceFree> {
    let m = gen.dim();
    let tol = gen.zero_tol();
    let related = |i: usize, j: usize| gen.b[(i, j)].abs() <= tol;
    for i in 0..m {
        for j in 0..m {
            if !related(i, j) {
                continue;
            }
            for k in 0..m {
                if related(j, k) && !related(i, k) {
                    return Err(Error::NotEquivalence { triple: (i, j, k) });
                }
            }
        }
    }
    let mut seen = vec![false; m];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..m {
        if seen[i] {
            continue;
        }
        let members: Vec<usize> = (i..m).filter(|&j| related(i, j)).collect();
        for &j in &members {
            seen[j] = true;
        }
        classes.push(members);
    }
    let inclusion = class_inclusion(m, &classes)?;
    Ok(DecoherenceFree { inclusion, classes })
}

/// Builds `⊕_c M_|C_c| ⊂ M_m` with the copy positions on the class members.
fn class_inclusion(m: usize, classes: &[Vec<usize>]) -> Result<Inclusion> {
    let amb = DirectSumAlgebra::matrix(m);
    let dims: Vec<usize> = classes.iter().map(|c| c.len()).collect();
    let matrix: Vec<Vec<u64>> = (0..classes.len()).map(|_| vec![1u64]).collect();
    let mut inc = Inclusion::from_parts(&dims, amb, matrix)?;
    inc.set_layout(vec![classes
        .iter()
        .enumerate()
        .map(|(k, members)| CopySlot {
            sub_block: k,
            positions: members.clone(),
        })
        .collect()])?;
    Ok(inc)
}

/// Time-decay data for one experiment run.
#[derive(Debug, Clone)]
pub struct DecayReport {
    /// Grid of times (step counts for discrete maps).
    pub t_grid: Vec<f64>,
    /// `D(rho_t || N)` (Umegaki, closed form through the expectation).
    pub d1_curve: Vec<f64>,
    /// `D_2(rho_t || N)` from the variational solver.
    pub d2_curve: Vec<f64>,
    /// `2 exp(-gap t + d2(0)/2)`.
    pub bound_curve: Vec<f64>,
    /// Trace distance of `rho_t` to the equilibrium `E(rho)` (for discrete
    /// runs: to the step-parity target).
    pub trace_dist_curve: Vec<f64>,
    /// Slack of the refined inequality
    /// `1 + e^{-gap t} exp(d2(0)/2) - exp(d2(t)/2)` per grid point.
    pub refined_slack: Vec<f64>,
    pub gap: f64,
    /// Grid indices where `d1 > bound + 1e-6`.
    pub violations: Vec<usize>,
    /// Aggregated solver diagnostics from the d2 evaluations.
    pub solver: SolverReport,
}

/// Default experiment grid: `points` samples of `[0, 5/gap]`.
pub fn default_grid(gap: f64, points: usize) -> Vec<f64> {
    let tmax = 5.0 / gap;
    (0..points)
        .map(|i| tmax * i as f64 / (points - 1).max(1) as f64)
        .collect()
}

/// Runs the continuous decay experiment: evolves `rho`, computes the decay
/// curves and the exponential bound, and records violations.
///
/// With `amplify_n > 1` the density must live on the amplified algebra and
/// the semigroup is lifted to act on the first tensor factor.
pub fn decay_experiment(
    gen: &Semigroup,
    rho: &Density,
    t_grid: &[f64],
    amplify_n: usize,
    budget: &SolverBudget,
) -> Result<DecayReport> {
    let (evolution, inclusion) = lifted_setup(gen, amplify_n)?;
    if !same_algebra(rho.algebra(), inclusion.amb()) {
        return Err(Error::AlgebraMismatch);
    }
    let gap = spectral_gap(gen)?;

    let e_rho = inclusion.embed_density(&inclusion.expect_density(rho)?)?;
    let order2 = RenyiOrder::new(2.0).unwrap();
    let mut d1 = Vec::with_capacity(t_grid.len());
    let mut d2 = Vec::with_capacity(t_grid.len());
    let mut dist = Vec::with_capacity(t_grid.len());
    let mut evals = 0usize;
    let mut worst_residual = 0.0f64;
    let mut seed_sigma: Option<Density> = None;
    for &t in t_grid {
        let rho_t = evolution.evolve(rho, t)?;
        let e_t = inclusion.expect_density(&rho_t)?;
        d1.push(umegaki(&rho_t, &inclusion.embed_density(&e_t)?)?.as_f64());
        let seeds: Vec<&Density> = seed_sigma.iter().collect();
        let sol = divergence_to_subalgebra_seeded(&rho_t, &inclusion, order2, budget, &seeds)?;
        evals += sol.report.evals;
        worst_residual = worst_residual.max(sol.report.residual);
        d2.push(sol.value.as_f64());
        seed_sigma = Some(sol.minimizer);
        dist.push(trace_distance(&rho_t, &e_rho)?);
    }
    let d2_zero = d2.first().copied().unwrap_or(0.0);
    let bound: Vec<f64> = t_grid
        .iter()
        .map(|&t| 2.0 * (-gap * t + d2_zero / 2.0).exp())
        .collect();
    let refined: Vec<f64> = t_grid
        .iter()
        .zip(&d2)
        .map(|(&t, &d)| 1.0 + (-gap * t).exp() * (d2_zero / 2.0).exp() - (d / 2.0).exp())
        .collect();
    let violations: Vec<usize> = d1
        .iter()
        .zip(&bound)
        .enumerate()
        .filter(|(_, (a, b))| **a > **b + 1e-6)
        .map(|(i, _)| i)
        .collect();
    Ok(DecayReport {
        t_grid: t_grid.to_vec(),
        d1_curve: d1,
        d2_curve: d2,
        bound_curve: bound,
        trace_dist_curve: dist,
        refined_slack: refined,
        gap,
        violations,
        solver: SolverReport {
            evals,
            residual: worst_residual,
            starts_used: budget.starts,
        },
    })
}

/// The lifted semigroup and the matching inclusion `M_n(N) ⊂ M_n(M)`.
pub fn lifted_setup(gen: &Semigroup, amplify_n: usize) -> Result<(Semigroup, Inclusion)> {
    match gen {
        Semigroup::Schur(g) => {
            let base = decoherence_free_subalgebra(g)?;
            let inc = if amplify_n > 1 {
                base.inclusion.amplify(amplify_n)
            } else {
                base.inclusion
            };
            Ok((Semigroup::Schur(g.amplify(amplify_n)), inc))
        }
        Semigroup::General(g) => {
            let fixed = fixed_point_expectation(g)?;
            let base = fixed.inclusion.ok_or_else(|| {
                Error::BadInput(format!(
                    "cannot run the experiment: {}",
                    fixed
                        .note
                        .unwrap_or_else(|| "fixed-point algebra not matched".into())
                ))
            })?;
            let inc = if amplify_n > 1 {
                base.amplify(amplify_n)
            } else {
                base
            };
            let lifted = if amplify_n > 1 {
                Semigroup::General(amplify_general(g, amplify_n)?)
            } else {
                Semigroup::General(g.clone())
            };
            Ok((lifted, inc))
        }
    }
}

/// `A ⊗ id` on `M ⊗ M_n` for a single-block ambient algebra.
fn amplify_general(g: &GeneralGenerator, n: usize) -> Result<GeneralGenerator> {
    if g.algebra().num_blocks() != 1 {
        return Err(Error::BadInput(
            "amplification of general generators is supported on single-block algebras".into(),
        ));
    }
    let d = g.algebra().block_dim(0);
    let dn = d * n;
    let small = &g.matrix;
    let mut big = DMatrix::zeros(dn * dn, dn * dn);
    for i in 0..d {
        for j in 0..d {
            for ip in 0..d {
                for jp in 0..d {
                    let coeff = small[(i * d + j, ip * d + jp)];
                    if coeff.norm() == 0.0 {
                        continue;
                    }
                    for alpha in 0..n {
                        for beta in 0..n {
                            let row = (i * n + alpha) * dn + (j * n + beta);
                            let col = (ip * n + alpha) * dn + (jp * n + beta);
                            big[(row, col)] = coeff;
                        }
                    }
                }
            }
        }
    }
    GeneralGenerator::new(DirectSumAlgebra::matrix(dn), big)
}

/// Upper bound on the decoherence time:
/// `t* = (1/gap) (2 log(2/eps) + K/2)` with `K` the plain index
/// (`complete = false`) or the cb index (`complete = true`).
pub fn decoherence_time_bound(
    inc: &Inclusion,
    gap: f64,
    epsilon: f64,
    complete: bool,
) -> Result<f64> {
    if gap <= 0.0 {
        return Err(Error::NoGap);
    }
    if !(epsilon > 0.0 && epsilon < 2.0) {
        return Err(Error::BadInput(format!(
            "epsilon must lie in (0, 2), got {epsilon}"
        )));
    }
    let k = if complete {
        dcb_index(inc)
    } else {
        pimsner_popa_index(inc)
    };
    Ok((2.0 * (2.0 / epsilon).ln() + k / 2.0) / gap)
}

/// Outcome of a discrete-map experiment.
#[derive(Debug, Clone)]
pub struct DiscreteDecay {
    pub report: DecayReport,
    /// Smallest step count after which the trace-distance targets are
    /// guaranteed to be at most `epsilon`.
    pub threshold: usize,
    pub epsilon: f64,
    /// Whether the even/odd trace-distance targets held from `threshold` on.
    pub targets_met: bool,
}

/// Iterates a Schur Markov map and checks the step-decay bound
/// `D(T^k rho || N) <= 2 mu^k exp(D_2(rho||N)/2)` along with the even/odd
/// trace-distance targets from the threshold
/// `k >= (log(1/mu))^{-1} (log(4/eps^2) + D_cb/2)` on.
pub fn discrete_decay_experiment(
    map: &SchurMap,
    rho: &Density,
    steps: usize,
    amplify_n: usize,
    epsilon: f64,
    budget: &SolverBudget,
) -> Result<DiscreteDecay> {
    let mu = map.mu();
    if !(mu < 1.0) {
        return Err(Error::MuNotContractive { mu });
    }
    if !(epsilon > 0.0 && epsilon < 2.0) {
        return Err(Error::BadInput(format!(
            "epsilon must lie in (0, 2), got {epsilon}"
        )));
    }
    let m = map.dim();
    let base_inc = crate::fixtures::diagonal_in_matrix(m);
    let inc = if amplify_n > 1 {
        base_inc.amplify(amplify_n)
    } else {
        base_inc.clone()
    };
    let lifted = map.amplify(amplify_n);
    if !same_algebra(rho.algebra(), inc.amb()) {
        return Err(Error::AlgebraMismatch);
    }

    let e_rho = inc.embed_density(&inc.expect_density(rho)?)?;
    let te_rho = lifted.iterate(&e_rho, 1)?;
    let order2 = RenyiOrder::new(2.0).unwrap();
    let d2_first = divergence_to_subalgebra_seeded(rho, &inc, order2, budget, &[])?;
    let d2_0 = d2_first.value.as_f64();

    let dcb = dcb_index(&base_inc);
    let threshold =
        (((4.0 / (epsilon * epsilon)).ln() + dcb / 2.0) / (1.0 / mu).ln()).ceil() as usize;

    let mut t_grid = Vec::with_capacity(steps + 1);
    let mut d1 = Vec::with_capacity(steps + 1);
    let mut d2 = Vec::with_capacity(steps + 1);
    let mut bound = Vec::with_capacity(steps + 1);
    let mut dist = Vec::with_capacity(steps + 1);
    let mut refined = Vec::with_capacity(steps + 1);
    let mut evals = 0usize;
    let mut worst_residual = 0.0f64;
    let mut seed_sigma = Some(d2_first.minimizer);
    let mut targets_met = true;
    for k in 0..=steps {
        let rho_k = lifted.iterate(rho, k as u32)?;
        let e_k = inc.expect_density(&rho_k)?;
        t_grid.push(k as f64);
        d1.push(umegaki(&rho_k, &inc.embed_density(&e_k)?)?.as_f64());
        let seeds: Vec<&Density> = seed_sigma.iter().collect();
        let sol = divergence_to_subalgebra_seeded(&rho_k, &inc, order2, budget, &seeds)?;
        evals += sol.report.evals;
        worst_residual = worst_residual.max(sol.report.residual);
        d2.push(sol.value.as_f64());
        seed_sigma = Some(sol.minimizer);
        bound.push(2.0 * mu.powi(k as i32) * (d2_0 / 2.0).exp());
        let target = if k % 2 == 0 { &e_rho } else { &te_rho };
        let dk = trace_distance(&rho_k, target)?;
        dist.push(dk);
        refined.push(1.0 + mu.powi(k as i32) * (d2_0 / 2.0).exp() - (d2[k] / 2.0).exp());
        if k >= threshold && dk > epsilon {
            targets_met = false;
        }
    }
    let violations: Vec<usize> = d1
        .iter()
        .zip(&bound)
        .enumerate()
        .filter(|(_, (a, b))| **a > **b + 1e-6)
        .map(|(i, _)| i)
        .collect();
    Ok(DiscreteDecay {
        report: DecayReport {
            t_grid,
            d1_curve: d1,
            d2_curve: d2,
            bound_curve: bound,
            trace_dist_curve: dist,
            refined_slack: refined,
            gap: (1.0 / mu).ln(),
            violations,
            solver: SolverReport {
                evals,
                residual: worst_residual,
                starts_used: budget.starts,
            },
        },
        threshold,
        epsilon,
        targets_met,
    })
}

/// The fixed-point (decoherence-free) structure of a general generator.
#[derive(Debug, Clone)]
pub struct FixedPointExpectation {
    /// The conditional expectation as a superoperator matrix.
    pub projector: DMatrix<C64>,
    /// The matched inclusion, when the kernel is recognized as a
    /// direct-sum algebra in standard position.
    pub inclusion: Option<Inclusion>,
    /// Explanation when no inclusion was matched.
    pub note: Option<String>,
}

/// Orthogonal projection onto `ker A` in the weighted geometry, verified to
/// behave as a conditional expectation, with an attempt to recognize the
/// kernel as a concrete subalgebra.
///
/// The matcher recognizes: the full algebra (`A = 0`), the scalars
/// (primitive generators), and single-block zero-pattern algebras
/// `span{ e_ij : (i,j) in pattern }` whose pattern is an equivalence
/// relation. Anything else is returned as a projector with a note.
pub fn fixed_point_expectation(gen: &GeneralGenerator) -> Result<FixedPointExpectation> {
    let alg = gen.algebra();
    let projector = gen.kernel_projector();
    let basis = gen.kernel_basis();
    let kernel_dim = basis.len();

    // verification of the conditional-expectation properties
    let scale = projector.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let idem = (&projector * &projector - &projector)
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    if idem > 1e-9 * scale {
        return Err(Error::BadInput("kernel projection is not idempotent".into()));
    }
    let dv = projector.nrows();
    let sym = DMatrix::from_fn(dv, dv, |r, c| {
        projector[(r, c)] * (gen.wsqrt[r] / gen.wsqrt[c])
    });
    let asym = (&sym - sym.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    if asym > 1e-9 * scale {
        return Err(Error::BadInput(
            "kernel projection is not self-adjoint for the weighted inner product".into(),
        ));
    }
    let one = AlgebraElement::identity(alg);
    let e_one = gen.apply_matrix(&projector, &one)?;
    if e_one.sub(&one).unwrap().norm_l2() > 1e-9 {
        return Err(Error::BadInput(
            "kernel projection does not fix the identity".into(),
        ));
    }
    for seed in 0..4 {
        let rho = crate::algebra::random_density(alg, 31_000 + seed);
        let img = gen.apply_matrix(&projector, rho.element())?;
        for l in 0..alg.num_blocks() {
            let h = HermMatrix::new_symmetrized(img.block(l).clone());
            if !linalg::is_psd(&h, 1e-8) {
                return Err(Error::BadInput(
                    "kernel projection is not positive on a sample state".into(),
                ));
            }
        }
        let ae = gen.apply(&img)?;
        if ae.norm_l2() > 1e-8 {
            return Err(Error::BadInput("A∘E does not vanish".into()));
        }
        let ea = gen.apply_matrix(&projector, &gen.apply(rho.element())?)?;
        if ea.norm_l2() > 1e-8 {
            return Err(Error::BadInput("E∘A does not vanish".into()));
        }
    }

    let full_dim = alg.vector_dim();
    if kernel_dim == full_dim {
        return Ok(FixedPointExpectation {
            projector,
            inclusion: Some(Inclusion::trivial(Arc::clone(alg))),
            note: None,
        });
    }
    if kernel_dim == 1 {
        // the kernel contains the identity, so it is the scalars
        let dims: Vec<u64> = alg.blocks().iter().map(|b| b.dim as u64).collect();
        let inc = Inclusion::from_parts(&[1], Arc::clone(alg), vec![dims])?;
        return Ok(FixedPointExpectation {
            projector,
            inclusion: Some(inc),
            note: None,
        });
    }
    if alg.num_blocks() == 1 {
        let m = alg.block_dim(0);
        let mut pattern = vec![vec![false; m]; m];
        for el in &basis {
            let b = el.block(0);
            for i in 0..m {
                for j in 0..m {
                    if b[(i, j)].norm() > 1e-8 {
                        pattern[i][j] = true;
                    }
                }
            }
        }
        for (i, row) in pattern.iter_mut().enumerate() {
            row[i] = true; // the identity is in the kernel
        }
        let symmetric = (0..m).all(|i| (0..m).all(|j| pattern[i][j] == pattern[j][i]));
        let transitive = (0..m).all(|i| {
            (0..m).all(|j| {
                !pattern[i][j] || (0..m).all(|k| !pattern[j][k] || pattern[i][k])
            })
        });
        if symmetric && transitive {
            let mut seen = vec![false; m];
            let mut classes = Vec::new();
            for i in 0..m {
                if seen[i] {
                    continue;
                }
                let members: Vec<usize> = (i..m).filter(|&j| pattern[i][j]).collect();
                for &j in &members {
                    seen[j] = true;
                }
                classes.push(members);
            }
            let dim_sum: usize = classes.iter().map(|c| c.len() * c.len()).sum();
            if dim_sum == kernel_dim && pattern_units_fixed(gen, &classes)? {
                let inc = class_inclusion(m, &classes)?;
                return Ok(FixedPointExpectation {
                    projector,
                    inclusion: Some(inc),
                    note: None,
                });
            }
        }
    }
    Ok(FixedPointExpectation {
        projector,
        inclusion: None,
        note: Some(format!(
            "kernel of dimension {kernel_dim} not recognized as a standard-position subalgebra"
        )),
    })
}

fn pattern_units_fixed(gen: &GeneralGenerator, classes: &[Vec<usize>]) -> Result<bool> {
    let alg = gen.algebra();
    for class in classes {
        for &i in class {
            for &j in class {
                let mut unit = AlgebraElement::zero(alg);
                unit.blocks_mut()[0][(i, j)] = C64::new(1.0, 0.0);
                if gen.apply(&unit)?.norm_l2() > 1e-8 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Fisher information / entropy production `I_A(rho) = tr((A rho) log rho)`
/// with the logarithm on the support of `rho`.
pub fn entropy_production(gen: &Semigroup, rho: &Density) -> Result<f64> {
    let a_rho = gen.generator_apply(rho.element())?;
    let alg = rho.algebra();
    let mut value = 0.0;
    for (l, b) in rho.blocks().iter().enumerate() {
        let es = linalg::herm_eig(&HermMatrix::new_symmetrized(b.clone()));
        let cut = linalg::support_cutoff(es.lambda_max());
        let logs: Vec<f64> = es
            .eigenvalues
            .iter()
            .map(|&v| if v > cut { v.ln() } else { 0.0 })
            .collect();
        let log_rho = es.assemble(&logs);
        value += alg.weight_f64(l) * (a_rho.block(l) * log_rho).trace().re;
    }
    Ok(value)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::algebra::random_density;
    use crate::fixtures;
    use approx::assert_relative_eq;

    pub(crate) fn plus_state(m: usize) -> Density {
        let alg = DirectSumAlgebra::matrix(m);
        let v: Vec<C64> = (0..m).map(|_| C64::new(1.0, 0.0)).collect();
        Density::block_pure(&alg, 0, &v).unwrap()
    }

    pub(crate) fn binary_entropy(x: f64) -> f64 {
        let h = |v: f64| if v > 0.0 { -v * v.ln() } else { 0.0 };
        h(x) + h(1.0 - x)
    }

    use crate::fixtures::{depolarizing as depolarizing_fixture, schur_superoperator};

    #[test]
    fn schur_validation() {
        assert!(fixtures::dephasing(3).matrix()[(0, 1)] == 1.0);
        // single off-diagonal pair on m = 3 is not conditionally negative
        let mut b = DMatrix::zeros(3, 3);
        b[(0, 1)] = 1.0;
        b[(1, 0)] = 1.0;
        match SchurGenerator::new(b) {
            Err(Error::NotCnd { witness, value }) => {
                assert!(value > 0.0);
                let s: f64 = witness.iter().sum();
                assert!(s.abs() < 1e-9, "witness must be zero-sum");
            }
            other => panic!("expected NotCnd, got {other:?}"),
        }
        // zero generator is valid and evolves trivially
        let zero = SchurGenerator::new(DMatrix::zeros(2, 2)).unwrap();
        let rho = plus_state(2);
        let evolved = Semigroup::Schur(zero).evolve(&rho, 3.0).unwrap();
        assert!(evolved.element().entry_distance(rho.element()) < 1e-15);
        let mut bad = DMatrix::zeros(2, 2);
        bad[(0, 0)] = 1.0;
        assert!(matches!(
            SchurGenerator::new(bad),
            Err(Error::BadDiagonal { .. })
        ));
        let mut asym = DMatrix::zeros(2, 2);
        asym[(0, 1)] = 1.0;
        assert!(matches!(
            SchurGenerator::new(asym),
            Err(Error::Asymmetric { .. })
        ));
    }

    #[test]
    fn semigroup_law_and_trace_preservation() {
        let gen = Semigroup::Schur(fixtures::dephasing(3));
        let rho = random_density(&DirectSumAlgebra::matrix(3), 5);
        let a = gen.evolve(&gen.evolve(&rho, 0.7).unwrap(), 0.4).unwrap();
        let b = gen.evolve(&rho, 1.1).unwrap();
        assert!(a.element().entry_distance(b.element()) < 1e-10);
        assert!((b.trace().re - 1.0).abs() < 1e-12);
        let id = gen.evolve(&rho, 0.0).unwrap();
        assert!(id.element().entry_distance(rho.element()) < 1e-15);
        assert!(matches!(
            gen.evolve(&rho, -0.1),
            Err(Error::NegativeTime { .. })
        ));
        // unitality: every shipped generator fixes the identity
        let one = Density::new(AlgebraElement::identity(&DirectSumAlgebra::matrix(3))).unwrap();
        for gen in [
            Semigroup::Schur(fixtures::dephasing(3)),
            Semigroup::General(depolarizing_fixture(3)),
            Semigroup::General(schur_superoperator(&fixtures::dephasing(3))),
        ] {
            let evolved = gen.evolve(&one, 0.9).unwrap();
            assert!(evolved.element().entry_distance(one.element()) < 1e-10);
        }
    }

    #[test]
    fn dephasing_evolution_scales_off_diagonals() {
        let gen = Semigroup::Schur(fixtures::dephasing(2));
        let rho = plus_state(2);
        let t = 0.9;
        let evolved = gen.evolve(&rho, t).unwrap();
        // density blocks are twice the usual matrix (normalized trace)
        assert_relative_eq!(evolved.block(0)[(0, 1)].re, (-t).exp(), max_relative = 1e-12);
        assert_relative_eq!(evolved.block(0)[(0, 0)].re, 1.0, max_relative = 1e-12);
        // long-time limit reaches the conditional expectation
        let late = gen.evolve(&rho, 50.0).unwrap();
        let inc = fixtures::diagonal_in_matrix(2);
        let e = inc.embed_density(&inc.expect_density(&rho).unwrap()).unwrap();
        assert!(trace_distance(&late, &e).unwrap() < 1e-12);
    }

    #[test]
    fn decoherence_free_patterns() {
        let dfs = decoherence_free_subalgebra(&fixtures::dephasing(4)).unwrap();
        assert_eq!(dfs.classes.len(), 4);
        assert_eq!(dfs.inclusion.sub().num_blocks(), 4);
        let zero = SchurGenerator::new(DMatrix::zeros(3, 3)).unwrap();
        let dfs = decoherence_free_subalgebra(&zero).unwrap();
        assert_eq!(dfs.classes.len(), 1);
        assert_eq!(dfs.inclusion.sub().block_dim(0), 3);
        let dfs = decoherence_free_subalgebra(&fixtures::two_class_schur()).unwrap();
        assert_eq!(dfs.classes, vec![vec![0, 1], vec![2, 3]]);
        // non-contiguous classes {0,2} and {1,3}
        let pts = [0.0, 1.0, 0.0, 1.0];
        let b = DMatrix::from_fn(4, 4, |i, j| (pts[i] - pts[j]) * (pts[i] - pts[j]));
        let dfs = decoherence_free_subalgebra(&SchurGenerator::new(b).unwrap()).unwrap();
        assert_eq!(dfs.classes, vec![vec![0, 2], vec![1, 3]]);
        // conditional expectation masks entries across classes only
        let x = crate::algebra::random_hermitian(&DirectSumAlgebra::matrix(4), 3);
        let e = dfs
            .inclusion
            .embed(&dfs.inclusion.conditional_expectation(&x).unwrap())
            .unwrap();
        for (i, j) in [(0usize, 1usize), (0, 3), (2, 1), (2, 3)] {
            assert!(e.block(0)[(i, j)].norm() < 1e-12);
        }
        for (i, j) in [(0usize, 2usize), (1, 3)] {
            assert!((e.block(0)[(i, j)] - x.block(0)[(i, j)]).norm() < 1e-12);
        }
    }

    #[test]
    fn inconsistent_zero_pattern_is_reported() {
        // a single tiny positive rate passes the conditional-negativity
        // tolerance but breaks transitivity of the zero pattern
        let mut b = DMatrix::zeros(3, 3);
        b[(1, 2)] = 1e-11;
        b[(2, 1)] = 1e-11;
        let g = SchurGenerator::new(b).expect("within CND tolerance");
        assert!(matches!(
            decoherence_free_subalgebra(&g),
            Err(Error::NotEquivalence { .. })
        ));
    }

    #[test]
    fn spectral_gap_cases() {
        assert_relative_eq!(
            spectral_gap(&Semigroup::Schur(fixtures::dephasing(3))).unwrap(),
            1.0
        );
        // consistent pattern with rates {2, 3}: class {0,1} against 2
        let pts = [0.0f64, 0.0, 1.0];
        let rates = [2.0f64, 3.0];
        let b = DMatrix::from_fn(3, 3, |i, j| {
            if (pts[i] - pts[j]).abs() > 0.0 {
                rates[i.min(j)]
            } else {
                0.0
            }
        });
        if let Ok(g) = SchurGenerator::new(b) {
            assert_relative_eq!(spectral_gap(&Semigroup::Schur(g)).unwrap(), 2.0);
        }
        let zero = SchurGenerator::new(DMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(
            spectral_gap(&Semigroup::Schur(zero)),
            Err(Error::NoGap)
        ));
    }

    #[test]
    fn depolarizing_generator() {
        let gen = depolarizing_fixture(3);
        assert_relative_eq!(gen.gap().unwrap(), 1.0, max_relative = 1e-10);
        let fixed = fixed_point_expectation(&gen).unwrap();
        let inc = fixed.inclusion.expect("kernel is the scalars");
        assert_eq!(inc.sub().num_blocks(), 1);
        assert_eq!(inc.sub().block_dim(0), 1);
        // E(x) = tr(x) 1
        let rho = random_density(gen.algebra(), 8);
        let img = gen.apply_matrix(&fixed.projector, rho.element()).unwrap();
        let one = AlgebraElement::identity(gen.algebra());
        assert!(img.sub(&one).unwrap().norm_l2() < 1e-9);
    }

    #[test]
    fn schur_as_superoperator_matches() {
        let schur = fixtures::dephasing(3);
        let gen = schur_superoperator(&schur);
        assert_relative_eq!(gen.gap().unwrap(), 1.0, max_relative = 1e-10);
        let fixed = fixed_point_expectation(&gen).unwrap();
        let inc = fixed.inclusion.expect("mask algebra recognized");
        let dfs = decoherence_free_subalgebra(&schur).unwrap();
        assert_eq!(inc.sub().num_blocks(), dfs.inclusion.sub().num_blocks());
        let alg = schur.algebra();
        let rho = random_density(&alg, 4);
        let via_schur = Semigroup::Schur(schur).evolve(&rho, 0.8).unwrap();
        let via_super = Semigroup::General(gen).evolve(&rho, 0.8).unwrap();
        assert!(via_schur.element().entry_distance(via_super.element()) < 1e-9);
    }

    #[test]
    fn fixed_point_trivial_when_generator_vanishes() {
        let alg = DirectSumAlgebra::matrix(2);
        let gen = GeneralGenerator::new(Arc::clone(&alg), DMatrix::zeros(4, 4)).unwrap();
        let fixed = fixed_point_expectation(&gen).unwrap();
        let inc = fixed.inclusion.expect("full algebra");
        assert_eq!(inc.sub().block_dim(0), 2);
        assert!(matches!(gen.gap(), Err(Error::NoGap)));
    }

    #[test]
    fn dephasing_decay_closed_form() {
        let gen = Semigroup::Schur(fixtures::dephasing(2));
        let rho = plus_state(2);
        let grid: Vec<f64> = (0..21).map(|i| 0.25 * i as f64).collect();
        let report = decay_experiment(&gen, &rho, &grid, 1, &SolverBudget::default()).unwrap();
        assert!(report.violations.is_empty());
        assert_relative_eq!(report.gap, 1.0);
        // d1(t) = log 2 - H2((1 + e^{-t})/2)
        for (i, &t) in grid.iter().enumerate() {
            let want = 2.0f64.ln() - binary_entropy((1.0 + (-t).exp()) / 2.0);
            assert_relative_eq!(report.d1_curve[i], want, epsilon = 1e-9, max_relative = 1e-8);
        }
        // D_2(rho||N) = log 2 at t = 0, so the bound is 2 sqrt(2) e^{-t}
        assert_relative_eq!(report.d2_curve[0], 2.0f64.ln(), epsilon = 1e-6);
        assert_relative_eq!(
            report.bound_curve[0],
            2.0 * 2.0f64.sqrt(),
            max_relative = 1e-5
        );
        for s in &report.refined_slack {
            assert!(*s >= -1e-6);
        }
        for w in report.d1_curve.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
        for w in report.d2_curve.windows(2) {
            assert!(w[1] <= w[0] + 1e-5);
        }
    }

    #[test]
    fn member_state_stays_flat() {
        let gen = Semigroup::Schur(fixtures::dephasing(3));
        let inc = fixtures::diagonal_in_matrix(3);
        let rho = inc.embed_density(&random_density(inc.sub(), 3)).unwrap();
        let grid = [0.0, 0.5, 1.0];
        let report = decay_experiment(&gen, &rho, &grid, 1, &SolverBudget::default()).unwrap();
        for i in 0..grid.len() {
            assert!(report.d1_curve[i].abs() < 1e-9);
            assert!(report.d2_curve[i].abs() < 1e-6);
        }
        assert!(report.violations.is_empty());
    }

    #[test]
    fn decoherence_time_formulas() {
        let inc = fixtures::diagonal_in_matrix(2);
        let eps = 0.1;
        let t = decoherence_time_bound(&inc, 1.0, eps, false).unwrap();
        assert_relative_eq!(
            t,
            2.0 * 20.0f64.ln() + 2.0f64.ln() / 2.0,
            max_relative = 1e-12
        );
        // complete variant uses the cb index (= log m here)
        for m in 2..=5 {
            let inc = fixtures::diagonal_in_matrix(m);
            let t = decoherence_time_bound(&inc, 1.0, eps, true).unwrap();
            assert_relative_eq!(
                t,
                2.0 * 20.0f64.ln() + (m as f64).ln() / 2.0,
                max_relative = 1e-12
            );
        }
        // epsilon -> 2 limit: the bound approaches K / (2 gap)
        let t = decoherence_time_bound(&inc, 1.0, 2.0 - 1e-12, false).unwrap();
        assert_relative_eq!(t, 2.0f64.ln() / 2.0, epsilon = 1e-9);
        assert!(matches!(
            decoherence_time_bound(&inc, 0.0, 0.1, false),
            Err(Error::NoGap)
        ));
    }

    #[test]
    fn discrete_map_validation_and_decay() {
        // a matrix with a negative eigenvalue is rejected
        let mut bad = DMatrix::from_element(2, 2, 0.0);
        bad[(0, 0)] = 1.0;
        bad[(1, 1)] = 1.0;
        bad[(0, 1)] = 1.5;
        bad[(1, 0)] = 1.5;
        assert!(matches!(
            SchurMap::new(bad),
            Err(Error::InvalidSchurMap { .. })
        ));
        // mu >= 1 rejected by the experiment
        let flat = fixtures::flat_schur_map(2, 1.0).unwrap();
        let rho = plus_state(2);
        assert!(matches!(
            discrete_decay_experiment(&flat, &rho, 3, 1, 0.1, &SolverBudget::default()),
            Err(Error::MuNotContractive { .. })
        ));

        let mu = 0.6;
        let map = fixtures::flat_schur_map(2, mu).unwrap();
        let out =
            discrete_decay_experiment(&map, &rho, 12, 1, 0.05, &SolverBudget::default()).unwrap();
        assert!(out.report.violations.is_empty());
        assert!(out.targets_met);
        // d1(k) tracks the binary-entropy closed form (off-diagonals decay
        // like mu^k)
        for (k, &d) in out.report.d1_curve.iter().enumerate() {
            let want = 2.0f64.ln() - binary_entropy((1.0 + mu.powi(k as i32)) / 2.0);
            assert_relative_eq!(d, want, epsilon = 1e-9, max_relative = 1e-8);
        }
        // diagonal states never move
        let inc = fixtures::diagonal_in_matrix(2);
        let diag = inc.embed_density(&random_density(inc.sub(), 1)).unwrap();
        let out =
            discrete_decay_experiment(&map, &diag, 6, 1, 0.1, &SolverBudget::default()).unwrap();
        for d in &out.report.d1_curve {
            assert!(d.abs() < 1e-10);
        }
    }

    #[test]
    fn entropy_production_examples() {
        let gen = Semigroup::Schur(fixtures::dephasing(2));
        let inc = fixtures::diagonal_in_matrix(2);
        // member of N: production vanishes
        let diag = inc.embed_density(&random_density(inc.sub(), 2)).unwrap();
        assert!(entropy_production(&gen, &diag).unwrap().abs() < 1e-12);
        // finite-difference consistency near t = 0 on a full-support state
        let rho = random_density(&DirectSumAlgebra::matrix(2), 11);
        let i_a = entropy_production(&gen, &rho).unwrap();
        let h = 1e-4;
        let d_at = |t: f64| -> f64 {
            let rt = gen.evolve(&rho, t).unwrap();
            let e = inc.expect_density(&rt).unwrap();
            umegaki(&rt, &inc.embed_density(&e).unwrap())
                .unwrap()
                .as_f64()
        };
        let deriv = (d_at(2.0 * h) - d_at(0.0)) / (2.0 * h);
        assert_relative_eq!(-deriv, i_a, max_relative = 1e-3, epsilon = 1e-6);
        assert!(i_a >= -1e-8);
        // depolarizing on random states: nonnegative production
        let dep = Semigroup::General(depolarizing_fixture(2));
        for seed in 0..5 {
            let rho = random_density(&DirectSumAlgebra::matrix(2), 600 + seed);
            assert!(entropy_production(&dep, &rho).unwrap() >= -1e-8);
        }
    }

    #[test]
    fn gap_tensorization() {
        let g1 = fixtures::dephasing(2);
        let mut b2 = DMatrix::zeros(2, 2);
        b2[(0, 1)] = 2.5;
        b2[(1, 0)] = 2.5;
        let g2 = SchurGenerator::new(b2).unwrap();
        let sum = g1.tensor_sum(&g2);
        assert_relative_eq!(spectral_gap(&Semigroup::Schur(sum)).unwrap(), 1.0);
        let sum21 = g2.tensor_sum(&g1);
        assert_relative_eq!(spectral_gap(&Semigroup::Schur(sum21)).unwrap(), 1.0);
    }

    #[test]
    fn amplified_decay_entangled_state() {
        let gen = Semigroup::Schur(fixtures::dephasing(3));
        // maximally entangled density on M_3 (x) M_3, semigroup factor first
        let alg = DirectSumAlgebra::matrix(9);
        let mut v = vec![C64::new(0.0, 0.0); 9];
        for i in 0..3 {
            v[i * 3 + i] = C64::new(1.0, 0.0);
        }
        let rho = Density::block_pure(&alg, 0, &v).unwrap();
        let grid: Vec<f64> = (0..11).map(|i| 0.5 * i as f64).collect();
        let report = decay_experiment(&gen, &rho, &grid, 3, &SolverBudget::default()).unwrap();
        assert!(
            report.violations.is_empty(),
            "violations: {:?}",
            report.violations
        );
        for s in &report.refined_slack {
            assert!(*s >= -1e-6);
        }
    }

    #[test]
    fn choi_cp_for_shipped_generators() {
        for m in [2usize, 3] {
            let gen = schur_superoperator(&fixtures::dephasing(m));
            for &t in &[0.3, 1.7] {
                assert!(gen.evolution_is_cp(t, 1e-8));
            }
        }
        assert!(depolarizing_fixture(3).evolution_is_cp(0.5, 1e-8));
        // amplified evolutions stay completely positive
        let amplified = schur_superoperator(&fixtures::dephasing(2).amplify(2));
        for &t in &[0.3, 1.0] {
            assert!(amplified.evolution_is_cp(t, 1e-8));
        }
    }
}
