//! Finite-dimensional von Neumann algebras and unital inclusions.
//!
//! An algebra is a direct sum of full matrix blocks `⊕_l M_{m_l}` carrying a
//! faithful trace that assigns weight `t_l` to each minimal projection of
//! block `l`, so `tr(x) = Σ_l t_l Tr(x_l)`. An inclusion `N ⊂ M` is recorded
//! by the block data of both algebras plus the inclusion matrix `A = (a_kl)`
//! counting how many copies of sub-block `k` sit inside ambient block `l`;
//! compatibility demands `m = Aᵀ n` and `s = A t`.
//!
//! Trace weights are kept as exact rationals (every `f64` is one), so the
//! compatibility identities and the closed-form index values downstream are
//! computed without rounding.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{self, C64, HermMatrix};
use crate::{Error, Result};

/// PSD tolerance used when validating densities.
pub const DENSITY_PSD_TOL: f64 = 1e-9;
/// Trace tolerance used when validating densities.
pub const DENSITY_TRACE_TOL: f64 = 1e-9;

fn big(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// One matrix block together with the trace weight of its minimal
/// projections.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub dim: usize,
    pub weight: BigRational,
    weight_f: f64,
}

impl Block {
    fn new(dim: usize, weight: BigRational) -> Self {
        let weight_f = weight.to_f64().unwrap_or(f64::NAN);
        Self { dim, weight, weight_f }
    }

    pub fn weight_f64(&self) -> f64 {
        self.weight_f
    }
}

/// A finite-dimensional von Neumann algebra `⊕_l M_{m_l}` with trace
/// weights `t_l > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectSumAlgebra {
    blocks: Vec<Block>,
}

impl DirectSumAlgebra {
    /// Builds an algebra from `(dim, weight)` pairs, normalizing the total
    /// trace `Σ_l m_l t_l` to one.
    pub fn new(blocks: &[(usize, f64)]) -> Result<Arc<Self>> {
        Self::from_weights(
            blocks
                .iter()
                .map(|&(d, w)| {
                    BigRational::from_float(w)
                        .filter(|r| r.is_positive())
                        .map(|r| (d, r))
                        .ok_or_else(|| Error::BadInput(format!("bad trace weight {w}")))
                })
                .collect::<Result<Vec<_>>>()?,
            true,
        )
    }

    /// Builds an algebra keeping the given weights as-is.
    pub fn new_raw(blocks: &[(usize, f64)]) -> Result<Arc<Self>> {
        Self::from_weights(
            blocks
                .iter()
                .map(|&(d, w)| {
                    BigRational::from_float(w)
                        .filter(|r| r.is_positive())
                        .map(|r| (d, r))
                        .ok_or_else(|| Error::BadInput(format!("bad trace weight {w}")))
                })
                .collect::<Result<Vec<_>>>()?,
            false,
        )
    }

    /// Exact-rational constructor; `normalize` rescales the total trace to 1.
    pub fn from_weights(blocks: Vec<(usize, BigRational)>, normalize: bool) -> Result<Arc<Self>> {
        if blocks.is_empty() {
            return Err(Error::BadInput("algebra needs at least one block".into()));
        }
        for (d, w) in &blocks {
            if *d == 0 {
                return Err(Error::BadInput("zero-dimensional block".into()));
            }
            if !w.is_positive() {
                return Err(Error::BadInput("trace weights must be positive".into()));
            }
        }
        let total: BigRational = blocks
            .iter()
            .map(|(d, w)| big(*d as i64) * w)
            .fold(BigRational::zero(), |a, b| a + b);
        let scale = if normalize {
            total.recip()
        } else {
            BigRational::one()
        };
        Ok(Arc::new(Self {
            blocks: blocks
                .into_iter()
                .map(|(d, w)| Block::new(d, w * &scale))
                .collect(),
        }))
    }

    /// The full matrix algebra `M_m` with normalized trace.
    pub fn matrix(m: usize) -> Arc<Self> {
        Self::from_weights(vec![(m, ratio(1, m as i64))], false).unwrap()
    }

    /// The diagonal algebra `C^m` with normalized trace.
    pub fn commutative(m: usize) -> Arc<Self> {
        Self::from_weights(vec![(1, ratio(1, m as i64)); m], false).unwrap()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_dim(&self, l: usize) -> usize {
        self.blocks[l].dim
    }

    pub fn weight(&self, l: usize) -> &BigRational {
        &self.blocks[l].weight
    }

    pub fn weight_f64(&self, l: usize) -> f64 {
        self.blocks[l].weight_f
    }

    /// `tr(1) = Σ_l m_l t_l`.
    pub fn total_trace(&self) -> BigRational {
        self.blocks
            .iter()
            .map(|b| big(b.dim as i64) * &b.weight)
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// Sum of block dimensions (dimension of the represented Hilbert space).
    pub fn represented_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    /// Complex dimension of the algebra as a vector space, `Σ_l m_l²`.
    pub fn vector_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }
}

pub fn same_algebra(a: &Arc<DirectSumAlgebra>, b: &Arc<DirectSumAlgebra>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// An element of a [`DirectSumAlgebra`]: one complex matrix per block.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    algebra: Arc<DirectSumAlgebra>,
    blocks: Vec<DMatrix<C64>>,
}

impl AlgebraElement {
    pub fn new(algebra: Arc<DirectSumAlgebra>, blocks: Vec<DMatrix<C64>>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::BadInput(format!(
                "expected {} blocks, got {}",
                algebra.num_blocks(),
                blocks.len()
            )));
        }
        for (l, b) in blocks.iter().enumerate() {
            let d = algebra.block_dim(l);
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::BadInput(format!(
                    "block {l} must be {d}x{d}, got {}x{}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self { algebra, blocks })
    }

    pub fn identity(algebra: &Arc<DirectSumAlgebra>) -> Self {
        let blocks = algebra
            .blocks()
            .iter()
            .map(|b| DMatrix::identity(b.dim, b.dim))
            .collect();
        Self { algebra: Arc::clone(algebra), blocks }
    }

    pub fn zero(algebra: &Arc<DirectSumAlgebra>) -> Self {
        let blocks = algebra
            .blocks()
            .iter()
            .map(|b| DMatrix::zeros(b.dim, b.dim))
            .collect();
        Self { algebra: Arc::clone(algebra), blocks }
    }

    pub fn algebra(&self) -> &Arc<DirectSumAlgebra> {
        &self.algebra
    }

    pub fn blocks(&self) -> &[DMatrix<C64>] {
        &self.blocks
    }

    pub fn block(&self, l: usize) -> &DMatrix<C64> {
        &self.blocks[l]
    }

    pub fn blocks_mut(&mut self) -> &mut [DMatrix<C64>] {
        &mut self.blocks
    }

    /// Weighted trace `Σ_l t_l Tr(x_l)`.
    pub fn trace(&self) -> C64 {
        self.blocks
            .iter()
            .zip(self.algebra.blocks())
            .map(|(m, b)| m.trace() * C64::new(b.weight_f64(), 0.0))
            .sum()
    }

    /// Weighted Hilbert-Schmidt inner product `Σ_l t_l Tr(x_l^* y_l)`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.blocks
            .iter()
            .zip(other.blocks.iter())
            .zip(self.algebra.blocks())
            .map(|((a, b), blk)| (a.adjoint() * b).trace() * C64::new(blk.weight_f64(), 0.0))
            .sum()
    }

    /// Weighted L2 norm.
    pub fn norm_l2(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            algebra: Arc::clone(&self.algebra),
            blocks: self.blocks.iter().map(|m| m.adjoint()).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            algebra: Arc::clone(&self.algebra),
            blocks: self.blocks.iter().map(|m| m.map(|z| z * c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            algebra: Arc::clone(&self.algebra),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Blockwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            algebra: Arc::clone(&self.algebra),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if same_algebra(&self.algebra, &other.algebra) {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    /// The block as a validated Hermitian matrix.
    pub fn herm_block(&self, l: usize) -> Result<HermMatrix> {
        HermMatrix::new(self.blocks[l].clone())
    }

    /// Max-norm distance between entries, across blocks.
    pub fn entry_distance(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a - b).iter().map(|z| z.norm()).fold(0.0f64, f64::max))
            .fold(0.0f64, f64::max)
    }

    /// True when every block is Hermitian within the linalg tolerance.
    pub fn is_hermitian(&self) -> bool {
        self.blocks
            .iter()
            .all(|m| HermMatrix::new(m.clone()).is_ok())
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (l, b) in self.blocks.iter().enumerate() {
            writeln!(f, "block {l}: {b}")?;
        }
        Ok(())
    }
}

/// A positive element of unit weighted trace.
#[derive(Debug, Clone)]
pub struct Density {
    el: AlgebraElement,
}

impl Density {
    pub fn new(el: AlgebraElement) -> Result<Self> {
        for (l, b) in el.blocks().iter().enumerate() {
            let h = HermMatrix::new(b.clone()).map_err(|_| Error::NotDensity {
                reason: format!("block {l} is not Hermitian"),
            })?;
            if !linalg::is_psd(&h, DENSITY_PSD_TOL) {
                return Err(Error::NotDensity {
                    reason: format!("block {l} is not positive semidefinite"),
                });
            }
        }
        let tr = el.trace();
        if (tr.re - 1.0).abs() > DENSITY_TRACE_TOL || tr.im.abs() > DENSITY_TRACE_TOL {
            return Err(Error::NotDensity {
                reason: format!("weighted trace is {:.12} + {:.3e}i, not 1", tr.re, tr.im),
            });
        }
        Ok(Self { el })
    }

    /// Normalizes a nonzero PSD element to unit weighted trace.
    pub fn normalize(el: AlgebraElement) -> Result<Self> {
        let tr = el.trace().re;
        if tr <= 0.0 {
            return Err(Error::NotDensity {
                reason: "cannot normalize: trace is not positive".into(),
            });
        }
        Self::new(el.scale(C64::new(1.0 / tr, 0.0)))
    }

    /// A block-local pure density `|v><v| / (t_l |v|^2)`.
    pub fn block_pure(algebra: &Arc<DirectSumAlgebra>, block: usize, v: &[C64]) -> Result<Self> {
        let d = algebra.block_dim(block);
        if v.len() != d {
            return Err(Error::BadInput(format!(
                "vector length {} does not match block dim {d}",
                v.len()
            )));
        }
        let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if n2 <= 0.0 {
            return Err(Error::BadInput("zero vector".into()));
        }
        let scale = 1.0 / (algebra.weight_f64(block) * n2);
        let mut el = AlgebraElement::zero(algebra);
        let m = &mut el.blocks_mut()[block];
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = v[i] * v[j].conj() * scale;
            }
        }
        Self::new(el)
    }

    pub fn element(&self) -> &AlgebraElement {
        &self.el
    }

    pub fn into_element(self) -> AlgebraElement {
        self.el
    }
}

impl Deref for Density {
    type Target = AlgebraElement;

    fn deref(&self) -> &AlgebraElement {
        &self.el
    }
}

/// Deterministic Gram-construction density: per block `G G^*` with `G`
/// filled row-major from `ChaCha12Rng::seed_from_u64(seed)` (standard normal
/// real part then imaginary part per entry), then the direct sum normalized
/// to unit weighted trace.
pub fn random_density(algebra: &Arc<DirectSumAlgebra>, seed: u64) -> Density {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let blocks: Vec<DMatrix<C64>> = algebra
        .blocks()
        .iter()
        .map(|b| {
            let mut g = DMatrix::zeros(b.dim, b.dim);
            for i in 0..b.dim {
                for j in 0..b.dim {
                    let re: f64 = normal.sample(&mut rng);
                    let im: f64 = normal.sample(&mut rng);
                    g[(i, j)] = C64::new(re, im);
                }
            }
            &g * g.adjoint()
        })
        .collect();
    let el = AlgebraElement::new(Arc::clone(algebra), blocks).unwrap();
    Density::normalize(el).expect("Gram construction yields a positive element")
}

/// A random Hermitian element with entries on the unit scale.
pub fn random_hermitian(algebra: &Arc<DirectSumAlgebra>, seed: u64) -> AlgebraElement {
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let normal = StandardNormal;
    let blocks: Vec<DMatrix<C64>> = algebra
        .blocks()
        .iter()
        .map(|b| {
            let mut g = DMatrix::zeros(b.dim, b.dim);
            for i in 0..b.dim {
                for j in 0..b.dim {
                    let re: f64 = normal.sample(&mut rng);
                    let im: f64 = normal.sample(&mut rng);
                    g[(i, j)] = C64::new(re, im);
                }
            }
            (&g + g.adjoint()).map(|z| z * 0.5)
        })
        .collect();
    AlgebraElement::new(Arc::clone(algebra), blocks).unwrap()
}

/// Where the copies of each sub-block sit inside one ambient block.
///
/// `positions` lists the ambient indices carrying the copy, in sub-block row
/// order; copies of different slots occupy disjoint index sets.
#[derive(Debug, Clone, PartialEq)]
pub struct CopySlot {
    pub sub_block: usize,
    pub positions: Vec<usize>,
}

/// Raw description of an inclusion, before validation.
#[derive(Debug, Clone)]
pub struct RawInclusion {
    pub sub_blocks: Vec<(usize, f64)>,
    pub amb_blocks: Vec<(usize, f64)>,
    pub matrix: Vec<Vec<u64>>,
    pub normalize: bool,
}

/// A validated unital inclusion `N ⊂ M` with its embedding layout.
#[derive(Debug, Clone)]
pub struct Inclusion {
    sub: Arc<DirectSumAlgebra>,
    amb: Arc<DirectSumAlgebra>,
    matrix: Vec<Vec<u64>>,
    layout: Vec<Vec<CopySlot>>,
}

impl Inclusion {
    /// Validates a raw description: `m = Aᵀ n` exactly, `s = A t` within
    /// 1e-9 relative (weights are then reconciled to `s = A t` exactly in
    /// rational arithmetic), and no zero column in `A`.
    pub fn validate(raw: &RawInclusion) -> Result<Self> {
        let k_count = raw.sub_blocks.len();
        let l_count = raw.amb_blocks.len();
        if raw.matrix.len() != k_count || raw.matrix.iter().any(|r| r.len() != l_count) {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "inclusion matrix must be {k_count}x{l_count}, got {}x{}",
                    raw.matrix.len(),
                    raw.matrix.first().map_or(0, |r| r.len())
                ),
            });
        }
        for l in 0..l_count {
            if (0..k_count).all(|k| raw.matrix[k][l] == 0) {
                return Err(Error::NonUnital { column: l });
            }
            let need: u64 = (0..k_count)
                .map(|k| raw.matrix[k][l] * raw.sub_blocks[k].0 as u64)
                .sum();
            if need != raw.amb_blocks[l].0 as u64 {
                return Err(Error::DimensionMismatch {
                    detail: format!(
                        "ambient block {l} has dim {}, but Aᵀn gives {need}",
                        raw.amb_blocks[l].0
                    ),
                });
            }
        }
        let t: Vec<BigRational> = raw
            .amb_blocks
            .iter()
            .map(|&(_, w)| {
                BigRational::from_float(w)
                    .filter(|r| r.is_positive())
                    .ok_or_else(|| Error::BadInput(format!("bad trace weight {w}")))
            })
            .collect::<Result<Vec<_>>>()?;
        // reconcile s := A t after a tolerant check against the given values
        for (k, &(_, s_given)) in raw.sub_blocks.iter().enumerate() {
            let s_exact: BigRational = (0..l_count)
                .map(|l| big(raw.matrix[k][l] as i64) * &t[l])
                .fold(BigRational::zero(), |a, b| a + b);
            let s_f = s_exact.to_f64().unwrap();
            if (s_f - s_given).abs() > 1e-9 * s_f.abs().max(1.0) {
                return Err(Error::TraceMismatch {
                    detail: format!(
                        "sub block {k} has weight {s_given}, but At gives {s_f}"
                    ),
                });
            }
        }
        let scale = if raw.normalize {
            let total: BigRational = raw
                .amb_blocks
                .iter()
                .zip(&t)
                .map(|(&(m, _), w)| big(m as i64) * w)
                .fold(BigRational::zero(), |a, b| a + b);
            total.recip()
        } else {
            BigRational::one()
        };
        let amb = DirectSumAlgebra::from_weights(
            raw.amb_blocks
                .iter()
                .zip(&t)
                .map(|(&(m, _), w)| (m, w * &scale))
                .collect(),
            false,
        )?;
        let sub_weights: Vec<(usize, BigRational)> = (0..k_count)
            .map(|k| {
                let s: BigRational = (0..l_count)
                    .map(|l| big(raw.matrix[k][l] as i64) * amb.weight(l))
                    .fold(BigRational::zero(), |a, b| a + b);
                (raw.sub_blocks[k].0, s)
            })
            .collect();
        let sub = DirectSumAlgebra::from_weights(sub_weights, false)?;
        let layout = canonical_layout(&sub, &raw.matrix);
        Ok(Self { sub, amb, matrix: raw.matrix.clone(), layout })
    }

    /// Builds an inclusion from exact data (no tolerance path); sub weights
    /// are derived as `s = A t`.
    pub fn from_parts(
        sub_dims: &[usize],
        amb: Arc<DirectSumAlgebra>,
        matrix: Vec<Vec<u64>>,
    ) -> Result<Self> {
        let k_count = sub_dims.len();
        let l_count = amb.num_blocks();
        if matrix.len() != k_count || matrix.iter().any(|r| r.len() != l_count) {
            return Err(Error::DimensionMismatch {
                detail: "inclusion matrix shape".into(),
            });
        }
        for l in 0..l_count {
            if (0..k_count).all(|k| matrix[k][l] == 0) {
                return Err(Error::NonUnital { column: l });
            }
            let need: usize = (0..k_count)
                .map(|k| matrix[k][l] as usize * sub_dims[k])
                .sum();
            if need != amb.block_dim(l) {
                return Err(Error::DimensionMismatch {
                    detail: format!("ambient block {l}: {} != {need}", amb.block_dim(l)),
                });
            }
        }
        let sub = DirectSumAlgebra::from_weights(
            (0..k_count)
                .map(|k| {
                    let s: BigRational = (0..l_count)
                        .map(|l| big(matrix[k][l] as i64) * amb.weight(l))
                        .fold(BigRational::zero(), |a, b| a + b);
                    (sub_dims[k], s)
                })
                .collect(),
            false,
        )?;
        let layout = canonical_layout(&sub, &matrix);
        Ok(Self { sub, amb, matrix, layout })
    }

    /// The identity inclusion `M ⊂ M`.
    pub fn trivial(alg: Arc<DirectSumAlgebra>) -> Self {
        let n = alg.num_blocks();
        let matrix: Vec<Vec<u64>> = (0..n)
            .map(|k| (0..n).map(|l| u64::from(k == l)).collect())
            .collect();
        let dims: Vec<usize> = alg.blocks().iter().map(|b| b.dim).collect();
        Self::from_parts(&dims, alg, matrix).unwrap()
    }

    pub fn sub(&self) -> &Arc<DirectSumAlgebra> {
        &self.sub
    }

    pub fn amb(&self) -> &Arc<DirectSumAlgebra> {
        &self.amb
    }

    pub fn matrix(&self) -> &[Vec<u64>] {
        &self.matrix
    }

    pub fn entry(&self, k: usize, l: usize) -> u64 {
        self.matrix[k][l]
    }

    pub fn layout(&self) -> &[Vec<CopySlot>] {
        &self.layout
    }

    /// The unital embedding `N → M` fixed by the layout.
    pub fn embed(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        if !same_algebra(x.algebra(), &self.sub) {
            return Err(Error::AlgebraMismatch);
        }
        let blocks: Vec<DMatrix<C64>> = self
            .layout
            .iter()
            .enumerate()
            .map(|(l, slots)| {
                let d = self.amb.block_dim(l);
                let mut out = DMatrix::zeros(d, d);
                for slot in slots {
                    let xb = x.block(slot.sub_block);
                    let n = xb.nrows();
                    for u in 0..n {
                        for v in 0..n {
                            out[(slot.positions[u], slot.positions[v])] = xb[(u, v)];
                        }
                    }
                }
                out
            })
            .collect();
        AlgebraElement::new(Arc::clone(&self.amb), blocks)
    }

    /// Embeds a density of `N` as a density of `M` (traces agree).
    pub fn embed_density(&self, rho: &Density) -> Result<Density> {
        Density::new(self.embed(rho.element())?)
    }

    /// The trace-preserving conditional expectation `E: M → N`:
    /// `E(x)_k = s_k^{-1} Σ_l t_l Σ_i x_l[slot(k,i)]`.
    pub fn conditional_expectation(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        if !same_algebra(x.algebra(), &self.amb) {
            return Err(Error::AlgebraMismatch);
        }
        let mut blocks: Vec<DMatrix<C64>> = self
            .sub
            .blocks()
            .iter()
            .map(|b| DMatrix::zeros(b.dim, b.dim))
            .collect();
        for (l, slots) in self.layout.iter().enumerate() {
            let t = self.amb.weight_f64(l);
            for slot in slots {
                let xb = x.block(l);
                let acc = &mut blocks[slot.sub_block];
                let n = acc.nrows();
                for u in 0..n {
                    for v in 0..n {
                        acc[(u, v)] += xb[(slot.positions[u], slot.positions[v])] * t;
                    }
                }
            }
        }
        for (k, b) in blocks.iter_mut().enumerate() {
            let inv = 1.0 / self.sub.weight_f64(k);
            b.scale_mut(inv);
        }
        AlgebraElement::new(Arc::clone(&self.sub), blocks)
    }

    /// Conditional expectation of a density is a density.
    pub fn expect_density(&self, rho: &Density) -> Result<Density> {
        Density::new(self.conditional_expectation(rho.element())?)
    }

    /// Tensor product of inclusions: Cartesian block lists, multiplied
    /// dimensions and weights, Kronecker inclusion matrix, and the product
    /// layout (so the embedding is the tensor of the embeddings).
    pub fn tensor(&self, other: &Inclusion) -> Inclusion {
        let tensor_alg = |a: &DirectSumAlgebra, b: &DirectSumAlgebra| {
            DirectSumAlgebra::from_weights(
                a.blocks()
                    .iter()
                    .flat_map(|x| {
                        b.blocks()
                            .iter()
                            .map(move |y| (x.dim * y.dim, &x.weight * &y.weight))
                    })
                    .collect(),
                false,
            )
            .unwrap()
        };
        let sub = tensor_alg(&self.sub, &other.sub);
        let amb = tensor_alg(&self.amb, &other.amb);
        let k2 = other.sub.num_blocks();
        let l2 = other.amb.num_blocks();
        let matrix: Vec<Vec<u64>> = (0..self.sub.num_blocks() * k2)
            .map(|kk| {
                let (ka, kb) = (kk / k2, kk % k2);
                (0..self.amb.num_blocks() * l2)
                    .map(|ll| {
                        let (la, lb) = (ll / l2, ll % l2);
                        self.matrix[ka][la] * other.matrix[kb][lb]
                    })
                    .collect()
            })
            .collect();
        let layout: Vec<Vec<CopySlot>> = (0..self.amb.num_blocks() * l2)
            .map(|ll| {
                let (la, lb) = (ll / l2, ll % l2);
                let mb = other.amb.block_dim(lb);
                let mut slots = Vec::new();
                for sa in &self.layout[la] {
                    for sb in &other.layout[lb] {
                        let mut positions =
                            Vec::with_capacity(sa.positions.len() * sb.positions.len());
                        for &pa in &sa.positions {
                            for &pb in &sb.positions {
                                positions.push(pa * mb + pb);
                            }
                        }
                        slots.push(CopySlot {
                            sub_block: sa.sub_block * k2 + sb.sub_block,
                            positions,
                        });
                    }
                }
                slots
            })
            .collect();
        Inclusion { sub, amb, matrix, layout }
    }

    /// Matrix amplification `M_n(N) ⊂ M_n(M)`: tensoring with the trivial
    /// inclusion `M_n ⊂ M_n` of weight `1/n` per minimal projection.
    pub fn amplify(&self, n: usize) -> Inclusion {
        if n == 1 {
            return self.clone();
        }
        self.tensor(&Inclusion::trivial(DirectSumAlgebra::matrix(n)))
    }

    /// Replaces the embedding layout (copy positions per ambient block).
    ///
    /// Each ambient block's slots must use every index exactly once, carry
    /// dimensions matching their sub-block, and appear with the
    /// multiplicities declared by the inclusion matrix.
    pub fn set_layout(&mut self, layout: Vec<Vec<CopySlot>>) -> Result<()> {
        if layout.len() != self.amb.num_blocks() {
            return Err(Error::BadInput("layout must cover every ambient block".into()));
        }
        for (l, slots) in layout.iter().enumerate() {
            let m = self.amb.block_dim(l);
            let mut used = vec![false; m];
            let mut counts = vec![0u64; self.sub.num_blocks()];
            for slot in slots {
                let n = self.sub.block_dim(slot.sub_block);
                if slot.positions.len() != n {
                    return Err(Error::BadInput(format!(
                        "slot for sub block {} must have {n} positions",
                        slot.sub_block
                    )));
                }
                counts[slot.sub_block] += 1;
                for &p in &slot.positions {
                    if p >= m || used[p] {
                        return Err(Error::BadInput(format!(
                            "invalid or duplicate position {p} in ambient block {l}"
                        )));
                    }
                    used[p] = true;
                }
            }
            if !used.iter().all(|&u| u) {
                return Err(Error::BadInput(format!(
                    "layout does not cover ambient block {l}"
                )));
            }
            for (k, &c) in counts.iter().enumerate() {
                if c != self.matrix[k][l] {
                    return Err(Error::BadInput(format!(
                        "sub block {k} appears {c} times in ambient block {l}, expected {}",
                        self.matrix[k][l]
                    )));
                }
            }
        }
        self.layout = layout;
        Ok(())
    }

    /// Composition of `N ⊂ M` (self) with `M ⊂ L` (outer): the inclusion
    /// matrix multiplies, the layout composes.
    pub fn compose(&self, outer: &Inclusion) -> Result<Inclusion> {
        if !same_algebra(&self.amb, &outer.sub) {
            return Err(Error::AlgebraMismatch);
        }
        let kn = self.sub.num_blocks();
        let ll = outer.amb.num_blocks();
        let jm = self.amb.num_blocks();
        let matrix: Vec<Vec<u64>> = (0..kn)
            .map(|k| {
                (0..ll)
                    .map(|l| (0..jm).map(|j| self.matrix[k][j] * outer.matrix[j][l]).sum())
                    .collect()
            })
            .collect();
        let layout: Vec<Vec<CopySlot>> = (0..ll)
            .map(|l| {
                let mut slots = Vec::new();
                for mid in &outer.layout[l] {
                    for inner in &self.layout[mid.sub_block] {
                        slots.push(CopySlot {
                            sub_block: inner.sub_block,
                            positions: inner
                                .positions
                                .iter()
                                .map(|&u| mid.positions[u])
                                .collect(),
                        });
                    }
                }
                slots
            })
            .collect();
        Ok(Inclusion {
            sub: Arc::clone(&self.sub),
            amb: Arc::clone(&outer.amb),
            matrix,
            layout,
        })
    }
}

fn canonical_layout(sub: &DirectSumAlgebra, matrix: &[Vec<u64>]) -> Vec<Vec<CopySlot>> {
    let l_count = matrix.first().map_or(0, |r| r.len());
    (0..l_count)
        .map(|l| {
            let mut slots = Vec::new();
            let mut offset = 0usize;
            for (k, row) in matrix.iter().enumerate() {
                let n = sub.block_dim(k);
                for _ in 0..row[l] {
                    slots.push(CopySlot {
                        sub_block: k,
                        positions: (offset..offset + n).collect(),
                    });
                    offset += n;
                }
            }
            slots
        })
        .collect()
}

/// Finite groups with hardcoded irreducible-character data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupId {
    /// Cyclic group of order n, 1 <= n <= 12.
    Cyclic(u32),
    /// Symmetric group on three letters.
    S3,
    /// Dihedral group of order eight.
    D4,
}

impl GroupId {
    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        if lower == "s3" {
            return Ok(GroupId::S3);
        }
        if lower == "d4" {
            return Ok(GroupId::D4);
        }
        if let Some(rest) = lower.strip_prefix('z').or_else(|| lower.strip_prefix('c')) {
            if let Ok(n) = rest.parse::<u32>() {
                if (1..=12).contains(&n) {
                    return Ok(GroupId::Cyclic(n));
                }
            }
        }
        Err(Error::UnsupportedGroup { name: name.into() })
    }

    fn order(self) -> u32 {
        match self {
            GroupId::Cyclic(n) => n,
            GroupId::S3 => 6,
            GroupId::D4 => 8,
        }
    }
}

/// The group-algebra inclusion `L(H) ⊂ L(G)`: blocks from the irreducible
/// decomposition (dimension d, trace weight d/|G| per minimal projection),
/// inclusion matrix from hardcoded restriction multiplicities.
pub fn group_inclusion(group: GroupId, subgroup: GroupId) -> Result<Inclusion> {
    // (sub irrep dims, amb irrep dims, restriction multiplicities A[k][l])
    let (sub_dims, amb_dims, matrix): (Vec<usize>, Vec<usize>, Vec<Vec<u64>>) =
        match (group, subgroup) {
            (GroupId::Cyclic(n), GroupId::Cyclic(d)) if n % d == 0 => {
                let a = (0..d as usize)
                    .map(|k| {
                        (0..n as usize)
                            .map(|j| u64::from(j % d as usize == k))
                            .collect()
                    })
                    .collect();
                (vec![1; d as usize], vec![1; n as usize], a)
            }
            (GroupId::S3, GroupId::Cyclic(1)) => {
                (vec![1], vec![1, 1, 2], vec![vec![1, 1, 2]])
            }
            (GroupId::S3, GroupId::Cyclic(2)) => (
                vec![1, 1],
                vec![1, 1, 2],
                vec![vec![1, 0, 1], vec![0, 1, 1]],
            ),
            (GroupId::S3, GroupId::Cyclic(3)) => (
                vec![1, 1, 1],
                vec![1, 1, 2],
                vec![vec![1, 1, 0], vec![0, 0, 1], vec![0, 0, 1]],
            ),
            (GroupId::S3, GroupId::S3) => (
                vec![1, 1, 2],
                vec![1, 1, 2],
                vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
            ),
            (GroupId::D4, GroupId::Cyclic(1)) => {
                (vec![1], vec![1, 1, 1, 1, 2], vec![vec![1, 1, 1, 1, 2]])
            }
            // center {e, r^2}; the 2-dim irrep restricts to twice the sign
            (GroupId::D4, GroupId::Cyclic(2)) => (
                vec![1, 1],
                vec![1, 1, 1, 1, 2],
                vec![vec![1, 1, 1, 1, 0], vec![0, 0, 0, 0, 2]],
            ),
            // rotation subgroup <r>; the 2-dim irrep restricts to i and -i
            (GroupId::D4, GroupId::Cyclic(4)) => (
                vec![1, 1, 1, 1],
                vec![1, 1, 1, 1, 2],
                vec![
                    vec![1, 1, 0, 0, 0],
                    vec![0, 0, 0, 0, 1],
                    vec![0, 0, 1, 1, 0],
                    vec![0, 0, 0, 0, 1],
                ],
            ),
            (GroupId::D4, GroupId::D4) => {
                let a = (0..5)
                    .map(|k| (0..5).map(|l| u64::from(k == l)).collect())
                    .collect();
                (vec![1, 1, 1, 1, 2], vec![1, 1, 1, 1, 2], a)
            }
            _ => {
                return Err(Error::UnsupportedGroup {
                    name: format!("{subgroup:?} inside {group:?}"),
                })
            }
        };
    let g_order = group.order() as i64;
    let amb = DirectSumAlgebra::from_weights(
        amb_dims
            .iter()
            .map(|&d| (d, ratio(d as i64, g_order)))
            .collect(),
        false,
    )?;
    let inc = Inclusion::from_parts(&sub_dims, amb, matrix)?;
    // sanity: minimal projections of L(H) must carry weight d/|H|
    let h_order = subgroup.order() as i64;
    for (k, &d) in sub_dims.iter().enumerate() {
        debug_assert_eq!(inc.sub().weight(k), &ratio(d as i64, h_order));
    }
    Ok(inc)
}
