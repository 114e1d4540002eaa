//! Two-state divergences on a finite von Neumann algebra: sandwiched Renyi
//! `D_p`, Umegaki relative entropy `D`, Petz Renyi, trace distance, and von
//! Neumann entropy, all with respect to the weighted trace
//! `tr(x) = Σ_l t_l Tr(x_l)`.
//!
//! For `p in [1/2, 1) u (1, inf]` and densities `rho << sigma`,
//!
//! ```text
//! D_p(rho||sigma) = (p-1)^{-1} log tr |sigma^{-1/(2p')} rho sigma^{-1/(2p')}|^p
//!                 = p' log || sigma^{-1/(2p')} rho sigma^{-1/(2p')} ||_p ,
//! ```
//!
//! with `1/p + 1/p' = 1` and the negative power taken as generalized inverse
//! on the support; when the support of `rho` is not dominated the value is
//! `+inf`. Natural logarithms throughout; the CLI rescales to bits on
//! request.

use crate::algebra::{same_algebra, AlgebraElement, Density};
use crate::linalg::{self, EigenSystem, HermMatrix};
use crate::{Error, Result};

/// Orders where `p` sits within this distance of 1 (but is not exactly 1)
/// are rejected instead of silently evaluating the degenerate formula.
pub const NEAR_ONE_TOL: f64 = 1e-9;

/// Renyi order `p in [1/2, inf]`, with infinity encoded explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RenyiOrder {
    Finite(f64),
    Infinity,
}

impl RenyiOrder {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            return Ok(RenyiOrder::Infinity);
        }
        if !p.is_finite() || p < 0.5 {
            return Err(Error::BadOrder {
                reason: format!("p must lie in [1/2, inf], got {p}"),
            });
        }
        Ok(RenyiOrder::Finite(p))
    }

    pub fn infinity() -> Self {
        RenyiOrder::Infinity
    }

    /// Parses "inf"/"oo" or a number.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "Inf" | "INF" | "oo" | "infinity" => Ok(RenyiOrder::Infinity),
            other => {
                let p: f64 = other.parse().map_err(|_| Error::BadOrder {
                    reason: format!("cannot parse order {other:?}"),
                })?;
                RenyiOrder::new(p)
            }
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, RenyiOrder::Infinity)
    }

    pub fn p(self) -> f64 {
        match self {
            RenyiOrder::Finite(p) => p,
            RenyiOrder::Infinity => f64::INFINITY,
        }
    }

    /// Whether this order is exactly the Umegaki point `p = 1`.
    pub fn is_one(self) -> bool {
        matches!(self, RenyiOrder::Finite(p) if p == 1.0)
    }

    /// Conjugate exponent `p' = p/(p-1)`; equals 1 at `p = inf` and -1 at
    /// `p = 1/2`.
    pub fn p_prime(self) -> f64 {
        match self {
            RenyiOrder::Finite(p) => p / (p - 1.0),
            RenyiOrder::Infinity => 1.0,
        }
    }

    /// Auxiliary exponent `q = p/(2p-1)` (defined for `p > 1/2`), the order
    /// appearing in the optimizing density of the pure-state example.
    pub fn q(self) -> f64 {
        match self {
            RenyiOrder::Finite(p) => p / (2.0 * p - 1.0),
            RenyiOrder::Infinity => 0.5,
        }
    }

    /// Auxiliary exponent `r` with `1/(2p) = 1/r + 1/2` (for `p < 1`).
    pub fn r(self) -> f64 {
        let p = self.p();
        2.0 * p / (1.0 - p)
    }

    fn reject_near_one(self) -> Result<f64> {
        let p = self.p();
        if p.is_finite() && (p - 1.0).abs() < NEAR_ONE_TOL && p != 1.0 {
            return Err(Error::BadOrder {
                reason: format!("p = {p} is inside the unstable window around 1"),
            });
        }
        Ok(p)
    }
}

/// A divergence value: nonnegative real or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceValue {
    Finite(f64),
    Infinite,
}

impl DivergenceValue {
    fn from_raw(x: f64) -> Self {
        if !x.is_finite() {
            DivergenceValue::Infinite
        } else if x < 0.0 && x > -1e-9 {
            DivergenceValue::Finite(0.0)
        } else {
            DivergenceValue::Finite(x)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, DivergenceValue::Finite(_))
    }

    /// The value, with `+inf` mapped to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        match self {
            DivergenceValue::Finite(x) => x,
            DivergenceValue::Infinite => f64::INFINITY,
        }
    }

    pub fn expect_finite(self) -> Result<f64> {
        match self {
            DivergenceValue::Finite(x) => Ok(x),
            DivergenceValue::Infinite => Err(Error::BadInput(
                "divergence is infinite where a finite value was required".into(),
            )),
        }
    }
}

fn check_pair(rho: &Density, sigma: &Density) -> Result<()> {
    if same_algebra(rho.algebra(), sigma.algebra()) {
        Ok(())
    } else {
        Err(Error::AlgebraMismatch)
    }
}

pub(crate) fn block_eigs(x: &AlgebraElement) -> Vec<EigenSystem> {
    x.blocks()
        .iter()
        .map(|b| {
            let h = HermMatrix::new(b.clone()).expect("blocks must be Hermitian here");
            linalg::herm_eig(&h)
        })
        .collect()
}

pub(crate) fn global_lambda_max(eigs: &[EigenSystem]) -> f64 {
    eigs.iter().map(|e| e.lambda_max()).fold(f64::MIN, f64::max)
}

const SUPPORT_LEAK_TOL: f64 = 1e-8;

/// Support comparison: the (unweighted) rank of `rho`'s support that leaks
/// outside the support of `sigma`, computed from the spectral projections
/// with the global cutoff. A leak above [`SUPPORT_LEAK_TOL`] means
/// `supp(rho) <= supp(sigma)` fails.
fn support_leak(rho_eigs: &[EigenSystem], sigma_eigs: &[EigenSystem]) -> f64 {
    let rho_cut = linalg::support_cutoff(global_lambda_max(rho_eigs));
    let sigma_cut = linalg::support_cutoff(global_lambda_max(sigma_eigs));
    let mut leak = 0.0;
    for (re, se) in rho_eigs.iter().zip(sigma_eigs) {
        let n = re.eigenvalues.len();
        let comp_vals: Vec<f64> = se
            .eigenvalues
            .iter()
            .map(|&l| if l > sigma_cut { 0.0 } else { 1.0 })
            .collect();
        if comp_vals.iter().all(|&v| v == 0.0) {
            continue;
        }
        let comp = se.assemble(&comp_vals);
        for i in 0..n {
            if re.eigenvalues[i] > rho_cut {
                let v = re.frame.column(i);
                leak += (v.adjoint() * &comp * v)[(0, 0)].re;
            }
        }
    }
    leak
}

/// Weighted Schatten p-norm `(Σ_l t_l Tr|x_l|^p)^{1/p}`; `p = inf` gives the
/// operator norm. Uses singular values, so `x` need not be Hermitian.
pub fn weighted_schatten_norm(x: &AlgebraElement, p: f64) -> f64 {
    let alg = x.algebra();
    if p.is_infinite() {
        return x
            .blocks()
            .iter()
            .map(|b| {
                b.clone()
                    .svd(false, false)
                    .singular_values
                    .iter()
                    .fold(0.0f64, |a, &s| a.max(s))
            })
            .fold(0.0f64, f64::max);
    }
    let mut acc = 0.0;
    for (l, b) in x.blocks().iter().enumerate() {
        let sv = b.clone().svd(false, false).singular_values;
        acc += alg.weight_f64(l) * sv.iter().map(|s| s.powf(p)).sum::<f64>();
    }
    acc.powf(1.0 / p)
}

/// Sandwiched Renyi relative entropy `D_p(rho||sigma)`.
///
/// `p = 1` dispatches to [`umegaki`]; orders within [`NEAR_ONE_TOL`] of 1
/// (but not exactly 1) are rejected.
pub fn sandwiched_renyi(
    rho: &Density,
    sigma: &Density,
    order: RenyiOrder,
) -> Result<DivergenceValue> {
    check_pair(rho, sigma)?;
    if order.is_one() {
        return umegaki(rho, sigma);
    }
    let p = order.reject_near_one()?;

    let rho_eigs = block_eigs(rho.element());
    let sigma_eigs = block_eigs(sigma.element());
    if support_leak(&rho_eigs, &sigma_eigs) > SUPPORT_LEAK_TOL {
        return Ok(DivergenceValue::Infinite);
    }

    // sigma^{-1/(2p')} blockwise, generalized inverse on the support
    let expo = -1.0 / (2.0 * order.p_prime());
    let sigma_cut = linalg::support_cutoff(global_lambda_max(&sigma_eigs));
    let alg = rho.algebra();
    let mut op_norm = 0.0f64;
    let mut trace_p = 0.0f64;
    for (l, se) in sigma_eigs.iter().enumerate() {
        let powered: Vec<f64> = se
            .eigenvalues
            .iter()
            .map(|&v| if v > sigma_cut { v.powf(expo) } else { 0.0 })
            .collect();
        let b = se.assemble(&powered);
        let x = &b * rho.block(l) * &b;
        let x = HermMatrix::new_symmetrized(x);
        let xe = linalg::herm_eig(&x);
        if order.is_infinite() {
            op_norm = op_norm.max(xe.lambda_max());
        } else {
            // the operand is PSD of rank <= rank(rho); spurious roundoff
            // eigenvalues below the cutoff would otherwise leak through
            // fractional powers
            let cut = linalg::support_cutoff(xe.lambda_max());
            trace_p += alg.weight_f64(l)
                * xe.eigenvalues
                    .iter()
                    .map(|&v| if v > cut { v.powf(p) } else { 0.0 })
                    .sum::<f64>();
        }
    }
    let value = if order.is_infinite() {
        op_norm.ln()
    } else {
        if trace_p <= 0.0 {
            return Ok(DivergenceValue::Infinite);
        }
        trace_p.ln() / (p - 1.0)
    };
    Ok(DivergenceValue::from_raw(value))
}

/// Umegaki relative entropy `D(rho||sigma) = tr(rho log rho - rho log sigma)`
/// on the supports, `+inf` when `supp(rho) <= supp(sigma)` fails.
pub fn umegaki(rho: &Density, sigma: &Density) -> Result<DivergenceValue> {
    check_pair(rho, sigma)?;
    let rho_eigs = block_eigs(rho.element());
    let sigma_eigs = block_eigs(sigma.element());
    if support_leak(&rho_eigs, &sigma_eigs) > SUPPORT_LEAK_TOL {
        return Ok(DivergenceValue::Infinite);
    }
    let alg = rho.algebra();
    let rho_cut = linalg::support_cutoff(global_lambda_max(&rho_eigs));
    let sigma_cut = linalg::support_cutoff(global_lambda_max(&sigma_eigs));
    let mut value = 0.0;
    for (l, (re, se)) in rho_eigs.iter().zip(&sigma_eigs).enumerate() {
        let t = alg.weight_f64(l);
        let plogp: f64 = re
            .eigenvalues
            .iter()
            .map(|&v| if v > rho_cut { v * v.ln() } else { 0.0 })
            .sum();
        let log_sigma: Vec<f64> = se
            .eigenvalues
            .iter()
            .map(|&v| if v > sigma_cut { v.ln() } else { 0.0 })
            .collect();
        let ls = se.assemble(&log_sigma);
        let cross = (rho.block(l) * ls).trace().re;
        value += t * (plogp - cross);
    }
    Ok(DivergenceValue::from_raw(value))
}

/// Petz Renyi relative entropy
/// `D̃_p(rho||sigma) = (p-1)^{-1} log tr(rho^p sigma^{1-p})`.
pub fn petz_renyi(rho: &Density, sigma: &Density, order: RenyiOrder) -> Result<DivergenceValue> {
    check_pair(rho, sigma)?;
    if order.is_one() {
        return umegaki(rho, sigma);
    }
    if order.is_infinite() {
        // max relative entropy; agrees with the sandwiched form at p = inf
        return sandwiched_renyi(rho, sigma, order);
    }
    let p = order.reject_near_one()?;
    let rho_eigs = block_eigs(rho.element());
    let sigma_eigs = block_eigs(sigma.element());
    if support_leak(&rho_eigs, &sigma_eigs) > SUPPORT_LEAK_TOL {
        return Ok(DivergenceValue::Infinite);
    }
    let alg = rho.algebra();
    let rho_cut = linalg::support_cutoff(global_lambda_max(&rho_eigs));
    let sigma_cut = linalg::support_cutoff(global_lambda_max(&sigma_eigs));
    let mut acc = 0.0;
    for (l, (re, se)) in rho_eigs.iter().zip(&sigma_eigs).enumerate() {
        let rp: Vec<f64> = re
            .eigenvalues
            .iter()
            .map(|&v| if v > rho_cut { v.powf(p) } else { 0.0 })
            .collect();
        let sp: Vec<f64> = se
            .eigenvalues
            .iter()
            .map(|&v| if v > sigma_cut { v.powf(1.0 - p) } else { 0.0 })
            .collect();
        let a = re.assemble(&rp);
        let b = se.assemble(&sp);
        acc += alg.weight_f64(l) * (a * b).trace().re;
    }
    if acc <= 0.0 {
        return Ok(DivergenceValue::Infinite);
    }
    Ok(DivergenceValue::from_raw(acc.ln() / (p - 1.0)))
}

/// Weighted trace-norm distance `||rho - sigma||_1`.
pub fn trace_distance(rho: &Density, sigma: &Density) -> Result<f64> {
    check_pair(rho, sigma)?;
    let diff = rho.element().sub(sigma.element())?;
    Ok(trace_norm(&diff))
}

/// Weighted trace norm of a Hermitian element.
pub fn trace_norm(x: &AlgebraElement) -> f64 {
    let alg = x.algebra();
    x.blocks()
        .iter()
        .enumerate()
        .map(|(l, b)| {
            let h = HermMatrix::new(b.clone()).expect("trace_norm expects Hermitian blocks");
            let es = linalg::herm_eig(&h);
            alg.weight_f64(l) * es.eigenvalues.iter().map(|v| v.abs()).sum::<f64>()
        })
        .sum()
}

/// Von Neumann entropy `H(rho) = -tr(rho log rho)` (weighted trace; can be
/// negative when minimal projections carry weight below one).
pub fn vn_entropy(rho: &Density) -> f64 {
    let eigs = block_eigs(rho.element());
    let cut = linalg::support_cutoff(global_lambda_max(&eigs));
    let alg = rho.algebra();
    -eigs
        .iter()
        .enumerate()
        .map(|(l, es)| {
            alg.weight_f64(l)
                * es
                    .eigenvalues
                    .iter()
                    .map(|&v| if v > cut { v * v.ln() } else { 0.0 })
                    .sum::<f64>()
        })
        .sum::<f64>()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::algebra::tests::{c2_in_m2, m12_fixture};
    use crate::algebra::{random_density, Density, DirectSumAlgebra};
    use crate::linalg::C64;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    /// Pure state with diagonal (a, 1-a) on M_2 with normalized trace.
    pub(crate) fn rho_a(a: f64) -> Density {
        let alg = DirectSumAlgebra::matrix(2);
        Density::block_pure(
            &alg,
            0,
            &[C64::new(a.sqrt(), 0.0), C64::new((1.0 - a).sqrt(), 0.0)],
        )
        .unwrap()
    }

    fn diag_density(weights: &[(usize, f64)], entries: &[f64]) -> Density {
        let alg = DirectSumAlgebra::new_raw(weights).unwrap();
        let mut el = AlgebraElement::zero(&alg);
        let mut idx = 0;
        for b in el.blocks_mut() {
            for i in 0..b.nrows() {
                b[(i, i)] = C64::new(entries[idx], 0.0);
                idx += 1;
            }
        }
        Density::new(el).unwrap()
    }

    #[test]
    fn self_divergence_is_zero() {
        let alg = DirectSumAlgebra::matrix(3);
        for seed in 0..5 {
            let rho = random_density(&alg, seed);
            for order in [
                RenyiOrder::new(0.5).unwrap(),
                RenyiOrder::new(0.75).unwrap(),
                RenyiOrder::new(2.0).unwrap(),
                RenyiOrder::Infinity,
            ] {
                let d = sandwiched_renyi(&rho, &rho, order).unwrap().as_f64();
                assert!(d.abs() < 1e-9, "D_p(rho||rho) = {d} at {order:?}");
                let dp = petz_renyi(&rho, &rho, order).unwrap().as_f64();
                assert!(dp.abs() < 1e-9);
            }
            assert!(umegaki(&rho, &rho).unwrap().as_f64().abs() < 1e-10);
            assert!(trace_distance(&rho, &rho).unwrap() < 1e-12);
        }
    }

    #[test]
    fn pure_state_closed_form_vs_expectation() {
        // D_p(rho_a || E(rho_a)) = p' log(a^{1/p} + (1-a)^{1/p})
        let inc = c2_in_m2();
        for &a in &[0.1, 0.3, 0.5, 0.77] {
            let rho = rho_a(a);
            let e = inc.embed_density(&inc.expect_density(&rho).unwrap()).unwrap();
            for &p in &[0.6, 1.5, 2.0, 5.0] {
                let order = RenyiOrder::new(p).unwrap();
                let got = sandwiched_renyi(&rho, &e, order)
                    .unwrap()
                    .expect_finite()
                    .unwrap();
                let want = order.p_prime() * (a.powf(1.0 / p) + (1.0 - a).powf(1.0 / p)).ln();
                assert_relative_eq!(got, want, epsilon = 1e-10, max_relative = 1e-9);
            }
            // p = infinity: E(rho)^{-1/2} rho E(rho)^{-1/2} is the all-ones
            // matrix with operator norm 2
            let got = sandwiched_renyi(&rho, &e, RenyiOrder::Infinity)
                .unwrap()
                .expect_finite()
                .unwrap();
            assert_relative_eq!(got, 2.0f64.ln(), max_relative = 1e-10);
        }
    }

    #[test]
    fn trace_rescaling_invariance() {
        // same physical pair on M_2, once with normalized trace and once with
        // unit block weight
        let a = 0.3;
        let norm = rho_a(a);
        let raw_alg = DirectSumAlgebra::new_raw(&[(2, 1.0)]).unwrap();
        let raw = Density::new(
            AlgebraElement::new(
                raw_alg.clone(),
                vec![norm.element().block(0).map(|z| z * 0.5)],
            )
            .unwrap(),
        )
        .unwrap();
        let sig_norm = Density::new(AlgebraElement::identity(norm.algebra())).unwrap();
        let sig_raw = Density::new(
            AlgebraElement::new(raw_alg, vec![DMatrix::identity(2, 2).map(|z: C64| z * 0.5)])
                .unwrap(),
        )
        .unwrap();
        for &p in &[0.5, 2.0] {
            let o = RenyiOrder::new(p).unwrap();
            let d1 = sandwiched_renyi(&norm, &sig_norm, o).unwrap().as_f64();
            let d2 = sandwiched_renyi(&raw, &sig_raw, o).unwrap().as_f64();
            assert_relative_eq!(d1, d2, epsilon = 1e-11);
        }
    }

    #[test]
    fn support_branch_infinite() {
        let sigma = rho_a(1.0); // rank one
        let alg = sigma.algebra().clone();
        let rho = random_density(&alg, 5); // full rank
        assert!(!sandwiched_renyi(&rho, &sigma, RenyiOrder::new(2.0).unwrap())
            .unwrap()
            .is_finite());
        assert!(!umegaki(&rho, &sigma).unwrap().is_finite());
        assert!(!petz_renyi(&rho, &sigma, RenyiOrder::new(2.0).unwrap())
            .unwrap()
            .is_finite());
        // reversed direction is finite
        assert!(sandwiched_renyi(&sigma, &rho, RenyiOrder::new(2.0).unwrap())
            .unwrap()
            .is_finite());
    }

    #[test]
    fn near_one_rejected_and_one_dispatches() {
        let alg = DirectSumAlgebra::matrix(2);
        let rho = random_density(&alg, 1);
        let sigma = random_density(&alg, 2);
        let o = RenyiOrder::new(1.0 + 1e-12).unwrap();
        assert!(matches!(
            sandwiched_renyi(&rho, &sigma, o),
            Err(Error::BadOrder { .. })
        ));
        let exact = RenyiOrder::new(1.0).unwrap();
        let via_one = sandwiched_renyi(&rho, &sigma, exact).unwrap().as_f64();
        let direct = umegaki(&rho, &sigma).unwrap().as_f64();
        assert_relative_eq!(via_one, direct);
    }

    #[test]
    fn umegaki_entropy_difference() {
        let inc = m12_fixture();
        for seed in 0..6 {
            let rho = random_density(inc.amb(), seed);
            let erho = inc.expect_density(&rho).unwrap();
            let d = umegaki(&rho, &inc.embed_density(&erho).unwrap())
                .unwrap()
                .as_f64();
            let want = vn_entropy(&erho) - vn_entropy(&rho);
            assert_relative_eq!(d, want, epsilon = 1e-9, max_relative = 1e-8);
        }
    }

    #[test]
    fn pinsker_inequality() {
        let alg = DirectSumAlgebra::new(&[(2, 1.0), (1, 2.0)]).unwrap();
        for seed in 0..200 {
            let rho = random_density(&alg, 2 * seed);
            let sigma = random_density(&alg, 2 * seed + 1);
            let d = umegaki(&rho, &sigma).unwrap().as_f64();
            let t = trace_distance(&rho, &sigma).unwrap();
            assert!(
                d + 1e-12 >= 0.5 * t * t,
                "Pinsker failed at seed {seed}: {d} vs {t}"
            );
        }
    }

    #[test]
    fn petz_diagonal_example() {
        // D̃_2 = log tr(rho^2 sigma^{-1}) = log(4/3) for diag(1/2,1/2) against
        // diag(1/4,3/4) on C^2 with unit weights
        let rho = diag_density(&[(1, 1.0), (1, 1.0)], &[0.5, 0.5]);
        let sigma = diag_density(&[(1, 1.0), (1, 1.0)], &[0.25, 0.75]);
        let got = petz_renyi(&rho, &sigma, RenyiOrder::new(2.0).unwrap())
            .unwrap()
            .expect_finite()
            .unwrap();
        assert_relative_eq!(got, (4.0f64 / 3.0).ln(), max_relative = 1e-12);
    }

    #[test]
    fn petz_sandwich_bounds() {
        // D̃_{2-1/p} <= D_p <= D̃_p for p > 1, and D = D̃_1 <= D̃_p
        let alg = DirectSumAlgebra::matrix(3);
        for seed in 0..40 {
            let rho = random_density(&alg, 100 + 2 * seed);
            let sigma = random_density(&alg, 101 + 2 * seed);
            let d1 = umegaki(&rho, &sigma).unwrap().as_f64();
            for &p in &[1.5, 2.0] {
                let order = RenyiOrder::new(p).unwrap();
                let mid = sandwiched_renyi(&rho, &sigma, order).unwrap().as_f64();
                let upper = petz_renyi(&rho, &sigma, order).unwrap().as_f64();
                let lower = petz_renyi(&rho, &sigma, RenyiOrder::new(2.0 - 1.0 / p).unwrap())
                    .unwrap()
                    .as_f64();
                assert!(lower <= mid + 1e-9, "lower sandwich failed: {lower} vs {mid}");
                assert!(mid <= upper + 1e-9, "upper sandwich failed: {mid} vs {upper}");
                assert!(d1 <= upper + 1e-9, "Umegaki above Petz: {d1} vs {upper}");
            }
        }
    }

    #[test]
    fn trace_distance_examples() {
        // orthogonal pure states on M_2 with normalized trace: densities are
        // doubled projections, so the weighted 1-norm of the difference is 2
        let p0 = rho_a(1.0);
        let p1 = rho_a(0.0);
        assert_relative_eq!(trace_distance(&p0, &p1).unwrap(), 2.0, max_relative = 1e-12);
        // triangle inequality on random triples
        let alg = DirectSumAlgebra::matrix(3);
        for seed in 0..100 {
            let a = random_density(&alg, 3 * seed);
            let b = random_density(&alg, 3 * seed + 1);
            let c = random_density(&alg, 3 * seed + 2);
            let ab = trace_distance(&a, &b).unwrap();
            let bc = trace_distance(&b, &c).unwrap();
            let ac = trace_distance(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-12);
        }
    }

    #[test]
    fn entropy_examples() {
        // pure state on normalized M_2 has eigenvalues {2, 0}: H = -log 2
        let rho = rho_a(0.5);
        assert_relative_eq!(vn_entropy(&rho), -(2.0f64.ln()), max_relative = 1e-12);
        // identity density has H = 0
        let alg = DirectSumAlgebra::matrix(2);
        let one = Density::new(AlgebraElement::identity(&alg)).unwrap();
        assert_relative_eq!(vn_entropy(&one), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn monotone_in_p_and_limit_to_one() {
        let alg = DirectSumAlgebra::matrix(3);
        for seed in 0..10 {
            let rho = random_density(&alg, 500 + 2 * seed);
            let sigma = random_density(&alg, 501 + 2 * seed);
            let umeg = umegaki(&rho, &sigma).unwrap().as_f64();
            let mut values = Vec::new();
            for &p in &[0.5, 0.75] {
                values.push(
                    sandwiched_renyi(&rho, &sigma, RenyiOrder::new(p).unwrap())
                        .unwrap()
                        .as_f64(),
                );
            }
            values.push(umeg);
            for &p in &[1.25, 2.0, 5.0] {
                values.push(
                    sandwiched_renyi(&rho, &sigma, RenyiOrder::new(p).unwrap())
                        .unwrap()
                        .as_f64(),
                );
            }
            values.push(
                sandwiched_renyi(&rho, &sigma, RenyiOrder::Infinity)
                    .unwrap()
                    .as_f64(),
            );
            for w in values.windows(2) {
                assert!(w[0] <= w[1] + 1e-7, "monotonicity in p failed: {values:?}");
            }
            for &p in &[1.0 - 1e-4, 1.0 + 1e-4] {
                let d = sandwiched_renyi(&rho, &sigma, RenyiOrder::new(p).unwrap())
                    .unwrap()
                    .as_f64();
                assert!((d - umeg).abs() <= 1e-2, "p->1 limit failed: {d} vs {umeg}");
            }
        }
    }

    #[test]
    fn data_processing_under_expectation() {
        for (inc, base) in [(c2_in_m2(), 900u64), (m12_fixture(), 950)] {
            for seed in 0..10 {
                let rho = random_density(inc.amb(), base + 2 * seed);
                let sigma = random_density(inc.amb(), base + 2 * seed + 1);
                let erho = inc.expect_density(&rho).unwrap();
                let esigma = inc.expect_density(&sigma).unwrap();
                for order in [
                    RenyiOrder::new(0.5).unwrap(),
                    RenyiOrder::new(1.0).unwrap(),
                    RenyiOrder::new(2.0).unwrap(),
                    RenyiOrder::Infinity,
                ] {
                    let before = sandwiched_renyi(&rho, &sigma, order).unwrap().as_f64();
                    let after = sandwiched_renyi(&erho, &esigma, order).unwrap().as_f64();
                    assert!(
                        after <= before + 1e-9,
                        "DPI failed at {order:?}: {after} > {before}"
                    );
                }
            }
        }
    }

    #[test]
    fn schatten_norm_helpers() {
        let alg = DirectSumAlgebra::matrix(2);
        let one = AlgebraElement::identity(&alg);
        assert_relative_eq!(weighted_schatten_norm(&one, 1.0), 1.0, max_relative = 1e-12);
        assert_relative_eq!(
            weighted_schatten_norm(&one, f64::INFINITY),
            1.0,
            max_relative = 1e-12
        );
        let rho = rho_a(0.5);
        assert_relative_eq!(
            weighted_schatten_norm(rho.element(), 1.0),
            1.0,
            max_relative = 1e-12
        );
    }
}
