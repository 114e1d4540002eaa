//! Divergence to a subalgebra `D_p(rho||N) = inf_{sigma in S(N)} D_p(rho||sigma)`
//! with the optimizing density, plus the amalgamated `L_1^p` and conditional
//! `L_inf^q` norms it corresponds to.
//!
//! Dispatch by order:
//!
//! - `p = 1`: closed form, minimizer `E(rho)`, value `H(E(rho)) - H(rho)`;
//! - `p in (1, inf)` and `p in [1/2, 1)`: multi-start compass search over
//!   densities of `N` parametrized as `sigma = W W^* / tr(W W^*)` with one
//!   complex factor per block (the conditional expectation is always one of
//!   the starts, so solver values never exceed `D_p(rho||E(rho))`);
//! - `p = inf`: bisection on `mu` over the feasibility problem
//!   `mu * embed(sigma) - rho >= 0`, the inner concave maximization of the
//!   minimal eigenvalue running over the same parametrization.
//!
//! Solver outputs are feasible-point evaluations, hence upper bounds on the
//! infimum; tests compare them two-sidedly against closed forms.

use nalgebra::DMatrix;

use crate::algebra::{same_algebra, AlgebraElement, Density, Inclusion};
use crate::divergence::{
    self, sandwiched_renyi, vn_entropy, weighted_schatten_norm, DivergenceValue, RenyiOrder,
};
use crate::linalg::{self, C64, EigenSystem, HermMatrix};
use crate::solver::{compass_search, gaussian_start, multistart_minimize, SolverBudget};
use crate::{Error, Result};

/// Diagnostics from the variational solver.
#[derive(Debug, Clone)]
pub struct SolverReport {
    /// Total objective evaluations across starts.
    pub evals: usize,
    /// Stationarity residual of the winning start (best local improvement
    /// still available when it stopped; zero at convergence).
    pub residual: f64,
    /// Number of independent starts used.
    pub starts_used: usize,
}

/// Result of [`divergence_to_subalgebra`].
#[derive(Debug, Clone)]
pub struct SubalgebraDivergence {
    pub value: DivergenceValue,
    /// The optimizing density in sub-algebra coordinates.
    pub minimizer: Density,
    pub report: SolverReport,
}

/// Number of real parameters for the `sigma = W W^*` parametrization.
fn param_dim(inc: &Inclusion) -> usize {
    2 * inc.sub().blocks().iter().map(|b| b.dim * b.dim).sum::<usize>()
}

/// Builds the blocks of `W` from a flat parameter vector.
fn factor_from_params(inc: &Inclusion, w: &[f64]) -> Vec<DMatrix<C64>> {
    let mut out = Vec::with_capacity(inc.sub().num_blocks());
    let mut idx = 0;
    for b in inc.sub().blocks() {
        let n = b.dim;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = C64::new(w[idx], w[idx + 1]);
                idx += 2;
            }
        }
        out.push(m);
    }
    debug_assert_eq!(idx, w.len());
    out
}

/// `sigma = W W^* / tr(W W^*)` as an element of the subalgebra, or `None`
/// when the factor is numerically zero.
fn sigma_from_params(inc: &Inclusion, w: &[f64]) -> Option<AlgebraElement> {
    let factors = factor_from_params(inc, w);
    let blocks: Vec<DMatrix<C64>> = factors.iter().map(|f| f * f.adjoint()).collect();
    let sub = inc.sub();
    let tau: f64 = blocks
        .iter()
        .enumerate()
        .map(|(k, b)| sub.weight_f64(k) * b.trace().re)
        .sum();
    if !(tau.is_finite() && tau > 1e-300) {
        return None;
    }
    let inv = 1.0 / tau;
    let blocks = blocks.into_iter().map(|b| b.map(|z| z * inv)).collect();
    Some(AlgebraElement::new(std::sync::Arc::clone(sub), blocks).unwrap())
}

/// Parameters whose `sigma` equals a given positive element: `W = x^{1/2}`.
fn params_from_positive(inc: &Inclusion, x: &AlgebraElement) -> Vec<f64> {
    let mut w = Vec::with_capacity(param_dim(inc));
    for b in x.blocks() {
        let h = HermMatrix::new_symmetrized(b.clone());
        let root = linalg::matrix_fn(&h, |l| l.max(0.0).sqrt(), true)
            .expect("sqrt is defined on the support");
        let m = root.matrix();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                w.push(m[(i, j)].re);
                w.push(m[(i, j)].im);
            }
        }
    }
    w
}

/// Precomputed data for fast repeated evaluations of
/// `D_p(rho || embed(sigma))` along the search.
struct Evaluator<'a> {
    rho: &'a Density,
    inc: &'a Inclusion,
    order: RenyiOrder,
    expo: f64,
    rho_eigs: Vec<EigenSystem>,
    rho_rank_cut: f64,
}

impl<'a> Evaluator<'a> {
    fn new(rho: &'a Density, inc: &'a Inclusion, order: RenyiOrder) -> Self {
        let rho_eigs = divergence::block_eigs(rho.element());
        let rho_rank_cut = linalg::support_cutoff(divergence::global_lambda_max(&rho_eigs));
        Self {
            rho,
            inc,
            order,
            expo: -1.0 / (2.0 * order.p_prime()),
            rho_eigs,
            rho_rank_cut,
        }
    }

    /// `D_p(rho || embed(sigma))`, `+inf` when the support of `rho` escapes.
    fn value_at(&self, sigma: &AlgebraElement) -> f64 {
        let sub = self.inc.sub();
        let sigma_eigs: Vec<EigenSystem> = sigma
            .blocks()
            .iter()
            .map(|b| linalg::herm_eig(&HermMatrix::new_symmetrized(b.clone())))
            .collect();
        let lam_max = sigma_eigs
            .iter()
            .map(|e| e.lambda_max())
            .fold(f64::MIN, f64::max);
        if !lam_max.is_finite() {
            return f64::INFINITY;
        }
        let cut = linalg::support_cutoff(lam_max);
        let full_support = sigma_eigs.iter().all(|e| e.lambda_min() > cut);
        let powered: Vec<DMatrix<C64>> = sigma_eigs
            .iter()
            .map(|es| {
                let vals: Vec<f64> = es
                    .eigenvalues
                    .iter()
                    .map(|&v| if v > cut { v.powf(self.expo) } else { 0.0 })
                    .collect();
                es.assemble(&vals)
            })
            .collect();
        let powered_el = AlgebraElement::new(std::sync::Arc::clone(sub), powered).unwrap();
        let b = self
            .inc
            .embed(&powered_el)
            .expect("powered sigma lives in the subalgebra");
        if !full_support {
            // support comparison against rho, blockwise in the ambient algebra
            let sup_vals: Vec<DMatrix<C64>> = sigma_eigs
                .iter()
                .map(|es| {
                    let vals: Vec<f64> = es
                        .eigenvalues
                        .iter()
                        .map(|&v| if v > cut { 1.0 } else { 0.0 })
                        .collect();
                    es.assemble(&vals)
                })
                .collect();
            let sup_el = AlgebraElement::new(std::sync::Arc::clone(sub), sup_vals).unwrap();
            let p_sigma = self.inc.embed(&sup_el).unwrap();
            let mut leak = 0.0;
            for (l, re) in self.rho_eigs.iter().enumerate() {
                let proj = p_sigma.block(l);
                for i in 0..re.eigenvalues.len() {
                    if re.eigenvalues[i] > self.rho_rank_cut {
                        let v = re.frame.column(i);
                        leak += 1.0 - (v.adjoint() * proj * v)[(0, 0)].re;
                    }
                }
            }
            if leak > 1e-8 {
                return f64::INFINITY;
            }
        }
        let alg = self.rho.algebra();
        let p = self.order.p();
        let mut op_norm = 0.0f64;
        let mut trace_p = 0.0f64;
        for (l, bb) in b.blocks().iter().enumerate() {
            let x = bb * self.rho.block(l) * bb;
            if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                // overflow from a nearly singular sigma taken to a negative
                // power; treat as infeasible
                return f64::INFINITY;
            }
            let xe = linalg::herm_eig(&HermMatrix::new_symmetrized(x));
            if self.order.is_infinite() {
                op_norm = op_norm.max(xe.lambda_max());
            } else {
                let xcut = linalg::support_cutoff(xe.lambda_max());
                trace_p += alg.weight_f64(l)
                    * xe.eigenvalues
                        .iter()
                        .map(|&v| if v > xcut { v.powf(p) } else { 0.0 })
                        .sum::<f64>();
            }
        }
        if self.order.is_infinite() {
            op_norm.ln()
        } else if trace_p <= 0.0 {
            f64::INFINITY
        } else {
            trace_p.ln() / (p - 1.0)
        }
    }

    fn objective(&self, w: &[f64]) -> f64 {
        match sigma_from_params(self.inc, w) {
            Some(sigma) => self.value_at(&sigma),
            None => f64::INFINITY,
        }
    }
}

fn check_membership(rho: &Density, inc: &Inclusion) -> Result<()> {
    if same_algebra(rho.algebra(), inc.amb()) {
        Ok(())
    } else {
        Err(Error::AlgebraMismatch)
    }
}

fn start_vectors(inc: &Inclusion, e_rho: &AlgebraElement, budget: &SolverBudget) -> Vec<Vec<f64>> {
    let dim = param_dim(inc);
    let mut starts = vec![params_from_positive(inc, e_rho)];
    for k in 1..budget.starts.max(1) {
        starts.push(gaussian_start(dim, budget.seed, k as u64));
    }
    starts
}

/// `D_p(rho||N)` with the optimizing density and solver diagnostics.
pub fn divergence_to_subalgebra(
    rho: &Density,
    inc: &Inclusion,
    order: RenyiOrder,
    budget: &SolverBudget,
) -> Result<SubalgebraDivergence> {
    divergence_to_subalgebra_seeded(rho, inc, order, budget, &[])
}

/// Same as [`divergence_to_subalgebra`] but with extra warm-start densities
/// (used by experiment runners that sweep a parameter and reuse the
/// previous optimum).
pub fn divergence_to_subalgebra_seeded(
    rho: &Density,
    inc: &Inclusion,
    order: RenyiOrder,
    budget: &SolverBudget,
    warm: &[&Density],
) -> Result<SubalgebraDivergence> {
    check_membership(rho, inc)?;
    let e_rho = inc.expect_density(rho)?;

    if order.is_one() {
        let value = vn_entropy(&e_rho) - vn_entropy(rho);
        return Ok(SubalgebraDivergence {
            value: DivergenceValue::Finite(value.max(0.0)),
            minimizer: e_rho,
            report: SolverReport { evals: 0, residual: 0.0, starts_used: 0 },
        });
    }
    if order.is_infinite() {
        return infinity_order(rho, inc, &e_rho, budget, warm);
    }
    let p = order.p();
    if (p - 1.0).abs() < divergence::NEAR_ONE_TOL {
        return Err(Error::BadOrder {
            reason: format!("p = {p} is inside the unstable window around 1"),
        });
    }

    let eval = Evaluator::new(rho, inc, order);
    let mut starts = start_vectors(inc, e_rho.element(), budget);
    for d in warm {
        starts.push(params_from_positive(inc, d.element()));
    }
    let out = multistart_minimize(&|w: &[f64]| eval.objective(w), &starts, budget);
    if out.best.residual > budget.stationarity_tol {
        return Err(Error::SolverBudgetExceeded {
            residual: out.best.residual,
            tol: budget.stationarity_tol,
        });
    }
    let sigma = sigma_from_params(inc, &out.best.x)
        .ok_or_else(|| Error::BadInput("search ended at a degenerate factor".into()))?;
    let minimizer = Density::new(sigma)?;
    let value = sandwiched_renyi(rho, &inc.embed_density(&minimizer)?, order)?;
    Ok(SubalgebraDivergence {
        value,
        minimizer,
        report: SolverReport {
            evals: out.all.iter().map(|o| o.evals).sum(),
            residual: out.best.residual,
            starts_used: out.all.len(),
        },
    })
}

/// `p = inf`: `D_inf(rho||N) = log mu*` where
/// `mu* = min { mu : mu embed(sigma) >= rho for some sigma in S(N) }`.
///
/// Bisection on `mu`; for each candidate the inner problem maximizes the
/// concave function `lambda_min(mu embed(sigma) - rho)` over the sigma
/// parametrization, warm-started from the previous feasible point. Every
/// feasible sigma also yields the certified value `D_inf(rho||sigma)`,
/// which squeezes the upper endpoint.
fn infinity_order(
    rho: &Density,
    inc: &Inclusion,
    e_rho: &Density,
    budget: &SolverBudget,
    warm: &[&Density],
) -> Result<SubalgebraDivergence> {
    let eval = Evaluator::new(rho, inc, RenyiOrder::Infinity);
    let mut evals_total = 0usize;

    // feasible upper endpoint from the conditional expectation
    let e_params = params_from_positive(inc, e_rho.element());
    let d_at_e = eval.objective(&e_params);
    evals_total += 1;
    if !d_at_e.is_finite() {
        return Err(Error::BadInput(
            "conditional expectation does not dominate the state".into(),
        ));
    }
    let mut hi = d_at_e.exp();
    let mut best_w = e_params.clone();
    for d in warm {
        let params = params_from_positive(inc, d.element());
        let v = eval.objective(&params);
        evals_total += 1;
        if v.is_finite() && v.exp() < hi {
            hi = v.exp();
            best_w = params;
        }
    }
    let mut lo = 1.0 - 1e-12;

    let lambda_min_gap = |w: &[f64], mu: f64| -> f64 {
        match sigma_from_params(inc, w) {
            Some(sigma) => {
                let emb = inc.embed(&sigma).expect("sigma lives in the subalgebra");
                let mut worst = f64::INFINITY;
                for (l, b) in emb.blocks().iter().enumerate() {
                    let m = b.map(|z| z * mu) - rho.block(l);
                    let es = linalg::herm_eig(&HermMatrix::new_symmetrized(m));
                    worst = worst.min(es.lambda_min());
                }
                worst
            }
            None => f64::NEG_INFINITY,
        }
    };

    let inner_budget = SolverBudget {
        max_evals: budget.max_evals / 8,
        min_step: budget.min_step.max(1e-6),
        ..budget.clone()
    };
    let width = budget.bisection_rel_width;
    let dim = param_dim(inc);
    while hi - lo > width * hi {
        let mid = 0.5 * (lo + hi);
        let mut feasible = false;
        let starts = [best_w.clone(), gaussian_start(dim, budget.seed, 7771)];
        for s in &starts {
            let out = compass_search(|w| -lambda_min_gap(w, mid), s, &inner_budget);
            evals_total += out.evals;
            if -out.value >= -1e-12 * mid.max(1.0) {
                // certified feasible: the exact divergence there squeezes hi
                let cert = eval.objective(&out.x);
                evals_total += 1;
                if cert.is_finite() && cert.exp() <= hi {
                    hi = cert.exp();
                    best_w = out.x.clone();
                }
                feasible = true;
                break;
            }
        }
        if feasible {
            hi = hi.min(mid);
        } else {
            lo = mid;
        }
        if hi <= lo {
            break;
        }
    }

    let sigma = sigma_from_params(inc, &best_w)
        .ok_or_else(|| Error::BadInput("degenerate factor at the optimum".into()))?;
    let minimizer = Density::new(sigma)?;
    let value = sandwiched_renyi(rho, &inc.embed_density(&minimizer)?, RenyiOrder::Infinity)?;
    Ok(SubalgebraDivergence {
        value,
        minimizer,
        report: SolverReport {
            evals: evals_total,
            residual: (hi - lo).max(0.0) / hi.max(1.0),
            starts_used: 1,
        },
    })
}

/// Conditional `L_inf^q` norm
/// `sup { ||a x b||_q : a, b in N, ||a||_{2q} = ||b||_{2q} = 1 }`,
/// computed by multi-start ascent over positive factors. For Hermitian `x`
/// the symmetric pairs `a = b` are searched first, then perturbed
/// asymmetrically; the larger value wins.
pub fn conditional_linf_norm(
    x: &AlgebraElement,
    inc: &Inclusion,
    q_exp: f64,
    budget: &SolverBudget,
) -> Result<f64> {
    if !same_algebra(x.algebra(), inc.amb()) {
        return Err(Error::AlgebraMismatch);
    }
    if !(q_exp >= 1.0) {
        return Err(Error::BadOrder {
            reason: format!("conditional norm exponent must be >= 1, got {q_exp}"),
        });
    }
    let dim = param_dim(inc);
    let two_q = 2.0 * q_exp;

    let factor = |w: &[f64]| -> Option<AlgebraElement> {
        let sigma = sigma_from_params(inc, w)?;
        let norm = weighted_schatten_norm(&sigma, two_q);
        if !(norm.is_finite() && norm > 1e-300) {
            return None;
        }
        Some(sigma.scale(C64::new(1.0 / norm, 0.0)))
    };
    let pair_value = |wa: &[f64], wb: &[f64]| -> f64 {
        let (a, b) = match (factor(wa), factor(wb)) {
            (Some(a), Some(b)) => (a, b),
            _ => return f64::NEG_INFINITY,
        };
        let ea = inc.embed(&a).expect("factor lives in the subalgebra");
        let eb = inc.embed(&b).expect("factor lives in the subalgebra");
        let axb = ea.mul(x).unwrap().mul(&eb).unwrap();
        weighted_schatten_norm(&axb, q_exp)
    };

    let one = AlgebraElement::identity(inc.sub());
    let mut sym_starts = vec![params_from_positive(inc, &one)];
    for k in 1..budget.starts.max(2) {
        sym_starts.push(gaussian_start(dim, budget.seed, 100 + k as u64));
    }

    let hermitian = x.is_hermitian();
    let mut best = f64::NEG_INFINITY;
    let mut best_sym: Option<Vec<f64>> = None;
    let mut residual = 0.0;
    if hermitian {
        let out = multistart_minimize(&|w: &[f64]| -pair_value(w, w), &sym_starts, budget);
        best = -out.best.value;
        best_sym = Some(out.best.x.clone());
        residual = out.best.residual;
    }

    // asymmetric search (seeded at the symmetric optimum when present)
    let mut asym_starts: Vec<Vec<f64>> = Vec::new();
    if let Some(ref s) = best_sym {
        let mut joined = s.clone();
        joined.extend_from_slice(s);
        asym_starts.push(joined);
    }
    let n_asym = if hermitian { 2 } else { budget.starts.max(2) };
    for k in 0..n_asym {
        asym_starts.push(gaussian_start(2 * dim, budget.seed, 200 + k as u64));
    }
    let out = multistart_minimize(
        &|w: &[f64]| -pair_value(&w[..dim], &w[dim..]),
        &asym_starts,
        budget,
    );
    if -out.best.value > best {
        best = -out.best.value;
        residual = out.best.residual;
    }
    if residual > budget.stationarity_tol {
        return Err(Error::SolverBudgetExceeded { residual, tol: budget.stationarity_tol });
    }
    Ok(best)
}

/// Exact conditional `L_inf^2` norm for a commutative subalgebra (all
/// sub-blocks one-dimensional).
///
/// With diagonal positive factors and squared variables `u = a^2`,
/// `v = b^2`, the squared norm is the maximum of the bilinear form
/// `Σ u_k G_kk' v_k'` over the weighted ellipsoids `Σ s_k u_k^2 = 1`; after
/// rescaling this is the largest singular value of a matrix with
/// nonnegative entries, so the positivity constraint is inactive (Perron)
/// and the value is exact.
pub fn conditional_l2_norm_commutative(x: &AlgebraElement, inc: &Inclusion) -> Option<f64> {
    if !same_algebra(x.algebra(), inc.amb()) {
        return None;
    }
    if !inc.sub().blocks().iter().all(|b| b.dim == 1) {
        return None;
    }
    let kk = inc.sub().num_blocks();
    let mut g = DMatrix::<f64>::zeros(kk, kk);
    for (l, slots) in inc.layout().iter().enumerate() {
        let t = inc.amb().weight_f64(l);
        let m = inc.amb().block_dim(l);
        let mut owner = vec![0usize; m];
        for slot in slots {
            owner[slot.positions[0]] = slot.sub_block;
        }
        let xb = x.block(l);
        for r in 0..m {
            for c in 0..m {
                g[(owner[r], owner[c])] += t * xb[(r, c)].norm_sqr();
            }
        }
    }
    for r in 0..kk {
        for c in 0..kk {
            g[(r, c)] /= (inc.sub().weight_f64(r) * inc.sub().weight_f64(c)).sqrt();
        }
    }
    let sv = g.svd(false, false).singular_values;
    Some(sv.iter().fold(0.0f64, |a, &s| a.max(s)).sqrt())
}

/// Amalgamated `L_1^p` norm of a density,
/// `||rho||_{L_1^p} = exp(D_p(rho||N) / p')`, for `p > 1`.
pub fn amalgamated_l1p_norm(
    rho: &Density,
    inc: &Inclusion,
    order: RenyiOrder,
    budget: &SolverBudget,
) -> Result<f64> {
    let p = order.p();
    if !(p > 1.0) {
        return Err(Error::BadOrder {
            reason: format!("amalgamated L_1^p norm needs p > 1, got {p}"),
        });
    }
    let result = divergence_to_subalgebra(rho, inc, order, budget)?;
    Ok((result.value.expect_finite()? / order.p_prime()).exp())
}

/// Dual pairing of the amalgamated norm:
/// `sup { tr(x rho) : x >= 0, ||x||_{L_inf^{p'}} <= 1 }`.
///
/// The ascent runs over positive `x = V V^*` normalized by the conditional
/// norm; it is seeded with the saturating witness built from the primal
/// minimizer.
pub fn l1p_dual_pairing(
    rho: &Density,
    inc: &Inclusion,
    order: RenyiOrder,
    budget: &SolverBudget,
) -> Result<f64> {
    let p = order.p();
    if !(p > 1.0) {
        return Err(Error::BadOrder {
            reason: format!("dual pairing needs p > 1, got {p}"),
        });
    }
    let primal = divergence_to_subalgebra(rho, inc, order, budget)?;
    let p_prime = order.p_prime();

    // Hoelder-saturating witness from the primal optimum:
    // x ~ s^e (s^e rho s^e)^{p-1} s^e with s = embed(sigma*), e = -1/(2p')
    let sigma = inc.embed(primal.minimizer.element())?;
    let expo = -1.0 / (2.0 * p_prime);
    let witness = {
        let mut blocks = Vec::new();
        for (l, b) in sigma.blocks().iter().enumerate() {
            let se = linalg::herm_eig(&HermMatrix::new_symmetrized(b.clone()));
            let cut = linalg::support_cutoff(se.lambda_max());
            let pow: Vec<f64> = se
                .eigenvalues
                .iter()
                .map(|&v| if v > cut { v.powf(expo) } else { 0.0 })
                .collect();
            let s_pow = se.assemble(&pow);
            let y = &s_pow * rho.block(l) * &s_pow;
            let ye = linalg::herm_eig(&HermMatrix::new_symmetrized(y));
            let ycut = linalg::support_cutoff(ye.lambda_max());
            let ypow: Vec<f64> = ye
                .eigenvalues
                .iter()
                .map(|&v| if v > ycut { v.powf(p - 1.0) } else { 0.0 })
                .collect();
            let core = ye.assemble(&ypow);
            blocks.push(&s_pow * core * &s_pow);
        }
        AlgebraElement::new(std::sync::Arc::clone(inc.amb()), blocks).unwrap()
    };

    let amb_dim: usize = 2 * inc.amb().blocks().iter().map(|b| b.dim * b.dim).sum::<usize>();
    let x_from = |w: &[f64]| -> AlgebraElement {
        let mut blocks = Vec::new();
        let mut idx = 0;
        for b in inc.amb().blocks() {
            let n = b.dim;
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = C64::new(w[idx], w[idx + 1]);
                    idx += 2;
                }
            }
            blocks.push(&m * m.adjoint());
        }
        AlgebraElement::new(std::sync::Arc::clone(inc.amb()), blocks).unwrap()
    };
    // the exact spectral norm is used for the inner constraint when
    // available; nesting the generic ascent here would multiply costs
    let fast_norm = conditional_l2_norm_commutative(
        &AlgebraElement::identity(inc.amb()),
        inc,
    )
    .is_some()
        && p_prime == 2.0;
    let norm_budget = SolverBudget {
        starts: 2,
        max_evals: 4_000,
        min_step: 1e-4,
        ..budget.clone()
    };
    let pairing = |w: &[f64]| -> f64 {
        let x = x_from(w);
        let n = if fast_norm {
            match conditional_l2_norm_commutative(&x, inc) {
                Some(n) if n.is_finite() && n > 1e-300 => n,
                _ => return f64::NEG_INFINITY,
            }
        } else {
            match conditional_linf_norm(&x, inc, p_prime, &norm_budget) {
                Ok(n) if n.is_finite() && n > 1e-300 => n,
                _ => return f64::NEG_INFINITY,
            }
        };
        x.adjoint().inner(rho.element()).re / n
    };

    let mut starts = Vec::new();
    {
        let mut w = Vec::with_capacity(amb_dim);
        for b in witness.blocks() {
            let h = HermMatrix::new_symmetrized(b.clone());
            let root = linalg::matrix_fn(&h, |l| l.max(0.0).sqrt(), true).unwrap();
            for i in 0..root.dim() {
                for j in 0..root.dim() {
                    w.push(root.matrix()[(i, j)].re);
                    w.push(root.matrix()[(i, j)].im);
                }
            }
        }
        starts.push(w);
    }
    for k in 0..2 {
        starts.push(gaussian_start(amb_dim, budget.seed, 300 + k as u64));
    }
    let dual_budget = SolverBudget {
        max_evals: budget.max_evals / 16,
        min_step: budget.min_step.max(1e-4),
        ..budget.clone()
    };
    let out = multistart_minimize(&|w: &[f64]| -pairing(w), &starts, &dual_budget);
    Ok(-out.best.value)
}

/// Uniqueness probe: `starts` independent random starts must land on the
/// same minimizer (pairwise trace distance below `1e-5`) with values within
/// `1e-7` of each other.
pub fn minimizer_multistart_check(
    rho: &Density,
    inc: &Inclusion,
    order: RenyiOrder,
    starts: usize,
    budget: &SolverBudget,
) -> Result<bool> {
    check_membership(rho, inc)?;
    if order.is_one() {
        return Ok(true);
    }
    if order.is_infinite() {
        // uniqueness of the optimizer is not known at p = inf; compare
        // values only, across independently seeded runs
        let mut values = Vec::with_capacity(starts.max(2));
        for k in 0..starts.max(2) as u64 {
            let b = SolverBudget {
                seed: budget.seed.wrapping_add(1 + k),
                ..budget.clone()
            };
            values.push(
                divergence_to_subalgebra(rho, inc, order, &b)?
                    .value
                    .as_f64(),
            );
        }
        for i in 0..values.len() {
            for j in (i + 1)..values.len() {
                if (values[i] - values[j]).abs() > 1e-7 {
                    return Ok(false);
                }
            }
        }
        return Ok(true);
    }
    let p = order.p();
    if !(p > 0.5) {
        return Err(Error::BadOrder {
            reason: format!("uniqueness check needs p in (1/2, inf], got {p}"),
        });
    }
    let eval = Evaluator::new(rho, inc, order);
    let dim = param_dim(inc);
    let start_vecs: Vec<Vec<f64>> = (0..starts.max(2))
        .map(|k| gaussian_start(dim, budget.seed, 400 + k as u64))
        .collect();
    let out = multistart_minimize(&|w: &[f64]| eval.objective(w), &start_vecs, budget);
    for o in &out.all {
        if o.residual > budget.stationarity_tol {
            return Err(Error::SolverBudgetExceeded {
                residual: o.residual,
                tol: budget.stationarity_tol,
            });
        }
    }
    let minimizers: Vec<Density> = out
        .all
        .iter()
        .map(|o| {
            sigma_from_params(inc, &o.x)
                .ok_or_else(|| Error::BadInput("degenerate factor".into()))
                .and_then(Density::new)
        })
        .collect::<Result<Vec<_>>>()?;
    for i in 0..minimizers.len() {
        for j in (i + 1)..minimizers.len() {
            if (out.all[i].value - out.all[j].value).abs() > 1e-7 {
                return Ok(false);
            }
            if divergence::trace_distance(&minimizers[i], &minimizers[j])? > 1e-5 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
