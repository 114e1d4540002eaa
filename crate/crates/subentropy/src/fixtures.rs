//! Named fixtures shared by the CLI, the tests, and the acceptance suite.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebra::{group_inclusion, DirectSumAlgebra, GroupId, Inclusion};
use crate::markov::{GeneralGenerator, SchurGenerator, SchurMap};
use crate::{Error, Result};

/// `C^m ⊂ M_m` with the normalized trace.
pub fn diagonal_in_matrix(m: usize) -> Inclusion {
    Inclusion::from_parts(
        &vec![1; m],
        DirectSumAlgebra::matrix(m),
        (0..m).map(|_| vec![1]).collect(),
    )
    .unwrap()
}

/// `M_n ⊂ M_{n·mult}` embedded with multiplicity `mult`.
pub fn matrix_in_matrix(n: usize, mult: usize) -> Inclusion {
    Inclusion::from_parts(
        &[n],
        DirectSumAlgebra::matrix(n * mult),
        vec![vec![mult as u64]],
    )
    .unwrap()
}

/// `(M_2 ⊗ C1_3) ⊕ (M_3 ⊗ C1_2) ⊂ M_12`.
pub fn m12() -> Inclusion {
    Inclusion::from_parts(&[2, 3], DirectSumAlgebra::matrix(12), vec![vec![3], vec![2]]).unwrap()
}

/// Schur generator of the completely dephasing semigroup on `M_m`
/// (all off-diagonal rates one).
pub fn dephasing(m: usize) -> SchurGenerator {
    let b = DMatrix::from_fn(m, m, |i, j| if i == j { 0.0 } else { 1.0 });
    SchurGenerator::new(b).unwrap()
}

/// Schur generator on `M_4` whose zero pattern has the two classes
/// `{0,1}` and `{2,3}` (distance-squared kernel of a two-point embedding).
pub fn two_class_schur() -> SchurGenerator {
    let pts = [0.0, 0.0, 1.0, 1.0];
    let b = DMatrix::from_fn(4, 4, |i, j| (pts[i] - pts[j]) * (pts[i] - pts[j]));
    SchurGenerator::new(b).unwrap()
}

/// Discrete Schur map `a = (1-mu) I + mu J`-style: ones on the diagonal,
/// `mu` elsewhere (positive semidefinite for `0 <= mu <= 1`).
pub fn flat_schur_map(m: usize, mu: f64) -> Result<SchurMap> {
    let a = DMatrix::from_fn(m, m, |i, j| if i == j { 1.0 } else { mu });
    SchurMap::new(a)
}

/// Depolarizing generator `A(x) = x - tr(x) 1` on `M_m` (normalized trace);
/// primitive with unit spectral gap.
pub fn depolarizing(m: usize) -> GeneralGenerator {
    let alg = DirectSumAlgebra::matrix(m);
    let inner = Arc::clone(&alg);
    GeneralGenerator::from_action(&alg, move |x| {
        let tr = x.trace();
        let one = crate::algebra::AlgebraElement::identity(&inner);
        x.sub(&one.scale(tr)).unwrap()
    })
    .unwrap()
}

/// A Schur generator re-encoded as a superoperator on the full matrix
/// algebra (diagonal in the matrix-unit basis).
pub fn schur_superoperator(g: &SchurGenerator) -> GeneralGenerator {
    let alg = g.algebra();
    let b = g.matrix().clone();
    GeneralGenerator::from_action(&alg, move |x| {
        let m = b.nrows();
        let out = DMatrix::from_fn(m, m, |i, j| x.block(0)[(i, j)] * b[(i, j)]);
        crate::algebra::AlgebraElement::new(Arc::clone(x.algebra()), vec![out]).unwrap()
    })
    .unwrap()
}

/// Inclusion fixtures by name, as accepted by the CLI `fixtures` command.
pub fn inclusion_by_name(name: &str) -> Result<Inclusion> {
    match name {
        "c1m2" | "cm2" => Ok(matrix_in_matrix(1, 2)),
        "c2m2" => Ok(diagonal_in_matrix(2)),
        "c3m3" => Ok(diagonal_in_matrix(3)),
        "c4m4" => Ok(diagonal_in_matrix(4)),
        "m2m4" => Ok(matrix_in_matrix(2, 2)),
        "m2m6" => Ok(matrix_in_matrix(2, 3)),
        "m3m6" => Ok(matrix_in_matrix(3, 2)),
        "m6m36" => Ok(matrix_in_matrix(6, 6)),
        "m12" => Ok(m12()),
        "m12sq" => {
            let base = m12();
            Ok(base.tensor(&base))
        }
        "z4z2" => group_inclusion(GroupId::Cyclic(4), GroupId::Cyclic(2)),
        "s3z3" => group_inclusion(GroupId::S3, GroupId::Cyclic(3)),
        "s3z2" => group_inclusion(GroupId::S3, GroupId::Cyclic(2)),
        "d4z4" => group_inclusion(GroupId::D4, GroupId::Cyclic(4)),
        "d4z2" => group_inclusion(GroupId::D4, GroupId::Cyclic(2)),
        other => Err(Error::BadInput(format!("unknown inclusion fixture {other:?}"))),
    }
}

/// Names accepted by [`inclusion_by_name`].
pub fn inclusion_names() -> &'static [&'static str] {
    &[
        "c1m2", "c2m2", "c3m3", "c4m4", "m2m4", "m2m6", "m3m6", "m6m36", "m12", "m12sq", "z4z2",
        "s3z3", "s3z2", "d4z4", "d4z2",
    ]
}

/// The standard fixture list for index cross-checks: name, inclusion, and
/// the exact value of `exp(-log lambda)` as an integer ratio.
pub fn index_fixtures() -> Vec<(&'static str, Inclusion, f64)> {
    vec![
        ("c2m2", diagonal_in_matrix(2), 2.0),
        ("m2m4", matrix_in_matrix(2, 2), 4.0),
        ("c1m2", matrix_in_matrix(1, 2), 2.0),
        ("m2m6", matrix_in_matrix(2, 3), 6.0),
        ("m3m6", matrix_in_matrix(3, 2), 4.0),
        ("m6m36", matrix_in_matrix(6, 6), 36.0),
        ("m12", m12(), 10.0),
        (
            "z4z2",
            group_inclusion(GroupId::Cyclic(4), GroupId::Cyclic(2)).unwrap(),
            2.0,
        ),
        (
            "s3z3",
            group_inclusion(GroupId::S3, GroupId::Cyclic(3)).unwrap(),
            2.0,
        ),
    ]
}

/// The trivial inclusion `M ⊂ M` on a matrix factor.
pub fn trivial(m: usize) -> Inclusion {
    Inclusion::trivial(DirectSumAlgebra::matrix(m))
}

/// All supported group pairs with their exact index `[G:H]`.
pub fn group_pairs() -> Vec<(GroupId, GroupId, u64)> {
    let mut out = Vec::new();
    for n in 1..=12u32 {
        for d in 1..=n {
            if n % d == 0 {
                out.push((GroupId::Cyclic(n), GroupId::Cyclic(d), (n / d) as u64));
            }
        }
    }
    out.push((GroupId::S3, GroupId::Cyclic(1), 6));
    out.push((GroupId::S3, GroupId::Cyclic(2), 3));
    out.push((GroupId::S3, GroupId::Cyclic(3), 2));
    out.push((GroupId::S3, GroupId::S3, 1));
    out.push((GroupId::D4, GroupId::Cyclic(1), 8));
    out.push((GroupId::D4, GroupId::Cyclic(2), 4));
    out.push((GroupId::D4, GroupId::Cyclic(4), 2));
    out.push((GroupId::D4, GroupId::D4, 1));
    out
}

/// Arc helper for tests wanting a plain matrix algebra.
pub fn matrix_algebra(m: usize) -> Arc<DirectSumAlgebra> {
    DirectSumAlgebra::matrix(m)
}
