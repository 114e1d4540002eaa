//! JSON and CSV wire formats used by the CLI.
//!
//! Inclusion schema:
//! `{"sub": {"blocks": [[n_k, s_k], ...]}, "amb": {"blocks": [[m_l, t_l], ...]},
//!   "inclusion_matrix": [[a_kl, ...], ...], "normalize": bool}`.
//!
//! State schema: `{"algebra": "sub"|"amb", "blocks": [[[[re, im], ...], ...], ...]}`
//! (one matrix per block, rows of `[re, im]` pairs).
//!
//! Generator schema: `{"type": "schur", "b": [[...]]}`,
//! `{"type": "schur_map", "a": [[...]]}`, or
//! `{"type": "superop", "algebra": {"blocks": [[m_l, t_l], ...]}, "matrix": [[[re, im], ...], ...]}`
//! with the superoperator acting on concatenated row-major block
//! vectorizations.
//!
//! Decay reports serialize to JSON and to CSV with the fixed header
//! `t,d1,d2,bound,trace_dist`; numbers are printed with 12 significant
//! digits and a `.` decimal separator.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    AlgebraElement, Density, DirectSumAlgebra, Inclusion, RawInclusion,
};
use crate::index::IndexReport;
use crate::linalg::C64;
use crate::markov::{DecayReport, GeneralGenerator, SchurGenerator, SchurMap, Semigroup};
use crate::{Error, Result};

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraJson {
    /// `[dim, trace_weight]` per block.
    pub blocks: Vec<(usize, f64)>,
}

impl AlgebraJson {
    pub fn from_algebra(alg: &DirectSumAlgebra) -> Self {
        Self {
            blocks: alg
                .blocks()
                .iter()
                .map(|b| (b.dim, b.weight_f64()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InclusionJson {
    pub sub: AlgebraJson,
    pub amb: AlgebraJson,
    pub inclusion_matrix: Vec<Vec<u64>>,
    #[serde(default = "default_true")]
    pub normalize: bool,
}

impl InclusionJson {
    pub fn from_inclusion(inc: &Inclusion) -> Self {
        Self {
            sub: AlgebraJson::from_algebra(inc.sub()),
            amb: AlgebraJson::from_algebra(inc.amb()),
            inclusion_matrix: inc.matrix().to_vec(),
            normalize: false,
        }
    }

    pub fn to_inclusion(&self) -> Result<Inclusion> {
        Inclusion::validate(&RawInclusion {
            sub_blocks: self.sub.blocks.clone(),
            amb_blocks: self.amb.blocks.clone(),
            matrix: self.inclusion_matrix.clone(),
            normalize: self.normalize,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    /// Which algebra of the inclusion the state lives on.
    pub algebra: String,
    /// One complex matrix per block, entries as `[re, im]`.
    pub blocks: Vec<Vec<Vec<[f64; 2]>>>,
}

impl StateJson {
    pub fn from_element(which: &str, x: &AlgebraElement) -> Self {
        Self {
            algebra: which.to_string(),
            blocks: x
                .blocks()
                .iter()
                .map(|b| {
                    (0..b.nrows())
                        .map(|i| (0..b.ncols()).map(|j| [b[(i, j)].re, b[(i, j)].im]).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_element(&self, alg: &Arc<DirectSumAlgebra>) -> Result<AlgebraElement> {
        if self.blocks.len() != alg.num_blocks() {
            return Err(Error::BadInput(format!(
                "state has {} blocks, algebra has {}",
                self.blocks.len(),
                alg.num_blocks()
            )));
        }
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (l, rows) in self.blocks.iter().enumerate() {
            let d = alg.block_dim(l);
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(Error::BadInput(format!("state block {l} must be {d}x{d}")));
            }
            blocks.push(DMatrix::from_fn(d, d, |i, j| {
                C64::new(rows[i][j][0], rows[i][j][1])
            }));
        }
        AlgebraElement::new(Arc::clone(alg), blocks)
    }

    pub fn to_density(&self, inc: &Inclusion) -> Result<Density> {
        let alg = match self.algebra.as_str() {
            "sub" => inc.sub(),
            "amb" => inc.amb(),
            other => {
                return Err(Error::BadInput(format!(
                    "state algebra must be \"sub\" or \"amb\", got {other:?}"
                )))
            }
        };
        let el = self.to_element(alg)?;
        let rho = Density::new(el)?;
        if self.algebra == "sub" {
            inc.embed_density(&rho)
        } else {
            Ok(rho)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum GeneratorJson {
    #[serde(rename = "schur")]
    Schur { b: Vec<Vec<f64>> },
    #[serde(rename = "schur_map")]
    SchurMap { a: Vec<Vec<f64>> },
    #[serde(rename = "superop")]
    Superop {
        algebra: AlgebraJson,
        /// Row-major complex entries as `[re, im]`.
        matrix: Vec<Vec<[f64; 2]>>,
        #[serde(default = "default_true")]
        normalize: bool,
    },
}

fn real_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::BadInput("matrix must be square".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl GeneratorJson {
    pub fn from_schur(g: &SchurGenerator) -> Self {
        GeneratorJson::Schur {
            b: (0..g.dim())
                .map(|i| (0..g.dim()).map(|j| g.matrix()[(i, j)]).collect())
                .collect(),
        }
    }

    pub fn from_schur_map(m: &SchurMap) -> Self {
        GeneratorJson::SchurMap {
            a: (0..m.dim())
                .map(|i| (0..m.dim()).map(|j| m.matrix()[(i, j)]).collect())
                .collect(),
        }
    }

    /// Builds the continuous-time handle; `schur_map` inputs are rejected.
    pub fn to_semigroup(&self) -> Result<Semigroup> {
        match self {
            GeneratorJson::Schur { b } => Ok(Semigroup::Schur(SchurGenerator::new(real_matrix(b)?)?)),
            GeneratorJson::SchurMap { .. } => Err(Error::BadInput(
                "schur_map generators drive the discrete command, not the semigroup".into(),
            )),
            GeneratorJson::Superop { algebra, matrix, normalize } => {
                let alg = if *normalize {
                    DirectSumAlgebra::new(&algebra.blocks)?
                } else {
                    DirectSumAlgebra::new_raw(&algebra.blocks)?
                };
                let dv = alg.vector_dim();
                if matrix.len() != dv || matrix.iter().any(|r| r.len() != dv) {
                    return Err(Error::BadInput(format!(
                        "superoperator matrix must be {dv}x{dv}"
                    )));
                }
                let m = DMatrix::from_fn(dv, dv, |i, j| {
                    C64::new(matrix[i][j][0], matrix[i][j][1])
                });
                Ok(Semigroup::General(GeneralGenerator::new(alg, m)?))
            }
        }
    }

    pub fn to_schur_map(&self) -> Result<SchurMap> {
        match self {
            GeneratorJson::SchurMap { a } => SchurMap::new(real_matrix(a)?),
            _ => Err(Error::BadInput(
                "the discrete command needs a schur_map generator".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexReportJson {
    pub neg_log_lambda: f64,
    pub dcb: f64,
    pub per_block: Vec<f64>,
    pub argmax_block: usize,
}

impl IndexReportJson {
    pub fn from_report(r: &IndexReport, bits: bool) -> Self {
        let scale = if bits { 1.0 / 2.0f64.ln() } else { 1.0 };
        Self {
            neg_log_lambda: r.neg_log_lambda * scale,
            dcb: r.dcb * scale,
            per_block: r.per_block_terms.iter().map(|(_, v)| *v).collect(),
            argmax_block: r.argmax_block,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverReportJson {
    pub evals: usize,
    pub residual: f64,
    pub starts: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyReportJson {
    pub p: String,
    /// The divergence value; `null` encodes `+inf`.
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimizer: Option<StateJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverReportJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReportJson {
    pub t: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub bound: Vec<f64>,
    pub trace_dist: Vec<f64>,
    pub refined_slack: Vec<f64>,
    pub gap: f64,
    pub violations: Vec<usize>,
}

impl DecayReportJson {
    pub fn from_report(r: &DecayReport) -> Self {
        Self {
            t: r.t_grid.clone(),
            d1: r.d1_curve.clone(),
            d2: r.d2_curve.clone(),
            bound: r.bound_curve.clone(),
            trace_dist: r.trace_dist_curve.clone(),
            refined_slack: r.refined_slack.clone(),
            gap: r.gap,
            violations: r.violations.clone(),
        }
    }
}

/// Twelve significant digits, `.` separator, no locale.
pub fn sig12(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.11e}")
}

/// CSV for a decay report: header `t,d1,d2,bound,trace_dist`.
pub fn decay_csv(r: &DecayReport) -> String {
    let mut out = String::from("t,d1,d2,bound,trace_dist\n");
    for i in 0..r.t_grid.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            sig12(r.t_grid[i]),
            sig12(r.d1_curve[i]),
            sig12(r.d2_curve[i]),
            sig12(r.bound_curve[i]),
            sig12(r.trace_dist_curve[i]),
        ));
    }
    out
}

/// CSV for a p-sweep: header `p,divergence`.
pub fn sweep_csv(rows: &[(String, f64)]) -> String {
    let mut out = String::from("p,divergence\n");
    for (p, v) in rows {
        out.push_str(&format!("{},{}\n", p, sig12(*v)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::random_density;
    use crate::fixtures;

    #[test]
    fn inclusion_roundtrip() {
        for name in ["m12", "z4z2", "c3m3"] {
            let inc = fixtures::inclusion_by_name(name).unwrap();
            let json = InclusionJson::from_inclusion(&inc);
            let text = serde_json::to_string(&json).unwrap();
            let parsed: InclusionJson = serde_json::from_str(&text).unwrap();
            let back = parsed.to_inclusion().unwrap();
            assert_eq!(back.matrix(), inc.matrix());
            assert_eq!(back.sub().num_blocks(), inc.sub().num_blocks());
            for k in 0..inc.sub().num_blocks() {
                assert!((back.sub().weight_f64(k) - inc.sub().weight_f64(k)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn state_roundtrip() {
        let inc = fixtures::m12();
        let rho = random_density(inc.amb(), 3);
        let json = StateJson::from_element("amb", rho.element());
        let text = serde_json::to_string(&json).unwrap();
        let parsed: StateJson = serde_json::from_str(&text).unwrap();
        let back = parsed.to_density(&inc).unwrap();
        assert!(back.element().entry_distance(rho.element()) < 1e-15);
        // sub states embed
        let sub_rho = random_density(inc.sub(), 4);
        let json = StateJson::from_element("sub", sub_rho.element());
        let back = json.to_density(&inc).unwrap();
        assert!(back
            .element()
            .entry_distance(inc.embed_density(&sub_rho).unwrap().element())
            < 1e-15);
    }

    #[test]
    fn generator_parse() {
        let g = fixtures::dephasing(3);
        let json = GeneratorJson::from_schur(&g);
        let text = serde_json::to_string(&json).unwrap();
        let parsed: GeneratorJson = serde_json::from_str(&text).unwrap();
        assert!(matches!(parsed.to_semigroup().unwrap(), Semigroup::Schur(_)));
        let m = fixtures::flat_schur_map(2, 0.5).unwrap();
        let json = GeneratorJson::from_schur_map(&m);
        let text = serde_json::to_string(&json).unwrap();
        let parsed: GeneratorJson = serde_json::from_str(&text).unwrap();
        assert!((parsed.to_schur_map().unwrap().mu() - 0.5).abs() < 1e-15);
        assert!(parsed.to_semigroup().is_err());
    }

    #[test]
    fn csv_formatting() {
        assert_eq!(sig12(2.0f64.ln()), "6.93147180560e-1");
        assert_eq!(sig12(f64::INFINITY), "inf");
        let rows = vec![("0.5".to_string(), 0.1), ("inf".to_string(), 1.0)];
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("p,divergence\n"));
        assert!(csv.contains("inf,1.00000000000e0"));
    }
}
