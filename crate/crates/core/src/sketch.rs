//! Randomized compression: Gaussian row projection of a target/candidate
//! pair, and a signed column sketch of the target that preserves projection
//! costs for small selections.

use crate::error::{Error, Result};
use crate::matrix::{axpy, ColumnMatrix};
use crate::rng::substream;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SketchKind {
    GaussianRows,
    PcpsCols,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SketchSpec {
    pub kind: SketchKind,
    /// Output rows for `GaussianRows`, output columns for `PcpsCols`.
    pub target_dim: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
}

impl SketchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.target_dim < 1 {
            return Err(Error::InvalidParam("sketch target_dim must be >= 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParam(format!(
                "sketch epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParam(format!(
                "sketch delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SketchedPair {
    pub a_sketched: ColumnMatrix,
    pub b_sketched: Option<ColumnMatrix>,
    pub spec: SketchSpec,
}

/// Applies `scale * G` to every column of `a` and `b`. Exposed separately
/// from the random draw so a caller can use a fixed projection matrix.
pub fn project_rows(
    a: &ColumnMatrix,
    b: &ColumnMatrix,
    g: &ColumnMatrix,
    scale: f64,
) -> Result<(ColumnMatrix, ColumnMatrix)> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            what: "candidate row count",
            expected: a.rows(),
            found: b.rows(),
        });
    }
    if g.cols() != a.rows() {
        return Err(Error::DimensionMismatch {
            what: "projection input dimension",
            expected: a.rows(),
            found: g.cols(),
        });
    }
    let g_cols = g.to_columns();
    let apply = |m: &ColumnMatrix| -> Result<ColumnMatrix> {
        let d = g.rows();
        let mut out = Vec::with_capacity(m.cols());
        for j in 0..m.cols() {
            let col = m.col_dense(j);
            let mut y = vec![0.0; d];
            for (c, gc) in g_cols.iter().enumerate() {
                axpy(&mut y, scale * col[c], gc);
            }
            out.push(y);
        }
        ColumnMatrix::from_columns(&out)
    };
    Ok((apply(a)?, apply(b)?))
}

/// Left-multiplies both matrices by `(1/sqrt(d)) * G` with `G` a `d x m`
/// standard normal matrix drawn from the seeded substream, columns first.
pub fn gaussian_rows(a: &ColumnMatrix, b: &ColumnMatrix, spec: &SketchSpec) -> Result<SketchedPair> {
    spec.validate()?;
    if spec.kind != SketchKind::GaussianRows {
        return Err(Error::InvalidParam(
            "gaussian_rows requires a gaussian-rows spec".into(),
        ));
    }
    let d = spec.target_dim;
    let m = a.rows();
    let mut rng = substream(spec.seed, "gaussian-rows");
    let mut g_data = Vec::with_capacity(d * m);
    for _ in 0..d * m {
        g_data.push(rng.sample::<f64, _>(StandardNormal));
    }
    let g = ColumnMatrix::from_dense(d, m, g_data)?;
    let scale = 1.0 / (d as f64).sqrt();
    let (a_sk, b_sk) = project_rows(a, b, &g, scale)?;
    Ok(SketchedPair {
        a_sketched: a_sk,
        b_sketched: Some(b_sk),
        spec: *spec,
    })
}

/// Right-multiplies the target by an `n_a x n'` matrix of independent signs
/// scaled by `sqrt(1/n')`, compressing its columns.
pub fn pcps_cols(a: &ColumnMatrix, spec: &SketchSpec) -> Result<SketchedPair> {
    spec.validate()?;
    if spec.kind != SketchKind::PcpsCols {
        return Err(Error::InvalidParam("pcps_cols requires a pcps-cols spec".into()));
    }
    let n_prime = spec.target_dim;
    let scale = 1.0 / (n_prime as f64).sqrt();
    let mut rng = substream(spec.seed, "pcps-cols");
    let a_cols = a.to_columns();
    let mut out = Vec::with_capacity(n_prime);
    for _ in 0..n_prime {
        let mut y = vec![0.0; a.rows()];
        for col in &a_cols {
            let sign = if rng.gen::<bool>() { scale } else { -scale };
            axpy(&mut y, sign, col);
        }
        out.push(y);
    }
    Ok(SketchedPair {
        a_sketched: ColumnMatrix::from_columns(&out)?,
        b_sketched: None,
        spec: *spec,
    })
}

/// Multipliers on the sketch-size formulas; the defaults take the stated
/// asymptotics at constant 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SketchConstants {
    pub gaussian: f64,
    pub pcps: f64,
}

impl Default for SketchConstants {
    fn default() -> Self {
        SketchConstants {
            gaussian: 1.0,
            pcps: 1.0,
        }
    }
}

/// Recommended sketch sizes for selecting up to `k` of `n` candidates:
/// row dimension `d = ceil(C_g * k * ln(n/(delta*epsilon)) / epsilon^2)` and
/// column dimension `n' = ceil(C_p * (k + ln(1/delta)) / epsilon^2)`.
pub fn recommend_dims(k: usize, n: usize, epsilon: f64, delta: f64) -> Result<(usize, usize)> {
    recommend_dims_with(&SketchConstants::default(), k, n, epsilon, delta)
}

pub fn recommend_dims_with(
    constants: &SketchConstants,
    k: usize,
    n: usize,
    epsilon: f64,
    delta: f64,
) -> Result<(usize, usize)> {
    if k < 1 || n < 1 {
        return Err(Error::InvalidParam("k and n must be >= 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParam(
            "epsilon and delta must lie in (0, 1)".into(),
        ));
    }
    let eps_sq = epsilon * epsilon;
    let d = (constants.gaussian * k as f64 * (n as f64 / (delta * epsilon)).ln() / eps_sq).ceil();
    let n_prime = (constants.pcps * (k as f64 + (1.0 / delta).ln()) / eps_sq).ceil();
    Ok(((d as usize).max(1), (n_prime as usize).max(1)))
}
