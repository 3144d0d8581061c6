//! Closed-form proximal maps of `σ‖·‖_q` for q ∈ {1, 2, ∞}.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::norm2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProxError {
    #[error("prox scale must be nonnegative, got {0}")]
    NegativeSigma(f64),
    #[error("unsupported norm `{0}` (expected 1, 2 or inf)")]
    UnknownNorm(String),
}

/// Norm used in the fusion penalties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ProxKind {
    #[serde(rename = "1")]
    L1,
    #[default]
    #[serde(rename = "2")]
    L2,
    #[serde(rename = "inf")]
    LInf,
}

impl ProxKind {
    pub fn norm(self, x: &[f64]) -> f64 {
        match self {
            ProxKind::L1 => x.iter().map(|v| v.abs()).sum(),
            ProxKind::L2 => norm2(x),
            ProxKind::LInf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

impl fmt::Display for ProxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProxKind::L1 => "1",
            ProxKind::L2 => "2",
            ProxKind::LInf => "inf",
        })
    }
}

impl FromStr for ProxKind {
    type Err = ProxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "l1" => Ok(ProxKind::L1),
            "2" | "l2" => Ok(ProxKind::L2),
            "inf" | "linf" | "infinity" => Ok(ProxKind::LInf),
            other => Err(ProxError::UnknownNorm(other.to_string())),
        }
    }
}

/// `argmin_v ½‖v − x‖² + σ‖v‖_q`.
pub fn prox_norm(x: &[f64], sigma: f64, q: ProxKind) -> Result<Vec<f64>, ProxError> {
    let mut out = x.to_vec();
    prox_in_place(&mut out, sigma, q)?;
    Ok(out)
}

/// In-place variant of [`prox_norm`] used by the ADMM inner loops.
pub fn prox_in_place(x: &mut [f64], sigma: f64, q: ProxKind) -> Result<(), ProxError> {
    if !(sigma >= 0.0) {
        return Err(ProxError::NegativeSigma(sigma));
    }
    if sigma == 0.0 {
        return Ok(());
    }
    match q {
        ProxKind::L1 => {
            for v in x.iter_mut() {
                *v = v.signum() * (v.abs() - sigma).max(0.0);
            }
        }
        ProxKind::L2 => group_soft_threshold(x, sigma),
        ProxKind::LInf => {
            // Moreau: prox_{σ‖·‖∞}(x) = x − Π_{σ·B₁}(x)
            let proj = project_l1_ball(x, sigma);
            for (v, p) in x.iter_mut().zip(proj) {
                *v -= p;
            }
        }
    }
    Ok(())
}

/// `(1 − σ/‖x‖₂)₊ · x`, with the zero vector mapped to itself.
pub fn group_soft_threshold(x: &mut [f64], sigma: f64) {
    let norm = norm2(x);
    if norm <= sigma {
        x.iter_mut().for_each(|v| *v = 0.0);
    } else {
        let shrink = 1.0 - sigma / norm;
        x.iter_mut().for_each(|v| *v *= shrink);
    }
}

/// Euclidean projection onto `{v : ‖v‖₁ ≤ radius}` by sorting magnitudes.
pub fn project_l1_ball(x: &[f64], radius: f64) -> Vec<f64> {
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return x.to_vec();
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &m) in mags.iter().enumerate() {
        cumsum += m;
        let t = (cumsum - radius) / (k + 1) as f64;
        if m > t {
            theta = t;
        } else {
            break;
        }
    }
    x.iter()
        .map(|v| v.signum() * (v.abs() - theta).max(0.0))
        .collect()
}
