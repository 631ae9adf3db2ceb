//! Entropy, information content, information gain and cross-entropy.
//!
//! Everything is in nats. [`InformationReport::in_bits`] converts for display.

use std::fmt;

use crate::bpa::ProbabilityFunction;
use crate::error::{Error, Result};
use crate::maxent::{entropy_of, joint_entropy, JointDistribution};

/// `-Σ p ln p`, with `0 ln 0 = 0`.
pub fn entropy(p: &ProbabilityFunction) -> f64 {
    entropy_of(p.probs())
}

/// `ln |S| − H(S)`: how far `p` is from uniform.
pub fn information(p: &ProbabilityFunction) -> f64 {
    information_of(p.probs())
}

// Summed as Σ p ln(n p), which is exactly 0 for uniform and exactly ln n
// for a point mass.
fn information_of(probs: &[f64]) -> f64 {
    let n = probs.len() as f64;
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * (n * p).ln())
        .sum::<f64>()
        .max(0.0)
}

/// `H(S) + H(S') − H(S × S')`.
///
/// The joint's own marginals need not match `p_s` and `p_s2`; a Dempster
/// joint, for instance, generally does not.
pub fn info_gain(
    joint: &JointDistribution,
    p_s: &ProbabilityFunction,
    p_s2: &ProbabilityFunction,
) -> Result<f64> {
    if joint.n_rows() != p_s.len() || joint.n_cols() != p_s2.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}×{} joint against marginals of length {} and {}",
            joint.n_rows(),
            joint.n_cols(),
            p_s.len(),
            p_s2.len()
        )));
    }
    Ok(entropy(p_s) + entropy(p_s2) - joint_entropy(joint))
}

/// Kullback divergence, which is `+∞` when the posterior puts mass where the prior has none.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Divergence {
    Finite(f64),
    Infinite,
}

impl Divergence {
    pub fn value(self) -> Option<f64> {
        match self {
            Divergence::Finite(v) => Some(v),
            Divergence::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Divergence::Infinite
    }
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::Finite(v) => write!(f, "{v}"),
            Divergence::Infinite => f.write_str("inf"),
        }
    }
}

/// `Σ posterior · ln(posterior / prior)`, with `0 ln(0/q) = 0`.
pub fn cross_entropy(
    prior: &JointDistribution,
    posterior: &JointDistribution,
) -> Result<Divergence> {
    if prior.n_rows() != posterior.n_rows() || prior.n_cols() != posterior.n_cols() {
        return Err(Error::DimensionMismatch(format!(
            "{}×{} prior against {}×{} posterior",
            prior.n_rows(),
            prior.n_cols(),
            posterior.n_rows(),
            posterior.n_cols()
        )));
    }
    Ok(divergence(prior.cells(), posterior.cells()))
}

fn divergence(prior: &[f64], posterior: &[f64]) -> Divergence {
    let mut sum = 0.0;
    for (&q, &p) in prior.iter().zip(posterior) {
        if p <= 0.0 {
            continue;
        }
        if q <= 0.0 {
            return Divergence::Infinite;
        }
        sum += p * (p / q).ln();
    }
    // Gibbs' inequality; clamp rounding noise.
    Divergence::Finite(sum.max(0.0))
}

/// Cross-entropy of a joint relative to the product of its own marginals.
pub fn mutual_information(joint: &JointDistribution) -> f64 {
    let (p, q) = joint.marginals();
    let product = JointDistribution::product(&p, &q);
    match divergence(product.cells(), joint.cells()) {
        Divergence::Finite(v) => v,
        Divergence::Infinite => {
            unreachable!("a joint is absolutely continuous w.r.t. its marginal product")
        }
    }
}

/// The information measures of one combination step, in nats.
#[derive(Clone, Debug, PartialEq)]
pub struct InformationReport {
    pub h_left: f64,
    pub h_right: f64,
    pub h_joint: f64,
    pub info_left: f64,
    pub info_right: f64,
    pub info_joint: f64,
    pub gain: f64,
    pub mutual: f64,
}

impl InformationReport {
    pub fn new(
        joint: &JointDistribution,
        p_s: &ProbabilityFunction,
        p_s2: &ProbabilityFunction,
    ) -> Result<Self> {
        let gain = info_gain(joint, p_s, p_s2)?;
        let h_joint = joint_entropy(joint);
        Ok(InformationReport {
            h_left: entropy(p_s),
            h_right: entropy(p_s2),
            h_joint,
            info_left: information(p_s),
            info_right: information(p_s2),
            info_joint: information_of(joint.cells()),
            gain,
            mutual: mutual_information(joint),
        })
    }

    /// Every measure divided by `ln 2`.
    pub fn in_bits(&self) -> InformationReport {
        let k = std::f64::consts::LN_2;
        InformationReport {
            h_left: self.h_left / k,
            h_right: self.h_right / k,
            h_joint: self.h_joint / k,
            info_left: self.info_left / k,
            info_right: self.info_right / k,
            info_joint: self.info_joint / k,
            gain: self.gain / k,
            mutual: self.mutual / k,
        }
    }
}
