//! Prior distribution models.
//!
//! A prior supplies the monotone pair `cdf` / `quantile` that carries latent
//! coordinates `z` to quantiles `xi` in (0, 1) and back. Three variants are
//! supported: the standard normal, a scaled Gaussian (used as the empirical
//! prior fitted to a population of variational means), and a piecewise-linear
//! CDF through empirical sample quantiles with Gaussian-extrapolated tails.
//!
//! All CDF outputs are clamped into `[QUANTILE_MIN, QUANTILE_MAX]` so that
//! downstream dyadic arithmetic never sees 0 or 1.

use alloc::vec::Vec;

use crate::normal::{std_normal_cdf, std_normal_quantile};

/// Smallest quantile a CDF evaluation can return: 2^-60.
pub const QUANTILE_MIN: f64 = 1.0 / (1u64 << 60) as f64;

/// Largest quantile a CDF evaluation can return.
///
/// The nominal upper clamp 1 - 2^-60 is not representable in an f64 (it
/// rounds to 1.0); the largest double below it is 1 - 2^-53, the immediate
/// predecessor of 1.0.
pub const QUANTILE_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PriorError {
    #[error("non-finite input {0}")]
    NonFiniteInput(f64),
    #[error("quantile argument {0} outside (0, 1)")]
    QuantileOutOfRange(f64),
    #[error("degenerate prior: {0}")]
    DegeneratePrior(&'static str),
    #[error("invalid prior parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("malformed prior serialization")]
    BadSerialization,
}

/// Piecewise-linear empirical CDF with Gaussian tails.
///
/// Knots are strictly increasing in both coordinates. Outside the outermost
/// knots the CDF follows the normal CDF fitted through the two outermost
/// knots on that side, so the tail parameters are a pure function of the
/// knot list and need not be serialized.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    knots: Vec<(f64, f64)>,
    lo_tail: (f64, f64), // (location, scale) of the left tail normal
    hi_tail: (f64, f64),
}

impl EmpiricalCdf {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, PriorError> {
        if knots.len() < 2 {
            return Err(PriorError::InvalidParameter("need at least two knots"));
        }
        for &(z, p) in &knots {
            if !z.is_finite() || !p.is_finite() || p <= 0.0 || p >= 1.0 {
                return Err(PriorError::InvalidParameter(
                    "knot probabilities must lie in (0, 1)",
                ));
            }
        }
        for w in knots.windows(2) {
            if w[0].0 >= w[1].0 || w[0].1 >= w[1].1 {
                return Err(PriorError::InvalidParameter(
                    "knots must be strictly increasing in both coordinates",
                ));
            }
        }
        let tail = |(z0, p0): (f64, f64), (z1, p1): (f64, f64)| {
            let q0 = std_normal_quantile(p0);
            let q1 = std_normal_quantile(p1);
            let scale = (z1 - z0) / (q1 - q0);
            (z0 - scale * q0, scale)
        };
        let lo_tail = tail(knots[0], knots[1]);
        let hi_tail = tail(knots[knots.len() - 2], knots[knots.len() - 1]);
        Ok(Self {
            knots,
            lo_tail,
            hi_tail,
        })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    fn cdf(&self, z: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if z < first.0 {
            let (m, s) = self.lo_tail;
            return std_normal_cdf((z - m) / s);
        }
        if z > last.0 {
            let (m, s) = self.hi_tail;
            return std_normal_cdf((z - m) / s);
        }
        let hi = self.knots.partition_point(|&(kz, _)| kz < z);
        if hi == 0 {
            return first.1;
        }
        let (z0, p0) = self.knots[hi - 1];
        if hi == self.knots.len() {
            return last.1;
        }
        let (z1, p1) = self.knots[hi];
        p0 + (p1 - p0) * (z - z0) / (z1 - z0)
    }

    fn quantile(&self, xi: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if xi < first.1 {
            let (m, s) = self.lo_tail;
            return m + s * std_normal_quantile(xi);
        }
        if xi > last.1 {
            let (m, s) = self.hi_tail;
            return m + s * std_normal_quantile(xi);
        }
        let hi = self.knots.partition_point(|&(_, kp)| kp < xi);
        if hi == 0 {
            return first.0;
        }
        let (z0, p0) = self.knots[hi - 1];
        if hi == self.knots.len() {
            return last.0;
        }
        let (z1, p1) = self.knots[hi];
        z0 + (z1 - z0) * (xi - p0) / (p1 - p0)
    }
}

/// A prior distribution exposing the CDF and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorModel {
    StandardNormal,
    ScaledGaussian { mean: f64, variance: f64 },
    EmpiricalPiecewise(EmpiricalCdf),
}

impl PriorModel {
    pub fn scaled_gaussian(mean: f64, variance: f64) -> Result<Self, PriorError> {
        if !mean.is_finite() || !variance.is_finite() || variance <= 0.0 {
            return Err(PriorError::InvalidParameter(
                "gaussian variance must be finite and positive",
            ));
        }
        Ok(PriorModel::ScaledGaussian { mean, variance })
    }

    /// F(z), clamped into `[QUANTILE_MIN, QUANTILE_MAX]`.
    pub fn cdf(&self, z: f64) -> Result<f64, PriorError> {
        if !z.is_finite() {
            return Err(PriorError::NonFiniteInput(z));
        }
        let raw = match self {
            PriorModel::StandardNormal => std_normal_cdf(z),
            PriorModel::ScaledGaussian { mean, variance } => {
                std_normal_cdf((z - mean) / libm::sqrt(*variance))
            }
            PriorModel::EmpiricalPiecewise(cdf) => cdf.cdf(z),
        };
        Ok(raw.clamp(QUANTILE_MIN, QUANTILE_MAX))
    }

    /// F^{-1}(xi) for xi in (0, 1).
    pub fn quantile(&self, xi: f64) -> Result<f64, PriorError> {
        if xi.is_nan() || xi <= 0.0 || xi >= 1.0 {
            return Err(PriorError::QuantileOutOfRange(xi));
        }
        Ok(match self {
            PriorModel::StandardNormal => std_normal_quantile(xi),
            PriorModel::ScaledGaussian { mean, variance } => {
                mean + libm::sqrt(*variance) * std_normal_quantile(xi)
            }
            PriorModel::EmpiricalPiecewise(cdf) => cdf.quantile(xi),
        })
    }

    /// Fits the zero-centered Gaussian empirical prior: the variance is the
    /// population variance of the supplied variational means.
    pub fn fit_empirical_gaussian(means: &[f64]) -> Result<Self, PriorError> {
        if means.len() < 2 {
            return Err(PriorError::DegeneratePrior("need at least two values"));
        }
        let n = means.len() as f64;
        let mean = means.iter().sum::<f64>() / n;
        let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / n;
        if !var.is_finite() || var < 1e-12 {
            return Err(PriorError::DegeneratePrior("variance below 1e-12"));
        }
        Ok(PriorModel::ScaledGaussian {
            mean: 0.0,
            variance: var,
        })
    }

    /// Fits a piecewise-linear CDF whose knot positions are the empirical
    /// sample quantiles at cumulative probabilities k/(knots+1).
    pub fn fit_empirical_piecewise(samples: &[f64], knots: usize) -> Result<Self, PriorError> {
        if knots < 2 || samples.len() < knots {
            return Err(PriorError::DegeneratePrior(
                "need at least `knots` samples and two knots",
            ));
        }
        let mut sorted: Vec<f64> = samples.to_vec();
        if sorted.iter().any(|s| !s.is_finite()) {
            return Err(PriorError::DegeneratePrior("non-finite sample"));
        }
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sorted.len();
        let mut pts = Vec::with_capacity(knots);
        for k in 1..=knots {
            let p = k as f64 / (knots + 1) as f64;
            // Order-statistic interpolation at index p*(n-1).
            let idx = p * (n - 1) as f64;
            let lo = idx as usize;
            let frac = idx - lo as f64;
            let z = if lo + 1 < n {
                sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
            } else {
                sorted[lo]
            };
            pts.push((z, p));
        }
        if pts.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(PriorError::DegeneratePrior(
                "insufficient distinct samples for requested knot count",
            ));
        }
        Ok(PriorModel::EmpiricalPiecewise(EmpiricalCdf::new(pts)?))
    }

    /// Serializes the prior in its container-header wire form: a tag byte
    /// (0 standard normal, 1 scaled Gaussian, 2 empirical piecewise),
    /// followed by the variant payload in little-endian f64s.
    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        match self {
            PriorModel::StandardNormal => out.push(0),
            PriorModel::ScaledGaussian { mean, variance } => {
                out.push(1);
                out.extend_from_slice(&mean.to_le_bytes());
                out.extend_from_slice(&variance.to_le_bytes());
            }
            PriorModel::EmpiricalPiecewise(cdf) => {
                out.push(2);
                out.extend_from_slice(&(cdf.knots.len() as u32).to_le_bytes());
                for &(z, p) in &cdf.knots {
                    out.extend_from_slice(&z.to_le_bytes());
                    out.extend_from_slice(&p.to_le_bytes());
                }
            }
        }
    }

    /// Parses the wire form produced by [`Self::write_bytes`], returning the
    /// prior and the number of bytes consumed.
    pub fn read_bytes(bytes: &[u8]) -> Result<(Self, usize), PriorError> {
        let take_f64 = |at: usize| -> Result<f64, PriorError> {
            let chunk = bytes.get(at..at + 8).ok_or(PriorError::BadSerialization)?;
            Ok(f64::from_le_bytes(chunk.try_into().unwrap()))
        };
        match bytes.first() {
            Some(0) => Ok((PriorModel::StandardNormal, 1)),
            Some(1) => {
                let mean = take_f64(1)?;
                let variance = take_f64(9)?;
                Ok((PriorModel::scaled_gaussian(mean, variance)?, 17))
            }
            Some(2) => {
                let count = bytes
                    .get(1..5)
                    .ok_or(PriorError::BadSerialization)
                    .map(|c| u32::from_le_bytes(c.try_into().unwrap()))?
                    as usize;
                let mut knots = Vec::with_capacity(count);
                let mut at = 5;
                for _ in 0..count {
                    let z = take_f64(at)?;
                    let p = take_f64(at + 8)?;
                    knots.push((z, p));
                    at += 16;
                }
                Ok((
                    PriorModel::EmpiricalPiecewise(EmpiricalCdf::new(knots)?),
                    at,
                ))
            }
            _ => Err(PriorError::BadSerialization),
        }
    }
}
