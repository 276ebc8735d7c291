//! Rate-distortion optimal choice of code points for mean-field Gaussian
//! posteriors.
//!
//! For each latent dimension with posterior `N(mu, sigma^2)` and a prior
//! CDF `F`, the quantizer minimizes the per-dimension objective
//!
//! ```text
//! l(xi) = (F^{-1}(xi) - mu)^2 + 2 * lambda * sigma^2 * R(xi)
//! ```
//!
//! over all dyadic code points `xi`, where `R(xi)` is the bitlength of the
//! code point's binary fraction. The search walks rates r = 1, 2, ... and at
//! each r evaluates only the two grid points enclosing the posterior-mode
//! quantile `xi_dagger = F(mu)`; it stops once the largest possible
//! remaining gain in log-posterior is smaller than the minimum penalty an
//! extra bit would incur. Candidates are accepted only on strict
//! improvement, scanning left before right, so ties resolve to the lower
//! rate and then to the smaller quantile.

use alloc::vec::Vec;

use crate::codec::FrequencyTable;
use crate::dyadic::{neighbors_at_rate, CodePoint, MAX_RATE};
use crate::prior::{PriorError, PriorModel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuantizeError {
    #[error("dimension {dim}: {source}")]
    Dimension {
        dim: usize,
        #[source]
        source: alloc::boxed::Box<QuantizeError>,
    },
    #[error("non-finite posterior parameters (mu = {mu}, sigma2 = {sigma2})")]
    InvalidPosterior { mu: f64, sigma2: f64 },
    #[error("lambda = 0 with no rate cap makes the search unbounded")]
    UnboundedSearch,
    #[error("lambda must be positive (got {0})")]
    InvalidLambda(f64),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error(transparent)]
    Prior(#[from] PriorError),
    #[error(transparent)]
    Codec(#[from] crate::codec::CodecError),
}

/// Per-dimension variational posterior `N(mu, sigma2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPosterior {
    pub mu: f64,
    pub sigma2: f64,
}

impl GaussianPosterior {
    pub fn new(mu: f64, sigma2: f64) -> Self {
        Self { mu, sigma2 }
    }
}

/// Configuration of the rate-distortion search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdConfig {
    /// Rate penalty; `f64::INFINITY` selects the median code point 1/2
    /// everywhere.
    pub lambda: f64,
    /// Hard stop for the rate search; `None` removes the stop (only valid
    /// with lambda > 0).
    pub rate_cap: Option<u8>,
    /// Lower bound applied to posterior variances.
    pub sigma2_floor: f64,
}

impl RdConfig {
    pub const DEFAULT_RATE_CAP: u8 = 32;

    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            rate_cap: Some(Self::DEFAULT_RATE_CAP),
            sigma2_floor: 1e-12,
        }
    }

    /// Infinite-lambda mode: every dimension encodes as the median 1/2.
    pub fn median_only() -> Self {
        Self::new(f64::INFINITY)
    }

    pub fn with_rate_cap(mut self, cap: Option<u8>) -> Self {
        self.rate_cap = cap;
        self
    }
}

/// Search report for one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchDiagnostics {
    /// Rate index at which the loop terminated.
    pub terminal_r: u8,
    /// Number of objective evaluations.
    pub candidates_evaluated: u32,
    /// Set when the loop stopped at the rate cap rather than through the
    /// termination inequality.
    pub rate_cap_hit: bool,
}

/// Quantization result for a full vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedVector {
    pub code_points: Vec<CodePoint>,
    /// Per-dimension objective values l(xi).
    pub objectives: Vec<f64>,
    /// Reconstructions z_hat = F^{-1}(xi).
    pub reconstructions: Vec<f64>,
    /// Sum of per-dimension rates R(xi).
    pub total_rate_bits: u64,
}

impl QuantizedVector {
    pub fn len(&self) -> usize {
        self.code_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code_points.is_empty()
    }

    pub fn rates(&self) -> impl Iterator<Item = u8> + '_ {
        self.code_points.iter().map(|c| c.rate())
    }

    /// Total objective: sum of the per-dimension values.
    pub fn total_objective(&self) -> f64 {
        self.objectives.iter().sum()
    }
}

/// One row of a lambda sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdPoint {
    pub lambda: f64,
    /// Grid-rate accounting: sum of R(xi_i).
    pub total_rate_bits: u64,
    /// Arithmetic-coded payload size for the chosen symbols.
    pub entropy_coded_bits: u64,
    /// Mean squared error in latent space, (1/K) sum (z_hat_i - mu_i)^2.
    pub mse_z: f64,
    /// Unnormalized log-posterior of the reconstruction,
    /// -sum (z_hat_i - mu_i)^2 / (2 sigma_i^2).
    pub log_q: f64,
}

/// The per-dimension objective, exactly as the search evaluates it.
pub fn objective(
    xi_hat: CodePoint,
    post: &GaussianPosterior,
    prior: &PriorModel,
    lambda: f64,
) -> Result<f64, QuantizeError> {
    let z = prior.quantile(xi_hat.value())?;
    let d = z - post.mu;
    Ok(d * d + 2.0 * lambda * post.sigma2 * f64::from(xi_hat.rate()))
}

fn check_posterior(post: &GaussianPosterior) -> Result<(), QuantizeError> {
    if !post.mu.is_finite() || !post.sigma2.is_finite() || post.sigma2 < 0.0 {
        return Err(QuantizeError::InvalidPosterior {
            mu: post.mu,
            sigma2: post.sigma2,
        });
    }
    Ok(())
}

/// Minimizes the per-dimension objective over the dyadic grid.
pub fn optimize_dimension(
    post: &GaussianPosterior,
    prior: &PriorModel,
    cfg: &RdConfig,
) -> Result<(CodePoint, SearchDiagnostics), QuantizeError> {
    check_posterior(post)?;
    if cfg.lambda.is_infinite() {
        return Ok((CodePoint::HALF, SearchDiagnostics::default()));
    }
    if cfg.lambda.is_nan() || cfg.lambda < 0.0 {
        return Err(QuantizeError::InvalidLambda(cfg.lambda));
    }
    if cfg.lambda == 0.0 && cfg.rate_cap.is_none() {
        return Err(QuantizeError::UnboundedSearch);
    }
    let sigma2 = post.sigma2.max(cfg.sigma2_floor);
    let lambda = cfg.lambda;
    let cap = cfg.rate_cap.unwrap_or(MAX_RATE).min(MAX_RATE);

    let target = prior.cdf(post.mu)?;
    let mode_z = prior.quantile(target)?;

    let d_mode = mode_z - post.mu;
    let mut best: Option<CodePoint> = None;
    let mut best_loss = f64::INFINITY;
    let mut best_d_sq = f64::INFINITY;
    let mut diag = SearchDiagnostics::default();

    let mut r = 0u8;
    loop {
        r += 1;
        let (left, right) = neighbors_at_rate(target, r);
        for cand in [left.point(), right.point()].into_iter().flatten() {
            // A candidate reappears at every finer rate; strict improvement
            // keeps the first (lower-rate, then smaller-value) winner.
            let z = prior.quantile(cand.value())?;
            let d = z - post.mu;
            let l = d * d + 2.0 * lambda * sigma2 * f64::from(cand.rate());
            diag.candidates_evaluated += 1;
            if l < best_loss {
                best = Some(cand);
                best_loss = l;
                best_d_sq = d * d;
            }
        }

        let chosen = best.expect("rate-1 step always yields the candidate 1/2");
        if r >= cap {
            diag.rate_cap_hit = true;
            diag.terminal_r = r;
            return Ok((chosen, diag));
        }

        // Termination (normalized scale): the best possible remaining gain
        // in -((z - mu)^2)/(2 sigma^2) must outweigh the minimum penalty of
        // lambda per extra bit.
        let log_g_gap = (best_d_sq - d_mode * d_mode) / (2.0 * sigma2);
        if log_g_gap < lambda * (f64::from(r) + 1.0 - f64::from(chosen.rate())) {
            diag.terminal_r = r;
            return Ok((chosen, diag));
        }
    }
}

/// Quantizes a posterior vector dimension by dimension.
///
/// Dimensions are independent; the sequential order here is the reference
/// behavior that any parallel evaluation must reproduce bit-identically.
pub fn quantize_vector(
    posteriors: &[GaussianPosterior],
    prior: &PriorModel,
    cfg: &RdConfig,
) -> Result<QuantizedVector, QuantizeError> {
    if posteriors.is_empty() {
        return Err(QuantizeError::EmptyInput("posterior vector"));
    }
    let mut code_points = Vec::with_capacity(posteriors.len());
    let mut objectives = Vec::with_capacity(posteriors.len());
    let mut reconstructions = Vec::with_capacity(posteriors.len());
    let mut total_rate_bits = 0u64;
    for (dim, post) in posteriors.iter().enumerate() {
        let attach = |e: QuantizeError| QuantizeError::Dimension {
            dim,
            source: alloc::boxed::Box::new(e),
        };
        let (cp, _) = optimize_dimension(post, prior, cfg).map_err(attach)?;
        let z = prior
            .quantile(cp.value())
            .map_err(|e| attach(QuantizeError::Prior(e)))?;
        let floored = GaussianPosterior::new(post.mu, post.sigma2.max(cfg.sigma2_floor));
        let l = objective(cp, &floored, prior, cfg.lambda).map_err(attach)?;
        code_points.push(cp);
        objectives.push(l);
        reconstructions.push(z);
        total_rate_bits += u64::from(cp.rate());
    }
    Ok(QuantizedVector {
        code_points,
        objectives,
        reconstructions,
        total_rate_bits,
    })
}

/// Runs the quantizer across a grid of lambdas and reports rate/distortion
/// summaries.
///
/// `table`, when given, is the entropy-coding model (external-table mode);
/// otherwise each point is coded under its own empirical table.
pub fn sweep_lambda(
    posteriors: &[GaussianPosterior],
    prior: &PriorModel,
    lambdas: &[f64],
    table: Option<&FrequencyTable>,
    base: &RdConfig,
) -> Result<Vec<RdPoint>, QuantizeError> {
    if lambdas.is_empty() {
        return Err(QuantizeError::EmptyInput("lambda list"));
    }
    if let Some(&bad) = lambdas.iter().find(|l| l.is_nan() || **l <= 0.0) {
        return Err(QuantizeError::InvalidLambda(bad));
    }
    let k = posteriors.len() as f64;
    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let cfg = RdConfig { lambda, ..*base };
        let qv = quantize_vector(posteriors, prior, &cfg)?;
        let mut mse = 0.0;
        let mut log_q = 0.0;
        for (post, &z) in posteriors.iter().zip(&qv.reconstructions) {
            let d = z - post.mu;
            mse += d * d;
            log_q -= d * d / (2.0 * post.sigma2.max(base.sigma2_floor));
        }
        let entropy_coded_bits = match table {
            Some(t) => crate::codec::ac_encode(&qv.code_points, t)?.bit_len() as u64,
            None => {
                let own = FrequencyTable::from_symbols(&qv.code_points);
                crate::codec::ac_encode(&qv.code_points, &own)
                    .expect("own empirical table covers its symbols")
                    .bit_len() as u64
            }
        };
        points.push(RdPoint {
            lambda,
            total_rate_bits: qv.total_rate_bits,
            entropy_coded_bits,
            mse_z: mse / k,
            log_q,
        });
    }
    Ok(points)
}
