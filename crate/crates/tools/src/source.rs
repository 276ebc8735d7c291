//! Seeded synthetic posterior sources, standing in for the output of a
//! trained inference model.

use vbq_core::GaussianPosterior;

use crate::rng::Rng;

/// Distribution of posterior means across dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanSpec {
    /// N(0, sigma0^2)
    Gaussian { sigma0_sq: f64 },
    /// A fixed value for every dimension.
    Constant(f64),
}

/// Distribution of posterior variances across dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceSpec {
    /// log-uniform over [lo, hi] — strongly heterogeneous uncertainty.
    LogUniform { lo: f64, hi: f64 },
    /// The same variance everywhere.
    Constant(f64),
}

/// Reproducible synthetic source: identical seed, identical posteriors.
#[derive(Debug, Clone)]
pub struct SyntheticSource {
    pub seed: u64,
    pub dimensions: usize,
    pub means: MeanSpec,
    pub variances: VarianceSpec,
}

impl SyntheticSource {
    pub fn new(seed: u64, dimensions: usize) -> Self {
        Self {
            seed,
            dimensions,
            means: MeanSpec::Gaussian { sigma0_sq: 1.0 },
            variances: VarianceSpec::LogUniform { lo: 1e-4, hi: 1.0 },
        }
    }

    pub fn with_means(mut self, means: MeanSpec) -> Self {
        self.means = means;
        self
    }

    pub fn with_variances(mut self, variances: VarianceSpec) -> Self {
        self.variances = variances;
        self
    }

    pub fn generate(&self) -> Vec<GaussianPosterior> {
        let mut rng = Rng::seed_from_u64(self.seed);
        (0..self.dimensions)
            .map(|_| {
                let mu = match self.means {
                    MeanSpec::Gaussian { sigma0_sq } => {
                        libm::sqrt(sigma0_sq) * rng.next_std_normal()
                    }
                    MeanSpec::Constant(c) => c,
                };
                let sigma2 = match self.variances {
                    VarianceSpec::LogUniform { lo, hi } => {
                        libm::exp(libm::log(lo) + (libm::log(hi) - libm::log(lo)) * rng.next_f64())
                    }
                    VarianceSpec::Constant(v) => v,
                };
                GaussianPosterior::new(mu, sigma2)
            })
            .collect()
    }
}
