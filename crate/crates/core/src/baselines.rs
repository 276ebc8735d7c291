//! Classical scalar quantizers used as comparison points: uniform-grid
//! rounding with entropy-coded accounting, k-means codebooks, and the
//! entropy-constrained generalized Lloyd algorithm.

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BaselineError {
    #[error("grid spacing must be positive (got {0})")]
    BadDelta(f64),
    #[error("need at least {need} distinct samples for k = {k}")]
    TooFewSamples { need: usize, k: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("empty input")]
    EmptyInput,
}

/// How a codebook was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CodebookOrigin {
    Uniform { delta: f64 },
    KMeans,
    Lloyd { lambda: f64 },
}

/// A scalar codebook: sorted grid points with matching probabilities for
/// entropy-coded bitrate accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarCodebook {
    pub grid: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub origin: CodebookOrigin,
}

impl ScalarCodebook {
    fn validate(&self) {
        debug_assert!(self.grid.windows(2).all(|w| w[0] < w[1]));
        let sum: f64 = self.probabilities.iter().sum();
        debug_assert!((sum - 1.0).abs() < 1e-12);
    }

    /// Index of the grid point nearest to `x`.
    fn nearest(&self, x: f64) -> usize {
        let idx = self.grid.partition_point(|&g| g < x);
        if idx == 0 {
            return 0;
        }
        if idx == self.grid.len() {
            return self.grid.len() - 1;
        }
        if x - self.grid[idx - 1] <= self.grid[idx] - x {
            idx - 1
        } else {
            idx
        }
    }

    /// Index minimizing (x - c_j)^2 + lambda * (-log2 p_j), the assignment
    /// rule of the entropy-constrained quantizer.
    fn penalized(&self, x: f64, lambda: f64) -> usize {
        let mut best = 0;
        let mut best_cost = f64::INFINITY;
        for (j, (&c, &p)) in self.grid.iter().zip(&self.probabilities).enumerate() {
            let d = x - c;
            let cost = d * d + lambda * -libm::log2(p);
            if cost < best_cost {
                best_cost = cost;
                best = j;
            }
        }
        best
    }
}

/// Rounds each mean to the nearest multiple of `delta` (ties to even);
/// probabilities are the empirical frequencies of the used grid points.
pub fn uniform_quantize(
    means: &[f64],
    delta: f64,
) -> Result<(Vec<usize>, ScalarCodebook), BaselineError> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(BaselineError::BadDelta(delta));
    }
    if means.is_empty() {
        return Err(BaselineError::EmptyInput);
    }
    let steps: Vec<i64> = means
        .iter()
        .map(|&m| libm::rint(m / delta) as i64)
        .collect();
    let mut used: Vec<i64> = steps.clone();
    used.sort_unstable();
    used.dedup();
    let grid: Vec<f64> = used.iter().map(|&s| s as f64 * delta).collect();
    let mut counts = alloc::vec![0u64; grid.len()];
    let indices: Vec<usize> = steps
        .iter()
        .map(|s| {
            let idx = used.binary_search(s).unwrap();
            counts[idx] += 1;
            idx
        })
        .collect();
    let n = means.len() as f64;
    let codebook = ScalarCodebook {
        grid,
        probabilities: counts.iter().map(|&c| c as f64 / n).collect(),
        origin: CodebookOrigin::Uniform { delta },
    };
    codebook.validate();
    Ok((indices, codebook))
}

fn quantile_init(sorted: &[f64], k: usize) -> Vec<f64> {
    (1..=k)
        .map(|i| {
            let p = i as f64 / (k + 1) as f64;
            let idx = p * (sorted.len() - 1) as f64;
            let lo = idx as usize;
            let frac = idx - lo as f64;
            if lo + 1 < sorted.len() {
                sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
            } else {
                sorted[lo]
            }
        })
        .collect()
}

fn count_distinct(sorted: &[f64]) -> usize {
    1 + sorted.windows(2).filter(|w| w[0] < w[1]).count()
}

fn assign_nearest(samples: &[f64], centroids: &[f64]) -> Vec<usize> {
    samples
        .iter()
        .map(|&x| {
            let idx = centroids.partition_point(|&c| c < x);
            if idx == 0 {
                0
            } else if idx == centroids.len() {
                centroids.len() - 1
            } else if x - centroids[idx - 1] <= centroids[idx] - x {
                idx - 1
            } else {
                idx
            }
        })
        .collect()
}

/// Re-seeds any empty cluster at the sample farthest from its centroid,
/// skipping samples that already coincide with another centroid (a
/// colliding re-seed would leave the cluster empty again).
fn fix_empty_clusters(samples: &[f64], centroids: &mut [f64], assign: &mut Vec<usize>) {
    for _ in 0..centroids.len() {
        let mut counts = alloc::vec![0usize; centroids.len()];
        for &a in assign.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let far = samples
            .iter()
            .enumerate()
            .filter(|(_, s)| !centroids.iter().any(|c| c == *s))
            .max_by(|(_, a), (_, b)| {
                let da = (*a - centroids[empty]).abs();
                let db = (*b - centroids[empty]).abs();
                da.partial_cmp(&db).unwrap()
            })
            .map(|(i, _)| i);
        let Some(far) = far else {
            return;
        };
        centroids[empty] = samples[far];
        centroids.sort_by(|a, b| a.partial_cmp(b).unwrap());
        *assign = assign_nearest(samples, centroids);
    }
}

/// Lloyd's algorithm on 1-D samples: centroids start at the empirical
/// quantiles i/(k+1) (deterministic given the sort), so the seed only
/// matters for the empty-cluster fallback, which is itself deterministic.
pub fn kmeans_codebook(
    samples: &[f64],
    k: usize,
    _seed: u64,
) -> Result<ScalarCodebook, BaselineError> {
    if k == 0 {
        return Err(BaselineError::ZeroK);
    }
    if samples.is_empty() {
        return Err(BaselineError::EmptyInput);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if count_distinct(&sorted) < k {
        return Err(BaselineError::TooFewSamples { need: k, k });
    }

    let mut centroids = quantile_init(&sorted, k);
    centroids.dedup();
    while centroids.len() < k {
        // Degenerate quantile init (heavy ties); spread over distinct values.
        let mut distinct = sorted.clone();
        distinct.dedup();
        centroids = distinct[..k].to_vec();
    }
    let mut assign = assign_nearest(&sorted, &centroids);
    fix_empty_clusters(&sorted, &mut centroids, &mut assign);

    for _ in 0..500 {
        // Centroid update to cluster means.
        let mut sums = alloc::vec![0.0f64; k];
        let mut counts = alloc::vec![0usize; k];
        for (&x, &a) in sorted.iter().zip(&assign) {
            sums[a] += x;
            counts[a] += 1;
        }
        let mut moved = 0.0f64;
        for j in 0..k {
            if counts[j] > 0 {
                let next = sums[j] / counts[j] as f64;
                moved = moved.max((next - centroids[j]).abs());
                centroids[j] = next;
            }
        }
        centroids.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assign = assign_nearest(&sorted, &centroids);
        fix_empty_clusters(&sorted, &mut centroids, &mut assign);
        let scale = centroids.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        if moved <= 1e-9 * scale {
            break;
        }
    }

    let mut counts = alloc::vec![0u64; k];
    for &a in &assign {
        counts[a] += 1;
    }
    let n = sorted.len() as f64;
    let cb = ScalarCodebook {
        grid: centroids,
        probabilities: counts.iter().map(|&c| c as f64 / n).collect(),
        origin: CodebookOrigin::KMeans,
    };
    cb.validate();
    Ok(cb)
}

/// Entropy-constrained generalized Lloyd: alternates a penalized
/// assignment, centroid updates, and probability updates until the
/// Lagrangian J = MSE + lambda * mean codeword length stops improving.
/// Codewords that lose all their mass are pruned.
pub fn lloyd_ec_codebook(
    samples: &[f64],
    k_init: usize,
    lambda: f64,
    seed: u64,
) -> Result<ScalarCodebook, BaselineError> {
    if samples.is_empty() {
        return Err(BaselineError::EmptyInput);
    }
    let start = kmeans_codebook(samples, k_init, seed)?;
    let mut grid = start.grid;
    let mut probs = start.probabilities;
    let n = samples.len() as f64;

    let lagrangian = |grid: &[f64], probs: &[f64]| -> (f64, Vec<usize>) {
        let mut j_total = 0.0;
        let assign: Vec<usize> = samples
            .iter()
            .map(|&x| {
                let mut best = 0;
                let mut best_cost = f64::INFINITY;
                for (j, (&c, &p)) in grid.iter().zip(probs).enumerate() {
                    let d = x - c;
                    let cost = d * d + lambda * -libm::log2(p);
                    if cost < best_cost {
                        best_cost = cost;
                        best = j;
                    }
                }
                j_total += best_cost;
                best
            })
            .collect();
        (j_total / n, assign)
    };

    let (mut j_prev, mut assign) = lagrangian(&grid, &probs);
    for _ in 0..500 {
        // Centroid and probability updates from the current assignment.
        let mut sums = alloc::vec![0.0f64; grid.len()];
        let mut counts = alloc::vec![0u64; grid.len()];
        for (&x, &a) in samples.iter().zip(&assign) {
            sums[a] += x;
            counts[a] += 1;
        }
        let mut next_grid = Vec::with_capacity(grid.len());
        let mut next_probs = Vec::with_capacity(grid.len());
        for j in 0..grid.len() {
            if counts[j] > 0 {
                next_grid.push(sums[j] / counts[j] as f64);
                next_probs.push(counts[j] as f64 / n);
            }
        }
        let mut order: Vec<usize> = (0..next_grid.len()).collect();
        order.sort_by(|&a, &b| next_grid[a].partial_cmp(&next_grid[b]).unwrap());
        grid = order.iter().map(|&i| next_grid[i]).collect();
        probs = order.iter().map(|&i| next_probs[i]).collect();

        let (j_now, next_assign) = lagrangian(&grid, &probs);
        assign = next_assign;
        // Each half-step is a coordinate descent on J, so the Lagrangian is
        // nonincreasing up to rounding.
        debug_assert!(j_now <= j_prev + 1e-9 * j_prev.abs().max(1e-30));
        if j_prev - j_now < 1e-9 * j_prev.abs().max(1e-30) {
            j_prev = j_now.min(j_prev);
            break;
        }
        j_prev = j_now;
    }
    let _ = j_prev;

    let cb = ScalarCodebook {
        grid,
        probabilities: probs,
        origin: CodebookOrigin::Lloyd { lambda },
    };
    cb.validate();
    Ok(cb)
}

/// Quantizes `means` with a fixed codebook: nearest-codeword assignment
/// (penalized assignment for Lloyd codebooks), ideal entropy-coded size
/// sum(-log2 p), and the mean squared quantization error.
pub fn codebook_quantize(
    means: &[f64],
    codebook: &ScalarCodebook,
) -> Result<(Vec<usize>, f64, f64), BaselineError> {
    if means.is_empty() {
        return Err(BaselineError::EmptyInput);
    }
    let mut rate_bits = 0.0;
    let mut sse = 0.0;
    let indices: Vec<usize> = means
        .iter()
        .map(|&m| {
            let j = match codebook.origin {
                CodebookOrigin::Lloyd { lambda } => codebook.penalized(m, lambda),
                _ => codebook.nearest(m),
            };
            rate_bits -= libm::log2(codebook.probabilities[j]);
            let d = m - codebook.grid[j];
            sse += d * d;
            j
        })
        .collect();
    Ok((indices, rate_bits, sse / means.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn uniform_rounds_to_nearest() {
        let (idx, cb) = uniform_quantize(&[0.4, -0.4], 1.0).unwrap();
        assert_eq!(cb.grid, vec![0.0]);
        assert_eq!(idx, vec![0, 0]);
        assert_eq!(cb.probabilities, vec![1.0]);
    }

    #[test]
    fn uniform_half_goes_to_even() {
        let (_, cb) = uniform_quantize(&[0.5], 1.0).unwrap();
        assert_eq!(cb.grid, vec![0.0]);
        let (_, cb) = uniform_quantize(&[1.5], 1.0).unwrap();
        assert_eq!(cb.grid, vec![2.0]);
    }

    #[test]
    fn uniform_error_bounded_by_half_delta() {
        let means: Vec<f64> = (0..200).map(|i| (i as f64) * 0.137 - 13.0).collect();
        let delta = 0.25;
        let (idx, cb) = uniform_quantize(&means, delta).unwrap();
        for (&m, &j) in means.iter().zip(&idx) {
            assert!((m - cb.grid[j]).abs() <= delta / 2.0 + 1e-12);
        }
    }

    #[test]
    fn uniform_rejects_bad_delta() {
        assert!(uniform_quantize(&[1.0], 0.0).is_err());
        assert!(uniform_quantize(&[1.0], -1.0).is_err());
    }

    #[test]
    fn kmeans_exact_two_point_fit() {
        let cb = kmeans_codebook(&[-1.0, 1.0], 2, 0).unwrap();
        assert_eq!(cb.grid, vec![-1.0, 1.0]);
        assert_eq!(cb.probabilities, vec![0.5, 0.5]);
    }

    #[test]
    fn kmeans_degenerate_single_cluster() {
        let cb = kmeans_codebook(&[3.5, 3.5, 3.5], 1, 0).unwrap();
        assert_eq!(cb.grid, vec![3.5]);
        assert_eq!(cb.probabilities, vec![1.0]);
    }

    #[test]
    fn kmeans_rejects_too_few_distinct() {
        assert!(kmeans_codebook(&[1.0, 1.0, 1.0], 2, 0).is_err());
    }

    /// Plain reference Lloyd iteration written independently of the
    /// production path: linear-scan assignment, no sorting tricks, same
    /// documented empty-cluster rule (re-seed at the farthest sample).
    fn reference_lloyd(samples: &[f64], mut centroids: Vec<f64>, iters: usize) -> Vec<f64> {
        for _ in 0..iters {
            let assign_and_count = |centroids: &[f64]| {
                let mut sums = vec![0.0; centroids.len()];
                let mut counts = vec![0usize; centroids.len()];
                for &x in samples {
                    let mut best = 0;
                    let mut best_d = f64::INFINITY;
                    for (j, &c) in centroids.iter().enumerate() {
                        let d = (x - c) * (x - c);
                        if d < best_d {
                            best_d = d;
                            best = j;
                        }
                    }
                    sums[best] += x;
                    counts[best] += 1;
                }
                (sums, counts)
            };
            let (_, mut counts) = assign_and_count(&centroids);
            while let Some(empty) = counts.iter().position(|&c| c == 0) {
                let mut far = 0;
                for (i, &x) in samples.iter().enumerate() {
                    if (x - centroids[empty]).abs() > (samples[far] - centroids[empty]).abs() {
                        far = i;
                    }
                }
                centroids[empty] = samples[far];
                centroids.sort_by(|a, b| a.partial_cmp(b).unwrap());
                counts = assign_and_count(&centroids).1;
            }
            let (sums, counts) = assign_and_count(&centroids);
            for j in 0..centroids.len() {
                if counts[j] > 0 {
                    centroids[j] = sums[j] / counts[j] as f64;
                }
            }
        }
        centroids.sort_by(|a, b| a.partial_cmp(b).unwrap());
        centroids
    }

    #[test]
    fn kmeans_matches_reference_implementation() {
        // Seeded three-mode mixture.
        let mut state = 0x5eed_0000_0000_1234u64;
        let mut samples = Vec::with_capacity(600);
        for i in 0..600 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            let center = [-2.0, 0.5, 3.0][i % 3];
            samples.push(center + (u - 0.5));
        }
        let cb = kmeans_codebook(&samples, 8, 0).unwrap();

        let mut sorted = samples.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let init = quantile_init(&sorted, 8);
        let reference = reference_lloyd(&samples, init, 2000);
        for (got, want) in cb.grid.iter().zip(&reference) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn lloyd_zero_lambda_reduces_to_kmeans() {
        let samples: Vec<f64> = (0..120).map(|i| ((i * 37) % 101) as f64 / 10.0).collect();
        let km = kmeans_codebook(&samples, 6, 0).unwrap();
        let ec = lloyd_ec_codebook(&samples, 6, 0.0, 0).unwrap();
        for (a, b) in km.grid.iter().zip(&ec.grid) {
            assert!((a - b).abs() < 1e-9);
        }
        assert_eq!(km.probabilities, ec.probabilities);
    }

    #[test]
    fn lloyd_large_lambda_collapses() {
        let samples: Vec<f64> = (0..64).map(|i| (i as f64) / 8.0).collect();
        let cb = lloyd_ec_codebook(&samples, 8, 1e6, 0).unwrap();
        assert_eq!(cb.grid.len(), 1, "entropy term should dominate");
        assert_eq!(cb.probabilities, vec![1.0]);
    }

    #[test]
    fn lloyd_lagrangian_beats_kmeans_plus_entropy() {
        let mut state = 0xabcd_ef01_2345_6789u64;
        let mut samples = Vec::with_capacity(500);
        for _ in 0..500 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let u1 = ((state >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let u2 = ((state >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
            // Box-Muller standard normal.
            let z = libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2);
            samples.push(z);
        }
        let lambda = 0.1;
        let km = kmeans_codebook(&samples, 16, 0).unwrap();
        let (_, km_bits, km_mse) = codebook_quantize(&samples, &km).unwrap();
        let km_j = km_mse + lambda * km_bits / samples.len() as f64;

        let ec = lloyd_ec_codebook(&samples, 16, lambda, 0).unwrap();
        let (_, ec_bits, ec_mse) = codebook_quantize(&samples, &ec).unwrap();
        let ec_j = ec_mse + lambda * ec_bits / samples.len() as f64;
        assert!(
            ec_j <= km_j + 1e-9,
            "entropy-constrained J {ec_j} vs kmeans J {km_j}"
        );
    }

    #[test]
    fn quantize_on_grid_is_lossless() {
        let cb = ScalarCodebook {
            grid: vec![-1.0, 0.0, 2.0],
            probabilities: vec![0.25, 0.5, 0.25],
            origin: CodebookOrigin::KMeans,
        };
        let (_, _, mse) = codebook_quantize(&[-1.0, 0.0, 2.0, 0.0], &cb).unwrap();
        assert_eq!(mse, 0.0);
    }

    #[test]
    fn single_codeword_costs_nothing() {
        let cb = ScalarCodebook {
            grid: vec![1.0],
            probabilities: vec![1.0],
            origin: CodebookOrigin::KMeans,
        };
        let (_, bits, _) = codebook_quantize(&[0.0, 5.0, 1.0], &cb).unwrap();
        assert_eq!(bits, 0.0);
    }
}
