//! Parzen density estimators backing the good/bad trial models.

use rand::Rng;
use rand_distr::{Distribution, Normal};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const SQRT_TAU: f64 = 2.5066282746310002; // sqrt(2 * pi)

/// Standard normal CDF.
fn phi(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / SQRT_2))
}

#[derive(Debug, Clone, Copy)]
struct Component {
    mu: f64,
    sigma: f64,
    /// Probability mass the untruncated Gaussian places on `[lo, hi]`.
    mass: f64,
}

/// Equal-weight mixture of Gaussians truncated to `[lo, hi]`.
///
/// Always contains a wide prior component at the range midpoint, so the
/// density is strictly positive on the whole range even with no observations.
#[derive(Debug, Clone)]
pub(crate) struct TruncatedGaussianMixture {
    lo: f64,
    hi: f64,
    components: Vec<Component>,
}

impl TruncatedGaussianMixture {
    /// Fits the mixture to `observations` (all inside `[lo, hi]`).
    ///
    /// Each observation contributes one component whose bandwidth is the
    /// distance to its nearest neighbor (prior point included), floored at
    /// `(hi - lo) / min(100, n)` where `n` counts all components. The prior
    /// pseudo-observation sits at the midpoint with bandwidth `hi - lo`.
    pub(crate) fn fit(lo: f64, hi: f64, observations: &[f64]) -> Self {
        let width = hi - lo;
        let midpoint = lo + width / 2.0;

        let mut points: Vec<f64> = observations.to_vec();
        points.push(midpoint);
        points.sort_by(f64::total_cmp);

        let n = points.len();
        let sigma_floor = width / 100.0f64.min(n as f64);

        let mut components = Vec::with_capacity(n);
        components.push(Self::component(lo, hi, midpoint, width));
        for &x in observations {
            let sigma = nearest_neighbor_distance(&points, x)
                .unwrap_or(width)
                .max(sigma_floor);
            components.push(Self::component(lo, hi, x, sigma));
        }

        Self { lo, hi, components }
    }

    fn component(lo: f64, hi: f64, mu: f64, sigma: f64) -> Component {
        let mass = (phi((hi - mu) / sigma) - phi((lo - mu) / sigma)).max(f64::MIN_POSITIVE);
        Component { mu, sigma, mass }
    }

    /// Draws one sample from the truncated mixture.
    pub(crate) fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let c = self.components[rng.gen_range(0..self.components.len())];
        let normal = Normal::new(c.mu, c.sigma).expect("positive sigma");
        // Acceptance probability is bounded well away from zero for every
        // component this mixture can contain, so rejection terminates fast.
        for _ in 0..256 {
            let x = normal.sample(rng);
            if x >= self.lo && x <= self.hi {
                return x;
            }
        }
        c.mu.clamp(self.lo, self.hi)
    }

    /// Natural log of the mixture density at `x`.
    pub(crate) fn log_pdf(&self, x: f64) -> f64 {
        let mut total = 0.0;
        for c in &self.components {
            let z = (x - c.mu) / c.sigma;
            let pdf = (-0.5 * z * z).exp() / (c.sigma * SQRT_TAU);
            total += pdf / c.mass;
        }
        (total / self.components.len() as f64)
            .max(f64::MIN_POSITIVE)
            .ln()
    }
}

/// Distance from `x` to its nearest *other* point in the sorted multiset
/// `points` (which contains `x` at least once). `None` when `x` has no
/// other point to measure against.
fn nearest_neighbor_distance(points: &[f64], x: f64) -> Option<f64> {
    let first = points.partition_point(|&p| p < x);
    let past = points.partition_point(|&p| p <= x);
    if past - first >= 2 {
        return Some(0.0); // duplicate observation
    }
    let left = if first > 0 {
        Some(x - points[first - 1])
    } else {
        None
    };
    let right = points.get(past).map(|&p| p - x);
    match (left, right) {
        (Some(l), Some(r)) => Some(l.min(r)),
        (Some(l), None) => Some(l),
        (None, Some(r)) => Some(r),
        (None, None) => None,
    }
}

/// Add-one-smoothed categorical frequencies.
#[derive(Debug, Clone)]
pub(crate) struct CategoricalDensity {
    probs: Vec<f64>,
}

impl CategoricalDensity {
    pub(crate) fn fit(n_choices: usize, observations: &[usize]) -> Self {
        let mut counts = vec![1.0f64; n_choices];
        for &o in observations {
            counts[o] += 1.0;
        }
        let total: f64 = counts.iter().sum();
        Self {
            probs: counts.into_iter().map(|c| c / total).collect(),
        }
    }

    pub(crate) fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen::<f64>();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }

    pub(crate) fn log_pdf(&self, choice: usize) -> f64 {
        self.probs[choice].ln()
    }
}
