//! Numerical thresholds and sampling settings shared by every check.

/// Equality, positivity and rank thresholds.
///
/// `eq` compares matrices in Frobenius norm, `psd` is the eigenvalue floor
/// used for order relations, `rank` decides span membership and
/// pseudoinverse cutoffs, `group` merges nearly equal eigenvalues and
/// `solve` bounds linear-system residuals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub eq: f64,
    pub psd: f64,
    pub rank: f64,
    pub group: f64,
    pub solve: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eq: 1e-9,
            psd: 1e-9,
            rank: 1e-10,
            group: 1e-8,
            solve: 1e-8,
        }
    }
}

/// Seeded sampling budget for checks that have no finite certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub samples: usize,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            samples: 64,
            seed: 42,
        }
    }
}

impl Sampling {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed }
    }
}

/// Everything a conditional-expectation or process check needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Config {
    pub tol: Tolerances,
    pub sampling: Sampling,
    /// Associative subalgebras with at most this many minimal idempotents
    /// get every event enumerated when residuals are measured.
    pub max_enumerated_atoms: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            sampling: Sampling::default(),
            max_enumerated_atoms: 10,
        }
    }
}

impl Config {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.sampling.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.sampling.samples = samples;
        self
    }
}
