//! Finite-volume simulation and verification toolkit for long-range XY spin
//! systems with arc-discretised state spaces.
//!
//! The crate covers the full pipeline from geometry to verified dynamics:
//!
//! * [`lattice`] — rings and tori with power-law couplings `J(x,y) = |x-y|^{-alpha}`,
//!   plus certified tail bounds for the infinite-lattice coupling sums.
//! * [`model`] — the continuous-spin Hamiltonian, local energies and the global
//!   rotation map.
//! * [`discretization`] — the coarse-graining of the circle into `q` equal arcs
//!   and the Dobrushin fineness certificate for it.
//! * [`gibbs`] — exact tensor quadrature and heat-bath sampling for constrained
//!   finite-volume Gibbs measures.
//! * [`rates`] — the irreversible single-site rotation rates, evaluated by
//!   quadrature or Monte Carlo, with their analytic envelope.
//! * [`dynamics`] — continuous-time simulation by thinning, explicit generator
//!   matrices for tiny systems and the reversible heat-bath perturbation kernel.
//! * [`verify`] — the experiment suite: stationarity and rotation identities,
//!   forward–backward constancy, orbit tracking and uniqueness checks.
//! * [`cli`] — configuration parsing, deterministic seeding and result files
//!   for the `arcspin` binary.
//!
//! Every statistical routine consumes an explicit random stream and every
//! deterministic routine is bit-reproducible given the same inputs, so the
//! verification experiments can be re-run and diffed.

pub mod cli;
pub mod discretization;
pub mod dynamics;
pub mod gibbs;
pub mod lattice;
pub mod model;
pub mod quadrature;
pub mod rates;
pub mod stats;
pub mod verify;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A domain precondition was violated (bad `alpha`, empty lattice, ...).
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },
    /// A quadrature or state-space budget was exceeded; the message names the
    /// offending dimensions.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    /// The rejection sampler hit its iteration cap. This is a diagnostic
    /// condition: acceptance is bounded below analytically, so reaching the
    /// cap means the envelope was computed from inconsistent inputs.
    #[error("rejection sampler hit the iteration cap at site {site} after {tries} draws")]
    RejectionCap { site: usize, tries: u64 },
    /// A thinning acceptance probability exceeded 1 in exact (quadrature)
    /// mode, i.e. a rate escaped its proven envelope.
    #[error("thinning bound violated at site {site}: rate {rate} exceeds envelope {bound}")]
    BoundViolation { site: usize, rate: f64, bound: f64 },
    /// A run-configuration key failed to parse or validate.
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Resource limits for exact computations over discrete state spaces and
/// quadrature tensors.
///
/// The defaults allow at most 5 tensor dimensions at Gauss–Legendre order 64
/// and at most 4096 discrete states for generator-matrix work.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of sites entering one quadrature tensor.
    pub max_tensor_sites: usize,
    /// Maximum Gauss–Legendre order per site.
    pub max_order: usize,
    /// Maximum number of discrete configurations (`q^N`) for tabulated work.
    pub max_states: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_tensor_sites: 5,
            max_order: 64,
            max_states: 4096,
        }
    }
}

impl Budget {
    pub(crate) fn check_tensor(&self, sites: usize, order: usize) -> Result<()> {
        if sites > self.max_tensor_sites {
            return Err(Error::BudgetExceeded(format!(
                "{sites} tensor sites requested, budget allows {}",
                self.max_tensor_sites
            )));
        }
        if order > self.max_order {
            return Err(Error::BudgetExceeded(format!(
                "quadrature order {order} requested, budget allows {}",
                self.max_order
            )));
        }
        Ok(())
    }

    pub(crate) fn check_states(&self, q: usize, n_sites: usize) -> Result<()> {
        let mut states = 1usize;
        for _ in 0..n_sites {
            states = states.saturating_mul(q);
            if states > self.max_states {
                return Err(Error::BudgetExceeded(format!(
                    "q^N = {q}^{n_sites} discrete states exceed budget {}",
                    self.max_states
                )));
            }
        }
        Ok(())
    }
}
