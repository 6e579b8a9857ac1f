//! Evaluate the irreversible rotation rates by exact quadrature and Monte
//! Carlo, and check them against the analytic envelope.
//!
//! ```bash
//! cargo run --example rates
//! ```

use std::sync::Arc;

use arcspin::discretization::DiscreteConfig;
use arcspin::lattice::{build_coupling_table, LatticeSpec};
use arcspin::model::ModelParams;
use arcspin::rates::{rate_mc, rate_quadrature, rate_upper_bound, McOptions};
use arcspin::Budget;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> arcspin::Result<()> {
    let q = 8;
    let table = Arc::new(build_coupling_table(&LatticeSpec::ring(3, 1.5))?);
    let params = ModelParams::new(0.5, 0.0, 0.0, table)?;
    let budget = Budget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    println!("3-ring, q = 8, beta = 0.5: rates out of a few states at site 0");
    println!("{:>10}  {:>14}  {:>22}  {:>10}", "state", "quadrature", "monte carlo", "envelope");
    for labels in [vec![1, 1, 1], vec![1, 5, 1], vec![2, 8, 4], vec![3, 3, 2]] {
        let state = DiscreteConfig::new(q, labels)?;
        let quad = rate_quadrature(&state, 0, &params, 64, &budget)?;
        let mc = rate_mc(&state, 0, &params, 20_000, &mut rng, &McOptions::default())?;
        let tags: Vec<String> = state.labels().iter().map(|l| l.to_string()).collect();
        println!(
            "{:>10}  {:>14.8}  {:>14.8} +- {:.1e}  {:>10.4}",
            tags.join("-"),
            quad.value,
            mc.value,
            mc.stderr,
            rate_upper_bound(0, &params, q)
        );
    }
    Ok(())
}
