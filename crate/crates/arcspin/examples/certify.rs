//! Evaluate the Dobrushin fineness certificate across a range of
//! discretisation levels.
//!
//! ```bash
//! cargo run --example certify
//! ```

use std::sync::Arc;

use arcspin::discretization::dobrushin_certificate;
use arcspin::lattice::{build_coupling_table, LatticeSpec};
use arcspin::model::ModelParams;

fn main() -> arcspin::Result<()> {
    let spec = LatticeSpec::ring(3, 1.5);
    let table = build_coupling_table(&spec)?;
    let params = ModelParams::new(1.0, 0.0, 0.0, Arc::new(table))?;

    println!("d = 1, alpha = 1.5, beta = 1.0");
    let reference = dobrushin_certificate(&params, &spec, 17)?;
    println!(
        "threshold q > {:.6}  (lattice sum truncated at {} with tail bound {:.3e})",
        reference.q_threshold, reference.cutoff, reference.tail_bound
    );
    println!("{:>4}  {:>12}  {:>8}  {:>10}", "q", "pair bound", "passes", "cbar");
    for q in [8, 12, 16, 17, 24, 48] {
        let cert = dobrushin_certificate(&params, &spec, q)?;
        println!(
            "{q:>4}  {:>12.6}  {:>8}  {:>10.4}",
            cert.pair_bound_sum, cert.passes, cert.heuristic_cbar
        );
    }
    println!();
    println!("certificate record for q = 17:");
    println!("{}", serde_json::to_string_pretty(&reference)?);
    Ok(())
}
