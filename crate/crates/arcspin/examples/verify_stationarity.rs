//! Check that the symmetric discretised Gibbs measure is stationary for the
//! rotation dynamics: `mu'(Lf) = 0` for all single-site indicators.
//!
//! ```bash
//! cargo run --example verify_stationarity
//! ```

use std::sync::Arc;

use arcspin::lattice::{build_coupling_table, LatticeSpec};
use arcspin::model::ModelParams;
use arcspin::verify::{stationarity_residual, StationarityOptions};

fn main() -> arcspin::Result<()> {
    let table = Arc::new(build_coupling_table(&LatticeSpec::ring(3, 1.5))?);
    let params = ModelParams::new(0.3, 0.0, 0.0, table)?;

    for m in [16, 32, 64] {
        let report = stationarity_residual(
            &params,
            4,
            &StationarityOptions {
                m,
                ..Default::default()
            },
        )?;
        println!(
            "m = {m:>2}: max |mu'(Lf)| = {:.3e}  (tolerance {:.0e}, pass = {})",
            report.max_residual(),
            report.tolerance,
            report.pass
        );
    }
    Ok(())
}
