//! Check the infinitesimal rotation identity with a rotating field:
//! `d/d eps mu'_{theta+eps}(f) = mu'_theta(L_theta f)`, and watch the
//! finite-difference error vanish at second order.
//!
//! ```bash
//! cargo run --example verify_rotation
//! ```

use std::sync::Arc;

use arcspin::lattice::{build_coupling_table, LatticeSpec};
use arcspin::model::ModelParams;
use arcspin::verify::{rotation_residual, RotationOptions};

fn main() -> arcspin::Result<()> {
    let table = Arc::new(build_coupling_table(&LatticeSpec::ring(3, 1.5))?);
    let params = ModelParams::new(0.3, 0.2, 0.0, table)?;

    println!("central differences over the field angle, m = 64:");
    let mut prev: Option<(f64, f64)> = None;
    for eps in [1e-3, 5e-4, 2.5e-4, 1e-4] {
        let report = rotation_residual(
            &params,
            4,
            &RotationOptions {
                eps_fd: eps,
                ..Default::default()
            },
        )?;
        let r = report.max_residual();
        match prev {
            Some((p_eps, p_r)) => println!(
                "eps = {eps:.1e}: residual {r:.3e}  (observed order {:.3})",
                (p_r / r).ln() / (p_eps / eps).ln()
            ),
            None => println!("eps = {eps:.1e}: residual {r:.3e}"),
        }
        prev = Some((eps, r));
    }
    Ok(())
}
