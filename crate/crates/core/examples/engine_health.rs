//! Convergence diagnostics for the iterative engine on the deep examples.

use paraproduct_lab::norms::x_norm_detailed;
use paraproduct_lab::sequences::{column_example, identity_example};

fn main() {
    for d in [8, 10, 12] {
        let lambda = column_example::<f64>(d).unwrap();
        let detail = x_norm_detailed(&lambda, d).unwrap();
        let s = detail.spectral.unwrap();
        println!(
            "column  d={d:2}: value={:.12} engine={:?} iters={} converged={} residual={:.2e}",
            detail.value, detail.engine, s.iterations, s.converged, s.residual
        );
    }
    for d in [6, 7, 8] {
        let lambda = identity_example::<f64>(d).unwrap();
        let detail = x_norm_detailed(&lambda, d).unwrap();
        match detail.spectral {
            Some(s) => println!(
                "identity d={d:2}: value={:.12} engine={:?} iters={} converged={} residual={:.2e}",
                detail.value, detail.engine, s.iterations, s.converged, s.residual
            ),
            None => println!("identity d={d:2}: value={:.12} engine={:?}", detail.value, detail.engine),
        }
    }
}
