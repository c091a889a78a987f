//! Brute-force calibration sweep for the comparison constants in
//! `config.rs`: runs the shared instance distribution at depth ≤ 3 and
//! reports the largest observed ratio of each embedding inequality. The
//! frozen constants are these maxima doubled.
//!
//!     cargo run --release -p paraproduct-lab --example calibrate

use paraproduct_lab::bmo::{mixed_bmo, prod_bmo_exact, square_function, Orientation};
use paraproduct_lab::experiments::sufficiency_instance;
use paraproduct_lab::norms::xprime_norm;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SWEEP_SEED: u64 = 7701;
const SWEEP_TRIALS: usize = 1000;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(SWEEP_SEED);
    let mut max_emb: f64 = 0.0;
    let mut max_prod: f64 = 0.0;
    let mut max_car: f64 = 0.0;

    for _ in 0..SWEEP_TRIALS {
        let (lambda, a, u, g) = sufficiency_instance(&mut rng);
        let depth = 3;

        let bmo = prod_bmo_exact(&lambda).expect("support within cap");

        // Σ |λ_R||A_R| against bmo · ‖s_A‖₁.
        let mut lhs = 0.0;
        for (r, v) in lambda.iter() {
            lhs += v.abs() * a.get(r).abs();
        }
        let sa_l1 = square_function(&a, depth).expect("depth resolves A").l1_norm();
        if lhs > 0.0 {
            max_emb = max_emb.max(lhs / (bmo * sa_l1));
        }

        // Unconditional norm against product BMO.
        let xp = xprime_norm(&lambda, depth).expect("depth resolves λ");
        max_prod = max_prod.max(xp / bmo);

        // ℓ¹(L²) × ℓ²(L²) form against the one-parameter BMO condition.
        let mixed = mixed_bmo(&lambda, Orientation::XFixed).expect("nonempty support");
        let mut form_lhs = 0.0;
        for (rect, value) in lambda.iter() {
            let g_avg = g.average(&rect.y, &rect.x).unwrap();
            let u_avg = u.average(&rect.x, &rect.y).unwrap();
            form_lhs += (value * g_avg * u_avg).abs();
        }
        let denom = mixed * g.norm_sq().sqrt() * u.norm_l1_l2();
        if form_lhs > 0.0 {
            max_car = max_car.max(form_lhs / denom);
        }
    }

    println!("sweep: {SWEEP_TRIALS} instances, seed {SWEEP_SEED}, depth <= 3");
    println!("max ratio emb  = {max_emb:.6}  -> C_EMB  = {:.6}", 2.0 * max_emb);
    println!("max ratio prod = {max_prod:.6}  -> C_PROD = {:.6}", 2.0 * max_prod);
    println!("max ratio car  = {max_car:.6}  -> C_CAR  = {:.6}", 2.0 * max_car);
}
