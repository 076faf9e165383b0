//! Builds a BFGS matrix from random curvature pairs and checks the
//! Woodbury solve against a dense one.
//!
//! ```text
//! cargo run --example bfgs_smw -- 40 6
//! ```

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rcm::linalg::{smw_apply_inverse, BfgsFactors};

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>());
    let n = args.next().and_then(Result::ok).unwrap_or(40);
    let pairs = args.next().and_then(Result::ok).unwrap_or(6);
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    // Curvature from a fixed SPD matrix, so every pair has yᵀs > 0.
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let h = &g * g.transpose() + DMatrix::identity(n, n);
    let mut b = BfgsFactors::new(n);
    for _ in 0..pairs {
        let s = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let y = &h * &s;
        b = b.append(&s, &y).expect("pairs have positive curvature");
        let secant = (b.apply(&s) - &y).norm() / y.norm();
        println!("width {:>3}  secant residual {secant:.2e}", b.width());
    }

    let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    for sigma in [1e-3, 1.0, 1e3] {
        let fast = smw_apply_inverse(&b, sigma, &v).expect("well conditioned");
        let dense = (b.dense() + DMatrix::identity(n, n) * sigma)
            .lu()
            .solve(&v)
            .expect("nonsingular");
        println!("sigma {sigma:>7.0e}  |smw - dense| / |dense| = {:.2e}", (fast - &dense).norm() / dense.norm());
    }
}
