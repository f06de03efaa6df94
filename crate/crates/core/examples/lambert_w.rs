//! Principal-branch Lambert W on a few points, with residuals.
//!
//! `cargo run --example lambert_w -- [x ...]`

use wpt_relay::numerics::{lambert_w0, ToleranceSpec, BRANCH_POINT};

fn main() {
    let tol = ToleranceSpec::default();
    let mut xs: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("x must be a number"))
        .collect();
    if xs.is_empty() {
        xs = vec![
            BRANCH_POINT,
            BRANCH_POINT + 1e-12,
            -0.2,
            0.0,
            1.0,
            std::f64::consts::E,
            1e3,
            1e12,
        ];
    }
    println!("{:>24} {:>24} {:>12}", "x", "W0(x)", "residual");
    for x in xs {
        match lambert_w0(x, &tol) {
            Ok(w) => println!("{x:>24.16e} {w:>24.16e} {:>12.2e}", w * w.exp() - x),
            Err(e) => println!("{x:>24.16e} error: {e}"),
        }
    }
}
