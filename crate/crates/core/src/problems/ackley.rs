use std::f64::consts::{E, PI};

use nalgebra::DVector;

pub const ACKLEY_A: f64 = 20.0;
pub const ACKLEY_B: f64 = 0.2;

/// `−a·exp(−b·√mean(x²)) − exp(mean(cos 2πx)) + a + e` with `a = 20`, `b = 0.2`.
pub fn ackley_value(x: &DVector<f64>) -> f64 {
    let n = x.len() as f64;
    let rms = (x.norm_squared() / n).sqrt();
    let mean_cos = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    -ACKLEY_A * (-ACKLEY_B * rms).exp() - mean_cos.exp() + ACKLEY_A + E
}

/// Gradient of [`ackley_value`]. The root-mean-square term is not
/// differentiable at the origin; its contribution there is taken as zero.
pub fn ackley_gradient(x: &DVector<f64>) -> DVector<f64> {
    let n = x.len() as f64;
    let rms = (x.norm_squared() / n).sqrt();
    let mean_cos = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    let radial = if rms > 0.0 {
        ACKLEY_A * ACKLEY_B * (-ACKLEY_B * rms).exp() / (n * rms)
    } else {
        0.0
    };
    let wave = 2.0 * PI * mean_cos.exp() / n;
    x.map(|v| radial * v + wave * (2.0 * PI * v).sin())
}
