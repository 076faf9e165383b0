//! Scalable unconstrained test functions with analytic gradients.
//!
//! Block-separable functions (`extended-*`, `rosenbrock`) act on consecutive
//! blocks of 2 or 4 variables; trailing variables that do not fill a block
//! are left out of the sum.

use nalgebra::{DMatrix, DVector};

pub type ValueFn = fn(&DVector<f64>) -> f64;
pub type GradientFn = fn(&DVector<f64>) -> DVector<f64>;
/// First `m` rows of the Hessian.
pub type HessianRowsFn = fn(&DVector<f64>, usize) -> DMatrix<f64>;

#[derive(Debug, Clone, Copy)]
pub struct ClassicFunction {
    pub id: &'static str,
    pub name: &'static str,
    pub value: ValueFn,
    pub gradient: GradientFn,
    pub hessian_rows: Option<HessianRowsFn>,
}

static CLASSIC_SET: [ClassicFunction; 14] = [
    ClassicFunction {
        id: "trid",
        name: "Trid",
        value: trid_value,
        gradient: trid_gradient,
        hessian_rows: Some(trid_hessian_rows),
    },
    ClassicFunction {
        id: "rosenbrock",
        name: "Extended Rosenbrock",
        value: rosenbrock_value,
        gradient: rosenbrock_gradient,
        hessian_rows: Some(rosenbrock_hessian_rows),
    },
    ClassicFunction {
        id: "dixon-price",
        name: "Dixon Price",
        value: dixon_price_value,
        gradient: dixon_price_gradient,
        hessian_rows: Some(dixon_price_hessian_rows),
    },
    ClassicFunction {
        id: "broyden-tridiagonal",
        name: "Broyden Tridiagonal",
        value: broyden_tridiagonal_value,
        gradient: broyden_tridiagonal_gradient,
        hessian_rows: Some(broyden_tridiagonal_hessian_rows),
    },
    ClassicFunction {
        id: "extended-powell-singular",
        name: "Extended Powell Singular",
        value: powell_value,
        gradient: powell_gradient,
        hessian_rows: Some(powell_hessian_rows),
    },
    ClassicFunction {
        id: "discrete-boundary-value",
        name: "Discrete Boundary-Value",
        value: dbv_value,
        gradient: dbv_gradient,
        hessian_rows: Some(dbv_hessian_rows),
    },
    ClassicFunction {
        id: "trigonometric",
        name: "Trigonometric",
        value: trigonometric_value,
        gradient: trigonometric_gradient,
        hessian_rows: None,
    },
    ClassicFunction {
        id: "singular-broyden",
        name: "Singular Broyden",
        value: singular_broyden_value,
        gradient: singular_broyden_gradient,
        hessian_rows: Some(singular_broyden_hessian_rows),
    },
    ClassicFunction {
        id: "extended-wood",
        name: "Extended Wood",
        value: wood_value,
        gradient: wood_gradient,
        hessian_rows: Some(wood_hessian_rows),
    },
    ClassicFunction {
        id: "extended-cliff",
        name: "Extended Cliff",
        value: cliff_value,
        gradient: cliff_gradient,
        hessian_rows: Some(cliff_hessian_rows),
    },
    ClassicFunction {
        id: "extended-psc1",
        name: "Extended Psc1",
        value: psc1_value,
        gradient: psc1_gradient,
        hessian_rows: Some(psc1_hessian_rows),
    },
    ClassicFunction {
        id: "eg2",
        name: "EG2",
        value: eg2_value,
        gradient: eg2_gradient,
        hessian_rows: None,
    },
    ClassicFunction {
        id: "extended-bd1",
        name: "Extended BD1",
        value: bd1_value,
        gradient: bd1_gradient,
        hessian_rows: Some(bd1_hessian_rows),
    },
    ClassicFunction {
        id: "griewank",
        name: "Griewank",
        value: griewank_value,
        gradient: griewank_gradient,
        hessian_rows: None,
    },
];

pub fn classic_set() -> &'static [ClassicFunction] {
    &CLASSIC_SET
}

pub fn classic_by_id(id: &str) -> Option<&'static ClassicFunction> {
    CLASSIC_SET.iter().find(|f| f.id == id)
}

// ---------------------------------------------------------------- block sums

/// `f(z, g, h)` returns the block value and writes its gradient and its
/// row-major Hessian.
type BlockFn = fn(&[f64], &mut [f64], &mut [f64]) -> f64;

fn block_eval(x: &DVector<f64>, k: usize, f: BlockFn) -> (f64, DVector<f64>) {
    let n = x.len();
    let mut g = DVector::zeros(n);
    let (mut gb, mut hb) = (vec![0.0; k], vec![0.0; k * k]);
    let mut total = 0.0;
    for start in (0..n / k).map(|b| b * k) {
        total += f(&x.as_slice()[start..start + k], &mut gb, &mut hb);
        g.rows_mut(start, k).copy_from_slice(&gb);
    }
    (total, g)
}

fn block_hessian_rows(x: &DVector<f64>, m: usize, k: usize, f: BlockFn) -> DMatrix<f64> {
    let n = x.len();
    let mut h = DMatrix::zeros(m, n);
    let (mut gb, mut hb) = (vec![0.0; k], vec![0.0; k * k]);
    for start in (0..n / k).map(|b| b * k).take_while(|&s| s < m) {
        f(&x.as_slice()[start..start + k], &mut gb, &mut hb);
        for r in (0..k).filter(|r| start + r < m) {
            for c in 0..k {
                h[(start + r, start + c)] = hb[r * k + c];
            }
        }
    }
    h
}

fn rosenbrock_block(z: &[f64], g: &mut [f64], h: &mut [f64]) -> f64 {
    let (a, b) = (z[0], z[1]);
    let t = b - a * a;
    g[0] = -400.0 * a * t - 2.0 * (1.0 - a);
    g[1] = 200.0 * t;
    h[0] = 1200.0 * a * a - 400.0 * b + 2.0;
    h[1] = -400.0 * a;
    h[2] = h[1];
    h[3] = 200.0;
    100.0 * t * t + (1.0 - a).powi(2)
}

fn powell_block(z: &[f64], g: &mut [f64], h: &mut [f64]) -> f64 {
    let (a, b, c, d) = (z[0], z[1], z[2], z[3]);
    let (u, v, w, p) = (a + 10.0 * b, c - d, b - 2.0 * c, a - d);
    g[0] = 2.0 * u + 40.0 * p.powi(3);
    g[1] = 20.0 * u + 4.0 * w.powi(3);
    g[2] = 10.0 * v - 8.0 * w.powi(3);
    g[3] = -10.0 * v - 40.0 * p.powi(3);
    let (p2, w2) = (120.0 * p * p, 12.0 * w * w);
    let rows = [
        [2.0 + p2, 20.0, 0.0, -p2],
        [20.0, 200.0 + w2, -2.0 * w2, 0.0],
        [0.0, -2.0 * w2, 10.0 + 4.0 * w2, -10.0],
        [-p2, 0.0, -10.0, 10.0 + p2],
    ];
    h.copy_from_slice(rows.as_flattened());
    u * u + 5.0 * v * v + w.powi(4) + 10.0 * p.powi(4)
}

fn wood_block(z: &[f64], g: &mut [f64], h: &mut [f64]) -> f64 {
    let (a, b, c, d) = (z[0], z[1], z[2], z[3]);
    let (t1, t2) = (a * a - b, c * c - d);
    g[0] = 400.0 * a * t1 + 2.0 * (a - 1.0);
    g[1] = -200.0 * t1 + 20.2 * (b - 1.0) + 19.8 * (d - 1.0);
    g[2] = 360.0 * c * t2 + 2.0 * (c - 1.0);
    g[3] = -180.0 * t2 + 20.2 * (d - 1.0) + 19.8 * (b - 1.0);
    let rows = [
        [1200.0 * a * a - 400.0 * b + 2.0, -400.0 * a, 0.0, 0.0],
        [-400.0 * a, 220.2, 0.0, 19.8],
        [0.0, 0.0, 1080.0 * c * c - 360.0 * d + 2.0, -360.0 * c],
        [0.0, 19.8, -360.0 * c, 200.2],
    ];
    h.copy_from_slice(rows.as_flattened());
    100.0 * t1 * t1
        + (a - 1.0).powi(2)
        + 90.0 * t2 * t2
        + (c - 1.0).powi(2)
        + 10.1 * ((b - 1.0).powi(2) + (d - 1.0).powi(2))
        + 19.8 * (b - 1.0) * (d - 1.0)
}

fn cliff_block(z: &[f64], g: &mut [f64], h: &mut [f64]) -> f64 {
    let (a, b) = (z[0], z[1]);
    let e = (20.0 * (a - b)).exp();
    g[0] = 2.0 * (a - 3.0) / 1e4 - 1.0 + 20.0 * e;
    g[1] = 1.0 - 20.0 * e;
    h[0] = 2e-4 + 400.0 * e;
    h[1] = -400.0 * e;
    h[2] = h[1];
    h[3] = 400.0 * e;
    ((a - 3.0) / 100.0).powi(2) - (a - b) + e
}

fn psc1_block(z: &[f64], g: &mut [f64], h: &mut [f64]) -> f64 {
    let (a, b) = (z[0], z[1]);
    let q = a * a + b * b + a * b;
    let (qa, qb) = (2.0 * a + b, 2.0 * b + a);
    g[0] = 2.0 * q * qa + (2.0 * a).sin();
    g[1] = 2.0 * q * qb - (2.0 * b).sin();
    h[0] = 2.0 * qa * qa + 4.0 * q + 2.0 * (2.0 * a).cos();
    h[1] = 2.0 * qa * qb + 2.0 * q;
    h[2] = h[1];
    h[3] = 2.0 * qb * qb + 4.0 * q - 2.0 * (2.0 * b).cos();
    q * q + a.sin().powi(2) + b.cos().powi(2)
}

fn bd1_block(z: &[f64], g: &mut [f64], h: &mut [f64]) -> f64 {
    let (a, b) = (z[0], z[1]);
    let p = a * a + b - 2.0;
    let e = (a - 1.0).exp();
    let r = e - b;
    g[0] = 4.0 * a * p + 2.0 * r * e;
    g[1] = 2.0 * p - 2.0 * r;
    h[0] = 4.0 * p + 8.0 * a * a + 2.0 * e * e + 2.0 * r * e;
    h[1] = 4.0 * a - 2.0 * e;
    h[2] = h[1];
    h[3] = 4.0;
    p * p + r * r
}

macro_rules! block_function {
    ($value:ident, $gradient:ident, $hessian:ident, $k:expr, $block:ident) => {
        pub fn $value(x: &DVector<f64>) -> f64 {
            block_eval(x, $k, $block).0
        }
        pub fn $gradient(x: &DVector<f64>) -> DVector<f64> {
            block_eval(x, $k, $block).1
        }
        pub fn $hessian(x: &DVector<f64>, m: usize) -> DMatrix<f64> {
            block_hessian_rows(x, m, $k, $block)
        }
    };
}

block_function!(rosenbrock_value, rosenbrock_gradient, rosenbrock_hessian_rows, 2, rosenbrock_block);
block_function!(powell_value, powell_gradient, powell_hessian_rows, 4, powell_block);
block_function!(wood_value, wood_gradient, wood_hessian_rows, 4, wood_block);
block_function!(cliff_value, cliff_gradient, cliff_hessian_rows, 2, cliff_block);
block_function!(psc1_value, psc1_gradient, psc1_hessian_rows, 2, psc1_block);
block_function!(bd1_value, bd1_gradient, bd1_hessian_rows, 2, bd1_block);

// ------------------------------------------------------ tridiagonal residuals

/// Residuals `r_i(x_{i−1}, x_i, x_{i+1})` with constant off-diagonal
/// derivatives `a = ∂r_i/∂x_{i−1}`, `b = ∂r_i/∂x_{i+1}`, a diagonal
/// derivative `d_i` and curvature `e_i = ∂²r_i/∂x_i²`.
struct Band {
    r: Vec<f64>,
    d: Vec<f64>,
    e: Vec<f64>,
    a: f64,
    b: f64,
}

fn neighbours(x: &DVector<f64>, i: usize) -> (f64, f64) {
    let prev = if i > 0 { x[i - 1] } else { 0.0 };
    let next = if i + 1 < x.len() { x[i + 1] } else { 0.0 };
    (prev, next)
}

/// `r_i = (3 − 2 x_i) x_i − x_{i−1} − 2 x_{i+1} + 1` with `x_0 = x_{n+1} = 0`.
pub fn broyden_residuals(x: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(broyden_band(x).r)
}

fn broyden_band(x: &DVector<f64>) -> Band {
    let n = x.len();
    let r = (0..n)
        .map(|i| {
            let (p, q) = neighbours(x, i);
            (3.0 - 2.0 * x[i]) * x[i] - p - 2.0 * q + 1.0
        })
        .collect();
    Band {
        r,
        d: x.iter().map(|v| 3.0 - 4.0 * v).collect(),
        e: vec![-4.0; n],
        a: -1.0,
        b: -2.0,
    }
}

/// `r_i = 2 x_i − x_{i−1} − x_{i+1} + h² (x_i + t_i + 1)³ / 2`, `h = 1/(n+1)`, `t_i = i h`.
fn dbv_band(x: &DVector<f64>) -> Band {
    let n = x.len();
    let h = 1.0 / (n as f64 + 1.0);
    let u: Vec<f64> = (0..n).map(|i| x[i] + (i as f64 + 1.0) * h + 1.0).collect();
    let r = (0..n)
        .map(|i| {
            let (p, q) = neighbours(x, i);
            2.0 * x[i] - p - q + 0.5 * h * h * u[i].powi(3)
        })
        .collect();
    Band {
        r,
        d: u.iter().map(|v| 2.0 + 1.5 * h * h * v * v).collect(),
        e: u.iter().map(|v| 3.0 * h * h * v).collect(),
        a: -1.0,
        b: -1.0,
    }
}

/// `Σ r_i^p`.
fn band_value(band: &Band, p: i32) -> f64 {
    band.r.iter().map(|r| r.powi(p)).sum()
}

fn band_gradient(band: &Band, p: i32) -> DVector<f64> {
    let n = band.r.len();
    let dphi: Vec<f64> = band.r.iter().map(|r| p as f64 * r.powi(p - 1)).collect();
    DVector::from_fn(n, |j, _| {
        let mut g = dphi[j] * band.d[j];
        if j + 1 < n {
            g += dphi[j + 1] * band.a;
        }
        if j > 0 {
            g += dphi[j - 1] * band.b;
        }
        g
    })
}

fn band_hessian_rows(band: &Band, m: usize, p: i32) -> DMatrix<f64> {
    let n = band.r.len();
    let pf = p as f64;
    let dphi = |r: f64| pf * r.powi(p - 1);
    let ddphi = |r: f64| pf * (pf - 1.0) * r.powi(p - 2);
    let mut h = DMatrix::zeros(m, n);
    for j in 0..m {
        let lo = j.saturating_sub(1);
        let hi = (j + 1).min(n - 1);
        for i in lo..=hi {
            let jij = if i == j {
                band.d[i]
            } else if i == j + 1 {
                band.a
            } else {
                band.b
            };
            let w = ddphi(band.r[i]) * jij;
            if i > 0 {
                h[(j, i - 1)] += w * band.a;
            }
            h[(j, i)] += w * band.d[i];
            if i + 1 < n {
                h[(j, i + 1)] += w * band.b;
            }
        }
        h[(j, j)] += dphi(band.r[j]) * band.e[j];
    }
    h
}

pub fn broyden_tridiagonal_value(x: &DVector<f64>) -> f64 {
    band_value(&broyden_band(x), 2)
}
pub fn broyden_tridiagonal_gradient(x: &DVector<f64>) -> DVector<f64> {
    band_gradient(&broyden_band(x), 2)
}
pub fn broyden_tridiagonal_hessian_rows(x: &DVector<f64>, m: usize) -> DMatrix<f64> {
    band_hessian_rows(&broyden_band(x), m, 2)
}

/// Broyden tridiagonal residuals raised to the fourth power, so the
/// Hessian is singular at every root.
pub fn singular_broyden_value(x: &DVector<f64>) -> f64 {
    band_value(&broyden_band(x), 4)
}
pub fn singular_broyden_gradient(x: &DVector<f64>) -> DVector<f64> {
    band_gradient(&broyden_band(x), 4)
}
pub fn singular_broyden_hessian_rows(x: &DVector<f64>, m: usize) -> DMatrix<f64> {
    band_hessian_rows(&broyden_band(x), m, 4)
}

pub fn dbv_value(x: &DVector<f64>) -> f64 {
    band_value(&dbv_band(x), 2)
}
pub fn dbv_gradient(x: &DVector<f64>) -> DVector<f64> {
    band_gradient(&dbv_band(x), 2)
}
pub fn dbv_hessian_rows(x: &DVector<f64>, m: usize) -> DMatrix<f64> {
    band_hessian_rows(&dbv_band(x), m, 2)
}

// -------------------------------------------------------------------- others

/// `Σ (x_i − 1)² − Σ x_i x_{i−1}`.
pub fn trid_value(x: &DVector<f64>) -> f64 {
    let sq: f64 = x.iter().map(|v| (v - 1.0).powi(2)).sum();
    let cross: f64 = (1..x.len()).map(|i| x[i] * x[i - 1]).sum();
    sq - cross
}

pub fn trid_gradient(x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    DVector::from_fn(n, |i, _| {
        let (p, q) = neighbours(x, i);
        2.0 * (x[i] - 1.0) - p - q
    })
}

pub fn trid_hessian_rows(x: &DVector<f64>, m: usize) -> DMatrix<f64> {
    let n = x.len();
    DMatrix::from_fn(m, n, |i, j| match i.abs_diff(j) {
        0 => 2.0,
        1 => -1.0,
        _ => 0.0,
    })
}

/// `(x_1 − 1)² + Σ_{i≥2} i (2 x_i² − x_{i−1})²`.
pub fn dixon_price_value(x: &DVector<f64>) -> f64 {
    let head = (x[0] - 1.0).powi(2);
    head + (1..x.len())
        .map(|j| (j as f64 + 1.0) * (2.0 * x[j] * x[j] - x[j - 1]).powi(2))
        .sum::<f64>()
}

pub fn dixon_price_gradient(x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    DVector::from_fn(n, |j, _| {
        let mut g = if j == 0 {
            2.0 * (x[0] - 1.0)
        } else {
            8.0 * (j as f64 + 1.0) * x[j] * (2.0 * x[j] * x[j] - x[j - 1])
        };
        if j + 1 < n {
            g -= 2.0 * (j as f64 + 2.0) * (2.0 * x[j + 1] * x[j + 1] - x[j]);
        }
        g
    })
}

pub fn dixon_price_hessian_rows(x: &DVector<f64>, m: usize) -> DMatrix<f64> {
    let n = x.len();
    let mut h = DMatrix::zeros(m, n);
    for j in 0..m {
        let w = j as f64 + 1.0;
        h[(j, j)] = if j == 0 {
            2.0
        } else {
            8.0 * w * (6.0 * x[j] * x[j] - x[j - 1])
        };
        if j > 0 {
            h[(j, j - 1)] = -8.0 * w * x[j];
        }
        if j + 1 < n {
            h[(j, j)] += 2.0 * (w + 1.0);
            h[(j, j + 1)] = -8.0 * (w + 1.0) * x[j + 1];
        }
    }
    h
}

fn trigonometric_residuals(x: &DVector<f64>) -> DVector<f64> {
    let n = x.len() as f64;
    let sum_cos: f64 = x.iter().map(|v| v.cos()).sum();
    DVector::from_fn(x.len(), |i, _| {
        n - sum_cos + (i as f64 + 1.0) * (1.0 - x[i].cos()) - x[i].sin()
    })
}

/// `Σ r_i²` with `r_i = n − Σ cos x_j + i (1 − cos x_i) − sin x_i`.
pub fn trigonometric_value(x: &DVector<f64>) -> f64 {
    trigonometric_residuals(x).norm_squared()
}

pub fn trigonometric_gradient(x: &DVector<f64>) -> DVector<f64> {
    let r = trigonometric_residuals(x);
    let sum_r = r.sum();
    DVector::from_fn(x.len(), |j, _| {
        let (s, c) = x[j].sin_cos();
        2.0 * (s * sum_r + r[j] * ((j as f64 + 1.0) * s - c))
    })
}

/// `Σ_{i<n} sin(x_1 + x_i² − 1) + sin(x_n²) / 2`.
pub fn eg2_value(x: &DVector<f64>) -> f64 {
    let n = x.len();
    let body: f64 = (0..n - 1).map(|i| (x[0] + x[i] * x[i] - 1.0).sin()).sum();
    body + 0.5 * (x[n - 1] * x[n - 1]).sin()
}

pub fn eg2_gradient(x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let mut g = DVector::zeros(n);
    for i in 0..n - 1 {
        let c = (x[0] + x[i] * x[i] - 1.0).cos();
        g[0] += c;
        g[i] += 2.0 * x[i] * c;
    }
    g[n - 1] += x[n - 1] * (x[n - 1] * x[n - 1]).cos();
    g
}

/// `1 + Σ x_i² / 4000 − Π cos(x_i / √i)`.
pub fn griewank_value(x: &DVector<f64>) -> f64 {
    let sq = x.norm_squared() / 4000.0;
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v / (i as f64 + 1.0).sqrt()).cos())
        .product();
    1.0 + sq - prod
}

pub fn griewank_gradient(x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let scale: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0).sqrt()).collect();
    let cos: Vec<f64> = (0..n).map(|i| (x[i] / scale[i]).cos()).collect();
    // Products of all other cosines, without dividing by a possibly zero one.
    let mut before = vec![1.0; n + 1];
    for i in 0..n {
        before[i + 1] = before[i] * cos[i];
    }
    let mut after = 1.0;
    let mut g = DVector::zeros(n);
    for i in (0..n).rev() {
        let others = before[i] * after;
        g[i] = x[i] / 2000.0 + (x[i] / scale[i]).sin() / scale[i] * others;
        after *= cos[i];
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::central_gradient;

    #[test]
    fn rosenbrock_minimizer() {
        let x = DVector::from_element(6, 1.0);
        assert_eq!(rosenbrock_value(&x), 0.0);
        assert_eq!(rosenbrock_gradient(&x), DVector::zeros(6));
    }

    #[test]
    fn dixon_price_at_ones() {
        // f = (x1−1)² + 2(2x2² − x1)² + 3(2x3² − x2)², expanded by hand at x = 1:
        // g1 = 2(x1−1) − 4(2x2² − x1) = −4
        // g2 = 16 x2 (2x2² − x1) − 6(2x3² − x2) = 16 − 6 = 10
        // g3 = 24 x3 (2x3² − x2) = 24
        let g = dixon_price_gradient(&DVector::from_element(3, 1.0));
        assert_eq!(g.as_slice(), &[-4.0, 10.0, 24.0]);
        assert_eq!(dixon_price_value(&DVector::from_element(3, 1.0)), 5.0);
    }

    #[test]
    fn broyden_residual_pattern() {
        let r = broyden_residuals(&DVector::from_element(5, 1.0));
        // first: 1 − 0 − 2 + 1, interior: 1 − 1 − 2 + 1, last: 1 − 1 − 0 + 1
        assert_eq!(r.as_slice(), &[0.0, -1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn trid_is_quadratic() {
        let x = DVector::from_vec(vec![0.3, -1.0, 2.0]);
        let h = trid_hessian_rows(&x, 3);
        let g0 = trid_gradient(&DVector::zeros(3));
        assert!((trid_gradient(&x) - (g0 + &h * &x)).amax() < 1e-15);
    }

    #[test]
    fn griewank_with_a_zero_cosine() {
        let x = DVector::from_vec(vec![std::f64::consts::FRAC_PI_2, 0.4, -0.7]);
        let fd = central_gradient(&griewank_value, &x);
        assert!((griewank_gradient(&x) - fd).amax() < 1e-8);
    }

    #[test]
    fn hessian_rows_match_difference_of_gradient() {
        let x = DVector::from_fn(8, |i, _| 0.1 + 0.17 * i as f64 - 0.05 * (i % 3) as f64);
        for f in classic_set() {
            let Some(rows) = f.hessian_rows else { continue };
            let h = rows(&x, 5);
            let grad = f.gradient;
            let fd = crate::model::central_jacobian(&|z| grad(z).rows(0, 5).into(), &x, 5);
            let scale = fd.amax().max(1.0);
            assert!((&h - &fd).amax() / scale < 1e-7, "{}: {}", f.id, (&h - &fd).amax());
        }
    }
}
