//! Small problems from the Hock–Schittkowski collection.

use std::f64::consts::PI;

use nalgebra::{dmatrix, dvector, DVector};

use super::{KnownOptimum, NamedProblem};
use crate::model::Problem;

const HS_PROVENANCE: &str = "formulation, start point and optimum transcribed from the Hock–Schittkowski test collection";

/// Published optimal value of HS100, attained with the two constraints
/// below active.
pub const HS100_OPTIMUM: f64 = 680.630_057_3;

pub const HS_IDS: [&str; 5] = ["hs007", "hs008", "hs009", "hs046", "hs100lnp"];

pub fn hs_set() -> Vec<NamedProblem> {
    HS_IDS.iter().filter_map(|id| hs_problem(id)).collect()
}

pub fn hs_problem(id: &str) -> Option<NamedProblem> {
    let (problem, known_optimum) = match id {
        "hs007" => (hs007(), Some(-(3.0f64.sqrt()))),
        "hs008" => (hs008(), Some(-1.0)),
        "hs009" => (hs009(), Some(-0.5)),
        "hs046" => (hs046(), Some(0.0)),
        "hs100lnp" => (hs100lnp(), Some(HS100_OPTIMUM)),
        _ => return None,
    };
    Some(NamedProblem {
        id: id.to_string(),
        scale_params: [("n".to_string(), problem.n()), ("m".to_string(), problem.m())]
            .into_iter()
            .collect(),
        problem,
        known_optimum: known_optimum.map(|value| KnownOptimum {
            value,
            note: HS_PROVENANCE,
        }),
        provenance: HS_PROVENANCE.to_string(),
    })
}

/// `ln(1 + x1²) − x2` on `(1 + x1²)² + x2² = 4`.
fn hs007() -> Problem {
    Problem::new("hs007", dvector![2.0, 2.0], |x| (1.0 + x[0] * x[0]).ln() - x[1])
        .with_gradient(|x| dvector![2.0 * x[0] / (1.0 + x[0] * x[0]), -1.0])
        .with_constraints(1, |x| {
            let t = 1.0 + x[0] * x[0];
            dvector![t * t + x[1] * x[1] - 4.0]
        })
        .with_jacobian(|x| dmatrix![4.0 * x[0] * (1.0 + x[0] * x[0]), 2.0 * x[1]])
}

/// Constant objective on the intersection of a circle and a hyperbola.
fn hs008() -> Problem {
    Problem::new("hs008", dvector![2.0, 1.0], |_| -1.0)
        .with_gradient(|_| DVector::zeros(2))
        .with_constraints(2, |x| {
            dvector![x[0] * x[0] + x[1] * x[1] - 25.0, x[0] * x[1] - 9.0]
        })
        .with_jacobian(|x| dmatrix![2.0 * x[0], 2.0 * x[1]; x[1], x[0]])
}

/// `sin(π x1 / 12) cos(π x2 / 16)` on `4 x1 − 3 x2 = 0`.
fn hs009() -> Problem {
    Problem::new("hs009", dvector![0.0, 0.0], |x| {
        (PI * x[0] / 12.0).sin() * (PI * x[1] / 16.0).cos()
    })
    .with_gradient(|x| {
        let (a, b) = (PI * x[0] / 12.0, PI * x[1] / 16.0);
        dvector![
            PI / 12.0 * a.cos() * b.cos(),
            -PI / 16.0 * a.sin() * b.sin()
        ]
    })
    .with_constraints(1, |x| dvector![4.0 * x[0] - 3.0 * x[1]])
    .with_jacobian(|_| dmatrix![4.0, -3.0])
}

fn hs046() -> Problem {
    let start = dvector![0.5 * 2.0f64.sqrt(), 1.75, 0.5, 2.0, 2.0];
    Problem::new("hs046", start, |x| {
        (x[0] - x[1]).powi(2) + (x[2] - 1.0).powi(2) + (x[3] - 1.0).powi(4) + (x[4] - 1.0).powi(6)
    })
    .with_gradient(|x| {
        let d = 2.0 * (x[0] - x[1]);
        dvector![
            d,
            -d,
            2.0 * (x[2] - 1.0),
            4.0 * (x[3] - 1.0).powi(3),
            6.0 * (x[4] - 1.0).powi(5)
        ]
    })
    .with_constraints(2, |x| {
        dvector![
            x[0] * x[0] * x[3] + (x[3] - x[4]).sin() - 1.0,
            x[1] + x[2].powi(4) * x[3] * x[3] - 2.0
        ]
    })
    .with_jacobian(|x| {
        let cs = (x[3] - x[4]).cos();
        dmatrix![
            2.0 * x[0] * x[3], 0.0, 0.0, x[0] * x[0] + cs, -cs;
            0.0, 1.0, 4.0 * x[2].powi(3) * x[3] * x[3], 2.0 * x[2].powi(4) * x[3], 0.0
        ]
    })
}

/// The HS100 objective with the two inequalities active at its optimum
/// imposed as equalities.
fn hs100lnp() -> Problem {
    let start = dvector![1.0, 2.0, 0.0, 4.0, 0.0, 1.0, 1.0];
    Problem::new("hs100lnp", start, |x| {
        (x[0] - 10.0).powi(2)
            + 5.0 * (x[1] - 12.0).powi(2)
            + x[2].powi(4)
            + 3.0 * (x[3] - 11.0).powi(2)
            + 10.0 * x[4].powi(6)
            + 7.0 * x[5] * x[5]
            + x[6].powi(4)
            - 4.0 * x[5] * x[6]
            - 10.0 * x[5]
            - 8.0 * x[6]
    })
    .with_gradient(|x| {
        dvector![
            2.0 * (x[0] - 10.0),
            10.0 * (x[1] - 12.0),
            4.0 * x[2].powi(3),
            6.0 * (x[3] - 11.0),
            60.0 * x[4].powi(5),
            14.0 * x[5] - 4.0 * x[6] - 10.0,
            4.0 * x[6].powi(3) - 4.0 * x[5] - 8.0
        ]
    })
    .with_constraints(2, |x| {
        dvector![
            2.0 * x[0] * x[0] + 3.0 * x[1].powi(4) + x[2] + 4.0 * x[3] * x[3] + 5.0 * x[4] - 127.0,
            4.0 * x[0] * x[0] + x[1] * x[1] - 3.0 * x[0] * x[1] + 2.0 * x[2] * x[2] + 5.0 * x[5] - 11.0 * x[6]
        ]
    })
    .with_jacobian(|x| {
        dmatrix![
            4.0 * x[0], 12.0 * x[1].powi(3), 1.0, 8.0 * x[3], 5.0, 0.0, 0.0;
            8.0 * x[0] - 3.0 * x[1], 2.0 * x[1] - 3.0 * x[0], 4.0 * x[2], 0.0, 0.0, 5.0, -11.0
        ]
    })
}
