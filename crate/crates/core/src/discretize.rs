// Copyright 2026 The cacc-reach Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact zero-order-hold discretization.

use nalgebra::{DMatrix, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::platoon::{ClosedLoopModel, TimeDomain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixExpOptions {
    pub tolerance: f64,
    pub max_squarings: u32,
}

impl Default for MatrixExpOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_squarings: 32,
        }
    }
}

// Degree-13 diagonal Padé coefficients and the 1-norm bound under which
// the approximant is accurate to double precision (Higham 2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn matrix_exponential(m: &DMatrix<f64>, opts: &MatrixExpOptions) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::Precondition(
            "matrix exponential needs a square matrix".into(),
        ));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(opts.tolerance > 0.0) || opts.max_squarings < 1 {
        return Err(Error::Precondition(
            "invalid matrix exponential options".into(),
        ));
    }
    let n = m.nrows();
    let norm = one_norm(m);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    if squarings > opts.max_squarings {
        return Err(Error::NumericalFailure(format!(
            "matrix exponential needs {squarings} squarings (cap {})",
            opts.max_squarings
        )));
    }
    let a = m * 2f64.powi(-(squarings as i32));
    let b = &PADE13;
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];

    let numer = &v + &u;
    let denom = &v - &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .ok_or_else(|| Error::NumericalFailure("singular Padé denominator".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(r)
}

/// Discretizes every input column at once through the exponential of the
/// augmented matrix `ts * [[A, C], [0, 0]]`.
pub fn zoh_discretize(model: &ClosedLoopModel) -> Result<ClosedLoopModel> {
    zoh_discretize_with(model, &MatrixExpOptions::default())
}

pub fn zoh_discretize_with(
    model: &ClosedLoopModel,
    opts: &MatrixExpOptions,
) -> Result<ClosedLoopModel> {
    if model.is_discrete() {
        return Err(Error::WrongTimeDomain {
            expected: "continuous",
        });
    }
    model.params.validate()?;
    let ts = model.params.ts;
    let inputs = 1 + model.gamma_cols.len();
    let dim = 4 + inputs;
    let mut aug = DMatrix::<f64>::zeros(dim, dim);
    aug.view_mut((0, 0), (4, 4)).copy_from(&model.a_mat);
    aug.view_mut((0, 4), (4, 1)).copy_from(&model.bv_col);
    for (k, (_, col)) in model.gamma_cols.iter().enumerate() {
        aug.view_mut((0, 5 + k), (4, 1)).copy_from(col);
    }
    let e = matrix_exponential(&(aug * ts), opts)?;

    let a_mat: Matrix4<f64> = e.fixed_view::<4, 4>(0, 0).into_owned();
    let column = |k: usize| -> Vector4<f64> { e.fixed_view::<4, 1>(0, 4 + k).into_owned() };
    let gamma_cols = model
        .gamma_cols
        .iter()
        .enumerate()
        .map(|(k, (j, _))| (*j, column(1 + k)))
        .collect();
    Ok(ClosedLoopModel {
        a_mat,
        bv_col: column(0),
        gamma_cols,
        tag: model.tag,
        time_domain: TimeDomain::Discrete { ts },
        params: model.params,
    })
}
