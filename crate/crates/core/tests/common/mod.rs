// Copyright 2026 The cacc-reach Authors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force oracle for the two-dimensional single-channel toy problem.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub fn toy_2d() -> (DMatrix<f64>, DMatrix<f64>) {
    (
        DMatrix::from_row_slice(2, 2, &[0.5, 0.2, -0.1, 0.3]),
        DMatrix::from_row_slice(2, 1, &[1.0, 0.5]),
    )
}

/// Largest c with `c Q` satisfying the one-channel invariance condition at
/// rate `a`: `[[a cQ - A'cQA, -A'cQb], [., w - b'cQb]] >= 0`, where `w` already
/// carries the `(1 - a)` factor of the single channel.
pub fn max_scale(q: &DMatrix<f64>, a_mat: &DMatrix<f64>, b: &DMatrix<f64>, w: f64, a: f64) -> f64 {
    let feasible = |c: f64| {
        let p = q * c;
        let top = &p * a - a_mat.transpose() * &p * a_mat;
        let off = -(a_mat.transpose() * &p * b);
        let corner = w - (b.transpose() * &p * b)[(0, 0)];
        let mut m = DMatrix::zeros(3, 3);
        m.view_mut((0, 0), (2, 2)).copy_from(&top);
        m.view_mut((0, 2), (2, 1)).copy_from(&off);
        m.view_mut((2, 0), (1, 2)).copy_from(&off.transpose());
        m[(2, 2)] = corner;
        SymmetricEigen::new(m).eigenvalues.min() >= 0.0
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while feasible(hi) {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Brute-force `max log det P` over shapes `R(theta) diag(1, e^r) R(theta)'`.
pub fn grid_oracle(a: f64) -> f64 {
    let (a_mat, b) = toy_2d();
    let eval = |theta: f64, r: f64| {
        let (c, s) = (theta.cos(), theta.sin());
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let q = &rot
            * DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, r.exp()]))
            * rot.transpose();
        let k = max_scale(&q, &a_mat, &b, 1.0 - a, a);
        2.0 * k.ln() + r
    };
    let (mut tc, mut rc, mut tw, mut rw) = (0.0, 0.0, std::f64::consts::FRAC_PI_2, 6.0);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..6 {
        let n = 40;
        let (mut bt, mut br) = (tc, rc);
        for i in 0..=n {
            for j in 0..=n {
                let t = tc - tw + 2.0 * tw * i as f64 / n as f64;
                let r = rc - rw + 2.0 * rw * j as f64 / n as f64;
                let v = eval(t, r);
                if v > best {
                    best = v;
                    bt = t;
                    br = r;
                }
            }
        }
        tc = bt;
        rc = br;
        tw /= 5.0;
        rw /= 5.0;
    }
    best
}
