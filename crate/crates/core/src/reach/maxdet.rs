// Copyright 2026 The cacc-reach Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense barrier method for determinant maximization:
//!
//! ```text
//! minimize   -log det G(x)
//! subject to F_b(x) > 0   (linear matrix inequalities)
//!            g_i + h_i'x > 0
//! ```
//!
//! with `G` and every `F_b` affine in `x`. Problems here have at most a few
//! dozen variables and blocks of size ~15, so everything is dense.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Coefficient of one variable inside an affine matrix function.
#[derive(Debug, Clone)]
pub(crate) enum Coef {
    Dense(DMatrix<f64>),
    /// `value * e_k e_k'`
    Diag(usize, f64),
}

/// `M(x) = c0 + sum_i x_i M_i`.
#[derive(Debug, Clone)]
pub(crate) struct AffineMatrix {
    pub c0: DMatrix<f64>,
    pub coefs: Vec<(usize, Coef)>,
}

impl AffineMatrix {
    pub fn new(c0: DMatrix<f64>) -> Self {
        Self {
            c0,
            coefs: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.c0.nrows()
    }

    pub fn eval(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut m = self.c0.clone();
        for (i, c) in &self.coefs {
            let xi = x[*i];
            if xi == 0.0 {
                continue;
            }
            match c {
                Coef::Dense(d) => m.zip_apply(d, |mi, di| *mi += xi * di),
                Coef::Diag(k, v) => m[(*k, *k)] += xi * v,
            }
        }
        m
    }

    /// `-log det M(x)`, or `None` outside the cone.
    fn neg_log_det(&self, x: &DVector<f64>) -> Option<f64> {
        let chol = Cholesky::new(self.eval(x))?;
        let s: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
        let v = -2.0 * s;
        v.is_finite().then_some(v)
    }

    /// Adds `scale * (-log det M)` derivatives into `grad` and `hess`.
    fn accumulate(
        &self,
        x: &DVector<f64>,
        scale: f64,
        grad: &mut DVector<f64>,
        hess: &mut DMatrix<f64>,
    ) -> bool {
        let Some(chol) = Cholesky::new(self.eval(x)) else {
            return false;
        };
        let s = chol.inverse();
        // Y_i = S M_i, kept only for dense coefficients.
        let ys: Vec<Option<DMatrix<f64>>> = self
            .coefs
            .iter()
            .map(|(_, c)| match c {
                Coef::Dense(d) => Some(&s * d),
                Coef::Diag(..) => None,
            })
            .collect();
        for (a, (ia, ca)) in self.coefs.iter().enumerate() {
            let tr = match (ca, &ys[a]) {
                (_, Some(y)) => y.trace(),
                (Coef::Diag(k, v), None) => v * s[(*k, *k)],
                _ => unreachable!(),
            };
            grad[*ia] -= scale * tr;
            for (b, (ib, cb)) in self.coefs.iter().enumerate().take(a + 1) {
                let t = match (ca, cb, &ys[a], &ys[b]) {
                    (_, _, Some(ya), Some(yb)) => trace_of_product(ya, yb),
                    (Coef::Diag(k, v), _, None, Some(yb)) => v * diag_quad(&s, yb, *k),
                    (_, Coef::Diag(k, v), Some(ya), None) => v * diag_quad(&s, ya, *k),
                    (Coef::Diag(k, v), Coef::Diag(l, w), None, None) => {
                        v * w * s[(*k, *l)] * s[(*k, *l)]
                    }
                    _ => unreachable!(),
                };
                hess[(*ia, *ib)] += scale * t;
                if ia != ib {
                    hess[(*ib, *ia)] += scale * t;
                }
            }
        }
        true
    }
}

/// `tr(A B)` without forming the product.
fn trace_of_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut t = 0.0;
    for i in 0..n {
        for j in 0..n {
            t += a[(i, j)] * b[(j, i)];
        }
    }
    t
}

/// `tr(S e_k e_k' S M) = (S M S)_{kk}` given `Y = S M`: equals `(Y S)_{kk}`.
fn diag_quad(s: &DMatrix<f64>, y: &DMatrix<f64>, k: usize) -> f64 {
    let n = s.nrows();
    let mut t = 0.0;
    for j in 0..n {
        t += y[(k, j)] * s[(j, k)];
    }
    t
}

/// `g + h'x > 0`.
#[derive(Debug, Clone)]
pub(crate) struct LinearConstraint {
    pub g: f64,
    pub h: Vec<(usize, f64)>,
}

impl LinearConstraint {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.g + self.h.iter().map(|(i, v)| v * x[*i]).sum::<f64>()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct MaxDetProblem {
    pub nvars: usize,
    pub objective: AffineMatrix,
    pub lmis: Vec<AffineMatrix>,
    pub linear: Vec<LinearConstraint>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BarrierOptions {
    /// Target duality gap, relative to `max(1, |objective|)`.
    pub tol: f64,
    pub mu: f64,
    pub t0: f64,
    pub max_newton: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            mu: 20.0,
            t0: 1.0,
            max_newton: 600,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BarrierResult {
    pub x: DVector<f64>,
    pub objective: f64,
    pub gap: f64,
    pub newton_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum BarrierError {
    NotStrictlyFeasible,
    Stalled(String),
}

impl MaxDetProblem {
    fn barrier_degree(&self) -> f64 {
        (self.lmis.iter().map(|m| m.size()).sum::<usize>() + self.linear.len()) as f64
    }

    pub fn is_strictly_feasible(&self, x: &DVector<f64>) -> bool {
        self.linear.iter().all(|c| c.value(x) > 0.0)
            && self.lmis.iter().all(|m| m.neg_log_det(x).is_some())
            && self.objective.neg_log_det(x).is_some()
    }

    fn phi(&self, x: &DVector<f64>, t: f64) -> Option<f64> {
        let mut v = t * self.objective.neg_log_det(x)?;
        for c in &self.linear {
            let l = c.value(x);
            if !(l > 0.0) {
                return None;
            }
            v -= l.ln();
        }
        for m in &self.lmis {
            v += m.neg_log_det(x)?;
        }
        Some(v)
    }

    fn derivatives(&self, x: &DVector<f64>, t: f64) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let n = self.nvars;
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        if !self.objective.accumulate(x, t, &mut g, &mut h) {
            return None;
        }
        for m in &self.lmis {
            if !m.accumulate(x, 1.0, &mut g, &mut h) {
                return None;
            }
        }
        for c in &self.linear {
            let l = c.value(x);
            for &(i, hi) in &c.h {
                g[i] -= hi / l;
                for &(j, hj) in &c.h {
                    h[(i, j)] += hi * hj / (l * l);
                }
            }
        }
        Some((g, h))
    }

    pub fn solve(
        &self,
        x0: DVector<f64>,
        opts: &BarrierOptions,
    ) -> Result<BarrierResult, BarrierError> {
        if !self.is_strictly_feasible(&x0) {
            return Err(BarrierError::NotStrictlyFeasible);
        }
        let m = self.barrier_degree();
        let mut x = x0;
        let mut t = opts.t0;
        let mut steps = 0usize;
        loop {
            self.center(&mut x, t, &mut steps, opts)?;
            let objective = self.objective.neg_log_det(&x).expect("interior point");
            let gap = m / t;
            if gap <= opts.tol * objective.abs().max(1.0) {
                return Ok(BarrierResult {
                    x,
                    objective,
                    gap,
                    newton_steps: steps,
                });
            }
            t *= opts.mu;
        }
    }

    fn center(
        &self,
        x: &mut DVector<f64>,
        t: f64,
        steps: &mut usize,
        opts: &BarrierOptions,
    ) -> Result<(), BarrierError> {
        loop {
            if *steps >= opts.max_newton {
                return Err(BarrierError::Stalled(format!(
                    "Newton budget {} exhausted",
                    opts.max_newton
                )));
            }
            *steps += 1;
            let (g, h) = self
                .derivatives(x, t)
                .ok_or_else(|| BarrierError::Stalled("left the feasible set".into()))?;
            let dx = newton_direction(&h, &g)
                .ok_or_else(|| BarrierError::Stalled("singular Newton system".into()))?;
            let decrement = -g.dot(&dx);
            if !decrement.is_finite() {
                return Err(BarrierError::Stalled("non-finite Newton decrement".into()));
            }
            if decrement / 2.0 <= 1e-10 {
                return Ok(());
            }
            let f0 = self.phi(x, t).expect("interior point");
            let mut s = 1.0;
            loop {
                let cand = &*x + &dx * s;
                if let Some(f) = self.phi(&cand, t) {
                    if f <= f0 - 0.25 * s * decrement {
                        *x = cand;
                        // Decrease at the rounding level of phi: centered as
                        // well as this precision allows.
                        if f0 - f <= 1e-13 * f0.abs().max(1.0) {
                            return Ok(());
                        }
                        break;
                    }
                }
                s *= 0.5;
                if s < 1e-14 {
                    // No further progress possible at this precision.
                    return Ok(());
                }
            }
        }
    }
}

fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = h.diagonal().amax().max(1e-300);
    let mut ridge = 0.0;
    for _ in 0..8 {
        let mut hr = h.clone();
        for i in 0..hr.nrows() {
            hr[(i, i)] += ridge;
        }
        if let Some(c) = Cholesky::<f64, Dyn>::new(hr) {
            let dx = -c.solve(g);
            if dx.iter().all(|v| v.is_finite()) {
                return Some(dx);
            }
        }
        ridge = if ridge == 0.0 {
            1e-14 * scale
        } else {
            ridge * 100.0
        };
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    /// max log det diag(x0, x1) s.t. x0 + x1 < 2 -> x = (1, 1).
    #[test]
    fn diagonal_maxdet_with_budget() {
        let mut obj = AffineMatrix::new(DMatrix::zeros(2, 2));
        obj.coefs.push((0, Coef::Diag(0, 1.0)));
        obj.coefs.push((1, Coef::Diag(1, 1.0)));
        let p = MaxDetProblem {
            nvars: 2,
            objective: obj,
            lmis: vec![],
            linear: vec![LinearConstraint {
                g: 2.0,
                h: vec![(0, -1.0), (1, -1.0)],
            }],
        };
        let r = p
            .solve(
                DVector::from_row_slice(&[0.1, 0.5]),
                &BarrierOptions {
                    tol: 1e-9,
                    ..Default::default()
                },
            )
            .unwrap();
        assert!(
            (r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6,
            "{}",
            r.x
        );
    }

    /// max log det X s.t. I - X > 0 (matrix upper bound) -> X = I.
    #[test]
    fn dense_lmi_upper_bound() {
        let basis = |k: usize, l: usize| {
            let mut e = DMatrix::zeros(2, 2);
            e[(k, l)] = 1.0;
            e[(l, k)] = 1.0;
            e
        };
        let vars = [(0, 0), (0, 1), (1, 1)];
        let mut obj = AffineMatrix::new(DMatrix::zeros(2, 2));
        let mut ub = AffineMatrix::new(DMatrix::identity(2, 2));
        for (i, (k, l)) in vars.iter().enumerate() {
            obj.coefs.push((i, Coef::Dense(basis(*k, *l))));
            ub.coefs.push((i, Coef::Dense(-basis(*k, *l))));
        }
        let p = MaxDetProblem {
            nvars: 3,
            objective: obj,
            lmis: vec![ub],
            linear: vec![],
        };
        let r = p
            .solve(
                DVector::from_row_slice(&[0.3, 0.05, 0.2]),
                &BarrierOptions::default(),
            )
            .unwrap();
        assert!(
            (r.x[0] - 1.0).abs() < 1e-5 && r.x[1].abs() < 1e-5 && (r.x[2] - 1.0).abs() < 1e-5,
            "{}",
            r.x
        );
    }

    #[test]
    fn infeasible_start_rejected() {
        let mut obj = AffineMatrix::new(DMatrix::zeros(1, 1));
        obj.coefs.push((0, Coef::Diag(0, 1.0)));
        let p = MaxDetProblem {
            nvars: 1,
            objective: obj,
            lmis: vec![],
            linear: vec![],
        };
        assert_eq!(
            p.solve(DVector::from_row_slice(&[-1.0]), &BarrierOptions::default())
                .unwrap_err(),
            BarrierError::NotStrictlyFeasible
        );
    }
}
