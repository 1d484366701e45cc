// Copyright 2026 The cacc-reach Authors
// SPDX-License-Identifier: Apache-2.0

//! Minimum-volume invariant ellipsoids for a discrete closed loop driven by
//! peak-bounded attack and velocity disturbances.
//!
//! For a fixed contraction rate `a` the shape matrix solves
//!
//! ```text
//! max log det P
//! s.t. a_j in [eps, 1 - eps],  sum a_j >= a,
//!      [ aP    A'P   0   ]
//!      [ PA    P     PB  ] >= 0,   W_a = diag((1 - a_j) w_j)
//!      [ 0     B'P   W_a ]
//! ```
//!
//! and the resulting set `{x' P x <= (N - a) / (1 - a)}` is invariant and
//! contains every reachable state. [`min_volume`] searches `a` for the
//! smallest such set.

mod maxdet;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::ellipsoid::{vz_map_dyn, Ellipsoid};
use crate::error::{Error, Result};
use crate::platoon::ClosedLoopModel;

use maxdet::{AffineMatrix, BarrierError, BarrierOptions, Coef, LinearConstraint, MaxDetProblem};

/// Peak bounds on each attacked channel and on the predecessor velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceBounds {
    pub attack_bounds: BTreeMap<u8, f64>,
    pub v_bar: f64,
}

impl DisturbanceBounds {
    /// Same bound `w` on all six channels.
    pub fn uniform(w: f64, v_bar: f64) -> Self {
        Self {
            attack_bounds: (1..=crate::platoon::SENSOR_COUNT).map(|j| (j, w)).collect(),
            v_bar,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_bar.is_finite() && self.v_bar > 0.0) {
            return Err(Error::InvalidParams(format!(
                "v_bar must be positive, got {}",
                self.v_bar
            )));
        }
        for (j, w) in &self.attack_bounds {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "bound for channel {j} must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn bound(&self, j: u8) -> Result<f64> {
        self.attack_bounds
            .get(&j)
            .copied()
            .ok_or(Error::MissingBound(j))
    }
}

/// Dynamics and disturbance channels of the invariance problem, before a
/// contraction rate is chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachProblem {
    pub a_mat: DMatrix<f64>,
    /// One column per disturbance channel.
    pub b_stack: DMatrix<f64>,
    /// Channel weights `w_j` with `w_j * omega_j^2 <= 1`.
    pub w_norms: Vec<f64>,
}

impl ReachProblem {
    pub fn new(a_mat: DMatrix<f64>, b_stack: DMatrix<f64>, w_norms: Vec<f64>) -> Result<Self> {
        let n = a_mat.nrows();
        if !a_mat.is_square() || n == 0 || b_stack.nrows() != n || b_stack.ncols() != w_norms.len()
        {
            return Err(Error::Precondition(
                "inconsistent reach problem dimensions".into(),
            ));
        }
        if w_norms.is_empty() || w_norms.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Precondition(
                "channel weights must be positive".into(),
            ));
        }
        if a_mat.iter().chain(b_stack.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            a_mat,
            b_stack,
            w_norms,
        })
    }

    /// Attack columns in ascending sensor order, then the velocity column.
    /// Zero columns are kept: they still count as disturbance channels.
    pub fn from_model(model: &ClosedLoopModel, bounds: &DisturbanceBounds) -> Result<Self> {
        if !model.is_discrete() {
            return Err(Error::WrongTimeDomain {
                expected: "discrete",
            });
        }
        bounds.validate()?;
        let n_dist = model.gamma_cols.len() + 1;
        let mut b_stack = DMatrix::zeros(4, n_dist);
        let mut w_norms = Vec::with_capacity(n_dist);
        for (k, (j, col)) in model.gamma_cols.iter().enumerate() {
            let w = bounds.bound(*j)?;
            b_stack.set_column(k, col);
            w_norms.push(w.powi(-2));
        }
        b_stack.set_column(n_dist - 1, &model.bv_col);
        w_norms.push(bounds.v_bar.powi(-2));
        Self::new(
            DMatrix::from_iterator(4, 4, model.a_mat.iter().copied()),
            b_stack,
            w_norms,
        )
    }

    pub fn dim(&self) -> usize {
        self.a_mat.nrows()
    }

    pub fn n_dist(&self) -> usize {
        self.w_norms.len()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.a_mat
            .complex_eigenvalues()
            .iter()
            .map(|l| l.norm())
            .fold(0.0, f64::max)
    }

    pub fn instance(&self, a: f64) -> Result<LmiInstance> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidRate(a));
        }
        Ok(LmiInstance {
            problem: self.clone(),
            a,
        })
    }
}

/// A [`ReachProblem`] at a fixed contraction rate.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiInstance {
    problem: ReachProblem,
    a: f64,
}

impl LmiInstance {
    pub fn a_mat(&self) -> &DMatrix<f64> {
        &self.problem.a_mat
    }

    pub fn b_stack(&self) -> &DMatrix<f64> {
        &self.problem.b_stack
    }

    pub fn w_norms(&self) -> &[f64] {
        &self.problem.w_norms
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn n_dist(&self) -> usize {
        self.problem.n_dist()
    }

    /// The block matrix of the invariance LMI at `(P, a_j)`.
    pub fn block_lmi(&self, p: &DMatrix<f64>, a_splits: &[f64]) -> DMatrix<f64> {
        let ReachProblem {
            a_mat,
            b_stack,
            w_norms,
        } = &self.problem;
        let n = a_mat.nrows();
        let nd = w_norms.len();
        let mut f = DMatrix::zeros(2 * n + nd, 2 * n + nd);
        f.view_mut((0, 0), (n, n)).copy_from(&(p * self.a));
        let pa = p * a_mat;
        f.view_mut((n, 0), (n, n)).copy_from(&pa);
        f.view_mut((0, n), (n, n)).copy_from(&pa.transpose());
        f.view_mut((n, n), (n, n)).copy_from(p);
        let pb = p * b_stack;
        f.view_mut((n, 2 * n), (n, nd)).copy_from(&pb);
        f.view_mut((2 * n, n), (nd, n)).copy_from(&pb.transpose());
        for j in 0..nd {
            f[(2 * n + j, 2 * n + j)] = (1.0 - a_splits[j]) * w_norms[j];
        }
        f
    }

    /// Smallest eigenvalue of the block LMI.
    pub fn lmi_residual(&self, p: &DMatrix<f64>, a_splits: &[f64]) -> f64 {
        let f = self.block_lmi(p, a_splits);
        let f = (&f + f.transpose()) * 0.5;
        SymmetricEigen::new(f).eigenvalues.min()
    }
}

/// Assembles the invariance LMI of a discrete model at rate `a`.
pub fn assemble(
    model: &ClosedLoopModel,
    bounds: &DisturbanceBounds,
    a: f64,
) -> Result<LmiInstance> {
    ReachProblem::from_model(model, bounds)?.instance(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Relative optimality gap of the log-det objective.
    pub tol: f64,
    /// Margin replacing the open intervals `a_j in (0, 1)`.
    pub interior_eps: f64,
    /// Upper bound `P <= p_max I`. Keeps the program bounded when some
    /// state directions are unreachable from every disturbance channel.
    pub p_max: f64,
    pub max_newton: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            interior_eps: 1e-6,
            p_max: 1e8,
            max_newton: 600,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedRateSolution {
    pub p_mat: DMatrix<f64>,
    pub a_splits: Vec<f64>,
    /// `-log det P`.
    pub objective: f64,
    /// Barrier duality-gap bound at termination.
    pub gap: f64,
    pub newton_steps: usize,
    /// Smallest eigenvalue of the block LMI at the returned point.
    pub lmi_residual: f64,
}

fn doubling_sum(a: &DMatrix<f64>, q: &DMatrix<f64>, transpose_left: bool) -> Option<DMatrix<f64>> {
    // sum_k M_k q M_k' with M_k = A^k (or A'^k when transpose_left).
    let mut acc = q.clone();
    let mut m = if transpose_left {
        a.transpose()
    } else {
        a.clone()
    };
    for _ in 0..64 {
        let next = &acc + &m * &acc * m.transpose();
        m = &m * &m;
        let done = m.amax() < 1e-18 || (&next - &acc).amax() <= 1e-15 * next.amax();
        acc = next;
        if !acc.iter().all(|v| v.is_finite()) {
            return None;
        }
        if done {
            return Some(acc);
        }
    }
    None
}

fn symmetric_basis(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(n * (n + 1) / 2);
    for k in 0..n {
        for l in k..n {
            v.push((k, l));
        }
    }
    v
}

fn basis_matrix(n: usize, k: usize, l: usize) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(n, n);
    e[(k, l)] = 1.0;
    e[(l, k)] = 1.0;
    e
}

/// Solves the max-det program at the instance's fixed rate.
pub fn solve_fixed_a(inst: &LmiInstance, opts: &SolverOptions) -> Result<FixedRateSolution> {
    if !(opts.tol > 0.0)
        || !(opts.interior_eps > 0.0 && opts.interior_eps < 0.5)
        || !(opts.p_max > 0.0)
    {
        return Err(Error::Precondition("invalid solver options".into()));
    }
    let ReachProblem {
        a_mat,
        b_stack,
        w_norms,
    } = &inst.problem;
    let a = inst.a;
    let n = a_mat.nrows();
    let nd = w_norms.len();
    let eps = opts.interior_eps;

    let rho = inst.problem.spectral_radius();
    if rho * rho >= a {
        return Err(Error::Infeasible(format!(
            "spectral radius {rho:.6} too large for a = {a}"
        )));
    }
    if nd as f64 * (1.0 - eps) < a {
        return Err(Error::Infeasible("rate splits cannot reach a".into()));
    }

    // Unit-peak channels.
    let mut b_unit = b_stack.clone();
    for (j, w) in w_norms.iter().enumerate() {
        b_unit.column_mut(j).scale_mut(1.0 / w.sqrt());
    }

    // Work in coordinates where the reachability Gramian is ~ identity.
    let gram = doubling_sum(a_mat, &(&b_unit * b_unit.transpose()), false)
        .ok_or_else(|| Error::NumericalFailure("reachability Gramian did not converge".into()))?;
    let scale = (gram.trace() / n as f64).max(f64::MIN_POSITIVE);
    let gram_reg = &gram + DMatrix::identity(n, n) * (1e-8 * scale);
    let l = gram_reg
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("Gramian not positive definite".into()))?
        .l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("singular coordinate change".into()))?;
    let at = &l_inv * a_mat * &l;
    let bt = &l_inv * &b_unit;
    let ltl = l.transpose() * &l;

    let basis = symmetric_basis(n);
    let np = basis.len();
    let nvars = np + nd;
    let size = 2 * n + nd;

    let mut c0 = DMatrix::zeros(size, size);
    for j in 0..nd {
        c0[(2 * n + j, 2 * n + j)] = 1.0;
    }
    let mut main = AffineMatrix::new(c0);
    let mut objective = AffineMatrix::new(DMatrix::zeros(n, n));
    let mut upper = AffineMatrix::new(&ltl * opts.p_max);
    for (i, &(k, l)) in basis.iter().enumerate() {
        let e = basis_matrix(n, k, l);
        let mut f = DMatrix::zeros(size, size);
        f.view_mut((0, 0), (n, n)).copy_from(&(&e * a));
        let ea = &e * &at;
        f.view_mut((n, 0), (n, n)).copy_from(&ea);
        f.view_mut((0, n), (n, n)).copy_from(&ea.transpose());
        f.view_mut((n, n), (n, n)).copy_from(&e);
        let eb = &e * &bt;
        f.view_mut((n, 2 * n), (n, nd)).copy_from(&eb);
        f.view_mut((2 * n, n), (nd, n)).copy_from(&eb.transpose());
        main.coefs.push((i, Coef::Dense(f)));
        upper.coefs.push((i, Coef::Dense(-&e)));
        objective.coefs.push((i, Coef::Dense(e)));
    }
    let mut linear = Vec::with_capacity(2 * nd + 1);
    for j in 0..nd {
        main.coefs.push((np + j, Coef::Diag(2 * n + j, -1.0)));
        linear.push(LinearConstraint {
            g: -eps,
            h: vec![(np + j, 1.0)],
        });
        linear.push(LinearConstraint {
            g: 1.0 - eps,
            h: vec![(np + j, -1.0)],
        });
    }
    linear.push(LinearConstraint {
        g: -a,
        h: (0..nd).map(|j| (np + j, 1.0)).collect(),
    });
    let problem = MaxDetProblem {
        nvars,
        objective,
        lmis: vec![main, upper],
        linear,
    };

    // Start from a shrunken Stein solution a P0 - A'P0 A = I.
    let ah = &at / a.sqrt();
    let p0 = doubling_sum(&ah, &DMatrix::identity(n, n), true)
        .ok_or_else(|| Error::NumericalFailure("Stein iteration did not converge".into()))?
        / a;
    let split0 = ((1.0 + a / nd as f64) / 2.0).clamp(eps * 2.0, 1.0 - 2.0 * eps);
    let mut s = 1.0;
    let x0 = loop {
        let mut x = DVector::zeros(nvars);
        for (i, &(k, l)) in basis.iter().enumerate() {
            x[i] = s * p0[(k, l)];
        }
        for j in 0..nd {
            x[np + j] = split0;
        }
        if problem.is_strictly_feasible(&x) {
            break x;
        }
        s *= 0.5;
        if s < 1e-60 {
            return Err(Error::Infeasible(format!(
                "no strictly feasible start at a = {a}"
            )));
        }
    };

    let bopts = BarrierOptions {
        tol: opts.tol,
        max_newton: opts.max_newton,
        ..Default::default()
    };
    let res = problem.solve(x0, &bopts).map_err(|e| match e {
        BarrierError::NotStrictlyFeasible => Error::Infeasible("start point left the cone".into()),
        BarrierError::Stalled(msg) => Error::NumericalFailure(msg),
    })?;

    let mut pt = DMatrix::zeros(n, n);
    for (i, &(k, l)) in basis.iter().enumerate() {
        pt[(k, l)] = res.x[i];
        pt[(l, k)] = res.x[i];
    }
    let p = l_inv.transpose() * pt * &l_inv;
    let p = (&p + p.transpose()) * 0.5;
    let a_splits: Vec<f64> = (0..nd).map(|j| res.x[np + j]).collect();
    let ln_det_l: f64 = l.diagonal().iter().map(|d| d.ln()).sum();
    let objective = res.objective + 2.0 * ln_det_l;
    let lmi_residual = inst.lmi_residual(&p, &a_splits);
    Ok(FixedRateSolution {
        p_mat: p,
        a_splits,
        objective,
        gap: res.gap,
        newton_steps: res.newton_steps,
        lmi_residual,
    })
}

/// `alpha(k) = a^(k-1) v1 + (N - a)(1 - a^(k-1)) / (1 - a)`, with `v1` the
/// quadratic value at the first step.
pub fn alpha_sequence(k: u64, n_dist: usize, a: f64, v1: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::Precondition("alpha sequence starts at k = 1".into()));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidRate(a));
    }
    let ak = a.powf((k - 1) as f64);
    Ok(ak * v1 + (n_dist as f64 - a) * (1.0 - ak) / (1.0 - a))
}

/// Asymptotic level `(N - a) / (1 - a)`.
pub fn alpha_inf(n_dist: usize, a: f64) -> f64 {
    (n_dist as f64 - a) / (1.0 - a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ASearchOptions {
    /// Spacing of the coarse grid `{step, 2 step, ...} < 1`.
    pub grid_step: f64,
    /// Final bracket width of the golden-section refinement.
    pub refine_tol: f64,
    /// Extra grid points placed inside `(rho^2, 1)` when fewer coarse
    /// points than this are feasible.
    pub min_feasible_points: usize,
    pub solver: SolverOptions,
}

impl Default for ASearchOptions {
    fn default() -> Self {
        Self {
            grid_step: 0.02,
            refine_tol: 1e-3,
            min_feasible_points: 8,
            solver: SolverOptions::default(),
        }
    }
}

impl ASearchOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grid_step > 0.0 && self.grid_step < 0.5) || !(self.refine_tol > 0.0) {
            return Err(Error::Precondition("invalid a-search options".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateOptimum {
    pub a: f64,
    pub alpha_inf: f64,
    /// `n ln alpha - ln det P`, twice the log volume up to a constant.
    pub score: f64,
    pub solution: FixedRateSolution,
    pub evaluations: usize,
}

/// Searches the contraction rate minimizing the ellipsoid volume: coarse
/// grid, then golden-section refinement around the best grid point.
pub fn optimize_rate(problem: &ReachProblem, opts: &ASearchOptions) -> Result<RateOptimum> {
    opts.validate()?;
    let n = problem.dim() as f64;
    let nd = problem.n_dist();
    let rho2 = problem.spectral_radius().powi(2);
    if rho2 >= 1.0 {
        return Err(Error::AllInfeasible);
    }

    let mut evaluations = 0usize;
    let mut best: Option<RateOptimum> = None;
    let mut evaluate = |a: f64, best: &mut Option<RateOptimum>| -> f64 {
        if !(a > rho2 && a < 1.0) {
            return f64::INFINITY;
        }
        evaluations += 1;
        let inst = match problem.instance(a) {
            Ok(i) => i,
            Err(_) => return f64::INFINITY,
        };
        match solve_fixed_a(&inst, &opts.solver) {
            Ok(sol) => {
                let alpha = alpha_inf(nd, a);
                let score = n * alpha.ln() + sol.objective;
                let better = match best {
                    None => true,
                    Some(b) => score < b.score || (score == b.score && a < b.a),
                };
                if better {
                    *best = Some(RateOptimum {
                        a,
                        alpha_inf: alpha,
                        score,
                        solution: sol,
                        evaluations: 0,
                    });
                }
                score
            }
            Err(e) => {
                log::debug!("a = {a}: {e}");
                f64::INFINITY
            }
        }
    };

    let steps = (1.0 / opts.grid_step).round() as usize;
    let mut grid: Vec<f64> = (1..steps)
        .map(|k| k as f64 * opts.grid_step)
        .filter(|&a| a > rho2 && a < 1.0)
        .collect();
    if grid.len() < opts.min_feasible_points {
        let extra = opts.min_feasible_points.max(2);
        grid.extend((1..=extra).map(|k| rho2 + (1.0 - rho2) * k as f64 / (extra + 1) as f64));
        grid.sort_by(f64::total_cmp);
        grid.dedup();
    }
    let scores: Vec<f64> = grid.iter().map(|&a| evaluate(a, &mut best)).collect();
    let Some(ibest) = (0..grid.len())
        .filter(|&i| scores[i].is_finite())
        .min_by(|&i, &j| scores[i].total_cmp(&scores[j]).then(i.cmp(&j)))
    else {
        return Err(Error::AllInfeasible);
    };

    let mut lo = if ibest == 0 {
        rho2.max(0.0)
    } else {
        grid[ibest - 1]
    };
    let mut hi = if ibest + 1 == grid.len() {
        1.0
    } else {
        grid[ibest + 1]
    };
    let tol = opts.refine_tol.min(1e-2 * (1.0 - rho2));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = evaluate(x1, &mut best);
    let mut f2 = evaluate(x2, &mut best);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = evaluate(x1, &mut best);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = evaluate(x2, &mut best);
        }
    }
    let mut out = best.ok_or(Error::AllInfeasible)?;
    out.evaluations = evaluations;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub objective: f64,
    pub max_lmi_residual: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    pub rate_evaluations: usize,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachSolution {
    pub p_mat: DMatrix<f64>,
    pub a: f64,
    pub a_splits: Vec<f64>,
    pub n_dist: usize,
    pub alpha_inf: f64,
    pub volume_4d: f64,
    pub volume_vz: f64,
    /// Shape matrix of the v-z projection (level `alpha_inf`).
    pub vz_p_mat: DMatrix<f64>,
    pub diagnostics: SolveDiagnostics,
}

impl ReachSolution {
    pub fn ellipsoid(&self) -> Result<Ellipsoid> {
        Ellipsoid::from_symmetrized(self.p_mat.clone(), self.alpha_inf)
    }

    pub fn vz_ellipse(&self) -> Result<Ellipsoid> {
        Ellipsoid::from_symmetrized(self.vz_p_mat.clone(), self.alpha_inf)
    }

    /// `x' P x / alpha_inf`.
    pub fn level_ratio(&self, x: &DVector<f64>) -> f64 {
        (x.transpose() * &self.p_mat * x)[(0, 0)] / self.alpha_inf
    }
}

/// Minimum-volume invariant outer ellipsoid of a discrete closed loop.
pub fn min_volume(
    model: &ClosedLoopModel,
    bounds: &DisturbanceBounds,
    opts: &ASearchOptions,
) -> Result<ReachSolution> {
    let problem = ReachProblem::from_model(model, bounds)?;
    let best = optimize_rate(&problem, opts)?;
    let sol = best.solution;
    let ell = Ellipsoid::from_symmetrized(sol.p_mat.clone(), best.alpha_inf)
        .map_err(|e| Error::NumericalFailure(format!("solver returned invalid shape: {e}")))?;
    let vz = ell.linear_image(&vz_map_dyn(&model.params))?;
    Ok(ReachSolution {
        p_mat: ell.p_mat().clone(),
        a: best.a,
        a_splits: sol.a_splits,
        n_dist: problem.n_dist(),
        alpha_inf: best.alpha_inf,
        volume_4d: ell.volume(),
        volume_vz: vz.volume(),
        vz_p_mat: vz.p_mat().clone(),
        diagnostics: SolveDiagnostics {
            objective: sol.objective,
            max_lmi_residual: sol.lmi_residual,
            duality_gap: sol.gap,
            iterations: sol.newton_steps,
            rate_evaluations: best.evaluations,
            feasible: true,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_problem() -> ReachProblem {
        ReachProblem::new(
            DMatrix::zeros(1, 1),
            DMatrix::from_element(1, 1, 1.0),
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn scalar_toy_fixed_rate_closed_form() {
        for a in [0.1, 0.3, 0.5, 0.8] {
            let sol = solve_fixed_a(
                &scalar_problem().instance(a).unwrap(),
                &SolverOptions::default(),
            )
            .unwrap();
            let p = sol.p_mat[(0, 0)];
            assert!((p - (1.0 - a)).abs() < 1e-5, "a = {a}: p = {p}");
            assert!(sol.lmi_residual >= -1e-8);
            assert!(sol.a_splits[0] >= a - 1e-9);
        }
    }

    #[test]
    fn rate_outside_unit_interval_rejected() {
        for a in [0.0, 1.0, -0.2, 1.5] {
            assert!(matches!(
                scalar_problem().instance(a),
                Err(Error::InvalidRate(_))
            ));
        }
    }

    #[test]
    fn unstable_dynamics_are_infeasible() {
        let p = ReachProblem::new(
            DMatrix::from_element(1, 1, 1.01),
            DMatrix::from_element(1, 1, 1.0),
            vec![1.0],
        )
        .unwrap();
        assert!(matches!(
            optimize_rate(&p, &ASearchOptions::default()),
            Err(Error::AllInfeasible)
        ));
        assert!(matches!(
            solve_fixed_a(&p.instance(0.5).unwrap(), &SolverOptions::default()),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn alpha_sequence_values() {
        assert_eq!(alpha_sequence(1, 3, 0.7, 2.5).unwrap(), 2.5);
        let lim = alpha_sequence(10_000, 4, 0.9, 0.0).unwrap();
        assert!((lim - alpha_inf(4, 0.9)).abs() < 1e-6);
        assert!((alpha_inf(1, 0.5) - 1.0).abs() < 1e-15);
        assert!(alpha_sequence(0, 1, 0.5, 0.0).is_err());
    }

    #[test]
    fn missing_bound_reported() {
        use crate::discretize::zoh_discretize;
        use crate::platoon::{build_continuous, AttackSet, ControllerTag, PlatoonParams};
        let p = PlatoonParams {
            tau: 0.1,
            h: 0.5,
            kp: 0.2,
            kd: 0.7,
            kdd: 0.0,
            ts: 0.05,
        };
        let m = zoh_discretize(
            &build_continuous(&p, ControllerTag::C1, &AttackSet::new([2, 4]).unwrap()).unwrap(),
        )
        .unwrap();
        let mut bounds = DisturbanceBounds::uniform(1.0, 1.0);
        bounds.attack_bounds.remove(&4);
        assert!(matches!(
            assemble(&m, &bounds, 0.5),
            Err(Error::MissingBound(4))
        ));
    }
}
