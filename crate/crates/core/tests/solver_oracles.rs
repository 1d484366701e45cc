// Copyright 2026 The cacc-reach Authors
// SPDX-License-Identifier: Apache-2.0

use cacc_reach::discretize::zoh_discretize;
use cacc_reach::platoon::{build_continuous, AttackSet, ControllerTag, PlatoonParams};
use cacc_reach::reach::{
    min_volume, optimize_rate, solve_fixed_a, ASearchOptions, DisturbanceBounds, ReachProblem,
    SolverOptions,
};
mod common;

use common::{grid_oracle, toy_2d};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn nominal_params() -> PlatoonParams {
    PlatoonParams {
        tau: 0.1,
        h: 0.5,
        kp: 0.2,
        kd: 0.7,
        kdd: 0.0,
        ts: 0.05,
    }
}

#[test]
fn two_dimensional_toy_matches_grid_oracle() {
    let (a_mat, b) = toy_2d();
    let problem = ReachProblem::new(a_mat, b, vec![1.0]).unwrap();
    for a in [0.5, 0.7, 0.9] {
        let sol = solve_fixed_a(&problem.instance(a).unwrap(), &SolverOptions::default()).unwrap();
        let oracle = grid_oracle(a);
        let rel = (-sol.objective - oracle).abs() / oracle.abs().max(1.0);
        assert!(
            rel < 1e-3,
            "a = {a}: solver {} oracle {oracle}",
            -sol.objective
        );
        assert!(-sol.objective >= oracle - 1e-6, "solver below brute force");
    }
}

#[test]
fn scalar_toy_semi_axis() {
    let problem = ReachProblem::new(
        DMatrix::zeros(1, 1),
        DMatrix::from_element(1, 1, 1.0),
        vec![1.0],
    )
    .unwrap();
    let best = optimize_rate(&problem, &ASearchOptions::default()).unwrap();
    let semi = (best.alpha_inf / best.solution.p_mat[(0, 0)]).sqrt();
    let closed = 1.0 / (1.0 - best.a).sqrt();
    assert!(
        (semi / closed - 1.0).abs() < 1e-2,
        "semi {semi} closed {closed}"
    );
    assert!(
        semi >= 1.0 - 1e-9,
        "must contain the reachable interval [-1, 1]"
    );
}

/// One-step invariance: from any point of the ellipsoid, any admissible
/// input keeps the next state inside.
#[test]
fn one_step_invariance_random_draws() {
    let bounds = DisturbanceBounds::uniform(0.35, 35.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (tag, l) in [
        (ControllerTag::C1, AttackSet::full()),
        (ControllerTag::C2, AttackSet::singleton(3).unwrap()),
    ] {
        let m = zoh_discretize(&build_continuous(&nominal_params(), tag, &l).unwrap()).unwrap();
        let sol = min_volume(&m, &bounds, &ASearchOptions::default()).unwrap();
        let e = sol.ellipsoid().unwrap();
        let problem = ReachProblem::from_model(&m, &bounds).unwrap();
        let peaks: Vec<f64> = problem.w_norms.iter().map(|w| w.powf(-0.5)).collect();
        let pts = e.boundary_points(50_000, rng.gen());
        let mut worst = 0.0f64;
        for x in &pts {
            let scale = rng.gen::<f64>().sqrt();
            let u = DVector::from_iterator(
                peaks.len(),
                peaks.iter().map(|p| {
                    if rng.gen_bool(0.8) {
                        if rng.gen() {
                            *p
                        } else {
                            -*p
                        }
                    } else {
                        rng.gen_range(-*p..=*p)
                    }
                }),
            );
            let next = &problem.a_mat * (x * scale) + &problem.b_stack * u;
            worst = worst.max(sol.level_ratio(&next));
        }
        assert!(worst <= 1.0 + 1e-7, "{tag} {l}: ratio {worst}");
    }
}

#[test]
fn channel_scaling_covariance() {
    let bounds = DisturbanceBounds::uniform(0.35, 35.0);
    let m = zoh_discretize(
        &build_continuous(
            &nominal_params(),
            ControllerTag::C1,
            &AttackSet::new([1, 4]).unwrap(),
        )
        .unwrap(),
    )
    .unwrap();
    let base = ReachProblem::from_model(&m, &bounds).unwrap();
    let inst = base.instance(0.98).unwrap();
    let p0 = solve_fixed_a(&inst, &SolverOptions::default()).unwrap();

    // Column times s with bound divided by s describes the same input set.
    let mut b = base.b_stack.clone();
    let mut w = base.w_norms.clone();
    b.column_mut(0).scale_mut(4.0);
    w[0] *= 16.0;
    let same = ReachProblem::new(base.a_mat.clone(), b, w).unwrap();
    let p1 = solve_fixed_a(&same.instance(0.98).unwrap(), &SolverOptions::default()).unwrap();
    assert!((p1.objective - p0.objective).abs() < 1e-5 * p0.objective.abs().max(1.0));

    // All bounds times s shrinks P by s^2.
    let s: f64 = 3.0;
    let grown = ReachProblem::new(
        base.a_mat.clone(),
        base.b_stack.clone(),
        base.w_norms.iter().map(|w| w / (s * s)).collect(),
    )
    .unwrap();
    let p2 = solve_fixed_a(&grown.instance(0.98).unwrap(), &SolverOptions::default()).unwrap();
    let shift = p2.objective - p0.objective;
    assert!(
        (shift - 4.0 * (s * s).ln()).abs() < 1e-4,
        "log det shift {shift}"
    );
}

#[test]
fn solution_residuals_and_splits_are_valid() {
    let bounds = DisturbanceBounds::uniform(0.35, 35.0);
    for tag in ControllerTag::ALL {
        for l in [
            AttackSet::empty(),
            AttackSet::singleton(2).unwrap(),
            AttackSet::full(),
        ] {
            let m = zoh_discretize(&build_continuous(&nominal_params(), tag, &l).unwrap()).unwrap();
            let sol = min_volume(&m, &bounds, &ASearchOptions::default()).unwrap();
            assert!(
                sol.diagnostics.max_lmi_residual > -1e-6,
                "{tag} {l}: {:?}",
                sol.diagnostics
            );
            assert!(sol.a_splits.iter().sum::<f64>() >= sol.a - 1e-6);
            assert!(sol.a_splits.iter().all(|x| *x > 0.0 && *x < 1.0));
            assert_eq!(sol.n_dist, l.len() + 1);
            assert!(
                sol.a
                    > m.a_mat
                        .complex_eigenvalues()
                        .iter()
                        .map(|z| z.norm_sqr())
                        .fold(0.0, f64::max)
            );
        }
    }
}
