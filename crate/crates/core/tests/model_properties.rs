// Copyright 2026 The cacc-reach Authors
// SPDX-License-Identifier: Apache-2.0

use cacc_reach::discretize::{matrix_exponential, zoh_discretize, MatrixExpOptions};
use cacc_reach::platoon::{
    attack_column, build_continuous, stability_spectrum, AttackSet, ControllerTag, PlatoonParams,
};
use nalgebra::{DMatrix, Vector4};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = PlatoonParams> {
    (
        0.05f64..1.0,
        0.01f64..2.0,
        0.05f64..2.0,
        0.05f64..2.0,
        0.0f64..0.5,
        0.005f64..0.2,
    )
        .prop_map(|(tau, h, kp, kd, kdd, ts)| PlatoonParams {
            tau,
            h,
            kp,
            kd,
            kdd,
            ts,
        })
}

fn close(a: &Vector4<f64>, b: &Vector4<f64>) -> bool {
    (a - b).amax() <= 1e-12 * (1.0 + a.amax().max(b.amax()))
}

proptest! {
    #[test]
    fn realizations_agree_without_attacks(p in params()) {
        let c1 = build_continuous(&p, ControllerTag::C1, &AttackSet::empty()).unwrap();
        let c2 = build_continuous(&p, ControllerTag::C2, &AttackSet::empty()).unwrap();
        prop_assert_eq!(c1.a_mat, c2.a_mat);
        prop_assert_eq!(c1.bv_col, c2.bv_col);
    }

    #[test]
    fn column_identities(p in params()) {
        let c1 = |j| attack_column(&p, ControllerTag::C1, j).unwrap();
        let c2 = |j| attack_column(&p, ControllerTag::C2, j).unwrap();
        prop_assert_eq!(c2(6), Vector4::zeros());
        prop_assert!(close(&c1(2), &(-p.h * c1(1))));
        for j in [1, 2, 4] {
            prop_assert_eq!(c1(j), c2(j));
        }
        prop_assert_eq!(c2(5), Vector4::new(0.0, -1.0, 0.0, 0.0));
        prop_assert!(close(&c2(3), &Vector4::new(0.0, 1.0 - p.h / p.tau, p.kd * p.h / p.tau, 0.0)));
    }

    #[test]
    fn zoh_semigroup(p in params()) {
        let full = zoh_discretize(&build_continuous(&p, ControllerTag::C2, &AttackSet::full()).unwrap()).unwrap();
        let half_p = p.with_ts(p.ts / 2.0);
        let half = zoh_discretize(&build_continuous(&half_p, ControllerTag::C2, &AttackSet::full()).unwrap()).unwrap();
        prop_assert!((full.a_mat - half.a_mat * half.a_mat).amax() <= 1e-10);
        // Input columns compose as B(T) = (A(T/2) + I) B(T/2).
        let id = nalgebra::Matrix4::identity();
        prop_assert!((full.bv_col - (half.a_mat + id) * half.bv_col).amax() <= 1e-10 * (1.0 + full.bv_col.amax()));
    }
}

#[test]
fn c1_sensor_five_has_no_effect_when_kdd_is_zero() {
    let p = PlatoonParams {
        tau: 0.1,
        h: 0.5,
        kp: 0.2,
        kd: 0.7,
        kdd: 0.0,
        ts: 0.05,
    };
    assert_eq!(
        attack_column(&p, ControllerTag::C1, 5).unwrap(),
        Vector4::zeros()
    );
    let p = PlatoonParams { kdd: 0.3, ..p };
    assert_ne!(
        attack_column(&p, ControllerTag::C1, 5).unwrap(),
        Vector4::zeros()
    );
}

#[test]
fn headway_equal_to_tau_zeroes_c2_sensor_three_velocity_entry() {
    let p = PlatoonParams {
        tau: 0.1,
        h: 0.1,
        kp: 0.2,
        kd: 0.7,
        kdd: 0.0,
        ts: 0.05,
    };
    assert_eq!(attack_column(&p, ControllerTag::C2, 3).unwrap()[1], 0.0);
}

#[test]
fn discrete_spectrum_is_exponential_of_continuous() {
    let p = PlatoonParams {
        tau: 0.1,
        h: 0.5,
        kp: 0.2,
        kd: 0.7,
        kdd: 0.0,
        ts: 0.05,
    };
    let c = build_continuous(&p, ControllerTag::C1, &AttackSet::full()).unwrap();
    let d = zoh_discretize(&c).unwrap();
    let mut want: Vec<_> = stability_spectrum(&c)
        .unwrap()
        .iter()
        .map(|l| (l * p.ts).exp())
        .collect();
    let mut got: Vec<_> = d.a_mat.complex_eigenvalues().iter().copied().collect();
    let key = |z: &nalgebra::Complex<f64>| (z.re, z.im);
    want.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    got.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    for (w, g) in want.iter().zip(&got) {
        assert!((w - g).norm() < 1e-8, "{w} vs {g}");
    }
}

#[test]
fn zoh_input_matches_quadrature() {
    let p = PlatoonParams {
        tau: 0.1,
        h: 0.5,
        kp: 0.2,
        kd: 0.7,
        kdd: 0.0,
        ts: 0.05,
    };
    let c = build_continuous(&p, ControllerTag::C2, &AttackSet::singleton(3).unwrap()).unwrap();
    let d = zoh_discretize(&c).unwrap();
    let a = DMatrix::from_iterator(4, 4, c.a_mat.iter().copied());
    let g = nalgebra::DVector::from_iterator(4, c.gamma(3).unwrap().iter().copied());
    // Composite Simpson on int_0^T exp(A s) ds g.
    let n = 200;
    let hstep = p.ts / n as f64;
    let mut acc = nalgebra::DVector::zeros(4);
    for k in 0..=n {
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let e =
            matrix_exponential(&(&a * (k as f64 * hstep)), &MatrixExpOptions::default()).unwrap();
        acc += e * &g * w;
    }
    acc *= hstep / 3.0;
    let got = nalgebra::DVector::from_iterator(4, d.gamma(3).unwrap().iter().copied());
    assert!((acc - got).amax() < 1e-12);
}
