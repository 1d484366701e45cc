// Copyright 2026 The cacc-reach Authors
// SPDX-License-Identifier: Apache-2.0

//! Continuous-time closed-loop tracking dynamics of one CACC follower.
//!
//! The state is always ordered `[e, e_dot, internal, z]` where `e` is the
//! spacing error, `internal` is the controller state of the realization and
//! `z` is the gap beyond the standstill distance. Both realizations share
//! the state matrix and the predecessor-velocity column; they differ only in
//! how the six sensor attack channels enter the loop.
//!
//! Channel numbering (documentation only, the columns fully define the
//! dynamics):
//!
//! | j | measurement                         |
//! |---|-------------------------------------|
//! | 1 | inter-vehicle distance              |
//! | 2 | own velocity                        |
//! | 3 | own (onboard) acceleration          |
//! | 4 | predecessor velocity / range rate   |
//! | 5 | predecessor acceleration (V2V)      |
//! | 6 | predecessor control input (V2V)     |

use std::fmt;

use nalgebra::{Complex, Matrix3, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of sensor channels that can be attacked.
pub const SENSOR_COUNT: u8 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatoonParams {
    /// Engine time constant (s).
    pub tau: f64,
    /// Time-headway constant (s).
    pub h: f64,
    pub kp: f64,
    pub kd: f64,
    pub kdd: f64,
    /// Sampling interval (s).
    pub ts: f64,
}

impl PlatoonParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("tau", self.tau), ("h", self.h), ("ts", self.ts)];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        for (name, value) in [("kp", self.kp), ("kd", self.kd), ("kdd", self.kdd)] {
            if !value.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_ts(mut self, ts: f64) -> Self {
        self.ts = ts;
        self
    }

    /// Fails with [`Error::UnstableModel`] when some closed-loop mode has a
    /// nonnegative real part. Callers treat this as a warning.
    pub fn check_hurwitz(&self) -> Result<()> {
        let max_real = continuous_state_matrix(self)
            .complex_eigenvalues()
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if max_real < 0.0 {
            Ok(())
        } else {
            Err(Error::UnstableModel { max_real })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ControllerTag {
    C1,
    C2,
}

impl ControllerTag {
    pub const ALL: [ControllerTag; 2] = [ControllerTag::C1, ControllerTag::C2];
}

impl fmt::Display for ControllerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControllerTag::C1 => f.write_str("C1"),
            ControllerTag::C2 => f.write_str("C2"),
        }
    }
}

/// Sorted, duplicate-free subset of the sensor channels `1..=6`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct AttackSet(Vec<u8>);

impl AttackSet {
    pub fn new(channels: impl IntoIterator<Item = u8>) -> Result<Self> {
        let mut v: Vec<u8> = channels.into_iter().collect();
        if let Some(&bad) = v.iter().find(|&&j| j == 0 || j > SENSOR_COUNT) {
            return Err(Error::InvalidParams(format!(
                "sensor index {bad} outside 1..={SENSOR_COUNT}"
            )));
        }
        v.sort_unstable();
        let len = v.len();
        v.dedup();
        if v.len() != len {
            return Err(Error::InvalidParams(
                "duplicate sensor index in attack set".into(),
            ));
        }
        Ok(Self(v))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn full() -> Self {
        Self((1..=SENSOR_COUNT).collect())
    }

    pub fn singleton(j: u8) -> Result<Self> {
        Self::new([j])
    }

    pub fn singletons() -> Vec<Self> {
        (1..=SENSOR_COUNT).map(|j| Self(vec![j])).collect()
    }

    pub fn channels(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: u8) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    pub fn is_subset(&self, other: &AttackSet) -> bool {
        self.0.iter().all(|&j| other.contains(j))
    }
}

impl TryFrom<Vec<u8>> for AttackSet {
    type Error = Error;

    fn try_from(v: Vec<u8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AttackSet> for Vec<u8> {
    fn from(s: AttackSet) -> Self {
        s.0
    }
}

impl fmt::Display for AttackSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, j) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{j}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TimeDomain {
    Continuous,
    Discrete { ts: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopModel {
    pub a_mat: Matrix4<f64>,
    pub bv_col: Vector4<f64>,
    /// `(sensor index, column)` in ascending sensor order.
    pub gamma_cols: Vec<(u8, Vector4<f64>)>,
    pub tag: ControllerTag,
    pub time_domain: TimeDomain,
    pub params: PlatoonParams,
}

impl ClosedLoopModel {
    pub fn is_discrete(&self) -> bool {
        matches!(self.time_domain, TimeDomain::Discrete { .. })
    }

    pub fn attack_set(&self) -> AttackSet {
        AttackSet(self.gamma_cols.iter().map(|(j, _)| *j).collect())
    }

    pub fn gamma(&self, j: u8) -> Option<&Vector4<f64>> {
        self.gamma_cols
            .iter()
            .find(|(k, _)| *k == j)
            .map(|(_, c)| c)
    }
}

fn continuous_state_matrix(p: &PlatoonParams) -> Matrix4<f64> {
    let t = p.tau;
    #[rustfmt::skip]
    let a = Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        -p.kp / t, -p.kd / t, -(1.0 + p.kdd) / t, 0.0,
        1.0 / p.h, 0.0, 0.0, -1.0 / p.h,
    );
    a
}

/// Continuous-time attack column of sensor `j` for the given realization.
pub fn attack_column(p: &PlatoonParams, tag: ControllerTag, j: u8) -> Result<Vector4<f64>> {
    let (t, h) = (p.tau, p.h);
    let internal = |v: f64| Vector4::new(0.0, 0.0, v, 0.0);
    let col = match (tag, j) {
        (_, 1) => internal(-p.kp / t),
        (_, 2) => internal(p.kp * h / t),
        (_, 4) => internal(-p.kd / t),
        (ControllerTag::C1, 3) => internal((p.kd * h + p.kdd) / t - p.kdd * h / (t * t)),
        (ControllerTag::C1, 5) => internal(-p.kdd / t),
        (ControllerTag::C1, 6) => internal(-1.0 / t),
        (ControllerTag::C2, 3) => Vector4::new(0.0, 1.0 - h / t, p.kd * h / t, 0.0),
        (ControllerTag::C2, 5) => Vector4::new(0.0, -1.0, 0.0, 0.0),
        (ControllerTag::C2, 6) => Vector4::zeros(),
        _ => {
            return Err(Error::InvalidParams(format!(
                "sensor index {j} outside 1..={SENSOR_COUNT}"
            )))
        }
    };
    Ok(col)
}

pub fn build_continuous(
    params: &PlatoonParams,
    tag: ControllerTag,
    attacks: &AttackSet,
) -> Result<ClosedLoopModel> {
    params.validate()?;
    if let Err(e) = params.check_hurwitz() {
        log::warn!("{e}; reach analysis will report infeasibility");
    }
    let gamma_cols = attacks
        .channels()
        .iter()
        .map(|&j| attack_column(params, tag, j).map(|c| (j, c)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClosedLoopModel {
        a_mat: continuous_state_matrix(params),
        bv_col: Vector4::new(0.0, 0.0, 0.0, 1.0),
        gamma_cols,
        tag,
        time_domain: TimeDomain::Continuous,
        params: *params,
    })
}

/// Eigenvalues of the continuous state matrix, sorted by real then
/// imaginary part.
pub fn stability_spectrum(model: &ClosedLoopModel) -> Result<Vec<Complex<f64>>> {
    if model.is_discrete() {
        return Err(Error::WrongTimeDomain {
            expected: "continuous",
        });
    }
    Ok(sorted_eigenvalues(&model.a_mat))
}

pub(crate) fn sorted_eigenvalues(m: &Matrix4<f64>) -> Vec<Complex<f64>> {
    let mut eig: Vec<Complex<f64>> = m.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    eig
}

/// Upper-left 3x3 companion block `[e, e_dot, internal]`.
pub fn companion_block(p: &PlatoonParams) -> Matrix3<f64> {
    continuous_state_matrix(p)
        .fixed_view::<3, 3>(0, 0)
        .into_owned()
}
