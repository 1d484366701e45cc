// Copyright 2026 The cacc-reach Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-domain simulation of the discrete closed loop under admissible
//! attack and velocity signals, used to check reach-set bounds empirically.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::platoon::{ClosedLoopModel, ControllerTag, PlatoonParams};
use crate::reach::{DisturbanceBounds, ReachSolution};

/// A disturbance input: an attacked sensor or the predecessor velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    Attack(u8),
    Velocity,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Attack(j) => write!(f, "{j}"),
            Channel::Velocity => f.write_str("v"),
        }
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "v" | "velocity" => Ok(Channel::Velocity),
            other => other
                .parse::<u8>()
                .ok()
                .filter(|j| (1..=crate::platoon::SENSOR_COUNT).contains(j))
                .map(Channel::Attack)
                .ok_or_else(|| Error::Parse(format!("unknown channel `{other}`"))),
        }
    }
}

impl Serialize for Channel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Channel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Input signal of one channel. Periods are in steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    Constant {
        value: f64,
    },
    Sinusoid {
        amplitude: f64,
        period: f64,
        #[serde(default)]
        phase: f64,
    },
    Square {
        amplitude: f64,
        period: f64,
        #[serde(default)]
        phase: f64,
    },
    UniformRandom {
        amplitude: f64,
        seed: u64,
    },
    /// Extreme value whose sign pushes the next state outward in the metric
    /// supplied to the simulation (identity when none is given).
    BangBangProbe {
        amplitude: f64,
    },
}

impl SignalSpec {
    pub fn amplitude(&self) -> f64 {
        match self {
            SignalSpec::Constant { value } => value.abs(),
            SignalSpec::Sinusoid { amplitude, .. }
            | SignalSpec::Square { amplitude, .. }
            | SignalSpec::UniformRandom { amplitude, .. }
            | SignalSpec::BangBangProbe { amplitude } => amplitude.abs(),
        }
    }

    fn check(&self, channel: Channel, bound: f64) -> Result<()> {
        let amplitude = self.amplitude();
        let periodic_ok = match self {
            SignalSpec::Sinusoid { period, phase, .. }
            | SignalSpec::Square { period, phase, .. } => {
                period.is_finite() && *period > 0.0 && phase.is_finite()
            }
            _ => true,
        };
        if !amplitude.is_finite() || !periodic_ok {
            return Err(Error::Precondition(format!(
                "signal on channel {channel} is malformed"
            )));
        }
        if amplitude > bound {
            return Err(Error::InadmissibleSignal {
                channel: channel.to_string(),
                amplitude,
                bound,
            });
        }
        Ok(())
    }
}

enum Source {
    Fixed(SignalSpec),
    Random(Box<ChaCha8Rng>, f64),
    Probe(f64),
}

impl Source {
    fn new(spec: &SignalSpec) -> Self {
        match *spec {
            SignalSpec::UniformRandom { amplitude, seed } => {
                Source::Random(Box::new(ChaCha8Rng::seed_from_u64(seed)), amplitude)
            }
            SignalSpec::BangBangProbe { amplitude } => Source::Probe(amplitude),
            ref other => Source::Fixed(other.clone()),
        }
    }

    fn value(&mut self, k: usize) -> f64 {
        let kf = k as f64;
        match self {
            Source::Fixed(SignalSpec::Constant { value }) => *value,
            Source::Fixed(SignalSpec::Sinusoid {
                amplitude,
                period,
                phase,
            }) => *amplitude * (2.0 * PI * kf / *period + *phase).sin(),
            Source::Fixed(SignalSpec::Square {
                amplitude,
                period,
                phase,
            }) => {
                if (2.0 * PI * kf / *period + *phase).sin() >= 0.0 {
                    *amplitude
                } else {
                    -*amplitude
                }
            }
            Source::Random(rng, amplitude) => {
                if *amplitude == 0.0 {
                    0.0
                } else {
                    rng.gen_range(-*amplitude..=*amplitude)
                }
            }
            Source::Fixed(_) | Source::Probe(_) => 0.0,
        }
    }
}

/// `x(k+1) = A x(k) + B u(k)` with one column of `B` and one peak bound per
/// channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem {
    pub a_mat: DMatrix<f64>,
    pub b_stack: DMatrix<f64>,
    pub channels: Vec<Channel>,
    pub bounds: Vec<f64>,
}

impl DiscreteSystem {
    pub fn new(
        a_mat: DMatrix<f64>,
        b_stack: DMatrix<f64>,
        channels: Vec<Channel>,
        bounds: Vec<f64>,
    ) -> Result<Self> {
        let n = a_mat.nrows();
        if !a_mat.is_square()
            || b_stack.nrows() != n
            || b_stack.ncols() != channels.len()
            || bounds.len() != channels.len()
        {
            return Err(Error::Precondition("inconsistent system dimensions".into()));
        }
        if bounds.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::Precondition(
                "channel bounds must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            a_mat,
            b_stack,
            channels,
            bounds,
        })
    }

    /// Same channel order as the reach problem: attacks ascending, then the
    /// velocity.
    pub fn from_model(model: &ClosedLoopModel, bounds: &DisturbanceBounds) -> Result<Self> {
        if !model.is_discrete() {
            return Err(Error::WrongTimeDomain {
                expected: "discrete",
            });
        }
        bounds.validate()?;
        let nd = model.gamma_cols.len() + 1;
        let mut b_stack = DMatrix::zeros(4, nd);
        let mut channels = Vec::with_capacity(nd);
        let mut peak = Vec::with_capacity(nd);
        for (k, (j, col)) in model.gamma_cols.iter().enumerate() {
            b_stack.set_column(k, col);
            channels.push(Channel::Attack(*j));
            peak.push(bounds.bound(*j)?);
        }
        b_stack.set_column(nd - 1, &model.bv_col);
        channels.push(Channel::Velocity);
        peak.push(bounds.v_bar);
        Self::new(
            DMatrix::from_iterator(4, 4, model.a_mat.iter().copied()),
            b_stack,
            channels,
            peak,
        )
    }

    pub fn dim(&self) -> usize {
        self.a_mat.nrows()
    }

    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.a_mat * x + &self.b_stack * u
    }

    fn greedy_inputs(
        &self,
        x: &DVector<f64>,
        metric: &DMatrix<f64>,
        probe: &[Option<f64>],
        u: &mut DVector<f64>,
    ) {
        let mut y = &self.a_mat * x + &self.b_stack * &*u;
        for (k, amp) in probe.iter().enumerate() {
            let Some(amp) = amp else { continue };
            let col = self.b_stack.column(k);
            let slope = (col.transpose() * metric * &y)[(0, 0)];
            let s = if slope >= 0.0 { *amp } else { -*amp };
            y.axpy(s, &col, 1.0);
            u[k] = s;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
    pub channels: Vec<Channel>,
    pub tag: Option<ControllerTag>,
    pub params: Option<PlatoonParams>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.inputs.len()
    }

    /// Recomputes each update from the logged inputs; true when every state
    /// is reproduced bit for bit.
    pub fn replays_exactly(&self, system: &DiscreteSystem) -> bool {
        self.states.len() == self.inputs.len() + 1
            && self
                .inputs
                .iter()
                .enumerate()
                .all(|(k, u)| system.step(&self.states[k], u) == self.states[k + 1])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.states.first().map_or(0, |x| x.len());
        let mut header: Vec<String> = vec!["k".into()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend(self.channels.iter().map(|c| format!("u_{c}")));
        writeln!(w, "{}", header.join(","))?;
        for (k, x) in self.states.iter().enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(x.iter().map(|v| v.to_string()));
            match self.inputs.get(k) {
                Some(u) => row.extend(u.iter().map(|v| v.to_string())),
                None => row.extend(self.channels.iter().map(|_| String::new())),
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn simulate(
    model: &ClosedLoopModel,
    bounds: &DisturbanceBounds,
    signals: &BTreeMap<Channel, SignalSpec>,
    x0: &DVector<f64>,
    steps: usize,
) -> Result<Trajectory> {
    simulate_with_metric(model, bounds, signals, x0, steps, None)
}

/// Like [`simulate`], with the metric that orients bang-bang probe channels.
pub fn simulate_with_metric(
    model: &ClosedLoopModel,
    bounds: &DisturbanceBounds,
    signals: &BTreeMap<Channel, SignalSpec>,
    x0: &DVector<f64>,
    steps: usize,
    metric: Option<&DMatrix<f64>>,
) -> Result<Trajectory> {
    let system = DiscreteSystem::from_model(model, bounds)?;
    let mut traj = simulate_system(&system, signals, x0, steps, metric)?;
    traj.tag = Some(model.tag);
    traj.params = Some(model.params);
    Ok(traj)
}

pub fn simulate_system(
    system: &DiscreteSystem,
    signals: &BTreeMap<Channel, SignalSpec>,
    x0: &DVector<f64>,
    steps: usize,
    metric: Option<&DMatrix<f64>>,
) -> Result<Trajectory> {
    let n = system.dim();
    if x0.len() != n {
        return Err(Error::Precondition(format!(
            "initial state has length {}, expected {n}",
            x0.len()
        )));
    }
    let mut sources = Vec::with_capacity(system.channels.len());
    for (c, bound) in system.channels.iter().zip(&system.bounds) {
        let spec = signals
            .get(c)
            .ok_or_else(|| Error::MissingSignal(c.to_string()))?;
        spec.check(*c, *bound)?;
        sources.push(Source::new(spec));
    }
    if let Some(extra) = signals.keys().find(|c| !system.channels.contains(c)) {
        return Err(Error::Precondition(format!(
            "signal given for channel {extra}, which the model does not have"
        )));
    }
    let probe: Vec<Option<f64>> = sources
        .iter()
        .map(|s| {
            if let Source::Probe(a) = s {
                Some(*a)
            } else {
                None
            }
        })
        .collect();
    let identity;
    let metric = match metric {
        Some(m) => m,
        None => {
            identity = DMatrix::identity(n, n);
            &identity
        }
    };

    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps);
    states.push(x0.clone());
    for k in 0..steps {
        let mut u = DVector::from_iterator(sources.len(), sources.iter_mut().map(|s| s.value(k)));
        let x = &states[k];
        if probe.iter().any(Option::is_some) {
            system.greedy_inputs(x, metric, &probe, &mut u);
        }
        let next = system.step(x, &u);
        inputs.push(u);
        states.push(next);
    }
    Ok(Trajectory {
        states,
        inputs,
        channels: system.channels.clone(),
        tag: None,
        params: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Containment {
    pub violations: usize,
    pub max_ratio: f64,
}

/// Counts states with `x' P x > alpha (1 + 1e-9)`.
pub fn containment_of(states: &[DVector<f64>], p: &DMatrix<f64>, alpha: f64) -> Containment {
    let mut out = Containment {
        violations: 0,
        max_ratio: 0.0,
    };
    for x in states {
        let r = (x.transpose() * p * x)[(0, 0)] / alpha;
        if r > 1.0 + 1e-9 {
            out.violations += 1;
        }
        out.max_ratio = out.max_ratio.max(r);
    }
    out
}

pub fn validate_containment(traj: &Trajectory, sol: &ReachSolution) -> Containment {
    containment_of(&traj.states, &sol.p_mat, sol.alpha_inf)
}

/// Largest `x' P x / alpha` reached from the origin within `steps` steps
/// when every channel plays the greedy extreme input.
pub fn probe_tightness(
    model: &ClosedLoopModel,
    bounds: &DisturbanceBounds,
    sol: &ReachSolution,
    steps: usize,
) -> Result<f64> {
    let system = DiscreteSystem::from_model(model, bounds)?;
    probe_system(&system, &sol.p_mat, sol.alpha_inf, steps)
}

pub fn probe_system(
    system: &DiscreteSystem,
    p: &DMatrix<f64>,
    alpha: f64,
    steps: usize,
) -> Result<f64> {
    let signals = system
        .channels
        .iter()
        .zip(&system.bounds)
        .map(|(c, b)| (*c, SignalSpec::BangBangProbe { amplitude: *b }))
        .collect();
    let traj = simulate_system(
        system,
        &signals,
        &DVector::zeros(system.dim()),
        steps,
        Some(p),
    )?;
    Ok(containment_of(&traj.states, p, alpha).max_ratio)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignOptions {
    pub trajectories: usize,
    pub steps: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        Self {
            trajectories: 1000,
            steps: 500,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub trajectories: usize,
    pub total_steps: usize,
    pub violations: usize,
    pub max_ratio: f64,
}

/// Random admissible signal for a channel, drawn from all non-probing
/// families with full-bound amplitude most of the time.
pub fn random_signal(rng: &mut impl Rng, bound: f64) -> SignalSpec {
    let amplitude = if rng.gen_bool(0.75) {
        bound
    } else {
        bound * rng.gen::<f64>()
    };
    let period = rng.gen_range(2.0..400.0);
    let phase = rng.gen_range(0.0..2.0 * PI);
    match rng.gen_range(0..4) {
        0 => SignalSpec::Constant {
            value: if rng.gen() { amplitude } else { -amplitude },
        },
        1 => SignalSpec::Sinusoid {
            amplitude,
            period,
            phase,
        },
        2 => SignalSpec::Square {
            amplitude,
            period,
            phase,
        },
        _ => SignalSpec::UniformRandom {
            amplitude,
            seed: rng.gen(),
        },
    }
}

/// Simulates random admissible trajectories from the origin and checks them
/// against `{x' P x <= alpha}`.
pub fn containment_campaign(
    system: &DiscreteSystem,
    p: &DMatrix<f64>,
    alpha: f64,
    opts: &CampaignOptions,
) -> Result<CampaignReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let plans: Vec<BTreeMap<Channel, SignalSpec>> = (0..opts.trajectories)
        .map(|_| {
            system
                .channels
                .iter()
                .zip(&system.bounds)
                .map(|(c, b)| (*c, random_signal(&mut rng, *b)))
                .collect()
        })
        .collect();
    let x0 = DVector::zeros(system.dim());
    let results = map_ordered(&plans, opts.execution, |signals| {
        simulate_system(system, signals, &x0, opts.steps, None)
            .map(|t| containment_of(&t.states, p, alpha))
    });
    let mut report = CampaignReport {
        trajectories: opts.trajectories,
        total_steps: 0,
        violations: 0,
        max_ratio: 0.0,
    };
    for r in results {
        let c = r?;
        report.total_steps += opts.steps;
        report.violations += c.violations;
        report.max_ratio = report.max_ratio.max(c.max_ratio);
    }
    Ok(report)
}

/// Runs trajectories of the smaller attack set and checks them against the
/// ellipsoid of the larger one. Channels outside the small set stay at zero.
pub fn nested_set_check(
    model_small: &ClosedLoopModel,
    model_large: &ClosedLoopModel,
    sol_large: &ReachSolution,
    bounds: &DisturbanceBounds,
    opts: &CampaignOptions,
) -> Result<CampaignReport> {
    if !model_small
        .attack_set()
        .is_subset(&model_large.attack_set())
    {
        return Err(Error::Precondition(
            "small attack set must be contained in the large one".into(),
        ));
    }
    if model_small.tag != model_large.tag
        || model_small.params != model_large.params
        || (model_small.a_mat - model_large.a_mat).amax()
            > 1e-12 * model_large.a_mat.amax().max(1.0)
    {
        return Err(Error::Precondition(
            "nested models must share controller and parameters".into(),
        ));
    }
    let system = DiscreteSystem::from_model(model_small, bounds)?;
    containment_campaign(&system, &sol_large.p_mat, sol_large.alpha_inf, opts)
}
