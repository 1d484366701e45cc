// Copyright 2026 The cacc-reach Authors
// SPDX-License-Identifier: Apache-2.0

//! Study configuration and the three sensitivity sweeps: attacked-sensor
//! subsets, headway and sampling time.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::discretize::zoh_discretize;
use crate::ellipsoid::{critical_intersection, CriticalRegion, HalfPlane};
use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::platoon::{build_continuous, AttackSet, ControllerTag, PlatoonParams};
use crate::reach::{
    min_volume, ASearchOptions, DisturbanceBounds, ReachSolution, SolveDiagnostics,
};

/// Sweep grid given either as explicit points or as an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Points(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            Grid::Points(p) => Ok(p.clone()),
            Grid::Range { start, stop, step } => {
                if !(start.is_finite()
                    && stop.is_finite()
                    && step.is_finite()
                    && *step > 0.0
                    && stop >= start)
                {
                    return Err(Error::Precondition(
                        "grid range needs finite start <= stop and step > 0".into(),
                    ));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                // Rounded so that 0.01 * 35 prints as 0.35 in the reports.
                Ok((0..=n)
                    .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
                    .collect())
            }
        }
    }
}

/// One entry of the `attack_sets` list: a shorthand or an explicit set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttackSetEntry {
    Named(String),
    Set(AttackSet),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttackSetSpec {
    Named(String),
    List(Vec<AttackSetEntry>),
}

impl Default for AttackSetSpec {
    fn default() -> Self {
        AttackSetSpec::Named("singletons".into())
    }
}

fn expand_named(name: &str) -> Result<Vec<AttackSet>> {
    match name {
        "singletons" => Ok(AttackSet::singletons()),
        "full" => Ok(vec![AttackSet::full()]),
        "empty" | "none" => Ok(vec![AttackSet::empty()]),
        other => Err(Error::Precondition(format!(
            "unknown attack-set shorthand `{other}` (expected singletons, full or empty)"
        ))),
    }
}

impl AttackSetSpec {
    /// The listed sets in order, duplicates removed.
    pub fn resolve(&self) -> Result<Vec<AttackSet>> {
        let mut out: Vec<AttackSet> = Vec::new();
        let mut push = |s: AttackSet| {
            if !out.contains(&s) {
                out.push(s);
            }
        };
        match self {
            AttackSetSpec::Named(n) => expand_named(n)?.into_iter().for_each(&mut push),
            AttackSetSpec::List(entries) => {
                for e in entries {
                    match e {
                        AttackSetEntry::Named(n) => {
                            expand_named(n)?.into_iter().for_each(&mut push)
                        }
                        AttackSetEntry::Set(s) => push(s.clone()),
                    }
                }
            }
        }
        Ok(out)
    }
}

fn default_params() -> PlatoonParams {
    PlatoonParams {
        tau: 0.1,
        h: 0.5,
        kp: 0.2,
        kd: 0.7,
        kdd: 0.0,
        ts: 0.05,
    }
}

fn default_bounds() -> DisturbanceBounds {
    DisturbanceBounds::uniform(0.35, 35.0)
}

fn default_controllers() -> Vec<ControllerTag> {
    ControllerTag::ALL.to_vec()
}

fn default_h_grid() -> Grid {
    Grid::Range {
        start: 0.01,
        stop: 1.2,
        step: 0.01,
    }
}

fn default_ts_grid() -> Grid {
    Grid::Points(vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.5])
}

fn default_critical_region() -> CriticalRegion {
    CriticalRegion {
        half_planes: vec![HalfPlane {
            c: [0.0, -1.0],
            b: 20.0,
        }],
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_area_resolution() -> usize {
    400
}

fn default_angle_tolerance() -> f64 {
    5.0
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default = "default_params")]
    pub params: PlatoonParams,
    #[serde(default = "default_bounds")]
    pub bounds: DisturbanceBounds,
    #[serde(default = "default_controllers")]
    pub controllers: Vec<ControllerTag>,
    #[serde(default)]
    pub attack_sets: AttackSetSpec,
    #[serde(default = "default_h_grid")]
    pub h_grid: Grid,
    #[serde(default = "default_ts_grid")]
    pub ts_grid: Grid,
    #[serde(default)]
    pub a_search: ASearchOptions,
    #[serde(default = "default_critical_region")]
    pub critical_region: CriticalRegion,
    /// Grid cells per axis for the critical-area estimate.
    #[serde(default = "default_area_resolution")]
    pub area_resolution: usize,
    /// Largest principal-axis rotation (degrees) the sampling-time sweep
    /// treats as "orientation unchanged".
    #[serde(default = "default_angle_tolerance")]
    pub angle_tolerance_deg: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Fill the `solve_ms` column. Off by default so reruns are
    /// byte-identical.
    #[serde(default, skip_serializing_if = "is_false")]
    pub record_timing: bool,
    /// Free-form notes on where each setting comes from.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, String>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config uses defaults")
    }
}

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn check_grid(name: &str, grid: &Grid) -> Result<Vec<f64>> {
    let pts = grid.points().map_err(|e| schema(name, e.to_string()))?;
    if pts.is_empty() {
        return Err(schema(name, "grid is empty"));
    }
    if let Some(i) = pts.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(schema(
            &format!("{name}[{i}]"),
            "grid values must be positive",
        ));
    }
    if let Some(i) = pts.windows(2).position(|w| w[1] <= w[0]) {
        return Err(schema(
            &format!("{name}[{}]", i + 1),
            "grid must be strictly increasing",
        ));
    }
    Ok(pts)
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        for (name, value) in [("tau", p.tau), ("h", p.h), ("ts", p.ts)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(schema(
                    &format!("params.{name}"),
                    format!("must be positive, got {value}"),
                ));
            }
        }
        for (name, value) in [("kp", p.kp), ("kd", p.kd), ("kdd", p.kdd)] {
            if !value.is_finite() {
                return Err(schema(&format!("params.{name}"), "must be finite"));
            }
        }
        if !(self.bounds.v_bar.is_finite() && self.bounds.v_bar > 0.0) {
            return Err(schema("bounds.v_bar", "must be positive"));
        }
        for (j, w) in &self.bounds.attack_bounds {
            if !(1..=crate::platoon::SENSOR_COUNT).contains(j) {
                return Err(schema(
                    &format!("bounds.attack_bounds.{j}"),
                    "no such sensor",
                ));
            }
            if !(w.is_finite() && *w > 0.0) {
                return Err(schema(
                    &format!("bounds.attack_bounds.{j}"),
                    "must be positive",
                ));
            }
        }
        if self.controllers.is_empty() {
            return Err(schema("controllers", "at least one controller is required"));
        }
        let sets = self
            .attack_sets
            .resolve()
            .map_err(|e| schema("attack_sets", e.to_string()))?;
        if sets.is_empty() {
            return Err(schema("attack_sets", "no attack sets listed"));
        }
        let mut needed: Vec<u8> = sets.iter().flat_map(|s| s.channels().to_vec()).collect();
        needed.extend(AttackSet::full().channels());
        for j in needed {
            if !self.bounds.attack_bounds.contains_key(&j) {
                return Err(schema(
                    "bounds.attack_bounds",
                    format!("no bound for channel {j}"),
                ));
            }
        }
        check_grid("h_grid", &self.h_grid)?;
        check_grid("ts_grid", &self.ts_grid)?;
        self.a_search
            .validate()
            .map_err(|e| schema("a_search", e.to_string()))?;
        self.critical_region
            .validate()
            .map_err(|e| schema("critical_region", e.to_string()))?;
        if self.area_resolution == 0 {
            return Err(schema("area_resolution", "must be at least 1"));
        }
        if !(self.angle_tolerance_deg.is_finite() && self.angle_tolerance_deg >= 0.0) {
            return Err(schema("angle_tolerance_deg", "must be nonnegative"));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: StudyConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            match inner.classify() {
                serde_json::error::Category::Data => schema(&path, inner.to_string()),
                _ => Error::Parse(inner.to_string()),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn load_config(path: &Path) -> Result<StudyConfig> {
    StudyConfig::from_json_str(&fs::read_to_string(path)?)
}

pub fn save_config(cfg: &StudyConfig, path: &Path) -> Result<()> {
    fs::write(path, cfg.to_json_string() + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Sensors,
    Headway,
    SamplingTime,
    Single,
}

/// The v-z projection of a solution: `{y : y' P y <= alpha}` with
/// `P = [[p11, p12], [p12, p22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseRecord {
    pub p11: f64,
    pub p12: f64,
    pub p22: f64,
    pub alpha: f64,
    pub angle_deg: f64,
}

impl EllipseRecord {
    pub fn ellipsoid(&self) -> Result<crate::ellipsoid::Ellipsoid> {
        crate::ellipsoid::Ellipsoid::new(
            nalgebra::DMatrix::from_row_slice(2, 2, &[self.p11, self.p12, self.p12, self.p22]),
            self.alpha,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub study: StudyKind,
    pub controller: ControllerTag,
    pub attack_set: AttackSet,
    pub h: f64,
    pub ts: f64,
    pub feasible: bool,
    pub a_star: Option<f64>,
    pub alpha_inf: Option<f64>,
    pub volume_4d: Option<f64>,
    pub volume_vz: Option<f64>,
    pub ellipse: Option<EllipseRecord>,
    pub critical_area: Option<f64>,
    pub solve_ms: Option<f64>,
    pub diagnostics: Option<SolveDiagnostics>,
    pub error: Option<String>,
}

impl SweepRecord {
    /// Identifier without commas, stable across runs.
    pub fn key(&self) -> String {
        let l = if self.attack_set.is_empty() {
            "none".to_string()
        } else {
            self.attack_set
                .channels()
                .iter()
                .map(|j| j.to_string())
                .collect::<Vec<_>>()
                .join("-")
        };
        format!("{}/L={}/h={}/ts={}", self.controller, l, self.h, self.ts)
    }

    fn order(a: &Self, b: &Self) -> std::cmp::Ordering {
        (a.study, a.controller, &a.attack_set)
            .cmp(&(b.study, b.controller, &b.attack_set))
            .then(a.h.total_cmp(&b.h))
            .then(a.ts.total_cmp(&b.ts))
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSpec {
    pub study: StudyKind,
    pub controller: ControllerTag,
    pub attack_set: AttackSet,
    pub params: PlatoonParams,
}

/// Solves a single configuration, returning the full solution.
pub fn solve_point(
    cfg: &StudyConfig,
    controller: ControllerTag,
    attack_set: &AttackSet,
    params: &PlatoonParams,
) -> Result<ReachSolution> {
    let cont = build_continuous(params, controller, attack_set)?;
    let disc = zoh_discretize(&cont)?;
    min_volume(&disc, &cfg.bounds, &cfg.a_search)
}

fn record_from(cfg: &StudyConfig, spec: &PointSpec) -> SweepRecord {
    let start = Instant::now();
    let outcome =
        solve_point(cfg, spec.controller, &spec.attack_set, &spec.params).and_then(|sol| {
            let vz = sol.vz_ellipse()?;
            let angle = vz.principal_axis_angle()?;
            let crit = critical_intersection(&vz, &cfg.critical_region, cfg.area_resolution)?;
            Ok((sol, vz, angle, crit))
        });
    let solve_ms = cfg
        .record_timing
        .then(|| start.elapsed().as_secs_f64() * 1e3);
    let mut rec = SweepRecord {
        study: spec.study,
        controller: spec.controller,
        attack_set: spec.attack_set.clone(),
        h: spec.params.h,
        ts: spec.params.ts,
        feasible: false,
        a_star: None,
        alpha_inf: None,
        volume_4d: None,
        volume_vz: None,
        ellipse: None,
        critical_area: None,
        solve_ms,
        diagnostics: None,
        error: None,
    };
    match outcome {
        Ok((sol, vz, angle, crit)) => {
            let p = vz.p_mat();
            rec.feasible = true;
            rec.a_star = Some(sol.a);
            rec.alpha_inf = Some(sol.alpha_inf);
            rec.volume_4d = Some(sol.volume_4d);
            rec.volume_vz = Some(sol.volume_vz);
            rec.ellipse = Some(EllipseRecord {
                p11: p[(0, 0)],
                p12: p[(0, 1)],
                p22: p[(1, 1)],
                alpha: vz.alpha(),
                angle_deg: angle,
            });
            rec.critical_area = Some(crit.area);
            rec.diagnostics = Some(sol.diagnostics);
        }
        Err(e) => {
            log::warn!("{}: {e}", rec.key());
            rec.error = Some(e.to_string());
        }
    }
    rec
}

/// Solves every point and returns the records sorted by study, controller,
/// attack set, `h` and `ts`.
pub fn run_points(cfg: &StudyConfig, points: &[PointSpec], exec: Execution) -> Vec<SweepRecord> {
    let mut records = map_ordered(points, exec, |p| record_from(cfg, p));
    records.sort_by(SweepRecord::order);
    records
}

pub fn sensor_points(cfg: &StudyConfig) -> Result<Vec<PointSpec>> {
    cfg.validate()?;
    let sets = cfg.attack_sets.resolve()?;
    Ok(cfg
        .controllers
        .iter()
        .flat_map(|&controller| {
            sets.iter().map(move |l| PointSpec {
                study: StudyKind::Sensors,
                controller,
                attack_set: l.clone(),
                params: cfg.params,
            })
        })
        .collect())
}

/// Full attack set for every controller at every `h`, plus the C2
/// singletons that localize which channel drives the growth.
pub fn headway_points(cfg: &StudyConfig) -> Result<Vec<PointSpec>> {
    cfg.validate()?;
    let grid = check_grid("h_grid", &cfg.h_grid)?;
    let mut out = Vec::new();
    for &h in &grid {
        let params = cfg.params.with_h(h);
        for &controller in &cfg.controllers {
            out.push(PointSpec {
                study: StudyKind::Headway,
                controller,
                attack_set: AttackSet::full(),
                params,
            });
            if controller == ControllerTag::C2 {
                for l in AttackSet::singletons() {
                    out.push(PointSpec {
                        study: StudyKind::Headway,
                        controller,
                        attack_set: l,
                        params,
                    });
                }
            }
        }
    }
    Ok(out)
}

pub fn sampling_points(cfg: &StudyConfig) -> Result<Vec<PointSpec>> {
    cfg.validate()?;
    let grid = check_grid("ts_grid", &cfg.ts_grid)?;
    Ok(grid
        .iter()
        .flat_map(|&ts| {
            cfg.controllers.iter().map(move |&controller| PointSpec {
                study: StudyKind::SamplingTime,
                controller,
                attack_set: AttackSet::full(),
                params: cfg.params.with_ts(ts),
            })
        })
        .collect())
}

pub fn run_sensor_study(cfg: &StudyConfig, exec: Execution) -> Result<Vec<SweepRecord>> {
    Ok(run_points(cfg, &sensor_points(cfg)?, exec))
}

pub fn run_h_sweep(cfg: &StudyConfig, exec: Execution) -> Result<Vec<SweepRecord>> {
    Ok(run_points(cfg, &headway_points(cfg)?, exec))
}

pub fn run_ts_sweep(cfg: &StudyConfig, exec: Execution) -> Result<Vec<SweepRecord>> {
    Ok(run_points(cfg, &sampling_points(cfg)?, exec))
}

/// Spread of the principal-axis angle and relative spread of the projected
/// area over the feasible records of one controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientationSummary {
    pub angle_spread_deg: f64,
    pub area_spread_rel: f64,
    pub volume_4d_spread_rel: f64,
}

pub fn orientation_summary(
    records: &[SweepRecord],
    controller: ControllerTag,
) -> Option<OrientationSummary> {
    let rows: Vec<_> = records
        .iter()
        .filter(|r| r.controller == controller && r.feasible)
        .collect();
    if rows.is_empty() {
        return None;
    }
    let spread = |vals: Vec<f64>| {
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (alo, ahi) = spread(
        rows.iter()
            .filter_map(|r| r.ellipse.map(|e| e.angle_deg))
            .collect(),
    );
    let (vlo, vhi) = spread(rows.iter().filter_map(|r| r.volume_vz).collect());
    let (wlo, whi) = spread(rows.iter().filter_map(|r| r.volume_4d).collect());
    Some(OrientationSummary {
        angle_spread_deg: ahi - alo,
        area_spread_rel: (vhi - vlo) / vlo,
        volume_4d_spread_rel: (whi - wlo) / wlo,
    })
}
