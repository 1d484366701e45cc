// Copyright 2026 The cacc-reach Authors
// SPDX-License-Identifier: Apache-2.0

//! Report files: `volumes.csv`, `ellipses.csv`, `summary.json` and
//! optional SVG figures of the projected ellipses.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ellipsoid::CriticalRegion;
use crate::error::{Error, Result};
use crate::platoon::ControllerTag;
use crate::study::{StudyConfig, StudyKind, SweepRecord};

pub const VOLUMES_HEADER: [&str; 11] = [
    "controller",
    "attack_set",
    "h",
    "ts",
    "a_star",
    "alpha_inf",
    "volume_4d",
    "volume_vz",
    "critical_area",
    "feasible",
    "solve_ms",
];

pub const ELLIPSES_HEADER: [&str; 4] = ["record_key", "point_index", "v", "z"];

pub const POLYLINE_POINTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub tool: String,
    pub version: String,
    pub config: StudyConfig,
    pub record_count: usize,
    pub feasible_count: usize,
    pub records: Vec<SweepRecord>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportPaths {
    pub volumes: PathBuf,
    pub ellipses: PathBuf,
    pub summary: PathBuf,
    pub figures: Vec<PathBuf>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn write_volumes<W: std::io::Write>(records: &[SweepRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(VOLUMES_HEADER).map_err(csv_err)?;
    for r in records {
        out.write_record([
            r.controller.to_string(),
            r.attack_set.to_string(),
            r.h.to_string(),
            r.ts.to_string(),
            opt(r.a_star),
            opt(r.alpha_inf),
            opt(r.volume_4d),
            opt(r.volume_vz),
            opt(r.critical_area),
            r.feasible.to_string(),
            opt(r.solve_ms),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_ellipses<W: std::io::Write>(records: &[SweepRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ELLIPSES_HEADER).map_err(csv_err)?;
    for r in records {
        let Some(e) = r.ellipse else { continue };
        let key = r.key();
        for (i, [v, z]) in e
            .ellipsoid()?
            .polyline(POLYLINE_POINTS)?
            .into_iter()
            .enumerate()
        {
            out.write_record([key.clone(), i.to_string(), v.to_string(), z.to_string()])
                .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes every report file under `out_dir`. SVG figures go to
/// `out_dir/figures` when `svg` is set.
pub fn emit_reports(
    records: &[SweepRecord],
    cfg: &StudyConfig,
    out_dir: &Path,
    svg: bool,
) -> Result<ReportPaths> {
    if records.is_empty() {
        return Err(Error::Precondition("no records to report".into()));
    }
    fs::create_dir_all(out_dir)?;
    let paths = ReportPaths {
        volumes: out_dir.join("volumes.csv"),
        ellipses: out_dir.join("ellipses.csv"),
        summary: out_dir.join("summary.json"),
        figures: Vec::new(),
    };
    write_volumes(records, fs::File::create(&paths.volumes)?)?;
    write_ellipses(
        records,
        std::io::BufWriter::new(fs::File::create(&paths.ellipses)?),
    )?;
    let summary = Summary {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        record_count: records.len(),
        feasible_count: records.iter().filter(|r| r.feasible).count(),
        records: records.to_vec(),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.into()))?;
    fs::write(&paths.summary, json + "\n")?;
    let mut paths = paths;
    if svg {
        let dir = out_dir.join("figures");
        fs::create_dir_all(&dir)?;
        for ((study, tag), group) in group_records(records) {
            let path = dir.join(format!("{}_{}.svg", study_slug(study), tag));
            fs::write(
                &path,
                render_svg(
                    &group,
                    &cfg.critical_region,
                    &format!("{} {}", study_slug(study), tag),
                )?,
            )?;
            paths.figures.push(path);
        }
    }
    Ok(paths)
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn study_slug(s: StudyKind) -> &'static str {
    match s {
        StudyKind::Sensors => "sensors",
        StudyKind::Headway => "headway",
        StudyKind::SamplingTime => "sampling",
        StudyKind::Single => "single",
    }
}

fn group_records(
    records: &[SweepRecord],
) -> BTreeMap<(StudyKind, ControllerTag), Vec<&SweepRecord>> {
    let mut groups: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.feasible) {
        if r.study == StudyKind::Headway
            && r.attack_set.len() != crate::platoon::SENSOR_COUNT as usize
        {
            continue;
        }
        groups.entry((r.study, r.controller)).or_default().push(r);
    }
    groups
}

const MAX_CURVES: usize = 12;
const PALETTE: [&str; 6] = [
    "#1b6ca8", "#d1495b", "#edae49", "#00798c", "#66a182", "#8d5a97",
];

fn curve_label(r: &SweepRecord) -> String {
    match r.study {
        StudyKind::Headway => format!("h = {}", r.h),
        StudyKind::SamplingTime => format!("Ts = {}", r.ts),
        _ => format!("L = {}", r.attack_set),
    }
}

/// Minimal SVG: ellipse outlines, the critical region clipped to the view,
/// axes and a legend.
pub fn render_svg(
    records: &[&SweepRecord],
    region: &CriticalRegion,
    title: &str,
) -> Result<String> {
    let stride = records.len().div_ceil(MAX_CURVES).max(1);
    let chosen: Vec<&SweepRecord> = records.iter().copied().step_by(stride).collect();
    let mut curves = Vec::new();
    for r in &chosen {
        if let Some(e) = r.ellipse {
            curves.push((curve_label(r), e.ellipsoid()?.polyline(128)?));
        }
    }
    let (mut vmax, mut zmax) = (1e-9f64, 1e-9f64);
    for (_, pts) in &curves {
        for [v, z] in pts {
            vmax = vmax.max(v.abs());
            zmax = zmax.max(z.abs());
        }
    }
    vmax *= 1.1;
    zmax *= 1.1;
    let (w, h, m) = (640.0, 480.0, 50.0);
    let sx = |v: f64| m + (v + vmax) / (2.0 * vmax) * (w - 2.0 * m);
    let sy = |z: f64| h - m - (z + zmax) / (2.0 * zmax) * (h - 2.0 * m);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);

    // Critical cells as a coarse raster so unions of half-planes need no
    // polygon clipping.
    let cells = 60;
    let (cw, ch) = ((w - 2.0 * m) / cells as f64, (h - 2.0 * m) / cells as f64);
    for i in 0..cells {
        for j in 0..cells {
            let v = -vmax + (i as f64 + 0.5) * 2.0 * vmax / cells as f64;
            let z = zmax - (j as f64 + 0.5) * 2.0 * zmax / cells as f64;
            if region.contains([v, z]) {
                let _ = writeln!(
                    s,
                    r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#f4cccc"/>"##,
                    m + i as f64 * cw,
                    m + j as f64 * ch,
                    cw + 0.05,
                    ch + 0.05
                );
            }
        }
    }
    let _ = writeln!(
        s,
        r#"<line x1="{m}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        sy(0.0),
        w - m,
        sy(0.0)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{m}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        sx(0.0),
        sx(0.0),
        h - m
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.0}" y="{:.0}" font-size="12">v [{:.3}, {:.3}]</text>"#,
        w - m - 120.0,
        h - m + 30.0,
        -vmax,
        vmax
    );
    let _ = writeln!(
        s,
        r#"<text x="{m}" y="{:.0}" font-size="12">z [{:.3}, {:.3}]</text>"#,
        m - 10.0,
        -zmax,
        zmax
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.0}" y="20" font-size="14" text-anchor="middle">{title}</text>"#,
        w / 2.0
    );
    for (k, (label, pts)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        for (i, [v, z]) in pts.iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.2},{:.2} ",
                if i == 0 { "M" } else { "L" },
                sx(*v),
                sy(*z)
            );
        }
        d.push('Z');
        let _ = writeln!(
            s,
            r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.2"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.0}" y="{:.0}" font-size="11" fill="{color}">{label}</text>"#,
            w - m - 110.0,
            m + 14.0 * k as f64 + 10.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
