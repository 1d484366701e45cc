// Copyright 2026 The cacc-reach Authors
// SPDX-License-Identifier: Apache-2.0

//! Origin-centered ellipsoids `{x : x' P x <= alpha}` and the geometry used
//! to compare reach sets: volumes, projections, linear images, support
//! functions and overlap with a critical region of the v-z plane.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2x4, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::platoon::PlatoonParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    p_mat: DMatrix<f64>,
    alpha: f64,
}

impl Ellipsoid {
    pub fn new(p_mat: DMatrix<f64>, alpha: f64) -> Result<Self> {
        if !p_mat.is_square() || p_mat.nrows() == 0 {
            return Err(Error::InvalidEllipsoid(
                "shape matrix must be square".into(),
            ));
        }
        if p_mat.iter().any(|v| !v.is_finite()) || !alpha.is_finite() {
            return Err(Error::NonFinite);
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidEllipsoid(format!(
                "level must be positive, got {alpha}"
            )));
        }
        let asym = (&p_mat - p_mat.transpose()).norm();
        if asym > 1e-12 * p_mat.norm() {
            return Err(Error::InvalidEllipsoid(format!(
                "shape matrix asymmetric ({asym:.2e})"
            )));
        }
        if p_mat.clone().cholesky().is_none() {
            return Err(Error::InvalidEllipsoid(
                "shape matrix not positive definite".into(),
            ));
        }
        Ok(Self { p_mat, alpha })
    }

    /// Builds from a matrix that is symmetric up to rounding.
    pub fn from_symmetrized(p_mat: DMatrix<f64>, alpha: f64) -> Result<Self> {
        let sym = (&p_mat + p_mat.transpose()) * 0.5;
        Self::new(sym, alpha)
    }

    pub fn p_mat(&self) -> &DMatrix<f64> {
        &self.p_mat
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.p_mat.nrows()
    }

    /// `x' P x`, evaluated as `|L' x|^2` with `P = L L'` so that thin
    /// ellipsoids lose only about half as many digits.
    pub fn quad(&self, x: &DVector<f64>) -> f64 {
        let l = self
            .p_mat
            .clone()
            .cholesky()
            .expect("SPD shape matrix")
            .unpack();
        (l.transpose() * x).norm_squared()
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.quad(x) <= self.alpha
    }

    fn p_inverse(&self) -> DMatrix<f64> {
        // Validated SPD at construction.
        self.p_mat
            .clone()
            .cholesky()
            .expect("SPD shape matrix")
            .inverse()
    }

    /// Lebesgue volume.
    pub fn volume(&self) -> f64 {
        let n = self.dim() as f64;
        let det = self
            .p_mat
            .clone()
            .cholesky()
            .expect("SPD shape matrix")
            .determinant();
        unit_ball_volume(self.dim()) * self.alpha.powf(n / 2.0) / det.sqrt()
    }

    /// Natural log of the volume, safe for very flat ellipsoids.
    pub fn ln_volume(&self) -> f64 {
        let n = self.dim() as f64;
        let l = self.p_mat.clone().cholesky().expect("SPD shape matrix");
        let ln_det: f64 = 2.0 * l.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        unit_ball_volume(self.dim()).ln() + 0.5 * n * self.alpha.ln() - 0.5 * ln_det
    }

    /// Projection onto the leading `k` coordinates: `Q1 - Q2 Q3^-1 Q2'`.
    pub fn project_leading(&self, k: usize) -> Result<Ellipsoid> {
        let n = self.dim();
        if k == 0 || k >= n {
            return Err(Error::Precondition(format!(
                "projection dimension {k} not in 1..{n}"
            )));
        }
        let q1 = self.p_mat.view((0, 0), (k, k));
        let q2 = self.p_mat.view((0, k), (k, n - k));
        let q3 = self.p_mat.view((k, k), (n - k, n - k)).into_owned();
        let q3_chol = q3.cholesky().ok_or(Error::SingularBlock)?;
        let proj = q1 - q2 * q3_chol.solve(&q2.transpose());
        Ellipsoid::from_symmetrized(proj, self.alpha)
    }

    /// Image under `y = M x` for a full-row-rank `M`: shape `(M P^-1 M')^-1`.
    pub fn linear_image(&self, m: &DMatrix<f64>) -> Result<Ellipsoid> {
        if m.ncols() != self.dim() || m.nrows() == 0 || m.nrows() > m.ncols() {
            return Err(Error::RankDeficient);
        }
        let g = m * self.p_inverse() * m.transpose();
        let g = (&g + g.transpose()) * 0.5;
        let eig = SymmetricEigen::new(g.clone());
        let max = eig.eigenvalues.amax();
        if !(max > 0.0) || eig.eigenvalues.min() <= 1e-13 * max {
            return Err(Error::RankDeficient);
        }
        let inv = g.cholesky().ok_or(Error::RankDeficient)?.inverse();
        Ellipsoid::from_symmetrized(inv, self.alpha)
    }

    /// `max_{x in E} d'x = sqrt(alpha d' P^-1 d)`.
    pub fn support(&self, d: &DVector<f64>) -> f64 {
        let chol = self.p_mat.clone().cholesky().expect("SPD shape matrix");
        let y = chol.solve(d);
        (self.alpha * d.dot(&y)).max(0.0).sqrt()
    }

    /// Points on the boundary with directions drawn uniformly from the
    /// sphere and mapped through `P^-1/2`.
    pub fn boundary_points(&self, count: usize, seed: u64) -> Vec<DVector<f64>> {
        let n = self.dim();
        let inv_sqrt = inverse_sqrt(&self.p_mat);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let g = DVector::<f64>::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let norm = g.norm();
            if norm < 1e-12 {
                continue;
            }
            let x = &inv_sqrt * (g / norm) * self.alpha.sqrt();
            out.push(self.rescale_to_boundary(x));
        }
        out
    }

    fn rescale_to_boundary(&self, x: DVector<f64>) -> DVector<f64> {
        let q = self.quad(&x);
        x * (self.alpha / q).sqrt()
    }

    /// Closed polyline of a planar ellipse, evenly spaced in the
    /// Cholesky-whitened angle.
    pub fn polyline(&self, count: usize) -> Result<Vec<[f64; 2]>> {
        if self.dim() != 2 {
            return Err(Error::Precondition("polyline needs a 2-D ellipse".into()));
        }
        let l = self.p_mat.clone().cholesky().expect("SPD shape matrix");
        let lt = l.l().transpose();
        let lt_inv = lt.try_inverse().ok_or(Error::SingularBlock)?;
        let s = self.alpha.sqrt();
        Ok((0..count)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / count as f64;
                let u = DVector::from_row_slice(&[th.cos(), th.sin()]);
                let x = self.rescale_to_boundary(&lt_inv * u * s);
                [x[0], x[1]]
            })
            .collect())
    }

    /// Angle in degrees, in `(-90, 90]`, of the major axis of a planar
    /// ellipse measured from the first coordinate axis.
    pub fn principal_axis_angle(&self) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::Precondition("axis angle needs a 2-D ellipse".into()));
        }
        let (a, b, c) = (self.p_mat[(0, 0)], self.p_mat[(0, 1)], self.p_mat[(1, 1)]);
        // Eigenvector of the smaller eigenvalue of [[a, b], [b, c]].
        let theta = 0.5 * (2.0 * b).atan2(a - c) + PI / 2.0;
        let mut deg = theta.to_degrees();
        while deg > 90.0 {
            deg -= 180.0;
        }
        while deg <= -90.0 {
            deg += 180.0;
        }
        Ok(deg)
    }

    /// Semi-axis lengths, largest first.
    pub fn semi_axes(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.p_mat.clone());
        let mut axes: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|l| (self.alpha / l).sqrt())
            .collect();
        axes.sort_by(|a, b| b.total_cmp(a));
        axes
    }
}

/// Volume of the unit ball in `n` dimensions.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

pub(crate) fn inverse_sqrt(p: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(p.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Maps the state `[e, e_dot, internal, z]` to `(v, z)`, using the
/// spacing error `e = z - h v`.
pub fn vz_map(params: &PlatoonParams) -> Matrix2x4<f64> {
    let h = params.h;
    #[rustfmt::skip]
    let m = Matrix2x4::new(
        -1.0 / h, 0.0, 0.0, 1.0 / h,
        0.0, 0.0, 0.0, 1.0,
    );
    m
}

pub fn vz_map_dyn(params: &PlatoonParams) -> DMatrix<f64> {
    let m = vz_map(params);
    DMatrix::from_iterator(2, 4, m.iter().copied())
}

/// Half-plane `{y : c'y >= b}` of the v-z plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfPlane {
    pub c: [f64; 2],
    pub b: f64,
}

/// Union of half-planes marking critical states; its complement is the
/// non-critical region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalRegion {
    pub half_planes: Vec<HalfPlane>,
}

impl CriticalRegion {
    pub fn validate(&self) -> Result<()> {
        if self.half_planes.is_empty() {
            return Err(Error::Precondition(
                "critical region needs at least one half-plane".into(),
            ));
        }
        for hp in &self.half_planes {
            if hp.c.iter().all(|v| *v == 0.0) || hp.c.iter().chain([&hp.b]).any(|v| !v.is_finite())
            {
                return Err(Error::Precondition(
                    "half-plane normal must be nonzero and finite".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn contains(&self, y: [f64; 2]) -> bool {
        self.half_planes
            .iter()
            .any(|hp| hp.c[0] * y[0] + hp.c[1] * y[1] >= hp.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub disjoint: bool,
    pub area: f64,
}

/// Overlap of a planar ellipse with the critical region. Disjointness is
/// decided exactly through support values. For the area the ellipse is
/// whitened to the unit disk, where each vertical chord meets the union of
/// half-planes in a set whose length is exact; the chords are integrated
/// with `resolution` midpoints in `t = sin(theta)`.
pub fn critical_intersection(
    e2d: &Ellipsoid,
    region: &CriticalRegion,
    resolution: usize,
) -> Result<Intersection> {
    if e2d.dim() != 2 {
        return Err(Error::Precondition(
            "critical intersection needs a 2-D ellipse".into(),
        ));
    }
    region.validate()?;
    let disjoint = region.half_planes.iter().all(|hp| {
        let c = DVector::from_row_slice(&hp.c);
        e2d.support(&c) < hp.b
    });
    if disjoint {
        return Ok(Intersection {
            disjoint,
            area: 0.0,
        });
    }
    // x = sqrt(alpha) L^-T u maps the unit disk onto the ellipse, and
    // c'x >= b becomes g'u >= b with g = sqrt(alpha) L^-1 c.
    let l = e2d
        .p_mat
        .clone()
        .cholesky()
        .expect("SPD shape matrix")
        .unpack();
    let whitened: Vec<(DVector<f64>, f64)> = region
        .half_planes
        .iter()
        .map(|hp| {
            let g = l
                .solve_lower_triangular(&DVector::from_row_slice(&hp.c))
                .expect("nonsingular factor")
                * e2d.alpha.sqrt();
            (g, hp.b)
        })
        .collect();
    // The disk is rotation invariant. Chords along the first normal keep
    // that plane's cut length continuous across chords.
    let n0 = &whitened[0].0 / whitened[0].0.norm();
    let planes: Vec<([f64; 2], f64)> = whitened
        .iter()
        .map(|(g, b)| ([g[0] * -n0[1] + g[1] * n0[0], g.dot(&n0)], *b))
        .collect();
    let res = resolution.max(1);
    let dth = PI / res as f64;
    let mut covered = 0.0;
    for i in 0..res {
        let th = -PI / 2.0 + (i as f64 + 0.5) * dth;
        let (t, w) = (th.sin(), th.cos());
        let s = w;
        // Complement of the union on this chord is the intersection of the
        // complements, an interval [lo, hi].
        let (mut lo, mut hi) = (-s, s);
        for ([g1, g2], b) in &planes {
            let rhs = b - g1 * t;
            if *g2 > 0.0 {
                hi = hi.min(rhs / g2);
            } else if *g2 < 0.0 {
                lo = lo.max(rhs / g2);
            } else if rhs <= 0.0 {
                hi = lo;
            }
        }
        covered += (2.0 * s - (hi - lo).max(0.0)) * w * dth;
    }
    Ok(Intersection {
        disjoint,
        area: covered * e2d.volume() / PI,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn ball(n: usize) -> Ellipsoid {
        Ellipsoid::new(DMatrix::identity(n, n), 1.0).unwrap()
    }

    fn diag(d: &[f64], alpha: f64) -> Ellipsoid {
        Ellipsoid::new(DMatrix::from_diagonal(&DVector::from_row_slice(d)), alpha).unwrap()
    }

    #[test]
    fn unit_ball_volumes() {
        assert_relative_eq!(ball(2).volume(), PI, max_relative = 1e-15);
        assert_relative_eq!(ball(4).volume(), PI * PI / 2.0, max_relative = 1e-15);
        assert_relative_eq!(ball(3).volume(), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(
            ball(4).ln_volume(),
            (PI * PI / 2.0).ln(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn squashed_disk_area_matches_monte_carlo() {
        let e = diag(&[4.0, 1.0], 1.0);
        assert_relative_eq!(e.volume(), PI / 2.0, max_relative = 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples = 1_000_000;
        let inside = (0..samples)
            .filter(|_| {
                let x =
                    DVector::from_row_slice(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
                e.contains(&x)
            })
            .count();
        let mc = 4.0 * inside as f64 / samples as f64;
        assert!((mc / (PI / 2.0) - 1.0).abs() < 0.01, "mc area {mc}");
    }

    #[test]
    fn invalid_shapes_rejected() {
        assert!(Ellipsoid::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]), 1.0).is_err());
        assert!(
            Ellipsoid::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]), 1.0).is_err()
        );
        assert!(Ellipsoid::new(DMatrix::identity(2, 2), 0.0).is_err());
    }

    #[test]
    fn projection_of_diagonal_is_leading_block() {
        let e = diag(&[1.0, 2.0, 3.0, 4.0], 2.5);
        let p = e.project_leading(2).unwrap();
        assert_eq!(
            p.p_mat(),
            &DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 2.0]))
        );
        assert_eq!(p.alpha(), 2.5);
        assert_eq!(
            ball(4).project_leading(3).unwrap().p_mat(),
            &DMatrix::identity(3, 3)
        );
        assert!(e.project_leading(0).is_err());
        assert!(e.project_leading(4).is_err());
    }

    #[test]
    fn scaling_map_scales_volume() {
        let e = diag(&[2.0, 0.5, 3.0], 1.5);
        let c = 1.7;
        let img = e.linear_image(&(DMatrix::identity(3, 3) * c)).unwrap();
        assert_relative_eq!(img.p_mat(), &(e.p_mat() / (c * c)), max_relative = 1e-12);
        assert_relative_eq!(img.volume(), e.volume() * c.powi(3), max_relative = 1e-12);
    }

    #[test]
    fn rank_deficient_map_rejected() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        assert!(matches!(
            ball(3).linear_image(&m),
            Err(Error::RankDeficient)
        ));
    }

    #[test]
    fn vz_map_arithmetic() {
        let p = PlatoonParams {
            tau: 0.1,
            h: 0.5,
            kp: 0.2,
            kd: 0.7,
            kdd: 0.0,
            ts: 0.01,
        };
        let m = vz_map(&p);
        let y = m * nalgebra::Vector4::new(0.1, 0.0, 0.0, 0.6);
        assert_relative_eq!(y[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(y[1], 0.6, epsilon = 1e-15);
        let y = m * nalgebra::Vector4::new(0.0, 3.0, -1.0, 0.8);
        assert_relative_eq!(y[0], 0.8 / 0.5, epsilon = 1e-15);
        let y = m * nalgebra::Vector4::new(0.8, 0.0, 0.0, 0.8);
        assert_eq!(y[0], 0.0);
    }

    #[test]
    fn support_of_ball_and_symmetry() {
        let d = DVector::from_row_slice(&[0.6, 0.8]);
        assert_relative_eq!(ball(2).support(&d), 1.0, epsilon = 1e-15);
        let e = Ellipsoid::new(DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]), 1.3).unwrap();
        assert_eq!(e.support(&d), e.support(&-d.clone()));
    }

    #[test]
    fn support_bounds_sampled_boundary() {
        let e = Ellipsoid::new(
            DMatrix::from_row_slice(3, 3, &[3.0, 0.4, -0.2, 0.4, 1.0, 0.1, -0.2, 0.1, 0.5]),
            2.0,
        )
        .unwrap();
        let d = DVector::from_row_slice(&[0.3, -1.0, 0.7]);
        let pts = e.boundary_points(100_000, 11);
        let best = pts
            .iter()
            .map(|x| d.dot(x))
            .fold(f64::NEG_INFINITY, f64::max);
        let s = e.support(&d);
        assert!(
            best <= s + 1e-12 && s <= best + 1e-3,
            "best {best} support {s}"
        );
    }

    #[test]
    fn boundary_points_lie_on_boundary() {
        let pts = ball(3).boundary_points(200, 1);
        assert!(pts.iter().all(|x| (x.norm() - 1.0).abs() < 1e-12));
        let e =
            Ellipsoid::new(DMatrix::from_row_slice(2, 2, &[5.0, -1.0, -1.0, 0.4]), 3.0).unwrap();
        let count = 4000;
        let pts = e.boundary_points(count, 5);
        for x in &pts {
            assert!((e.quad(x) - 3.0).abs() <= 1e-10 * 3.0);
        }
        let mean = pts.iter().fold(DVector::zeros(2), |acc, x| acc + x) / count as f64;
        assert!(mean.norm() < 5.0 / (count as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn polyline_on_boundary() {
        let e =
            Ellipsoid::new(DMatrix::from_row_slice(2, 2, &[5.0, -1.0, -1.0, 0.4]), 3.0).unwrap();
        for p in e.polyline(256).unwrap() {
            let x = DVector::from_row_slice(&p);
            assert!((e.quad(&x) - 3.0).abs() <= 1e-8 * 3.0);
        }
    }

    #[test]
    fn principal_axis_angles() {
        assert_relative_eq!(
            diag(&[1.0, 4.0], 1.0).principal_axis_angle().unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            diag(&[4.0, 1.0], 1.0).principal_axis_angle().unwrap(),
            90.0,
            epsilon = 1e-12
        );
        // Major axis along (1, 1).
        let e =
            Ellipsoid::new(DMatrix::from_row_slice(2, 2, &[2.5, -1.5, -1.5, 2.5]), 1.0).unwrap();
        assert_relative_eq!(e.principal_axis_angle().unwrap(), 45.0, epsilon = 1e-10);
    }

    fn half(c: [f64; 2], b: f64) -> CriticalRegion {
        CriticalRegion {
            half_planes: vec![HalfPlane { c, b }],
        }
    }

    #[test]
    fn disk_far_from_region_is_disjoint() {
        let r = critical_intersection(&ball(2), &half([1.0, 0.0], 2.0), 100).unwrap();
        assert!(r.disjoint);
        assert_eq!(r.area, 0.0);
    }

    #[test]
    fn half_disk_area() {
        let r = critical_intersection(&ball(2), &half([1.0, 0.0], 0.0), 2000).unwrap();
        assert!(!r.disjoint);
        assert!((r.area / (PI / 2.0) - 1.0).abs() < 1e-6, "area {}", r.area);
    }

    #[test]
    fn circular_segment_area() {
        // Segment of the unit disk beyond chord distance d.
        let d: f64 = 0.5;
        let exact = d.acos() - d * (1.0 - d * d).sqrt();
        let r = critical_intersection(&ball(2), &half([1.0, 0.0], d), 2000).unwrap();
        assert!(
            (r.area / exact - 1.0).abs() < 1e-5,
            "area {} exact {exact}",
            r.area
        );
    }

    #[test]
    fn needle_ellipse_area_bounded_by_total() {
        let u = DVector::from_row_slice(&[1.0, -2.0]);
        let p = &u * u.transpose() * 5.6e6 + DMatrix::identity(2, 2) * 1e-3;
        let e = Ellipsoid::from_symmetrized(p, 1.0).unwrap();
        let r = critical_intersection(&e, &half([0.0, -1.0], 0.0), 400).unwrap();
        assert!(
            (r.area / (e.volume() / 2.0) - 1.0).abs() < 1e-6,
            "area {} total {}",
            r.area,
            e.volume()
        );
        let two = CriticalRegion {
            half_planes: vec![
                HalfPlane {
                    c: [0.0, -1.0],
                    b: 0.0,
                },
                HalfPlane {
                    c: [0.0, 1.0],
                    b: 0.0,
                },
            ],
        };
        let all = critical_intersection(&e, &two, 50).unwrap();
        assert!((all.area / e.volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn region_validation() {
        assert!(CriticalRegion {
            half_planes: vec![]
        }
        .validate()
        .is_err());
        assert!(half([0.0, 0.0], 1.0).validate().is_err());
    }

    #[test]
    fn random_projection_matches_lifted_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = DMatrix::<f64>::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
        let p = &g * g.transpose() + DMatrix::identity(4, 4) * 0.1;
        let e = Ellipsoid::from_symmetrized(p, 1.7).unwrap();
        let proj = e.project_leading(2).unwrap();
        for _ in 0..100 {
            let d = DVector::from_row_slice(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            let lifted = DVector::from_row_slice(&[d[0], d[1], 0.0, 0.0]);
            assert_relative_eq!(proj.support(&d), e.support(&lifted), max_relative = 1e-10);
        }
    }
}
