//! Spatial reconstruction: rotation families from mutual links, the triangle
//! and tetrahedron solvers, three-point resection, sequential registration
//! and bundle adjustment.

mod resect;
mod triangle;

pub use resect::*;
pub use triangle::*;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Unit};

use crate::error::{Error, Result};
use crate::geometry::{
    align_similarity_3d, angle_between, cayley, skew, Mat3, Pose3, RodriguesVec, Sim3, UnitVec3,
    Vec3,
};
use crate::graph::{tangent_basis, CameraId, SightingGraph3};
use crate::optim::{levenberg_marquardt, null_vector, LeastSquares, LmConfig};
use crate::recon2d::{default_scale_pair, AdjustReport, Gauge};

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction3 {
    pub poses: BTreeMap<CameraId, Pose3>,
    pub gauge: Gauge,
    /// Rms angle between measured and predicted directions, in radians.
    pub residual: f64,
}

/// Moves `poses` into `gauge` by a similarity: anchor at the origin with the
/// identity rotation, scale pair at unit distance.
pub fn fix_gauge_3d(
    poses: &BTreeMap<CameraId, Pose3>,
    gauge: Gauge,
) -> Result<BTreeMap<CameraId, Pose3>> {
    let get = |id: CameraId| poses.get(&id).ok_or(Error::UnknownCamera(id));
    let anchor = get(gauge.anchor)?;
    let a = get(gauge.scale_pair.0)?.position();
    let b = get(gauge.scale_pair.1)?.position();
    let dist = (b - a).norm();
    if dist <= 1e-300 || !dist.is_finite() {
        return Err(Error::AmbiguousScale);
    }
    let q = anchor.rotation();
    let scale = 1.0 / dist;
    let sim = Sim3 {
        scale,
        rotation: q,
        translation: -(q * anchor.position() * scale),
    };
    let mut out = BTreeMap::new();
    for (id, p) in poses {
        let moved = sim.apply_pose(p);
        out.insert(
            *id,
            Pose3::new_orthonormalized(moved.position(), moved.rotation())?,
        );
    }
    out.insert(gauge.anchor, Pose3::identity());
    Ok(out)
}

/// Log-map residual of a predicted direction in the tangent plane of the
/// measured one; its norm is the angle between them.
pub(crate) fn log_residual(measured: &UnitVec3, predicted: &Vec3) -> [f64; 2] {
    let n = predicted.norm();
    if n == 0.0 || !n.is_finite() {
        return [std::f64::consts::PI, 0.0];
    }
    let p = predicted / n;
    let w = p - measured.into_inner() * p.dot(measured);
    let wn = w.norm();
    let theta = wn.atan2(p.dot(measured));
    let (e1, e2) = tangent_basis(measured);
    if wn < 1e-300 {
        // exactly aligned, or exactly opposite
        return [theta, 0.0];
    }
    [theta * e1.dot(&w) / wn, theta * e2.dot(&w) / wn]
}

pub(crate) fn predicted_direction(observer: &Pose3, target: &Vec3) -> Vec3 {
    observer.rotation() * (target - observer.position())
}

pub fn rms_residual_3d(g: &SightingGraph3, poses: &BTreeMap<CameraId, Pose3>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for s in g.sightings() {
        if let (Some(o), Some(t)) = (poses.get(&s.observer), poses.get(&s.target)) {
            let a = angle_between(&s.bearing, &predicted_direction(o, &t.position()));
            sum += a * a;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        (sum / count as f64).sqrt()
    }
}

/// Positions from known rotations in the native frame of `rotations`, with
/// the smallest camera at the origin and an arbitrary positive scale.
pub(crate) fn positions_from_rotations(
    g: &SightingGraph3,
    rotations: &BTreeMap<CameraId, Mat3>,
    rank_tol: f64,
) -> Result<BTreeMap<CameraId, Vec3>> {
    let ids = g.cameras();
    if ids.len() < 2 || g.is_empty() {
        return Err(Error::AmbiguousScale);
    }
    let col: BTreeMap<CameraId, usize> = ids[1..]
        .iter()
        .enumerate()
        .map(|(k, id)| (*id, 3 * k))
        .collect();
    let ncols = 3 * (ids.len() - 1);
    let mut a = DMatrix::zeros(3 * g.len(), ncols);
    let mut dirs = Vec::with_capacity(g.len());
    for (row, s) in g.sightings().iter().enumerate() {
        let r = rotations
            .get(&s.observer)
            .ok_or(Error::UnknownCamera(s.observer))?;
        let u = r.transpose() * s.bearing.into_inner();
        let k = skew(&u);
        if let Some(&c) = col.get(&s.target) {
            let mut v = a.view_mut((3 * row, c), (3, 3));
            v += k;
        }
        if let Some(&c) = col.get(&s.observer) {
            let mut v = a.view_mut((3 * row, c), (3, 3));
            v -= k;
        }
        dirs.push(u);
    }
    let x = null_vector(&a, rank_tol)?;
    let pos = |id: CameraId| -> Vec3 {
        match col.get(&id) {
            Some(&c) => Vec3::new(x[c], x[c + 1], x[c + 2]),
            None => Vec3::zeros(),
        }
    };
    let along: f64 = g
        .sightings()
        .iter()
        .zip(&dirs)
        .map(|(s, u)| u.dot(&(pos(s.target) - pos(s.observer))))
        .sum();
    let sign = if along < 0.0 { -1.0 } else { 1.0 };
    Ok(ids.iter().map(|&id| (id, pos(id) * sign)).collect())
}

/// Linear position solve from known rotations: every sighting forces
/// `(T_j - T_i) x R_i^T v_ij = 0`.
pub fn solve_positions_3d(
    g: &SightingGraph3,
    rotations: &BTreeMap<CameraId, Mat3>,
) -> Result<Reconstruction3> {
    let positions = positions_from_rotations(g, rotations, 1e-10)?;
    let mut poses = BTreeMap::new();
    for (&id, t) in &positions {
        let r = rotations.get(&id).copied().unwrap_or_else(Mat3::identity);
        poses.insert(id, Pose3::new_orthonormalized(*t, r)?);
    }
    let gauge = Gauge {
        anchor: g.cameras()[0],
        scale_pair: default_scale_pair(g)?,
    };
    let poses = fix_gauge_3d(&poses, gauge)?;
    let residual = rms_residual_3d(g, &poses);
    Ok(Reconstruction3 {
        poses,
        gauge,
        residual,
    })
}

/// Applies the left increment `cayley(delta) * R`.
pub(crate) fn rotate_left(r: &Mat3, delta: &Vec3) -> Mat3 {
    cayley(&RodriguesVec::Finite(*delta)) * r
}

struct Adjust3<'a> {
    g: &'a SightingGraph3,
    ids: Vec<CameraId>,
    anchor: usize,
    partner: usize,
    base: usize,
}

#[derive(Clone)]
struct Adjust3State {
    t: Vec<Vec3>,
    r: Vec<Mat3>,
}

impl LeastSquares for Adjust3<'_> {
    type State = Adjust3State;

    fn dof(&self) -> usize {
        6 * self.ids.len() - 7
    }

    fn residuals(&self, s: &Adjust3State) -> DVector<f64> {
        let mut out = Vec::with_capacity(2 * self.g.len());
        for sg in self.g.sightings() {
            let i = self.ids.binary_search(&sg.observer).unwrap();
            let j = self.ids.binary_search(&sg.target).unwrap();
            let pred = s.r[i] * (s.t[j] - s.t[i]);
            out.extend(log_residual(&sg.bearing, &pred));
        }
        DVector::from_vec(out)
    }

    fn retract(&self, s: &Adjust3State, d: &DVector<f64>) -> Adjust3State {
        let mut out = s.clone();
        let mut k = 0;
        for idx in 0..self.ids.len() {
            if idx == self.anchor || idx == self.partner {
                continue;
            }
            out.t[idx] = s.t[idx] + Vec3::new(d[k], d[k + 1], d[k + 2]);
            out.r[idx] = rotate_left(&s.r[idx], &Vec3::new(d[k + 3], d[k + 4], d[k + 5]));
            k += 6;
        }
        // the partner keeps unit distance from its base camera
        let p = self.partner;
        let dir = Unit::new_normalize(s.t[p] - s.t[self.base]);
        let (e1, e2) = tangent_basis(&dir);
        let moved = (dir.into_inner() + e1 * d[k] + e2 * d[k + 1]).normalize();
        out.t[p] = out.t[self.base] + moved;
        out.r[p] = rotate_left(&s.r[p], &Vec3::new(d[k + 2], d[k + 3], d[k + 4]));
        out
    }
}

pub struct Adjusted3 {
    pub reconstruction: Reconstruction3,
    pub report: AdjustReport,
}

pub fn bundle_adjust_3d(g: &SightingGraph3, initial: &Reconstruction3) -> Result<Adjusted3> {
    bundle_adjust_3d_with(g, initial, &LmConfig::default())
}

/// Damped Gauss-Newton over positions and left rotation increments with
/// the gauge frozen.
pub fn bundle_adjust_3d_with(
    g: &SightingGraph3,
    initial: &Reconstruction3,
    lm: &LmConfig,
) -> Result<Adjusted3> {
    let gauge = initial.gauge;
    let poses = fix_gauge_3d(&initial.poses, gauge)?;
    for s in g.sightings() {
        for id in [s.observer, s.target] {
            if !poses.contains_key(&id) {
                return Err(Error::UnknownCamera(id));
            }
        }
    }
    let ids: Vec<CameraId> = poses.keys().copied().collect();
    let index = |id: CameraId| ids.binary_search(&id).unwrap();
    let anchor = index(gauge.anchor);
    let (a, b) = (index(gauge.scale_pair.0), index(gauge.scale_pair.1));
    let (base, partner) = if b == anchor { (b, a) } else { (a, b) };
    let problem = Adjust3 {
        g,
        ids: ids.clone(),
        anchor,
        partner,
        base,
    };
    let state = Adjust3State {
        t: ids.iter().map(|id| poses[id].position()).collect(),
        r: ids.iter().map(|id| poses[id].rotation()).collect(),
    };
    let initial_rms = rms_residual_3d(g, &poses);
    let outcome = levenberg_marquardt(&problem, state, lm);
    let mut out = BTreeMap::new();
    for (k, id) in ids.iter().enumerate() {
        out.insert(
            *id,
            Pose3::new_orthonormalized(outcome.state.t[k], outcome.state.r[k])?,
        );
    }
    let final_rms = rms_residual_3d(g, &out);
    Ok(Adjusted3 {
        reconstruction: Reconstruction3 {
            poses: out,
            gauge,
            residual: final_rms,
        },
        report: AdjustReport {
            converged: outcome.converged,
            iterations: outcome.iterations,
            initial_rms,
            final_rms,
            cost_history: outcome.cost_history,
        },
    })
}

/// Position rms in units of the truth's diameter and the worst rotation
/// error after aligning `estimate` onto `truth` by a similarity.
pub fn compare_to_truth_3d(
    estimate: &BTreeMap<CameraId, Pose3>,
    truth: &BTreeMap<CameraId, Pose3>,
) -> Result<(f64, f64)> {
    let ids: Vec<CameraId> = truth
        .keys()
        .filter(|k| estimate.contains_key(k))
        .copied()
        .collect();
    let src: Vec<Vec3> = ids.iter().map(|k| estimate[k].position()).collect();
    let dst: Vec<Vec3> = ids.iter().map(|k| truth[k].position()).collect();
    let (sim, rms) = align_similarity_3d(&src, &dst)?;
    let mut diameter: f64 = 0.0;
    for a in &dst {
        for b in &dst {
            diameter = diameter.max((a - b).norm());
        }
    }
    let rot = ids
        .iter()
        .map(|k| rotation_angle(&(sim.apply_pose(&estimate[k]).rotation() * truth[k].rotation().transpose())))
        .fold(0.0, f64::max);
    Ok((rms / diameter.max(1e-300), rot))
}

/// Rotation angle of `r` in `[0, pi]`.
pub fn rotation_angle(r: &Mat3) -> f64 {
    let skew_part = Vec3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    (skew_part.norm() / 2.0).atan2((r.trace() - 1.0) / 2.0)
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use crate::graph::{synthesize, Scene};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_camera_positions() {
        let cams = vec![
            (CameraId(0), Pose3::identity()),
            (CameraId(1), Pose3::new(Vec3::new(0.0, 0.0, 2.0), axis_angle(Vec3::x(), std::f64::consts::PI)).unwrap()),
        ];
        let scene = Scene::new(4.0 * std::f64::consts::PI, cams).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = synthesize(&scene, 0.0, &mut rng).unwrap();
        let rot: BTreeMap<_, _> = truth(&scene).iter().map(|(k, p)| (*k, p.rotation())).collect();
        let rec = solve_positions_3d(&g, &rot).unwrap();
        assert!((rec.poses[&CameraId(1)].position() - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn five_camera_positions_and_gauge() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let scene = random_scene(&mut rng, 5);
        let g = synthesize(&scene, 0.0, &mut rng).unwrap();
        let t = truth(&scene);
        let rot: BTreeMap<_, _> = t.iter().map(|(k, p)| (*k, p.rotation())).collect();
        let rec = solve_positions_3d(&g, &rot).unwrap();
        let (pos, ang) = compare_to_truth_3d(&rec.poses, &t).unwrap();
        assert!(pos < 1e-9 && ang < 1e-9, "{pos} {ang}");
        assert_eq!(rec.poses[&rec.gauge.anchor].rotation(), Mat3::identity());
        assert!(rec.residual < 1e-12);
        // every mutual link satisfies R_j R_i^T v_ij = -v_ji
        for (a, b) in g.mutual_pairs() {
            let rij = rec.poses[&b].rotation() * rec.poses[&a].rotation().transpose();
            let lhs = rij * g.get(a, b).unwrap().into_inner();
            assert!((lhs + g.get(b, a).unwrap().into_inner()).norm() < 1e-8);
        }
    }

    #[test]
    fn collinear_axial_positions_rank_deficient() {
        let cams = (0..4)
            .map(|k| (CameraId(k), Pose3::new(Vec3::new(k as f64, 0.0, 0.0), Mat3::identity()).unwrap()))
            .collect();
        let scene = Scene::new(4.0 * std::f64::consts::PI, cams).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = synthesize(&scene, 0.0, &mut rng).unwrap();
        let rot = g.cameras().iter().map(|k| (*k, Mat3::identity())).collect();
        assert!(matches!(
            solve_positions_3d(&g, &rot),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn log_residual_norm_is_angle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let m = Unit::new_normalize(Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0)));
            let p = Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let r = log_residual(&m, &p);
            assert!(((r[0] * r[0] + r[1] * r[1]).sqrt() - angle_between(&m, &p)).abs() < 1e-12);
        }
    }

    #[test]
    fn bundle_adjust_3d_fixed_point_and_basin() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let scene = random_scene(&mut rng, 6);
        let g = synthesize(&scene, 0.0, &mut rng).unwrap();
        let t = truth(&scene);
        let rot: BTreeMap<_, _> = t.iter().map(|(k, p)| (*k, p.rotation())).collect();
        let rec = solve_positions_3d(&g, &rot).unwrap();
        let same = bundle_adjust_3d(&g, &rec).unwrap();
        assert!(same.reconstruction.residual < 1e-12);

        let mut perturbed = rec.clone();
        let (a, b) = rec.gauge.scale_pair;
        let partner = if a == rec.gauge.anchor { b } else { a };
        for (k, p) in perturbed.poses.iter_mut() {
            if *k == rec.gauge.anchor {
                continue;
            }
            let dt = Vec3::from_fn(|_, _| rng.random_range(-1e-3..1e-3));
            let dr = Vec3::from_fn(|_, _| rng.random_range(-1e-3..1e-3));
            let mut pos = p.position() + dt;
            if *k == partner {
                pos = pos.normalize();
            }
            *p = Pose3::new_orthonormalized(pos, rotate_left(&p.rotation(), &dr)).unwrap();
        }
        let out = bundle_adjust_3d(&g, &perturbed).unwrap();
        let (pos, ang) = compare_to_truth_3d(&out.reconstruction.poses, &t).unwrap();
        assert!(pos < 1e-7 && ang < 1e-7, "{pos} {ang}");
        assert!(out.report.cost_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn bundle_adjust_3d_scale_pair_off_anchor() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let scene = random_scene(&mut rng, 4);
        let g = synthesize(&scene, 1e-3, &mut rng).unwrap();
        let t = truth(&scene);
        let gauge = Gauge {
            anchor: CameraId(0),
            scale_pair: (CameraId(2), CameraId(3)),
        };
        let poses = fix_gauge_3d(&t, gauge).unwrap();
        let rec = Reconstruction3 { residual: rms_residual_3d(&g, &poses), poses, gauge };
        let out = bundle_adjust_3d(&g, &rec).unwrap();
        let p = &out.reconstruction.poses;
        assert!(((p[&CameraId(2)].position() - p[&CameraId(3)].position()).norm() - 1.0).abs() < 1e-12);
        assert_eq!(p[&CameraId(0)].position(), Vec3::zeros());
        assert!(out.report.final_rms <= out.report.initial_rms);
    }
}
