use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector, Unit};

use super::{
    bundle_adjust_3d, fix_gauge_3d, log_residual, predicted_direction, reconstruct_triangle_3d,
    rms_residual_3d, rotate_left, Reconstruction3,
};
use crate::error::{Error, Result};
use crate::geometry::{angle_between, rotation_from_directions, Mat3, Pose3, UnitVec3, Vec3};
use crate::graph::{addable, dof_counts, CameraId, Dimension, SightingGraph3};
use crate::optim::{levenberg_marquardt, LeastSquares, LmConfig};
use crate::recon2d::{default_scale_pair, Gauge, SequentialStep};

/// Polynomials as coefficient vectors, constant term first.
fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64], scale_b: f64) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += scale_b * y;
    }
    out
}

fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_deriv(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

/// Real roots of `p` from the companion-matrix eigenvalues, Newton polished.
fn real_roots(p: &[f64]) -> Vec<f64> {
    let max = p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max == 0.0 {
        return Vec::new();
    }
    let mut deg = p.len() - 1;
    while deg > 0 && p[deg].abs() <= 1e-14 * max {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = p[deg];
    let mut comp = DMatrix::zeros(deg, deg);
    for k in 1..deg {
        comp[(k, k - 1)] = 1.0;
    }
    for k in 0..deg {
        comp[(k, deg - 1)] = -p[k] / lead;
    }
    let dp = poly_deriv(&p[..=deg]);
    comp.complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-4 * (1.0 + z.re.abs()))
        .map(|z| {
            let mut x = z.re;
            for _ in 0..20 {
                let d = poly_eval(&dp, x);
                if d == 0.0 {
                    break;
                }
                let step = poly_eval(&p[..=deg], x) / d;
                x -= step;
                if step.abs() <= 1e-16 * (1.0 + x.abs()) {
                    break;
                }
            }
            x
        })
        .collect()
}

/// Pose of one camera against fixed landmarks it sights (`outgoing`) and
/// fixed cameras sighting it (`incoming`).
pub(crate) struct Resection3<'a> {
    pub outgoing: Vec<(Vec3, UnitVec3)>,
    pub incoming: Vec<(&'a Pose3, UnitVec3)>,
}

impl Resection3<'_> {
    fn rms(&self, state: &(Vec3, Mat3)) -> f64 {
        let r = self.residuals(state);
        let n = self.outgoing.len() + self.incoming.len();
        (r.norm_squared() / n as f64).sqrt()
    }
}

impl LeastSquares for Resection3<'_> {
    type State = (Vec3, Mat3);

    fn dof(&self) -> usize {
        6
    }

    fn residuals(&self, (t, r): &Self::State) -> DVector<f64> {
        let mut out = Vec::with_capacity(2 * (self.outgoing.len() + self.incoming.len()));
        for (x, m) in &self.outgoing {
            out.extend(log_residual(m, &(r * (x - t))));
        }
        for (k, m) in &self.incoming {
            out.extend(log_residual(m, &predicted_direction(k, t)));
        }
        DVector::from_vec(out)
    }

    fn retract(&self, (t, r): &Self::State, d: &DVector<f64>) -> Self::State {
        (
            t + Vec3::new(d[0], d[1], d[2]),
            rotate_left(r, &Vec3::new(d[3], d[4], d[5])),
        )
    }
}

/// Three-point resection: up to four poses from which the three landmarks
/// appear along the given camera-frame bearings.
pub fn resect_p3p(bearings: &[UnitVec3; 3], landmarks: &[Vec3; 3]) -> Result<Vec<Pose3>> {
    let [x1, x2, x3] = *landmarks;
    let e12 = x2 - x1;
    let e13 = x3 - x1;
    if e12.cross(&e13).norm() <= 1e-9 * e12.norm() * e13.norm() {
        return Err(Error::CollinearLandmarks);
    }
    for (p, q) in [(0, 1), (0, 2), (1, 2)] {
        if angle_between(&bearings[p], &bearings[q]) < 1e-12 {
            return Err(Error::DegenerateConfiguration("coincident bearings".into()));
        }
    }
    let [m1, m2, m3] = bearings;
    let a2 = (x2 - x3).norm_squared();
    let b2 = e13.norm_squared();
    let c2 = e12.norm_squared();
    let ca = m2.dot(m3);
    let cb = m1.dot(m3);
    let cg = m1.dot(m2);
    // ranges d2 = u d1, d3 = v d1; u is rational in v
    let k = [1.0, -2.0 * cb, 1.0];
    let num = poly_add(&[b2, 0.0, -b2], &k, a2 - c2);
    let den = [2.0 * b2 * cg, -2.0 * b2 * ca];
    let quartic = {
        let dd = poly_mul(&den, &den);
        let nn = poly_mul(&num, &num);
        let nd = poly_mul(&num, &den);
        let inner = poly_add(&poly_add(&dd, &nn, 1.0), &nd, -2.0 * cg);
        poly_add(&inner.iter().map(|c| c * b2).collect::<Vec<_>>(), &poly_mul(&k, &dd), -c2)
    };
    let scale = e12.norm().max(e13.norm());
    let mut out: Vec<Pose3> = Vec::new();
    for v in real_roots(&quartic) {
        let dv = poly_eval(&den, v);
        let kv = poly_eval(&k, v);
        if v <= 0.0 || kv <= 0.0 || dv.abs() < 1e-300 {
            continue;
        }
        let u = poly_eval(&num, v) / dv;
        if u <= 0.0 {
            continue;
        }
        let d1 = (b2 / kv).sqrt();
        let y = [m1.into_inner() * d1, m2.into_inner() * (u * d1), m3.into_inner() * (v * d1)];
        let pairs = [
            (Unit::new_normalize(e12), Unit::new_normalize(y[1] - y[0])),
            (Unit::new_normalize(e13), Unit::new_normalize(y[2] - y[0])),
            (
                Unit::new_normalize(e12.cross(&e13)),
                Unit::new_normalize((y[1] - y[0]).cross(&(y[2] - y[0]))),
            ),
        ];
        let Ok(r) = rotation_from_directions(&pairs) else {
            continue;
        };
        let c = (0..3).map(|m| landmarks[m] - r.transpose() * y[m]).sum::<Vec3>() / 3.0;
        let problem = Resection3 {
            outgoing: (0..3).map(|m| (landmarks[m], bearings[m])).collect(),
            incoming: Vec::new(),
        };
        let polished = levenberg_marquardt(&problem, (c, r), &LmConfig::default()).state;
        let worst = (0..3)
            .map(|m| angle_between(&bearings[m], &(polished.1 * (landmarks[m] - polished.0))))
            .fold(0.0, f64::max);
        if worst > 1e-8 {
            continue;
        }
        let Ok(pose) = Pose3::new_orthonormalized(polished.0, polished.1) else {
            continue;
        };
        let dup = out.iter().any(|q| {
            (q.position() - pose.position()).norm() < 1e-9 * scale
                && (q.rotation() - pose.rotation()).norm() < 1e-9
        });
        if !dup {
            out.push(pose);
        }
    }
    if out.is_empty() {
        return Err(Error::NoRealSolution);
    }
    Ok(out)
}

/// Registers camera `p` against the solved cameras.
pub fn add_camera_3d(solved: &Reconstruction3, g: &SightingGraph3, p: CameraId) -> Result<Pose3> {
    add_camera_3d_with(solved, g, p, 1e-2).map(|(pose, _)| pose)
}

/// Registers `p`, refusing when several distinct poses explain the
/// sightings equally well.
pub fn add_camera_3d_with(
    solved: &Reconstruction3,
    g: &SightingGraph3,
    p: CameraId,
    accept_rms: f64,
) -> Result<(Pose3, f64)> {
    let cands = add_camera_3d_candidates(solved, g, p, accept_rms)?;
    if cands.len() > 1 && cands[1].1 <= (10.0 * cands[0].1).max(1e-9) {
        return Err(Error::Underdetermined(format!(
            "camera {p}: {} distinct poses fit its sightings",
            cands.len()
        )));
    }
    Ok(cands[0])
}

/// Every distinct local solution for the pose of `p` with rms at most
/// `accept_rms`, best first.
pub fn add_camera_3d_candidates(
    solved: &Reconstruction3,
    g: &SightingGraph3,
    p: CameraId,
    accept_rms: f64,
) -> Result<Vec<(Pose3, f64)>> {
    let set: BTreeSet<CameraId> = solved.poses.keys().copied().collect();
    let (out, inc) = g.between(p, &set);
    if !addable(g, &set, p, Dimension::Three) {
        return Err(Error::InsufficientSightings {
            have: out.len() + inc.len(),
            need: 3,
            detail: format!(
                "camera {p} needs 3 sightings with at least 2 outgoing (has {} outgoing)",
                out.len()
            ),
        });
    }
    let problem = Resection3 {
        outgoing: out
            .iter()
            .map(|s| (solved.poses[&s.target].position(), s.bearing))
            .collect(),
        incoming: inc
            .iter()
            .map(|s| (&solved.poses[&s.observer], s.bearing))
            .collect(),
    };

    let mut starts: Vec<(Vec3, Mat3)> = Vec::new();
    let o = &problem.outgoing;
    if o.len() >= 3 {
        'triples: for a in 0..o.len() {
            for b in a + 1..o.len() {
                for c in b + 1..o.len() {
                    if let Ok(poses) = resect_p3p(&[o[a].1, o[b].1, o[c].1], &[o[a].0, o[b].0, o[c].0]) {
                        starts.extend(poses.iter().map(|q| (q.position(), q.rotation())));
                        break 'triples;
                    }
                }
            }
        }
    }
    let orient = |z: Vec3| -> Option<Mat3> {
        let pairs: Vec<_> = o
            .iter()
            .filter(|(x, _)| (x - z).norm() > 1e-12)
            .map(|(x, m)| (Unit::new_normalize(x - z), *m))
            .collect();
        rotation_from_directions(&pairs).ok()
    };
    if problem.incoming.len() >= 2 {
        if let Some(z) = triangulate(&problem.incoming) {
            if let Some(r) = orient(z) {
                starts.push((z, r));
            }
        }
    }
    for (k, m) in problem.incoming.iter().take(3) {
        for z in ray_candidates(k, m, o) {
            if let Some(r) = orient(z) {
                starts.push((z, r));
            }
        }
    }
    if starts.is_empty() {
        return Err(Error::NoConvergence {
            iterations: 0,
            rms: f64::INFINITY,
        });
    }

    let lm = LmConfig::default();
    let scale = solved
        .poses
        .values()
        .flat_map(|a| solved.poses.values().map(move |b| (a.position() - b.position()).norm()))
        .fold(1e-12, f64::max);
    let mut best_rms = f64::INFINITY;
    let mut out: Vec<(Pose3, f64)> = Vec::new();
    for start in starts {
        let (t, r) = levenberg_marquardt(&problem, start, &lm).state;
        let rms = problem.rms(&(t, r));
        best_rms = best_rms.min(rms);
        if !(rms <= accept_rms) {
            continue;
        }
        let pose = Pose3::new_orthonormalized(t, r)?;
        match out.iter_mut().find(|(q, _)| {
            (q.position() - pose.position()).norm() < 1e-6 * scale
                && (q.rotation() - pose.rotation()).norm() < 1e-6
        }) {
            Some(existing) if rms < existing.1 => *existing = (pose, rms),
            Some(_) => {}
            None => out.push((pose, rms)),
        }
    }
    if out.is_empty() {
        return Err(Error::NoConvergence {
            iterations: lm.max_iterations,
            rms: best_rms,
        });
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(out)
}

/// Least-squares intersection of the rays along which the given cameras
/// sight the unknown camera.
fn triangulate(incoming: &[(&Pose3, UnitVec3)]) -> Option<Vec3> {
    let mut a = Mat3::zeros();
    let mut b = Vec3::zeros();
    for (k, m) in incoming {
        let d = k.rotation().transpose() * m.into_inner();
        let proj = Mat3::identity() - d * d.transpose();
        a += proj;
        b += proj * k.position();
    }
    let z = a.try_inverse()? * b;
    z.iter().all(|v| v.is_finite()).then_some(z)
}

/// Points on the ray from `k` along which the first two outgoing landmarks
/// subtend their measured angle.
fn ray_candidates(k: &Pose3, m: &UnitVec3, outgoing: &[(Vec3, UnitVec3)]) -> Vec<Vec3> {
    let d = k.rotation().transpose() * m.into_inner();
    let Some((a, b)) = (0..outgoing.len())
        .flat_map(|a| (a + 1..outgoing.len()).map(move |b| (a, b)))
        .find(|&(a, b)| (outgoing[a].0 - outgoing[b].0).norm() > 1e-12)
    else {
        return Vec::new();
    };
    let (xa, ma) = outgoing[a];
    let (xb, mb) = outgoing[b];
    let gamma = angle_between(&ma, &mb);
    let origin = k.position();
    let scale = [xa, xb]
        .iter()
        .map(|x| (x - origin).norm())
        .fold(0.0, f64::max)
        .max(1e-12);
    let f = |t: f64| {
        let z = origin + d * t;
        angle_between(&(xa - z), &(xb - z)) - gamma
    };
    let n = 400;
    let ts: Vec<f64> = (0..=n)
        .map(|i| scale * 10f64.powf(-3.0 + 6.0 * i as f64 / n as f64))
        .collect();
    let mut out = Vec::new();
    for w in ts.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (mut flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            out.push(origin + d * lo);
            continue;
        }
        if flo * fhi > 0.0 {
            continue;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if fm * flo > 0.0 {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        out.push(origin + d * (0.5 * (lo + hi)));
    }
    out
}

#[derive(Clone, Debug)]
pub struct Sequential3 {
    pub reconstruction: Reconstruction3,
    pub seed: Vec<CameraId>,
    pub steps: Vec<SequentialStep>,
}

/// Lexicographically first triple of cameras with all six sightings.
fn seed_triangle(g: &SightingGraph3) -> Option<[CameraId; 3]> {
    let ids = g.cameras();
    for a in 0..ids.len() {
        for b in a + 1..ids.len() {
            if !g.is_mutual(ids[a], ids[b]) {
                continue;
            }
            for c in b + 1..ids.len() {
                if g.is_mutual(ids[a], ids[c]) && g.is_mutual(ids[b], ids[c]) {
                    return Some([ids[a], ids[b], ids[c]]);
                }
            }
        }
    }
    None
}

/// Grows a reconstruction from the first fully mutual triangle, adding at
/// each step the addable camera with the most sightings to the solved set
/// and adjusting after every addition.
pub fn solve_sequential_3d(g: &SightingGraph3) -> Result<Sequential3> {
    g.require_connected()?;
    let seed = seed_triangle(g)
        .ok_or_else(|| Error::Underdetermined("no fully mutual triangle to seed from".into()))?;
    let sub = g.subgraph(&seed)?;
    let mut recon = reconstruct_triangle_3d(&sub)?;
    let mut steps = Vec::new();
    loop {
        let solved: BTreeSet<CameraId> = recon.poses.keys().copied().collect();
        if solved.len() == g.cameras().len() {
            break;
        }
        let next = g
            .cameras()
            .iter()
            .filter(|&&p| addable(g, &solved, p, Dimension::Three))
            .max_by_key(|&&p| {
                let (o, i) = g.between(p, &solved);
                (o.len() + i.len(), std::cmp::Reverse(p))
            })
            .copied();
        let Some(p) = next else {
            let rest: Vec<CameraId> = g
                .cameras()
                .iter()
                .filter(|c| !solved.contains(c))
                .copied()
                .collect();
            return Err(Error::Underdetermined(format!(
                "cameras {rest:?} cannot be added with the available sightings"
            )));
        };
        let (o, i) = g.between(p, &solved);
        let used = o.len() + i.len();
        let pose = add_camera_3d(&recon, g, p)?;
        recon.poses.insert(p, pose);
        let members: Vec<CameraId> = recon.poses.keys().copied().collect();
        let sub = g.subgraph(&members)?;
        recon = bundle_adjust_3d(&sub, &recon)?.reconstruction;
        steps.push(SequentialStep {
            camera: p,
            sightings_used: used,
            rms_after: recon.residual,
        });
    }
    let gauge = Gauge {
        anchor: g.cameras()[0],
        scale_pair: default_scale_pair(g)?,
    };
    let poses = fix_gauge_3d(&recon.poses, gauge)?;
    let residual = rms_residual_3d(g, &poses);
    Ok(Sequential3 {
        reconstruction: Reconstruction3 {
            poses,
            gauge,
            residual,
        },
        seed: seed.to_vec(),
        steps,
    })
}

/// Seeded growth followed by a global adjustment over every sighting.
pub fn solve_batch_3d(g: &SightingGraph3) -> Result<Reconstruction3> {
    g.require_connected()?;
    let n = g.cameras().len();
    let need = dof_counts(n, Dimension::Three)?.min_sightings;
    if g.len() < need {
        return Err(Error::Underdetermined(format!(
            "{} sightings for {n} cameras, at least {need} required",
            g.len()
        )));
    }
    let grown = solve_sequential_3d(g)?.reconstruction;
    let adjusted = bundle_adjust_3d(g, &grown)?.reconstruction;
    Ok(if adjusted.residual <= grown.residual {
        adjusted
    } else {
        grown
    })
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::{compare_to_truth_3d, rotation_angle};
    use super::*;
    use crate::graph::{synthesize, Scene, Sighting};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn pose_close(a: &Pose3, b: &Pose3, tol: f64) -> bool {
        (a.position() - b.position()).norm() < tol
            && rotation_angle(&(a.rotation() * b.rotation().transpose())) < tol
    }

    #[test]
    fn p3p_contains_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..200 {
            let cam = Pose3::new(Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0)), random_rotation(&mut rng)).unwrap();
            let lm: [Vec3; 3] = std::array::from_fn(|_| Vec3::from_fn(|_, _| rng.random_range(-3.0..3.0)));
            if !well_spread(&[cam.position(), lm[0], lm[1], lm[2]]) {
                continue;
            }
            let b = lm.map(|x| Unit::new_normalize(cam.rotation() * (x - cam.position())));
            let cands = resect_p3p(&b, &lm).unwrap();
            assert!(cands.len() <= 4);
            assert!(cands.iter().any(|c| pose_close(c, &cam, 1e-8)), "truth missing");
            for c in &cands {
                for m in 0..3 {
                    assert!(angle_between(&b[m], &(c.rotation() * (lm[m] - c.position()))) < 1e-8);
                }
            }
        }
    }

    #[test]
    fn p3p_symmetric_has_multiple() {
        // camera on the axis of an equilateral triangle of landmarks
        let lm = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0].map(|a: f64| Vec3::new(a.cos(), a.sin(), 0.0));
        let cam = Pose3::new(Vec3::new(0.0, 0.0, 1.5), axis_angle(Vec3::x(), PI)).unwrap();
        let b = lm.map(|x| Unit::new_normalize(cam.rotation() * (x - cam.position())));
        let cands = resect_p3p(&b, &lm).unwrap();
        assert!(cands.len() >= 2 && cands.len() <= 4, "{}", cands.len());
        assert!(cands.iter().any(|c| pose_close(c, &cam, 1e-8)));
    }

    #[test]
    fn p3p_collinear() {
        let lm = [Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0];
        let b = [Vec3::z(), Vec3::new(0.1, 0.0, 1.0), Vec3::new(0.2, 0.0, 1.0)].map(Unit::new_normalize);
        assert_eq!(resect_p3p(&b, &lm), Err(Error::CollinearLandmarks));
    }

    fn solved_three(scene: &crate::graph::Scene3) -> (Reconstruction3, SightingGraph3) {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = synthesize(scene, 0.0, &mut rng).unwrap();
        let ids: Vec<CameraId> = (0..3).map(CameraId).collect();
        let rec = reconstruct_triangle_3d(&g.subgraph(&ids).unwrap()).unwrap();
        (rec, g)
    }

    fn restrict(g: &SightingGraph3, p: u32, keep: &[(u32, u32)]) -> SightingGraph3 {
        let s: Vec<Sighting<UnitVec3>> = g
            .sightings()
            .iter()
            .filter(|s| (s.observer.0 != p && s.target.0 != p) || keep.contains(&(s.observer.0, s.target.0)))
            .cloned()
            .collect();
        SightingGraph3::new(g.cameras().to_vec(), s).unwrap()
    }

    fn check_add(keep: &[(u32, u32)], seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = random_scene(&mut rng, 4);
        let (rec, g) = solved_three(&scene);
        let g = restrict(&g, 3, keep);
        let pose = add_camera_3d(&rec, &g, CameraId(3)).unwrap();
        let expected = fix_gauge_3d(&truth(&scene), rec.gauge).unwrap()[&CameraId(3)];
        assert!(pose_close(&pose, &expected, 1e-8), "seed {seed}");
    }

    #[test]
    fn add_three_outgoing_one_incoming() {
        for seed in 0..20 {
            check_add(&[(3, 0), (3, 1), (3, 2), (0, 3)], seed);
        }
    }

    /// The minimal case has finitely many exact poses: the truth is always
    /// among them, and registration succeeds exactly when it is alone.
    fn check_minimal(keep: &[(u32, u32)], seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = random_scene(&mut rng, 4);
        let (rec, g) = solved_three(&scene);
        let g = restrict(&g, 3, keep);
        let expected = fix_gauge_3d(&truth(&scene), rec.gauge).unwrap()[&CameraId(3)];
        let cands = add_camera_3d_candidates(&rec, &g, CameraId(3), 1e-2).unwrap();
        assert!(cands.iter().any(|(c, _)| pose_close(c, &expected, 1e-8)), "seed {seed}");
        let exact = cands.iter().filter(|(_, r)| *r < 1e-9).count();
        match add_camera_3d(&rec, &g, CameraId(3)) {
            Ok(pose) => {
                assert_eq!(exact, 1);
                assert!(pose_close(&pose, &expected, 1e-8));
                true
            }
            Err(e) => {
                assert!(exact > 1 && e.is_underdetermined(), "{e:?}");
                false
            }
        }
    }

    #[test]
    fn add_two_outgoing_one_incoming() {
        let mut unique = 0;
        for seed in 0..20 {
            unique += check_minimal(&[(3, 0), (3, 1), (2, 3)], seed) as usize;
            unique += check_minimal(&[(3, 0), (3, 1), (0, 3)], seed) as usize;
        }
        assert!(unique > 0);
    }

    #[test]
    fn add_two_outgoing_only_is_insufficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let scene = random_scene(&mut rng, 4);
        let (rec, g) = solved_three(&scene);
        let g = restrict(&g, 3, &[(3, 0), (3, 1)]);
        assert!(matches!(
            add_camera_3d(&rec, &g, CameraId(3)),
            Err(Error::InsufficientSightings { .. })
        ));
    }

    #[test]
    fn sequential_ten_cameras() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let scene = random_scene(&mut rng, 10);
        let g = synthesize(&scene, 0.0, &mut rng).unwrap();
        let seq = solve_sequential_3d(&g).unwrap();
        assert_eq!(seq.steps.len(), 7);
        let (pos, ang) = compare_to_truth_3d(&seq.reconstruction.poses, &truth(&scene)).unwrap();
        assert!(pos < 1e-7 && ang < 1e-7, "{pos} {ang}");
    }

    #[test]
    fn batch_gauge_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let scene = random_scene(&mut rng, 5);
        let g = synthesize(&scene, 0.0, &mut rng).unwrap();
        let rec = solve_batch_3d(&g).unwrap();
        let sim = crate::geometry::Sim3 {
            scale: 2.5,
            rotation: random_rotation(&mut rng),
            translation: Vec3::new(1.0, -2.0, 0.5),
        };
        let moved = Scene::new(scene.fov(), scene.cameras().iter().map(|(k, p)| (*k, sim.apply_pose(p))).collect()).unwrap();
        let g2 = synthesize(&moved, 0.0, &mut rng).unwrap();
        let rec2 = solve_batch_3d(&g2).unwrap();
        for k in g.cameras() {
            assert!(pose_close(&rec.poses[k], &rec2.poses[k], 1e-8));
        }
        assert!(matches!(
            solve_batch_3d(&SightingGraph3::new(g.cameras().to_vec(), g.sightings()[..5].to_vec()).unwrap()),
            Err(Error::Underdetermined(_))
        ));
    }

    #[test]
    fn quartic_roots() {
        // (x - 1)(x + 2)(x - 3)(x^2 + 1) has three real roots
        let p = poly_mul(&poly_mul(&poly_mul(&[-1.0, 1.0], &[2.0, 1.0]), &[-3.0, 1.0]), &[1.0, 0.0, 1.0]);
        let mut r = real_roots(&p);
        r.sort_by(f64::total_cmp);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
