//! Planar reconstruction: orientations from mutual links, positions from the
//! linear bearing constraints, the minimal triangle, sequential registration
//! of new cameras and gauge-fixed bundle adjustment.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rot2, wrap, Angle, Pose2, Sim2, Vec2};
use crate::graph::{addable, dof_counts, CameraId, Dimension, SightingGraph2};
use crate::optim::{levenberg_marquardt, null_vector, LeastSquares, LmConfig};

/// The similarity gauge: `anchor` sits at the origin with the identity
/// orientation and the `scale_pair` cameras are at unit distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gauge {
    pub anchor: CameraId,
    pub scale_pair: (CameraId, CameraId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction2 {
    pub poses: BTreeMap<CameraId, Pose2>,
    pub gauge: Gauge,
    /// Rms angular reprojection error over the sightings used, in radians.
    pub residual: f64,
}

/// Tolerances for the 2D pipeline.
#[derive(Clone, Copy, Debug)]
pub struct Recon2Config {
    pub cycle_tol: f64,
    pub rank_tol: f64,
    pub starts: usize,
    pub accept_rms: f64,
    pub lm: LmConfig,
}

impl Default for Recon2Config {
    fn default() -> Self {
        Recon2Config {
            cycle_tol: 1e-6,
            rank_tol: 1e-10,
            starts: 16,
            accept_rms: 1e-2,
            lm: LmConfig::default(),
        }
    }
}

/// Lexicographically smallest mutual pair, falling back to the smallest pair
/// joined by any sighting.
pub fn default_scale_pair<B: Clone>(
    g: &crate::graph::SightingGraph<B>,
) -> Result<(CameraId, CameraId)> {
    if let Some(p) = g.mutual_pairs().first() {
        return Ok(*p);
    }
    g.sightings()
        .iter()
        .map(|s| (s.observer.min(s.target), s.observer.max(s.target)))
        .min()
        .ok_or(Error::AmbiguousScale)
}

/// Moves `poses` into `gauge` by a similarity; bearings are unchanged.
pub fn fix_gauge_2d(
    poses: &BTreeMap<CameraId, Pose2>,
    gauge: Gauge,
) -> Result<BTreeMap<CameraId, Pose2>> {
    let get = |id: CameraId| poses.get(&id).ok_or(Error::UnknownCamera(id));
    let anchor = get(gauge.anchor)?;
    let a = get(gauge.scale_pair.0)?.position();
    let b = get(gauge.scale_pair.1)?.position();
    let dist = (b - a).norm();
    if dist <= 1e-300 || !dist.is_finite() {
        return Err(Error::AmbiguousScale);
    }
    let theta = anchor.orientation().radians();
    let scale = 1.0 / dist;
    let sim = Sim2 {
        scale,
        rotation: Angle::from_raw(theta),
        translation: -(rot2(theta) * anchor.position() * scale),
    };
    let mut out: BTreeMap<CameraId, Pose2> =
        poses.iter().map(|(id, p)| (*id, sim.apply_pose(p))).collect();
    // exact gauge values, free of rounding
    let anchor_pose = Pose2::new(Vec2::zeros(), 0.0)?;
    out.insert(gauge.anchor, anchor_pose);
    Ok(out)
}

fn predicted_bearing(observer: &Pose2, target: &Vec2) -> f64 {
    let d = target - observer.position();
    observer.orientation().radians() + d.y.atan2(d.x)
}

/// Rms angular residual of the sightings among cameras present in `poses`.
pub fn rms_residual_2d(g: &SightingGraph2, poses: &BTreeMap<CameraId, Pose2>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for s in g.sightings() {
        if let (Some(o), Some(t)) = (poses.get(&s.observer), poses.get(&s.target)) {
            let r = wrap(s.bearing.radians() - predicted_bearing(o, &t.position()));
            sum += r * r;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        (sum / count as f64).sqrt()
    }
}

pub fn solve_orientations_2d(
    g: &SightingGraph2,
    anchor: CameraId,
) -> Result<BTreeMap<CameraId, Angle>> {
    solve_orientations_2d_with(g, anchor, &Recon2Config::default())
}

/// Propagates `phi_j = phi_i + sigma_ji - sigma_ij + pi` along a spanning tree
/// of mutual links, then checks every remaining mutual link.
pub fn solve_orientations_2d_with(
    g: &SightingGraph2,
    anchor: CameraId,
    config: &Recon2Config,
) -> Result<BTreeMap<CameraId, Angle>> {
    if !g.cameras().contains(&anchor) {
        return Err(Error::UnknownCamera(anchor));
    }
    let comps = g.mutual_components();
    if comps.len() > 1 {
        return Err(Error::NotConnected { components: comps });
    }
    let link = |i: CameraId, j: CameraId| -> f64 {
        g.get(j, i).unwrap().radians() - g.get(i, j).unwrap().radians() + PI
    };
    let mut adj: BTreeMap<CameraId, Vec<CameraId>> = BTreeMap::new();
    let pairs = g.mutual_pairs();
    for &(a, b) in &pairs {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut phi: BTreeMap<CameraId, Angle> = BTreeMap::new();
    phi.insert(anchor, Angle::ZERO);
    let mut queue = VecDeque::from([anchor]);
    while let Some(i) = queue.pop_front() {
        let base = phi[&i].radians();
        for &j in adj.get(&i).map(|v| v.as_slice()).unwrap_or(&[]) {
            if phi.contains_key(&j) {
                continue;
            }
            phi.insert(j, Angle::from_raw(base + link(i, j)));
            queue.push_back(j);
        }
    }
    for &(a, b) in &pairs {
        let defect = wrap(phi[&b].radians() - phi[&a].radians() - link(a, b)).abs();
        if defect > config.cycle_tol {
            return Err(Error::InconsistentCycle { a, b, defect });
        }
    }
    Ok(phi)
}

/// Linear position solve: every sighting `i -> j` forces `z_j - z_i` to be
/// parallel to the world direction `sigma_ij - phi_i`.
pub fn solve_positions_2d(
    g: &SightingGraph2,
    orientations: &BTreeMap<CameraId, Angle>,
) -> Result<Reconstruction2> {
    solve_positions_2d_with(g, orientations, &Recon2Config::default())
}

pub fn solve_positions_2d_with(
    g: &SightingGraph2,
    orientations: &BTreeMap<CameraId, Angle>,
    config: &Recon2Config,
) -> Result<Reconstruction2> {
    let ids = g.cameras();
    if ids.len() < 2 {
        return Err(Error::AmbiguousScale);
    }
    let anchor = ids[0];
    let col: BTreeMap<CameraId, usize> = ids[1..]
        .iter()
        .enumerate()
        .map(|(k, id)| (*id, 2 * k))
        .collect();
    let mut rows = Vec::new();
    let mut dirs = Vec::new();
    for s in g.sightings() {
        let phi = orientations
            .get(&s.observer)
            .ok_or(Error::UnknownCamera(s.observer))?;
        let alpha = s.bearing.radians() - phi.radians();
        let d = Vec2::new(alpha.cos(), alpha.sin());
        let n = Vec2::new(-d.y, d.x);
        let mut row = vec![0.0; 2 * (ids.len() - 1)];
        if let Some(&c) = col.get(&s.target) {
            row[c] += n.x;
            row[c + 1] += n.y;
        }
        if let Some(&c) = col.get(&s.observer) {
            row[c] -= n.x;
            row[c + 1] -= n.y;
        }
        rows.push(row);
        dirs.push(d);
    }
    if rows.is_empty() {
        return Err(Error::AmbiguousScale);
    }
    let ncols = 2 * (ids.len() - 1);
    let a = DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]);
    let x = null_vector(&a, config.rank_tol)?;
    let position = |id: CameraId, x: &DVector<f64>| -> Vec2 {
        match col.get(&id) {
            Some(&c) => Vec2::new(x[c], x[c + 1]),
            None => Vec2::zeros(),
        }
    };
    // forward sign: targets lie along +d, not -d
    let along: f64 = g
        .sightings()
        .iter()
        .zip(&dirs)
        .map(|(s, d)| d.dot(&(position(s.target, &x) - position(s.observer, &x))))
        .sum();
    let x = if along < 0.0 { -x } else { x };

    let mut poses = BTreeMap::new();
    for &id in ids {
        let phi = orientations.get(&id).copied().unwrap_or(Angle::ZERO);
        poses.insert(id, Pose2::new(position(id, &x), phi.radians())?);
    }
    let gauge = Gauge {
        anchor,
        scale_pair: default_scale_pair(g)?,
    };
    let poses = fix_gauge_2d(&poses, gauge)?;
    let residual = rms_residual_2d(g, &poses);
    Ok(Reconstruction2 {
        poses,
        gauge,
        residual,
    })
}

/// The three cameras of a triangle graph in cyclic order, with the signed
/// angle `sigma_{v,prev} - sigma_{v,next}` at each vertex seeing both others.
fn triangle_angles(g: &SightingGraph2, ids: [CameraId; 3]) -> [Option<f64>; 3] {
    let mut out = [None; 3];
    for v in 0..3 {
        let next = ids[(v + 1) % 3];
        let prev = ids[(v + 2) % 3];
        if let (Some(sn), Some(sp)) = (g.get(ids[v], next), g.get(ids[v], prev)) {
            out[v] = Some(wrap(sp.radians() - sn.radians()));
        }
    }
    out
}

/// Minimal triangle solve from vertex angles; needs at least five of the six
/// sightings.
pub fn solve_triangle_2d(g: &SightingGraph2) -> Result<Reconstruction2> {
    let ids: [CameraId; 3] = g.cameras().try_into().map_err(|_| {
        Error::InvalidArgument(format!("triangle needs 3 cameras, got {}", g.cameras().len()))
    })?;
    if g.len() < 5 {
        return Err(Error::InsufficientSightings {
            have: g.len(),
            need: 5,
            detail: "a triangle needs two mutual links plus one more sighting".into(),
        });
    }
    let signed = triangle_angles(g, ids);
    let known: Vec<f64> = signed.iter().flatten().copied().collect();
    let ccw = known[0] > 0.0;
    if known.iter().any(|a| (*a > 0.0) != ccw) {
        return Err(Error::DegenerateTriangle(
            "vertex angles disagree on orientation".into(),
        ));
    }
    let mut angles = [0.0; 3];
    let mut missing = None;
    for v in 0..3 {
        match signed[v] {
            Some(a) => angles[v] = a.abs(),
            None => missing = Some(v),
        }
    }
    if let Some(m) = missing {
        angles[m] = PI - angles.iter().sum::<f64>();
    }
    if angles.iter().any(|&a| a <= 1e-12 || a >= PI - 1e-12) {
        return Err(Error::DegenerateTriangle(format!(
            "vertex angles {angles:?}"
        )));
    }
    let sign = if ccw { 1.0 } else { -1.0 };
    let len_ac = angles[1].sin() / angles[2].sin();
    let p = [
        Vec2::zeros(),
        Vec2::new(1.0, 0.0),
        Vec2::new((sign * angles[0]).cos(), (sign * angles[0]).sin()) * len_ac,
    ];
    let mut poses = BTreeMap::new();
    for v in 0..3 {
        let (mut c, mut s) = (0.0, 0.0);
        for w in 0..3 {
            if let Some(b) = g.get(ids[v], ids[w]) {
                let d = p[w] - p[v];
                let phi = b.radians() - d.y.atan2(d.x);
                c += phi.cos();
                s += phi.sin();
            }
        }
        poses.insert(ids[v], Pose2::new(p[v], s.atan2(c))?);
    }
    let gauge = Gauge {
        anchor: ids[0],
        scale_pair: default_scale_pair(g)?,
    };
    let poses = fix_gauge_2d(&poses, gauge)?;
    let residual = rms_residual_2d(g, &poses);
    Ok(Reconstruction2 {
        poses,
        gauge,
        residual,
    })
}

/// Pose of a single camera against fixed landmarks.
struct Resection2<'a> {
    outgoing: Vec<(Vec2, f64)>,
    incoming: Vec<(&'a Pose2, f64)>,
}

impl LeastSquares for Resection2<'_> {
    type State = (Vec2, f64);

    fn dof(&self) -> usize {
        3
    }

    fn residuals(&self, (z, phi): &Self::State) -> DVector<f64> {
        let mut r = Vec::with_capacity(self.outgoing.len() + self.incoming.len());
        for (x, sigma) in &self.outgoing {
            let d = x - z;
            r.push(wrap(sigma - (phi + d.y.atan2(d.x))));
        }
        for (k, sigma) in &self.incoming {
            r.push(wrap(sigma - predicted_bearing(k, z)));
        }
        DVector::from_vec(r)
    }

    fn retract(&self, (z, phi): &Self::State, d: &DVector<f64>) -> Self::State {
        (z + Vec2::new(d[0], d[1]), phi + d[2])
    }
}

fn circular_mean(angles: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = angles.fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    s.atan2(c)
}

/// Registers camera `p` against the solved cameras in `solved` using the
/// sightings between them.
pub fn add_camera_2d(solved: &Reconstruction2, g: &SightingGraph2, p: CameraId) -> Result<Pose2> {
    add_camera_2d_with(solved, g, p, &Recon2Config::default()).map(|(pose, _)| pose)
}

/// Registers `p`, refusing when several distinct poses explain the
/// sightings equally well.
pub fn add_camera_2d_with(
    solved: &Reconstruction2,
    g: &SightingGraph2,
    p: CameraId,
    config: &Recon2Config,
) -> Result<(Pose2, f64)> {
    let cands = add_camera_2d_candidates(solved, g, p, config)?;
    if cands.len() > 1 && cands[1].1 <= (10.0 * cands[0].1).max(1e-9) {
        return Err(Error::Underdetermined(format!(
            "camera {p}: {} distinct poses fit its sightings",
            cands.len()
        )));
    }
    Ok(cands[0])
}

/// Every distinct local solution for the pose of `p` with rms at most
/// `config.accept_rms`, best first.
pub fn add_camera_2d_candidates(
    solved: &Reconstruction2,
    g: &SightingGraph2,
    p: CameraId,
    config: &Recon2Config,
) -> Result<Vec<(Pose2, f64)>> {
    let set: BTreeSet<CameraId> = solved.poses.keys().copied().collect();
    if !addable(g, &set, p, Dimension::Two) {
        let (out, inc) = g.between(p, &set);
        return Err(Error::InsufficientSightings {
            have: out.len() + inc.len(),
            need: 3,
            detail: format!(
                "camera {p} needs 3 sightings with at least 1 outgoing (has {} outgoing)",
                out.len()
            ),
        });
    }
    let (out, inc) = g.between(p, &set);
    let problem = Resection2 {
        outgoing: out
            .iter()
            .map(|s| (solved.poses[&s.target].position(), s.bearing.radians()))
            .collect(),
        incoming: inc
            .iter()
            .map(|s| (&solved.poses[&s.observer], s.bearing.radians()))
            .collect(),
    };

    let mut starts: Vec<Vec2> = Vec::new();
    if problem.incoming.len() >= 2 {
        if let Some(z) = intersect_rays(&problem.incoming) {
            starts.push(z);
        }
    }
    if problem.outgoing.len() >= 2 {
        starts.extend(inscribed_arc_samples(&problem.outgoing, config.starts));
    }
    if starts.is_empty() {
        let c = set.iter().map(|id| solved.poses[id].position()).sum::<Vec2>() / set.len() as f64;
        starts.extend((0..config.starts).map(|k| {
            let a = TAU * k as f64 / config.starts as f64;
            c + Vec2::new(a.cos(), a.sin())
        }));
    }

    let scale = set
        .iter()
        .flat_map(|a| set.iter().map(move |b| (a, b)))
        .map(|(a, b)| (solved.poses[a].position() - solved.poses[b].position()).norm())
        .fold(1e-12, f64::max);
    let mut best_rms = f64::INFINITY;
    let mut out: Vec<(Pose2, f64)> = Vec::new();
    for z0 in starts {
        let phi0 = circular_mean(problem.outgoing.iter().map(|(x, s)| {
            let d = x - z0;
            s - d.y.atan2(d.x)
        }));
        let outcome = levenberg_marquardt(&problem, (z0, phi0), &config.lm);
        let rms = (2.0 * outcome.cost / (problem.outgoing.len() + problem.incoming.len()) as f64).sqrt();
        best_rms = best_rms.min(rms);
        if !(rms <= config.accept_rms) {
            continue;
        }
        let (z, phi) = outcome.state;
        let pose = Pose2::new(z, phi)?;
        match out.iter_mut().find(|(q, _)| {
            (q.position() - pose.position()).norm() < 1e-6 * scale
                && q.orientation().distance(pose.orientation()) < 1e-6
        }) {
            Some(existing) if rms < existing.1 => *existing = (pose, rms),
            Some(_) => {}
            None => out.push((pose, rms)),
        }
    }
    if out.is_empty() {
        return Err(Error::NoConvergence {
            iterations: config.lm.max_iterations,
            rms: best_rms,
        });
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(out)
}

/// Least-squares intersection of the incoming rays `z_k + t d_k`.
fn intersect_rays(incoming: &[(&Pose2, f64)]) -> Option<Vec2> {
    let mut a = Matrix2::zeros();
    let mut b = Vec2::zeros();
    for (k, sigma) in incoming {
        let alpha = sigma - k.orientation().radians();
        let n = Vec2::new(-alpha.sin(), alpha.cos());
        a += n * n.transpose();
        b += n * n.dot(&k.position());
    }
    let z = a.try_inverse()? * b;
    z.iter().all(|v| v.is_finite()).then_some(z)
}

/// Points on the two circles through a pair of landmarks from which the pair
/// subtends the measured angle.
fn inscribed_arc_samples(outgoing: &[(Vec2, f64)], count: usize) -> Vec<Vec2> {
    let mut out = Vec::new();
    let (x1, s1) = outgoing[0];
    let Some(&(x2, s2)) = outgoing[1..].iter().find(|(x, _)| (x - x1).norm() > 1e-12) else {
        return out;
    };
    let gamma = wrap(s1 - s2);
    let chord = x2 - x1;
    let len = chord.norm();
    let sin_g = gamma.sin().abs();
    if sin_g < 1e-9 {
        return out;
    }
    let radius = len / (2.0 * sin_g);
    let mid = (x1 + x2) / 2.0;
    let normal = Vec2::new(-chord.y, chord.x) / len;
    let offset = radius * gamma.cos().abs();
    let per_circle = (count / 2).max(1);
    for centre in [mid + normal * offset, mid - normal * offset] {
        for k in 0..per_circle {
            let a = TAU * (k as f64 + 0.5) / per_circle as f64;
            out.push(centre + Vec2::new(a.cos(), a.sin()) * radius);
        }
    }
    out
}

/// Outcome of a bundle adjustment run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjustReport {
    pub converged: bool,
    pub iterations: usize,
    pub initial_rms: f64,
    pub final_rms: f64,
    /// Objective `1/2 sum r^2` after each accepted step.
    pub cost_history: Vec<f64>,
}

struct Adjust2<'a> {
    g: &'a SightingGraph2,
    ids: Vec<CameraId>,
    gauge: Gauge,
    partner: CameraId,
}

#[derive(Clone)]
struct Adjust2State {
    z: Vec<Vec2>,
    phi: Vec<f64>,
}

impl Adjust2<'_> {
    fn index(&self, id: CameraId) -> usize {
        self.ids.binary_search(&id).unwrap()
    }
}

impl LeastSquares for Adjust2<'_> {
    type State = Adjust2State;

    fn dof(&self) -> usize {
        3 * self.ids.len() - 4
    }

    fn residuals(&self, s: &Adjust2State) -> DVector<f64> {
        DVector::from_iterator(
            self.g.len(),
            self.g.sightings().iter().map(|sg| {
                let i = self.index(sg.observer);
                let j = self.index(sg.target);
                let d = s.z[j] - s.z[i];
                wrap(sg.bearing.radians() - (s.phi[i] + d.y.atan2(d.x)))
            }),
        )
    }

    fn retract(&self, s: &Adjust2State, d: &DVector<f64>) -> Adjust2State {
        let mut out = s.clone();
        let a = self.index(self.gauge.anchor);
        let mut k = 0;
        for (idx, &id) in self.ids.iter().enumerate() {
            if id == self.gauge.anchor {
                continue;
            }
            if id == self.partner {
                // rotate about the anchor at fixed unit distance
                let rel = s.z[idx] - s.z[a];
                out.z[idx] = s.z[a] + rot2(d[k]) * rel;
                out.phi[idx] = s.phi[idx] + d[k + 1];
                k += 2;
            } else {
                out.z[idx] = s.z[idx] + Vec2::new(d[k], d[k + 1]);
                out.phi[idx] = s.phi[idx] + d[k + 2];
                k += 3;
            }
        }
        out
    }
}

pub struct Adjusted2 {
    pub reconstruction: Reconstruction2,
    pub report: AdjustReport,
}

/// Damped Gauss-Newton on all angular residuals with the gauge frozen.
pub fn bundle_adjust_2d(g: &SightingGraph2, initial: &Reconstruction2) -> Result<Adjusted2> {
    bundle_adjust_2d_with(g, initial, &LmConfig::default())
}

pub fn bundle_adjust_2d_with(
    g: &SightingGraph2,
    initial: &Reconstruction2,
    lm: &LmConfig,
) -> Result<Adjusted2> {
    let gauge = initial.gauge;
    let poses = fix_gauge_2d(&initial.poses, gauge)?;
    let ids: Vec<CameraId> = poses.keys().copied().collect();
    for s in g.sightings() {
        for id in [s.observer, s.target] {
            if !poses.contains_key(&id) {
                return Err(Error::UnknownCamera(id));
            }
        }
    }
    let partner = if gauge.scale_pair.0 == gauge.anchor {
        gauge.scale_pair.1
    } else if gauge.scale_pair.1 == gauge.anchor {
        gauge.scale_pair.0
    } else {
        return Err(Error::InvalidArgument(
            "bundle adjustment needs the anchor in the scale pair".into(),
        ));
    };
    let problem = Adjust2 {
        g,
        ids: ids.clone(),
        gauge,
        partner,
    };
    let state = Adjust2State {
        z: ids.iter().map(|id| poses[id].position()).collect(),
        phi: ids.iter().map(|id| poses[id].orientation().radians()).collect(),
    };
    let initial_rms = rms_residual_2d(g, &poses);
    let outcome = levenberg_marquardt(&problem, state, lm);
    let mut out = BTreeMap::new();
    for (k, id) in ids.iter().enumerate() {
        out.insert(*id, Pose2::new(outcome.state.z[k], outcome.state.phi[k])?);
    }
    let final_rms = rms_residual_2d(g, &out);
    Ok(Adjusted2 {
        reconstruction: Reconstruction2 {
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

/// Orientation solve, linear position solve and a final bundle adjustment.
pub fn solve_batch_2d(g: &SightingGraph2) -> Result<Reconstruction2> {
    g.require_connected()?;
    let n = g.cameras().len();
    let need = dof_counts(n, Dimension::Two)?.min_sightings;
    if g.len() < need {
        return Err(Error::Underdetermined(format!(
            "{} sightings for {n} cameras, at least {need} required",
            g.len()
        )));
    }
    let anchor = g.cameras()[0];
    let phi = solve_orientations_2d(g, anchor)?;
    let linear = solve_positions_2d(g, &phi)?;
    let adjusted = bundle_adjust_2d(g, &linear)?;
    if adjusted.reconstruction.residual <= linear.residual {
        Ok(adjusted.reconstruction)
    } else {
        Ok(linear)
    }
}

/// One registration step of the sequential solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequentialStep {
    pub camera: CameraId,
    pub sightings_used: usize,
    pub rms_after: f64,
}

#[derive(Clone, Debug)]
pub struct Sequential2 {
    pub reconstruction: Reconstruction2,
    pub seed: Vec<CameraId>,
    pub steps: Vec<SequentialStep>,
}

/// Grows a reconstruction from the smallest mutual pair, adding at each step
/// the addable camera with the most sightings to the solved set, with a
/// bundle adjustment after every addition.
pub fn solve_sequential_2d(g: &SightingGraph2) -> Result<Sequential2> {
    g.require_connected()?;
    let config = Recon2Config::default();
    let seed_pair = g
        .mutual_pairs()
        .first()
        .copied()
        .ok_or_else(|| Error::Underdetermined("no mutual link to seed from".into()))?;
    let (a, b) = seed_pair;
    let sigma_ab = g.get(a, b).unwrap().radians();
    let sigma_ba = g.get(b, a).unwrap().radians();
    // anchor a at the origin with phi = 0, b at unit distance along sigma_ab
    let mut poses = BTreeMap::new();
    poses.insert(a, Pose2::new(Vec2::zeros(), 0.0)?);
    poses.insert(
        b,
        Pose2::new(
            Vec2::new(sigma_ab.cos(), sigma_ab.sin()),
            sigma_ba - sigma_ab + PI,
        )?,
    );
    let gauge = Gauge {
        anchor: a,
        scale_pair: seed_pair,
    };
    let mut recon = Reconstruction2 {
        residual: 0.0,
        poses,
        gauge,
    };
    recon.residual = rms_residual_2d(g, &recon.poses);
    let mut steps = Vec::new();
    loop {
        let solved: BTreeSet<CameraId> = recon.poses.keys().copied().collect();
        if solved.len() == g.cameras().len() {
            break;
        }
        let next = g
            .cameras()
            .iter()
            .filter(|&&p| addable(g, &solved, p, Dimension::Two))
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
        let (pose, _) = add_camera_2d_with(&recon, g, p, &config)?;
        recon.poses.insert(p, pose);
        let mut members: Vec<CameraId> = recon.poses.keys().copied().collect();
        members.sort();
        let sub = g.subgraph(&members)?;
        let adjusted = bundle_adjust_2d(&sub, &recon)?;
        recon = adjusted.reconstruction;
        let (o, i) = g.between(p, &solved);
        steps.push(SequentialStep {
            camera: p,
            sightings_used: o.len() + i.len(),
            rms_after: recon.residual,
        });
    }
    recon.residual = rms_residual_2d(g, &recon.poses);
    Ok(Sequential2 {
        reconstruction: recon,
        seed: vec![a, b],
        steps,
    })
}

/// Position rms (in units of the truth's diameter) and worst orientation
/// error after aligning `estimate` onto `truth` by a similarity.
pub fn compare_to_truth_2d(
    estimate: &BTreeMap<CameraId, Pose2>,
    truth: &BTreeMap<CameraId, Pose2>,
) -> Result<(f64, f64)> {
    let ids: Vec<CameraId> = truth.keys().filter(|k| estimate.contains_key(k)).copied().collect();
    let src: Vec<Vec2> = ids.iter().map(|k| estimate[k].position()).collect();
    let dst: Vec<Vec2> = ids.iter().map(|k| truth[k].position()).collect();
    let (sim, rms) = crate::geometry::align_similarity_2d(&src, &dst)?;
    let mut diameter: f64 = 0.0;
    for a in &dst {
        for b in &dst {
            diameter = diameter.max((a - b).norm());
        }
    }
    let orient = ids
        .iter()
        .map(|k| sim.apply_pose(&estimate[k]).orientation().distance(truth[k].orientation()))
        .fold(0.0, f64::max);
    Ok((rms / diameter.max(1e-300), orient))
}
