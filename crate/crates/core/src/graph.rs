//! Scenes, sightings and the directed sighting graph, plus the counting
//! arithmetic that says how many sightings a reconstruction needs.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::Unit;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    bearing2, direction3, pixel_from_bearing2, pixel_from_unit3, Angle, Pose2, Pose3, UnitVec3,
    Vec3,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CameraId(pub u32);

impl fmt::Display for CameraId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Dimension {
    Two,
    Three,
}

impl Dimension {
    /// Full angular extent: `2 pi` radians or `4 pi` steradians.
    pub fn full_fov(self) -> f64 {
        match self {
            Dimension::Two => TAU,
            Dimension::Three => 2.0 * TAU,
        }
    }
}

impl TryFrom<u8> for Dimension {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            other => Err(format!("dimension must be 2 or 3, got {other}")),
        }
    }
}

impl From<Dimension> for u8 {
    fn from(d: Dimension) -> u8 {
        match d {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }
}

/// Half-angle of the circular cone with solid angle `fov`.
pub fn cone_half_angle(fov: f64) -> f64 {
    (1.0 - fov / TAU).clamp(-1.0, 1.0).acos()
}

/// Solid angle of the circular cone with half-angle `delta`.
pub fn cone_solid_angle(delta: f64) -> f64 {
    TAU * (1.0 - delta.cos())
}

const FOV_EDGE_TOL: f64 = 1e-12;

/// Pose types with a measurement model: what an observer records when it
/// sights another camera.
pub trait CameraPose: Clone + fmt::Debug {
    type Bearing: Clone + fmt::Debug + PartialEq;
    const DIM: Dimension;

    fn bearing_to(&self, target: &Self) -> Result<Self::Bearing>;
    fn in_fov(bearing: &Self::Bearing, fov: f64) -> bool;
    fn perturb<R: Rng + ?Sized>(bearing: &Self::Bearing, std: f64, rng: &mut R) -> Self::Bearing;
    /// Pinhole pixel, when the bearing is in front of the camera.
    fn pixel(bearing: &Self::Bearing) -> Option<Vec<f64>>;
}

impl CameraPose for Pose2 {
    type Bearing = Angle;
    const DIM: Dimension = Dimension::Two;

    fn bearing_to(&self, target: &Self) -> Result<Angle> {
        bearing2(self, &target.position())
    }

    fn in_fov(bearing: &Angle, fov: f64) -> bool {
        bearing.radians().abs() <= fov / 2.0 + FOV_EDGE_TOL
    }

    fn perturb<R: Rng + ?Sized>(bearing: &Angle, std: f64, rng: &mut R) -> Angle {
        let g: f64 = StandardNormal.sample(rng);
        Angle::from_raw(bearing.radians() + std * g)
    }

    fn pixel(bearing: &Angle) -> Option<Vec<f64>> {
        pixel_from_bearing2(*bearing).ok().map(|p| vec![p])
    }
}

impl CameraPose for Pose3 {
    type Bearing = UnitVec3;
    const DIM: Dimension = Dimension::Three;

    fn bearing_to(&self, target: &Self) -> Result<UnitVec3> {
        direction3(self, &target.position())
    }

    fn in_fov(bearing: &UnitVec3, fov: f64) -> bool {
        bearing.z >= cone_half_angle(fov).cos() - FOV_EDGE_TOL
    }

    fn perturb<R: Rng + ?Sized>(bearing: &UnitVec3, std: f64, rng: &mut R) -> UnitVec3 {
        let (e1, e2) = tangent_basis(bearing);
        let g1: f64 = StandardNormal.sample(rng);
        let g2: f64 = StandardNormal.sample(rng);
        let w = (e1 * g1 + e2 * g2) * std;
        let th = w.norm();
        if th == 0.0 {
            return *bearing;
        }
        Unit::new_normalize(bearing.into_inner() * th.cos() + w * (th.sin() / th))
    }

    fn pixel(bearing: &UnitVec3) -> Option<Vec<f64>> {
        pixel_from_unit3(bearing).ok().map(|(x, y)| vec![x, y])
    }
}

/// An orthonormal basis of the plane orthogonal to `v`.
pub fn tangent_basis(v: &UnitVec3) -> (Vec3, Vec3) {
    let helper = if v.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = v.cross(&helper).normalize();
    let e2 = v.cross(&e1);
    (e1, e2)
}

/// A set of calibrated cameras sharing a single field of view.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene<P> {
    fov: f64,
    cameras: Vec<(CameraId, P)>,
}

pub type Scene2 = Scene<Pose2>;
pub type Scene3 = Scene<Pose3>;

impl<P: CameraPose> Scene<P> {
    pub fn new(fov: f64, cameras: Vec<(CameraId, P)>) -> Result<Self> {
        let max = P::DIM.full_fov();
        if !(fov > 0.0 && fov <= max + 1e-12) {
            return Err(Error::InvalidScene(format!(
                "fov {fov} outside (0, {max}]"
            )));
        }
        let mut seen = BTreeSet::new();
        for (id, _) in &cameras {
            if !seen.insert(*id) {
                return Err(Error::InvalidScene(format!("duplicate camera id {id}")));
            }
        }
        Ok(Scene {
            fov: fov.min(max),
            cameras,
        })
    }

    pub fn fov(&self) -> f64 {
        self.fov
    }

    pub fn cameras(&self) -> &[(CameraId, P)] {
        &self.cameras
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn pose(&self, id: CameraId) -> Option<&P> {
        self.cameras.iter().find(|(i, _)| *i == id).map(|(_, p)| p)
    }

    pub fn ids(&self) -> Vec<CameraId> {
        self.cameras.iter().map(|(i, _)| *i).collect()
    }

    pub fn with_fov(&self, fov: f64) -> Result<Self> {
        Scene::new(fov, self.cameras.clone())
    }
}

/// A directed observation: `observer` sees `target` along `bearing`
/// (camera-frame angle in 2D, camera-frame unit direction in 3D).
#[derive(Clone, Debug, PartialEq)]
pub struct Sighting<B> {
    pub observer: CameraId,
    pub target: CameraId,
    pub bearing: B,
}

pub type Sighting2 = Sighting<Angle>;
pub type Sighting3 = Sighting<UnitVec3>;

/// The directed sighting graph; at most one sighting per ordered pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SightingGraph<B> {
    cameras: Vec<CameraId>,
    sightings: Vec<Sighting<B>>,
    index: BTreeMap<(CameraId, CameraId), usize>,
}

pub type SightingGraph2 = SightingGraph<Angle>;
pub type SightingGraph3 = SightingGraph<UnitVec3>;

impl<B: Clone> SightingGraph<B> {
    pub fn new(cameras: Vec<CameraId>, sightings: Vec<Sighting<B>>) -> Result<Self> {
        let mut ids: Vec<CameraId> = cameras;
        ids.sort();
        let before = ids.len();
        ids.dedup();
        if ids.len() != before {
            return Err(Error::InvalidScene("duplicate camera id".into()));
        }
        let known: BTreeSet<CameraId> = ids.iter().copied().collect();
        let mut index = BTreeMap::new();
        for (k, s) in sightings.iter().enumerate() {
            for id in [s.observer, s.target] {
                if !known.contains(&id) {
                    return Err(Error::UnknownCamera(id));
                }
            }
            if s.observer == s.target {
                return Err(Error::SelfSighting(s.observer));
            }
            if index.insert((s.observer, s.target), k).is_some() {
                return Err(Error::DuplicateSighting {
                    observer: s.observer,
                    target: s.target,
                });
            }
        }
        Ok(SightingGraph {
            cameras: ids,
            sightings,
            index,
        })
    }

    pub fn cameras(&self) -> &[CameraId] {
        &self.cameras
    }

    pub fn sightings(&self) -> &[Sighting<B>] {
        &self.sightings
    }

    pub fn len(&self) -> usize {
        self.sightings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sightings.is_empty()
    }

    pub fn get(&self, observer: CameraId, target: CameraId) -> Option<&B> {
        self.index
            .get(&(observer, target))
            .map(|&k| &self.sightings[k].bearing)
    }

    pub fn has(&self, observer: CameraId, target: CameraId) -> bool {
        self.index.contains_key(&(observer, target))
    }

    pub fn is_mutual(&self, a: CameraId, b: CameraId) -> bool {
        self.has(a, b) && self.has(b, a)
    }

    /// Unordered mutual pairs `(a, b)` with `a < b`, in lexicographic order.
    pub fn mutual_pairs(&self) -> Vec<(CameraId, CameraId)> {
        self.index
            .keys()
            .filter(|(a, b)| a < b && self.has(*b, *a))
            .copied()
            .collect()
    }

    /// Connected components of the undirected graph of mutual links.
    pub fn mutual_components(&self) -> Vec<Vec<CameraId>> {
        let mut adj: BTreeMap<CameraId, Vec<CameraId>> =
            self.cameras.iter().map(|&c| (c, Vec::new())).collect();
        for (a, b) in self.mutual_pairs() {
            adj.get_mut(&a).unwrap().push(b);
            adj.get_mut(&b).unwrap().push(a);
        }
        components(&self.cameras, &adj)
    }

    /// Connected components ignoring edge direction.
    pub fn weak_components(&self) -> Vec<Vec<CameraId>> {
        let mut adj: BTreeMap<CameraId, Vec<CameraId>> =
            self.cameras.iter().map(|&c| (c, Vec::new())).collect();
        for s in &self.sightings {
            adj.get_mut(&s.observer).unwrap().push(s.target);
            adj.get_mut(&s.target).unwrap().push(s.observer);
        }
        components(&self.cameras, &adj)
    }

    /// Fails with [`Error::NotConnected`] when the sightings, ignoring
    /// direction, split the cameras into several components.
    pub fn require_connected(&self) -> Result<()> {
        let components = self.weak_components();
        if components.len() > 1 {
            return Err(Error::NotConnected { components });
        }
        Ok(())
    }

    /// Restriction to the cameras in `keep`.
    pub fn subgraph(&self, keep: &[CameraId]) -> Result<Self> {
        let set: BTreeSet<CameraId> = keep.iter().copied().collect();
        let sightings = self
            .sightings
            .iter()
            .filter(|s| set.contains(&s.observer) && set.contains(&s.target))
            .cloned()
            .collect();
        SightingGraph::new(set.into_iter().collect(), sightings)
    }

    /// Copy with the sighting `observer -> target` removed.
    pub fn without(&self, observer: CameraId, target: CameraId) -> Self {
        let sightings = self
            .sightings
            .iter()
            .filter(|s| !(s.observer == observer && s.target == target))
            .cloned()
            .collect();
        SightingGraph::new(self.cameras.clone(), sightings).expect("subset of a valid graph")
    }

    /// Sightings between `p` and members of `set`, outgoing from `p` first.
    pub fn between(&self, p: CameraId, set: &BTreeSet<CameraId>) -> (Vec<&Sighting<B>>, Vec<&Sighting<B>>) {
        let outgoing = self
            .sightings
            .iter()
            .filter(|s| s.observer == p && set.contains(&s.target))
            .collect();
        let incoming = self
            .sightings
            .iter()
            .filter(|s| s.target == p && set.contains(&s.observer))
            .collect();
        (outgoing, incoming)
    }
}

fn components(
    nodes: &[CameraId],
    adj: &BTreeMap<CameraId, Vec<CameraId>>,
) -> Vec<Vec<CameraId>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in nodes {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(c) = stack.pop() {
            for &n in &adj[&c] {
                if seen.insert(n) {
                    comp.push(n);
                    stack.push(n);
                }
            }
        }
        comp.sort();
        out.push(comp);
    }
    out
}

/// Emits every sighting whose direction lies in the observer's field of view,
/// optionally perturbed by Gaussian angular noise.
pub fn synthesize<P: CameraPose, R: Rng + ?Sized>(
    scene: &Scene<P>,
    noise_std: f64,
    rng: &mut R,
) -> Result<SightingGraph<P::Bearing>> {
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise std {noise_std}")));
    }
    let mut sightings = Vec::new();
    for (i, pi) in scene.cameras() {
        for (j, pj) in scene.cameras() {
            if i == j {
                continue;
            }
            let b = pi.bearing_to(pj)?;
            if !P::in_fov(&b, scene.fov()) {
                continue;
            }
            let bearing = if noise_std > 0.0 {
                P::perturb(&b, noise_std, rng)
            } else {
                b
            };
            sightings.push(Sighting {
                observer: *i,
                target: *j,
                bearing,
            });
        }
    }
    SightingGraph::new(scene.ids(), sightings)
}

/// Parameter and sighting counts for `n` cameras.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofCounts {
    /// Pose parameters left after removing the global similarity.
    pub parameters: usize,
    /// Fewest sightings that can determine the poses.
    pub min_sightings: usize,
    /// Number of ordered camera pairs.
    pub max_sightings: usize,
}

/// In 3D the two-camera minimum is reported as the formula value `3n - 3 = 3`.
pub fn dof_counts(n: usize, dim: Dimension) -> Result<DofCounts> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    Ok(match dim {
        Dimension::Two => DofCounts {
            parameters: 3 * n - 4,
            min_sightings: 3 * n - 4,
            max_sightings: n * (n - 1),
        },
        Dimension::Three => DofCounts {
            parameters: 6 * n - 7,
            min_sightings: 3 * n - 3,
            max_sightings: n * (n - 1),
        },
    })
}

/// Groups of cameras whose orientations are jointly recoverable from mutual links.
pub fn orientation_solvable_2d(g: &SightingGraph2) -> Vec<Vec<CameraId>> {
    g.mutual_components()
}

/// Whether `p` can be registered against the already solved cameras.
pub fn addable<B: Clone>(
    g: &SightingGraph<B>,
    solved: &BTreeSet<CameraId>,
    p: CameraId,
    dim: Dimension,
) -> bool {
    if solved.contains(&p) {
        return false;
    }
    let (out, inc) = g.between(p, solved);
    let total = out.len() + inc.len();
    let min_out = match dim {
        Dimension::Two => 1,
        Dimension::Three => 2,
    };
    total >= 3 && out.len() >= min_out
}

/// Points on a circle of radius `radius` facing inward, a helper for tests
/// and generators.
pub fn ring_scene_2d(n: usize, radius: f64, fov: f64) -> Result<Scene2> {
    let cams = (0..n)
        .map(|k| {
            let a = TAU * k as f64 / n as f64;
            let pos = crate::geometry::Vec2::new(a.cos(), a.sin()) * radius;
            // optical axis toward the center: axis angle a + pi = -phi
            let phi = -(a + PI);
            Pose2::new(pos, phi).map(|p| (CameraId(k as u32), p))
        })
        .collect::<Result<Vec<_>>>()?;
    Scene::new(fov, cams)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{project2, project3, Vec2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn id(k: u32) -> CameraId {
        CameraId(k)
    }

    fn random_scene2(rng: &mut ChaCha8Rng, n: usize, fov: f64) -> Scene2 {
        let cams = (0..n)
            .map(|k| {
                let p = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                (id(k as u32), Pose2::new(p, rng.random_range(-PI..PI)).unwrap())
            })
            .collect();
        Scene::new(fov, cams).unwrap()
    }

    fn random_scene3(rng: &mut ChaCha8Rng, n: usize, fov: f64) -> Scene3 {
        let cams = (0..n)
            .map(|k| {
                let p = Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                let axis = Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                let r = nalgebra::Rotation3::from_scaled_axis(axis * 2.0).into_inner();
                (id(k as u32), Pose3::new(p, r).unwrap())
            })
            .collect();
        Scene::new(fov, cams).unwrap()
    }

    #[test]
    fn facing_pair_sees_each_other_on_axis() {
        let a = Pose2::new(Vec2::zeros(), 0.0).unwrap();
        let b = Pose2::new(Vec2::new(2.0, 0.0), PI).unwrap();
        let scene = Scene::new(PI / 2.0, vec![(id(0), a), (id(1), b)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = synthesize(&scene, 0.0, &mut rng).unwrap();
        assert_eq!(g.len(), 2);
        for s in g.sightings() {
            assert!(s.bearing.radians().abs() < 1e-15);
            assert!(Pose2::pixel(&s.bearing).unwrap()[0].abs() < 1e-15);
        }
        let b_turned = Pose2::new(Vec2::new(2.0, 0.0), 0.0).unwrap();
        let scene = Scene::new(PI / 2.0, vec![(id(0), a), (id(1), b_turned)]).unwrap();
        let g = synthesize(&scene, 0.0, &mut rng).unwrap();
        assert_eq!(g.len(), 1);
        assert!(g.has(id(0), id(1)) && !g.has(id(1), id(0)));
    }

    #[test]
    fn synthesized_pixels_match_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let scene = random_scene2(&mut rng, 6, 2.0);
            let g = synthesize(&scene, 0.0, &mut rng).unwrap();
            for s in g.sightings() {
                let o = scene.pose(s.observer).unwrap();
                let t = scene.pose(s.target).unwrap();
                let p = project2(o, &t.position()).unwrap();
                assert!((Pose2::pixel(&s.bearing).unwrap()[0] - p).abs() < 1e-12);
            }
            let scene = random_scene3(&mut rng, 6, 3.0);
            let g = synthesize(&scene, 0.0, &mut rng).unwrap();
            for s in g.sightings() {
                let o = scene.pose(s.observer).unwrap();
                let t = scene.pose(s.target).unwrap();
                let (px, py) = project3(o, &t.position()).unwrap();
                let pix = Pose3::pixel(&s.bearing).unwrap();
                assert!((pix[0] - px).abs() < 1e-12 && (pix[1] - py).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn full_fov_emits_all_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..9 {
            let s2 = random_scene2(&mut rng, n, TAU);
            assert_eq!(synthesize(&s2, 0.0, &mut rng).unwrap().len(), n * (n - 1));
            let s3 = random_scene3(&mut rng, n, 2.0 * TAU);
            assert_eq!(synthesize(&s3, 0.0, &mut rng).unwrap().len(), n * (n - 1));
        }
    }

    #[test]
    fn sighting_count_monotone_in_fov() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s2 = random_scene2(&mut rng, 8, 0.1);
        let s3 = random_scene3(&mut rng, 8, 0.1);
        let mut last = (0, 0);
        for k in 1..=40 {
            let f = k as f64 / 40.0;
            let c2 = synthesize(&s2.with_fov(f * TAU).unwrap(), 0.0, &mut rng).unwrap().len();
            let c3 = synthesize(&s3.with_fov(f * 2.0 * TAU).unwrap(), 0.0, &mut rng).unwrap().len();
            assert!(c2 >= last.0 && c3 >= last.1);
            last = (c2, c3);
        }
    }

    #[test]
    fn noise_perturbs_by_about_std() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let scene = random_scene3(&mut rng, 10, 2.0 * TAU);
        let clean = synthesize(&scene, 0.0, &mut rng).unwrap();
        let noisy = synthesize(&scene, 1e-3, &mut rng).unwrap();
        let mut sq = 0.0;
        for (a, b) in clean.sightings().iter().zip(noisy.sightings()) {
            let ang = crate::geometry::angle_between(&a.bearing, &b.bearing);
            sq += ang * ang;
        }
        // E[angle^2] = 2 std^2 for tangent-plane noise
        let ms = sq / clean.len() as f64;
        assert!(ms > 1.0e-6 && ms < 3.0e-6, "{ms}");
    }

    #[test]
    fn graph_rejects_bad_input() {
        let s = |a, b| Sighting {
            observer: id(a),
            target: id(b),
            bearing: Angle::ZERO,
        };
        assert!(matches!(
            SightingGraph::new(vec![id(0), id(1)], vec![s(0, 1), s(0, 1)]),
            Err(Error::DuplicateSighting { .. })
        ));
        assert!(matches!(
            SightingGraph::new(vec![id(0), id(1)], vec![s(0, 2)]),
            Err(Error::UnknownCamera(_))
        ));
        assert!(matches!(
            SightingGraph::new(vec![id(0), id(1)], vec![s(1, 1)]),
            Err(Error::SelfSighting(_))
        ));
    }

    #[test]
    fn dof_count_rows() {
        let d = dof_counts(4, Dimension::Two).unwrap();
        assert_eq!((d.parameters, d.min_sightings, d.max_sightings), (8, 8, 12));
        let d = dof_counts(3, Dimension::Three).unwrap();
        assert_eq!((d.parameters, d.min_sightings, d.max_sightings), (11, 6, 6));
        let d = dof_counts(6, Dimension::Three).unwrap();
        assert_eq!((d.parameters, d.min_sightings, d.max_sightings), (29, 15, 30));
        assert_eq!(dof_counts(2, Dimension::Three).unwrap().min_sightings, 3);
        assert!(dof_counts(1, Dimension::Two).is_err());
        for n in 2..50 {
            let d = dof_counts(n, Dimension::Two).unwrap();
            assert!(d.min_sightings <= d.max_sightings);
            if n >= 3 {
                let d = dof_counts(n, Dimension::Three).unwrap();
                assert!(d.min_sightings <= d.max_sightings);
            }
        }
    }

    fn graph(n: u32, edges: &[(u32, u32)]) -> SightingGraph2 {
        let s = edges
            .iter()
            .map(|&(a, b)| Sighting {
                observer: id(a),
                target: id(b),
                bearing: Angle::ZERO,
            })
            .collect();
        SightingGraph::new((0..n).map(id).collect(), s).unwrap()
    }

    #[test]
    fn orientation_components() {
        let tri = graph(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]);
        assert_eq!(orientation_solvable_2d(&tri), vec![vec![id(0), id(1), id(2)]]);
        let pairs = graph(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]);
        assert_eq!(orientation_solvable_2d(&pairs).len(), 2);
        // i <-> j, i <-> k, j -> k
        let minimal = graph(3, &[(0, 1), (1, 0), (0, 2), (2, 0), (1, 2)]);
        assert_eq!(orientation_solvable_2d(&minimal), vec![vec![id(0), id(1), id(2)]]);
    }

    #[test]
    fn addable_rules() {
        let solved: BTreeSet<CameraId> = [id(0), id(1), id(2)].into_iter().collect();
        let g = graph(4, &[(0, 3), (1, 3), (3, 2)]);
        assert!(addable(&g, &solved, id(3), Dimension::Two));
        assert!(!addable(&g, &solved, id(3), Dimension::Three));
        let g = graph(4, &[(0, 3), (1, 3), (2, 3)]);
        assert!(!addable(&g, &solved, id(3), Dimension::Two));
        let g = graph(4, &[(3, 0), (3, 1), (2, 3)]);
        assert!(addable(&g, &solved, id(3), Dimension::Three));
    }
}
