//! Mutual-visibility feasibility: the field of view each camera needs to see
//! every other camera, extremal configurations and the convex-position test.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Unit};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Pose2, Pose3, UnitVec3, Vec2, Vec3};
use crate::graph::{cone_solid_angle, tangent_basis, CameraId, Scene, Scene2, Scene3};

const CAP_TOL: f64 = 1e-12;

/// Regular polygon FOVs as printed (truncated to two decimals), by vertex count; `None`
/// stands for the limit of many vertices.
#[allow(clippy::approx_constant)]
pub const REGULAR_POLYGON_TABLE: [(Option<usize>, f64); 6] = [
    (Some(3), 1.04),
    (Some(4), 1.57),
    (Some(5), 1.88),
    (Some(6), 2.09),
    (Some(7), 2.24),
    (None, 3.14),
];

/// A Platonic solid and its tabulated vertex solid angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlatonicEntry {
    pub name: &'static str,
    pub vertices: usize,
    /// Closed-form steradians.
    pub solid_angle: f64,
    /// The value printed, truncated to two decimals.
    pub printed: f64,
}

/// Tabulated vertex solid angles of the Platonic solids.
pub fn platonic_table() -> [PlatonicEntry; 5] {
    [
        PlatonicEntry { name: "tetrahedron", vertices: 4, solid_angle: (23.0f64 / 27.0).acos(), printed: 0.55 },
        PlatonicEntry { name: "octahedron", vertices: 6, solid_angle: 4.0 * (1.0f64 / 3.0).asin(), printed: 1.35 },
        PlatonicEntry { name: "cube", vertices: 8, solid_angle: PI / 2.0, printed: 1.57 },
        PlatonicEntry {
            name: "icosahedron",
            vertices: 12,
            solid_angle: TAU - 5.0 * (2.0f64 / 3.0).asin(),
            printed: 2.63,
        },
        PlatonicEntry {
            name: "dodecahedron",
            vertices: 20,
            solid_angle: PI - (2.0f64 / 11.0).atan(),
            printed: 2.96,
        },
    ]
}

/// Lower bound `(n-2)pi/n` on the FOV that lets `n` cameras in the plane all
/// see each other.
pub fn min_fov_mutual_2d(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 cameras, got {n}")));
    }
    Ok((n as f64 - 2.0) * PI / n as f64)
}

/// The narrowest arc of directions holding every other camera, as
/// `(bisector angle, width)` in world angles.
pub fn direction_fan_2d(points: &[Vec2], i: usize) -> Result<(f64, f64)> {
    let mut angles = others(points, i, |d: Vec2| d.norm())?
        .into_iter()
        .map(|d| d.y.atan2(d.x))
        .collect::<Vec<_>>();
    angles.sort_by(f64::total_cmp);
    if angles.len() == 1 {
        return Ok((angles[0], 0.0));
    }
    // The complement of the widest gap between consecutive directions.
    let mut best = (angles[0] + TAU - angles[angles.len() - 1], angles.len() - 1);
    for k in 0..angles.len() - 1 {
        let gap = angles[k + 1] - angles[k];
        if gap > best.0 {
            best = (gap, k);
        }
    }
    let (gap, k) = best;
    let start = angles[(k + 1) % angles.len()];
    let width = TAU - gap;
    Ok((start + width / 2.0, width))
}

/// Minimal FOV (radians) at camera `i` to see every other point.
pub fn required_fov_2d(points: &[Vec2], i: usize) -> Result<f64> {
    direction_fan_2d(points, i).map(|(_, w)| w)
}

/// A spherical cap: every direction within `half_angle` of `axis`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cap {
    pub axis: UnitVec3,
    pub half_angle: f64,
}

impl Cap {
    pub fn contains(&self, d: &Vec3) -> bool {
        self.axis.dot(d) >= self.half_angle.cos() - CAP_TOL
    }

    pub fn solid_angle(&self) -> f64 {
        cone_solid_angle(self.half_angle)
    }
}

/// Smallest spherical cap containing the unit directions `dirs`.
///
/// The optimum is fixed by two diametral or three boundary directions, so
/// every such candidate is tried and the smallest enclosing one kept.
pub fn minimal_enclosing_cap(dirs: &[UnitVec3]) -> Result<Cap> {
    let n = dirs.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no directions".into()));
    }
    let encloses = |c: &Cap| dirs.iter().all(|d| c.contains(d));
    let mut best = Cap { axis: dirs[0], half_angle: 0.0 };
    if encloses(&best) {
        return Ok(best);
    }
    best.half_angle = f64::INFINITY;
    let mut consider = |c: Cap| {
        if c.half_angle < best.half_angle && encloses(&c) {
            best = c;
        }
    };
    for a in 0..n {
        for b in a + 1..n {
            let mid = dirs[a].into_inner() + dirs[b].into_inner();
            if mid.norm() > 1e-12 {
                let axis = Unit::new_normalize(mid);
                consider(Cap { axis, half_angle: axis.dot(&dirs[a]).clamp(-1.0, 1.0).acos() });
            }
            for c in b + 1..n {
                let normal = (dirs[b].into_inner() - dirs[a].into_inner())
                    .cross(&(dirs[c].into_inner() - dirs[a].into_inner()));
                if normal.norm() < 1e-14 {
                    continue;
                }
                for axis in [Unit::new_normalize(normal), Unit::new_normalize(-normal)] {
                    consider(Cap { axis, half_angle: axis.dot(&dirs[a]).clamp(-1.0, 1.0).acos() });
                }
            }
        }
    }
    if best.half_angle.is_finite() {
        Ok(best)
    } else {
        // Only antipodal pairs remain: any great circle through them works.
        let axis = Unit::new_normalize(tangent_basis(&dirs[0]).0);
        Ok(Cap { axis, half_angle: PI / 2.0 })
    }
}

fn others<V: Copy + std::ops::Sub<Output = V>>(
    points: &[V],
    i: usize,
    norm: impl Fn(V) -> f64,
) -> Result<Vec<V>> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 points, got {}", points.len())));
    }
    let Some(&p) = points.get(i) else {
        return Err(Error::InvalidArgument(format!("index {i} out of range")));
    };
    let mut out = Vec::with_capacity(points.len() - 1);
    for (k, &q) in points.iter().enumerate() {
        if k == i {
            continue;
        }
        let d = q - p;
        let len = norm(d);
        if !len.is_finite() {
            return Err(Error::NonFinite("point"));
        }
        if len == 0.0 {
            return Err(Error::CoincidentPoints);
        }
        out.push(d);
    }
    Ok(out)
}

fn directions_3d(points: &[Vec3], i: usize) -> Result<Vec<UnitVec3>> {
    Ok(others(points, i, |d: Vec3| d.norm())?.into_iter().map(Unit::new_normalize).collect())
}

/// Minimal enclosing cone at camera `i` of the directions to the others.
pub fn direction_cap_3d(points: &[Vec3], i: usize) -> Result<Cap> {
    minimal_enclosing_cap(&directions_3d(points, i)?)
}

/// Minimal circular-cone FOV (steradians) at camera `i` to see every other
/// point.
pub fn required_fov_3d(points: &[Vec3], i: usize) -> Result<f64> {
    direction_cap_3d(points, i).map(|c| c.solid_angle())
}

/// Solid angle of the convex cone spanned by the directions from camera `i`
/// to the others (the tightest polyhedral FOV).
///
/// A cone that is not contained in an open half-space is reported as `2pi`
/// when the directions fit a closed hemisphere and `4pi` otherwise.
pub fn required_fov_polyhedral(points: &[Vec3], i: usize) -> Result<f64> {
    let dirs = directions_3d(points, i)?;
    let cap = minimal_enclosing_cap(&dirs)?;
    if cap.half_angle >= PI / 2.0 - 1e-9 {
        return Ok(if cap.half_angle <= PI / 2.0 + 1e-9 { TAU } else { 2.0 * TAU });
    }
    // Central projection onto the plane tangent at the cap axis maps the
    // cone's extreme rays to the vertices of a planar convex hull.
    let a = cap.axis.into_inner();
    let (e1, e2) = tangent_basis(&cap.axis);
    let projected: Vec<Vec2> = dirs
        .iter()
        .map(|d| {
            let t = d.into_inner() / a.dot(d);
            Vec2::new(t.dot(&e1), t.dot(&e2))
        })
        .collect();
    let hull = convex_hull(&projected);
    if hull.len() < 3 {
        return Ok(0.0);
    }
    let ray = |p: &Vec2| (a + e1 * p.x + e2 * p.y).normalize();
    let centre = hull.iter().fold(Vec2::zeros(), |s, &k| s + projected[k]) / hull.len() as f64;
    let c = ray(&centre);
    let mut total = 0.0;
    for w in 0..hull.len() {
        let b = ray(&projected[hull[w]]);
        let d = ray(&projected[hull[(w + 1) % hull.len()]]);
        total += triangle_solid_angle(&c, &b, &d);
    }
    Ok(total)
}

/// Solid angle of the spherical triangle with unit vertices `a`, `b`, `c`.
pub fn triangle_solid_angle(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let num = a.dot(&b.cross(c)).abs();
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

fn cross2(o: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Indices of the strict convex hull vertices in counter-clockwise order
/// (monotone chain; collinear boundary points are dropped).
pub fn convex_hull(points: &[Vec2]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x).then(points[a].y.total_cmp(&points[b].y)));
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let eps = 1e-12 * scale * scale;
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> =
            if pass == 0 { Box::new(idx.iter()) } else { Box::new(idx.iter().rev()) };
        for &k in iter {
            while hull.len() >= start + 2
                && cross2(&points[hull[hull.len() - 2]], &points[hull[hull.len() - 1]], &points[k]) <= eps
            {
                hull.pop();
            }
            hull.push(k);
        }
        hull.pop();
    }
    hull
}

/// True iff no point lies strictly inside the convex hull of the set.
///
/// Points on the hull boundary, including every point of a collinear set,
/// count as being in convex position.
pub fn is_convex_position_2d(points: &[Vec2]) -> Result<bool> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 points, got {}", points.len())));
    }
    for (a, p) in points.iter().enumerate() {
        if !p.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        if points[a + 1..].contains(p) {
            return Err(Error::CoincidentPoints);
        }
    }
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Ok(true);
    }
    let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let eps = 1e-12 * scale * scale;
    let interior = |p: &Vec2| {
        (0..hull.len()).all(|w| cross2(&points[hull[w]], &points[hull[(w + 1) % hull.len()]], p) > eps)
    };
    Ok(!points.iter().any(interior))
}

/// Per-camera required FOV of a scene and whether the scene's FOV suffices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FovReport {
    pub dim: u8,
    /// Circular-cone (3D) or arc (2D) requirement per camera.
    pub per_camera: Vec<(CameraId, f64)>,
    /// Convex polyhedral-cone requirement per camera (3D only).
    pub polyhedral: Option<Vec<(CameraId, f64)>>,
    pub max_camera: CameraId,
    pub max_fov: f64,
    pub scene_fov: f64,
    pub feasible: bool,
}

fn report(dim: u8, scene_fov: f64, per_camera: Vec<(CameraId, f64)>, polyhedral: Option<Vec<(CameraId, f64)>>) -> FovReport {
    let (max_camera, max_fov) = per_camera
        .iter()
        .copied()
        .fold((per_camera[0].0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
    FovReport {
        dim,
        per_camera,
        polyhedral,
        max_camera,
        max_fov,
        scene_fov,
        feasible: max_fov <= scene_fov + 1e-12,
    }
}

pub fn fov_report_2d(scene: &Scene2) -> Result<FovReport> {
    let pts: Vec<Vec2> = scene.cameras().iter().map(|(_, p)| p.position()).collect();
    let per = scene
        .cameras()
        .iter()
        .enumerate()
        .map(|(k, (id, _))| Ok((*id, required_fov_2d(&pts, k)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(report(2, scene.fov(), per, None))
}

pub fn fov_report_3d(scene: &Scene3) -> Result<FovReport> {
    let pts: Vec<Vec3> = scene.cameras().iter().map(|(_, p)| p.position()).collect();
    let mut cone = Vec::with_capacity(pts.len());
    let mut poly = Vec::with_capacity(pts.len());
    for (k, (id, _)) in scene.cameras().iter().enumerate() {
        cone.push((*id, required_fov_3d(&pts, k)?));
        poly.push((*id, required_fov_polyhedral(&pts, k)?));
    }
    Ok(report(3, scene.fov(), cone, Some(poly)))
}

/// Cameras on the points, each aimed along the bisector of its direction fan;
/// the scene FOV is the largest per-camera requirement.
pub fn aimed_scene_2d(points: &[Vec2]) -> Result<Scene2> {
    let mut cams = Vec::with_capacity(points.len());
    let mut fov: f64 = 0.0;
    for (k, p) in points.iter().enumerate() {
        let (axis, width) = direction_fan_2d(points, k)?;
        fov = fov.max(width);
        cams.push((CameraId(k as u32), Pose2::new(*p, -axis)?));
    }
    Scene::new(fov.min(TAU), cams)
}

/// Cameras on the points, each aimed along the axis of its minimal enclosing
/// cone; the scene FOV is the largest per-camera cone solid angle.
pub fn aimed_scene_3d(points: &[Vec3]) -> Result<Scene3> {
    let mut cams = Vec::with_capacity(points.len());
    let mut fov: f64 = 0.0;
    for (k, p) in points.iter().enumerate() {
        let cap = direction_cap_3d(points, k)?;
        fov = fov.max(cap.solid_angle());
        cams.push((CameraId(k as u32), Pose3::new(*p, aiming_rotation(&cap.axis))?));
    }
    Scene::new(fov.min(2.0 * TAU), cams)
}

/// World-to-camera rotation whose optical axis is `axis`.
pub fn aiming_rotation(axis: &UnitVec3) -> Matrix3<f64> {
    let (e1, e2) = tangent_basis(axis);
    Matrix3::from_rows(&[e1.transpose(), e2.transpose(), axis.into_inner().transpose()])
}

/// Vertices of the regular `n`-gon on the unit circle.
pub fn regular_polygon(n: usize) -> Result<Vec<Vec2>> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("polygon needs at least 3 vertices, got {n}")));
    }
    Ok((0..n)
        .map(|k| {
            let a = TAU * k as f64 / n as f64;
            Vec2::new(a.cos(), a.sin())
        })
        .collect())
}

pub fn regular_polygon_scene(n: usize) -> Result<Scene2> {
    aimed_scene_2d(&regular_polygon(n)?)
}

/// Vertices of a Platonic solid with unit circumradius.
pub fn platonic_vertices(name: &str) -> Result<Vec<Vec3>> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v: Vec<Vec3> = Vec::new();
    let signs = [1.0, -1.0];
    match name {
        "tetrahedron" => {
            v = vec![
                Vec3::new(1.0, 1.0, 1.0),
                Vec3::new(1.0, -1.0, -1.0),
                Vec3::new(-1.0, 1.0, -1.0),
                Vec3::new(-1.0, -1.0, 1.0),
            ]
        }
        "octahedron" => {
            for k in 0..3 {
                for s in signs {
                    let mut p = Vec3::zeros();
                    p[k] = s;
                    v.push(p);
                }
            }
        }
        "cube" => {
            for x in signs {
                for y in signs {
                    for z in signs {
                        v.push(Vec3::new(x, y, z));
                    }
                }
            }
        }
        "icosahedron" => {
            for a in signs {
                for b in signs {
                    v.push(Vec3::new(0.0, a, b * phi));
                    v.push(Vec3::new(a, b * phi, 0.0));
                    v.push(Vec3::new(b * phi, 0.0, a));
                }
            }
        }
        "dodecahedron" => {
            for x in signs {
                for y in signs {
                    for z in signs {
                        v.push(Vec3::new(x, y, z));
                    }
                }
            }
            for a in signs {
                for b in signs {
                    v.push(Vec3::new(0.0, a / phi, b * phi));
                    v.push(Vec3::new(a / phi, b * phi, 0.0));
                    v.push(Vec3::new(b * phi, 0.0, a / phi));
                }
            }
        }
        _ => return Err(Error::UnknownSolid(name.to_string())),
    }
    Ok(v.into_iter().map(|p| p.normalize()).collect())
}

pub fn platonic_scene(name: &str) -> Result<Scene3> {
    aimed_scene_3d(&platonic_vertices(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cone_half_angle, synthesize};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_required_2d(pts: &[Vec2]) -> f64 {
        (0..pts.len()).map(|k| required_fov_2d(pts, k).unwrap()).fold(0.0, f64::max)
    }

    #[test]
    fn square_and_hexagon_corners() {
        let sq = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        assert!((required_fov_2d(&sq, 0).unwrap() - PI / 2.0).abs() < 1e-15);
        let hex = regular_polygon(6).unwrap();
        assert!((required_fov_2d(&hex, 2).unwrap() - 2.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn polygon_identity() {
        for n in 3..=12 {
            let pts = regular_polygon(n).unwrap();
            let bound = min_fov_mutual_2d(n).unwrap();
            assert!((max_required_2d(&pts) - bound).abs() < 1e-12, "n = {n}");
        }
        assert!(min_fov_mutual_2d(2).is_err());
    }

    #[test]
    fn printed_polygon_values() {
        for (n, v) in REGULAR_POLYGON_TABLE {
            let exact = match n {
                Some(n) => min_fov_mutual_2d(n).unwrap(),
                None => PI,
            };
            assert!(((exact * 100.0).floor() / 100.0 - v).abs() < 1e-12, "{n:?}");
        }
        assert!((min_fov_mutual_2d(100_000).unwrap() - PI).abs() < 1e-4);
    }

    #[test]
    fn fan_wraps_across_branch_cut() {
        let pts = [Vec2::zeros(), Vec2::new(-1.0, 0.1), Vec2::new(-1.0, -0.1)];
        let (axis, w) = direction_fan_2d(&pts, 0).unwrap();
        assert!((w - 2.0 * 0.1f64.atan()).abs() < 1e-14);
        assert!((axis.cos() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn coincident_points_rejected() {
        let pts = [Vec2::zeros(), Vec2::zeros(), Vec2::new(1.0, 0.0)];
        assert_eq!(required_fov_2d(&pts, 0), Err(Error::CoincidentPoints));
        let p3 = [Vec3::zeros(), Vec3::zeros()];
        assert_eq!(required_fov_3d(&p3, 0), Err(Error::CoincidentPoints));
    }

    #[test]
    fn polygon_scene_sees_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = regular_polygon_scene(4).unwrap();
        assert!((s.fov() - PI / 2.0).abs() < 1e-12);
        assert_eq!(synthesize(&s, 0.0, &mut rng).unwrap().len(), 12);
        for n in 3..=12 {
            let s = regular_polygon_scene(n).unwrap();
            assert_eq!(synthesize(&s, 0.0, &mut rng).unwrap().len(), n * (n - 1));
            let fewer = s.with_fov(s.fov() - 1e-3).unwrap();
            assert!(synthesize(&fewer, 0.0, &mut rng).unwrap().len() < n * (n - 1));
        }
    }

    // Random directions: the returned cap must contain them all and no cap
    // around any sampled axis with a smaller radius may contain them.
    #[test]
    fn enclosing_cap_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..30 {
            let spread = if trial % 2 == 0 { 0.8 } else { 2.5 };
            let centre = Unit::new_normalize(Vec3::new(rng.random(), rng.random(), rng.random()) - Vec3::repeat(0.5));
            let (e1, e2) = tangent_basis(&centre);
            let dirs: Vec<UnitVec3> = (0..rng.random_range(3..9))
                .map(|_| {
                    let r = spread * rng.random::<f64>();
                    let t = TAU * rng.random::<f64>();
                    Unit::new_normalize(
                        centre.into_inner() * r.cos() + (e1 * t.cos() + e2 * t.sin()) * r.sin(),
                    )
                })
                .collect();
            let cap = minimal_enclosing_cap(&dirs).unwrap();
            assert!(dirs.iter().all(|d| cap.contains(d)));
            for _ in 0..2000 {
                let axis = Unit::new_normalize(Vec3::new(
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                    rng.random::<f64>() - 0.5,
                ));
                let radius = dirs.iter().map(|d| axis.dot(d).clamp(-1.0, 1.0).acos()).fold(0.0, f64::max);
                assert!(radius >= cap.half_angle - 1e-9);
            }
        }
    }

    #[test]
    fn cube_vertex_models() {
        let cube = platonic_vertices("cube").unwrap();
        let poly = required_fov_polyhedral(&cube, 0).unwrap();
        assert!((poly - PI / 2.0).abs() < 1e-12);
        // The circular cone around an octant's three edges.
        let cone = required_fov_3d(&cube, 0).unwrap();
        assert!((cone - TAU * (1.0 - 1.0 / 3f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn polyhedral_matches_table() {
        for e in platonic_table() {
            let v = platonic_vertices(e.name).unwrap();
            assert_eq!(v.len(), e.vertices);
            for k in 0..v.len() {
                let poly = required_fov_polyhedral(&v, k).unwrap();
                assert!((poly - e.solid_angle).abs() < 1e-12, "{} vertex {k}: {poly}", e.name);
            }
            assert!(((e.solid_angle * 100.0).floor() / 100.0 - e.printed).abs() < 1e-12, "{}", e.name);
        }
    }

    #[test]
    fn polyhedral_of_octant_and_half_space() {
        let pts = [Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z(), Vec3::new(1.0, 1.0, 1.0)];
        assert!((required_fov_polyhedral(&pts, 0).unwrap() - PI / 2.0).abs() < 1e-12);
        let plane = [Vec3::zeros(), Vec3::x(), -Vec3::x(), Vec3::y(), -Vec3::y(), Vec3::z()];
        assert!((required_fov_polyhedral(&plane, 0).unwrap() - TAU).abs() < 1e-12);
        let all = [Vec3::zeros(), Vec3::x(), -Vec3::x(), Vec3::y(), -Vec3::y(), Vec3::z(), -Vec3::z()];
        assert!((required_fov_polyhedral(&all, 0).unwrap() - 2.0 * TAU).abs() < 1e-12);
    }

    #[test]
    fn platonic_scenes_are_extremal() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for e in platonic_table() {
            let s = platonic_scene(e.name).unwrap();
            let n = s.len();
            assert_eq!(synthesize(&s, 0.0, &mut rng).unwrap().len(), n * (n - 1), "{}", e.name);
            let delta = cone_half_angle(s.fov()) - 1e-3;
            let fewer = s.with_fov(cone_solid_angle(delta)).unwrap();
            assert!(synthesize(&fewer, 0.0, &mut rng).unwrap().len() < n * (n - 1), "{}", e.name);
            let r = fov_report_3d(&s).unwrap();
            assert!(r.feasible);
            // The circle around a polygonal cone is never smaller than it.
            for ((_, c), (_, p)) in r.per_camera.iter().zip(r.polyhedral.unwrap()) {
                assert!(*c >= p - 1e-12);
            }
        }
        assert!(matches!(platonic_scene("torus"), Err(Error::UnknownSolid(_))));
    }

    #[test]
    fn convex_position() {
        let sq = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        assert!(is_convex_position_2d(&sq).unwrap());
        let mut inner = sq.clone();
        inner.push(Vec2::new(0.5, 0.5));
        assert!(!is_convex_position_2d(&inner).unwrap());
        let line = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)];
        assert!(is_convex_position_2d(&line).unwrap());
        let dup = [Vec2::new(0.0, 0.0), Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)];
        assert_eq!(is_convex_position_2d(&dup), Err(Error::CoincidentPoints));
    }

    // A camera strictly inside the hull needs more than pi: some pair of
    // others spans a direction gap it cannot cover with a half-plane.
    #[test]
    fn interior_camera_needs_more_than_half_circle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let pts: Vec<Vec2> = (0..6).map(|_| Vec2::new(rng.random(), rng.random())).collect();
            let convex = is_convex_position_2d(&pts).unwrap();
            let hull = convex_hull(&pts);
            for k in 0..pts.len() {
                let need = required_fov_2d(&pts, k).unwrap();
                if hull.contains(&k) {
                    assert!(need <= PI + 1e-12);
                } else if convex {
                    panic!("non-hull point in convex position");
                } else {
                    assert!(need > PI - 1e-12);
                }
            }
        }
    }
}
