//! Projection models, bearings, rotation parameterizations and similarity
//! alignment shared by the 2D and 3D solvers.
//!
//! Orientation convention (2D): a camera with orientation `phi` sees a target
//! whose world bearing is `alpha` at camera-frame bearing `sigma = phi + alpha`,
//! i.e. world directions are mapped to camera directions by `e^{i phi}`. The
//! optical axis is `sigma = 0` and the pinhole pixel is `tan(sigma)`.
//!
//! Orientation convention (3D): `rotation` maps world directions to camera
//! directions, the optical axis is the camera `+z` axis and pixels are
//! `(x/z, y/z)`.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Matrix3, Rotation3, Unit, UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type UnitVec2 = Unit<Vector2<f64>>;
pub type UnitVec3 = Unit<Vector3<f64>>;

/// Orthogonality and unit-norm tolerance applied when constructing poses.
pub const ROTATION_TOL: f64 = 1e-12;
/// `|1 + trace(R)|` below this routes a rotation to the half-turn variant.
pub const HALF_TURN_TOL: f64 = 1e-9;

/// Wraps a finite angle into `(-pi, pi]`.
pub(crate) fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// An angle stored by its representative in `(-pi, pi]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(radians: f64) -> Result<Self> {
        normalize_angle(radians)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// Shortest angular distance to `other`, in `[0, pi]`.
    pub fn distance(self, other: Angle) -> f64 {
        wrap(self.0 - other.0).abs()
    }

    /// Angle of `self - other`, wrapped.
    pub fn minus(self, other: Angle) -> Angle {
        Angle(wrap(self.0 - other.0))
    }

    pub fn plus(self, other: Angle) -> Angle {
        Angle(wrap(self.0 + other.0))
    }

    pub(crate) fn from_raw(radians: f64) -> Angle {
        Angle(wrap(radians))
    }
}

pub fn normalize_angle(a: f64) -> Result<Angle> {
    if !a.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    Ok(Angle(wrap(a)))
}

/// A planar camera pose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose2 {
    position: Vec2,
    orientation: Angle,
}

impl Pose2 {
    pub fn new(position: Vec2, orientation: f64) -> Result<Self> {
        if !position.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("position"));
        }
        Ok(Pose2 {
            position,
            orientation: normalize_angle(orientation)?,
        })
    }

    pub fn position(&self) -> Vec2 {
        self.position
    }

    pub fn orientation(&self) -> Angle {
        self.orientation
    }

    /// World angle of the optical axis (`sigma = 0`).
    pub fn axis_angle(&self) -> f64 {
        wrap(-self.orientation.0)
    }
}

/// A spatial camera pose; `rotation` maps world directions to the camera frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose3 {
    position: Vec3,
    rotation: Mat3,
}

impl Pose3 {
    pub fn new(position: Vec3, rotation: Mat3) -> Result<Self> {
        if !position.iter().all(|x| x.is_finite()) || !rotation.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("pose"));
        }
        let defect = rotation_defect(&rotation);
        if defect > ROTATION_TOL {
            return Err(Error::NotARotation { defect });
        }
        Ok(Pose3 { position, rotation })
    }

    /// Builds a pose after projecting `rotation` onto SO(3).
    pub fn new_orthonormalized(position: Vec3, rotation: Mat3) -> Result<Self> {
        Pose3::new(position, orthonormalize(&rotation)?)
    }

    pub fn identity() -> Self {
        Pose3 {
            position: Vec3::zeros(),
            rotation: Mat3::identity(),
        }
    }

    pub fn position(&self) -> Vec3 {
        self.position
    }

    pub fn rotation(&self) -> Mat3 {
        self.rotation
    }

    /// World direction of the optical axis.
    pub fn axis(&self) -> Vec3 {
        self.rotation.row(2).transpose()
    }
}

/// Largest of the orthogonality defect `max|R^T R - I|` and `|det R - 1|`.
pub fn rotation_defect(r: &Mat3) -> f64 {
    let ortho = (r.transpose() * r - Mat3::identity()).amax();
    ortho.max((r.determinant() - 1.0).abs())
}

/// Nearest rotation in the Frobenius sense.
pub fn orthonormalize(r: &Mat3) -> Result<Mat3> {
    let svd = r.svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::DegenerateConfiguration("svd failed".into())),
    };
    let d = (u * vt).determinant().signum();
    let out = u * Mat3::from_diagonal(&Vec3::new(1.0, 1.0, d)) * vt;
    if out.determinant() <= 0.0 {
        return Err(Error::NotARotation {
            defect: rotation_defect(r),
        });
    }
    Ok(out)
}

pub fn rot2(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Camera-frame bearing `sigma = phi + alpha` of `target` seen from `observer`.
pub fn bearing2(observer: &Pose2, target: &Vec2) -> Result<Angle> {
    let d = target - observer.position;
    if d.norm() == 0.0 {
        return Err(Error::CoincidentCameras);
    }
    let alpha = d.y.atan2(d.x);
    Ok(Angle(wrap(observer.orientation.0 + alpha)))
}

/// Pinhole pixel of `target`; only defined for targets in front of the camera.
pub fn project2(observer: &Pose2, target: &Vec2) -> Result<f64> {
    let sigma = bearing2(observer, target)?;
    pixel_from_bearing2(sigma)
}

pub fn pixel_from_bearing2(sigma: Angle) -> Result<f64> {
    if sigma.0.abs() >= PI / 2.0 {
        return Err(Error::BehindCamera);
    }
    Ok(sigma.0.tan())
}

pub fn bearing_from_pixel(p: f64) -> Result<Angle> {
    if !p.is_finite() {
        return Err(Error::NonFinite("pixel"));
    }
    Ok(Angle(p.atan()))
}

/// Camera-frame unit direction `R (T_j - T_i) / |T_j - T_i|`.
pub fn direction3(observer: &Pose3, target: &Vec3) -> Result<UnitVec3> {
    let d = target - observer.position;
    let n = d.norm();
    if n == 0.0 {
        return Err(Error::CoincidentCameras);
    }
    Ok(Unit::new_unchecked(observer.rotation * (d / n)))
}

pub fn project3(observer: &Pose3, target: &Vec3) -> Result<(f64, f64)> {
    let v = direction3(observer, target)?;
    pixel_from_unit3(&v)
}

pub fn pixel_from_unit3(v: &UnitVec3) -> Result<(f64, f64)> {
    if v.z <= 0.0 {
        return Err(Error::BehindCamera);
    }
    Ok((v.x / v.z, v.y / v.z))
}

pub fn unit_from_pixel3(px: f64, py: f64) -> Result<UnitVec3> {
    if !px.is_finite() || !py.is_finite() {
        return Err(Error::NonFinite("pixel"));
    }
    Ok(Unit::new_normalize(Vec3::new(px, py, 1.0)))
}

/// Angle between two unit vectors, stable near 0 and pi.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// A point of the real projective line: the free parameter of a rotation
/// family sending one direction to another.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Lambda {
    Finite(f64),
    Infinity,
}

impl Lambda {
    /// Homogeneous coordinates `(s, t)` with `lambda = s / t`.
    pub fn homogeneous(self) -> (f64, f64) {
        match self {
            Lambda::Finite(l) => (l, 1.0),
            Lambda::Infinity => (1.0, 0.0),
        }
    }

    pub fn from_homogeneous(s: f64, t: f64) -> Lambda {
        if t.abs() <= 1e-14 * s.abs() {
            Lambda::Infinity
        } else {
            Lambda::Finite(s / t)
        }
    }
}

/// Rodrigues (Gibbs) vector `c = tan(theta/2) axis`; half-turns are points at
/// infinity carrying only their axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RodriguesVec {
    Finite(Vec3),
    Infinite(UnitVec3),
}

impl RodriguesVec {
    pub fn zero() -> Self {
        RodriguesVec::Finite(Vec3::zeros())
    }

    /// Quaternion-like homogeneous coordinates `(w, v)` with `c = v / w`.
    pub fn homogeneous(&self) -> (f64, Vec3) {
        match self {
            RodriguesVec::Finite(c) => (1.0, *c),
            RodriguesVec::Infinite(n) => (0.0, n.into_inner()),
        }
    }

    pub fn from_homogeneous(w: f64, v: &Vec3) -> Self {
        let scale = w.abs().max(v.norm());
        if w.abs() <= 1e-14 * scale {
            RodriguesVec::Infinite(Unit::new_normalize(*v))
        } else {
            RodriguesVec::Finite(v / w)
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, RodriguesVec::Infinite(_))
    }

    pub fn neg(&self) -> Self {
        match self {
            RodriguesVec::Finite(c) => RodriguesVec::Finite(-c),
            // a half-turn is its own inverse
            RodriguesVec::Infinite(n) => RodriguesVec::Infinite(*n),
        }
    }
}

/// Cayley transform of homogeneous Rodrigues coordinates.
pub fn cayley_homogeneous(w: f64, v: &Vec3) -> Mat3 {
    let v2 = v.norm_squared();
    let num = Mat3::identity() * (w * w - v2) + v * v.transpose() * 2.0 + skew(v) * (2.0 * w);
    num / (w * w + v2)
}

pub fn cayley(c: &RodriguesVec) -> Mat3 {
    let (w, v) = c.homogeneous();
    cayley_homogeneous(w, &v)
}

pub fn cayley_inverse(r: &Mat3) -> Result<RodriguesVec> {
    if !r.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("rotation"));
    }
    let defect = rotation_defect(r);
    if defect > 1e-9 {
        return Err(Error::NotARotation { defect });
    }
    let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r));
    let v = q.vector().into_owned();
    if (1.0 + r.trace()).abs() < HALF_TURN_TOL {
        return Ok(RodriguesVec::Infinite(Unit::new_normalize(v)));
    }
    Ok(RodriguesVec::Finite(v / q.w))
}

/// Composition `<c2, c1>`, the Rodrigues vector of `cayley(c2) * cayley(c1)`.
pub fn rodrigues_compose(c2: &RodriguesVec, c1: &RodriguesVec) -> RodriguesVec {
    let (w2, v2) = c2.homogeneous();
    let (w1, v1) = c1.homogeneous();
    let w = w2 * w1 - v2.dot(&v1);
    let v = v1 * w2 + v2 * w1 + v2.cross(&v1);
    RodriguesVec::from_homogeneous(w, &v)
}

/// Rodrigues vector of the member of the rotation family sending `u` to `v`
/// selected by `lambda`.
pub fn rodrigues_from_pair(u: &UnitVec3, v: &UnitVec3, lambda: Lambda) -> Result<RodriguesVec> {
    let den = 1.0 + u.dot(v);
    if den < 1e-12 {
        return Err(Error::AntipodalPair);
    }
    let (s, t) = lambda.homogeneous();
    let num = u.cross(v) * t + (u.into_inner() + v.into_inner()) * s;
    Ok(RodriguesVec::from_homogeneous(t * den, &num))
}

/// Similarity `x -> scale * R(rotation) * x + translation` of the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sim2 {
    pub scale: f64,
    pub rotation: Angle,
    pub translation: Vec2,
}

impl Sim2 {
    pub fn identity() -> Self {
        Sim2 {
            scale: 1.0,
            rotation: Angle::ZERO,
            translation: Vec2::zeros(),
        }
    }

    pub fn apply(&self, x: &Vec2) -> Vec2 {
        rot2(self.rotation.0) * x * self.scale + self.translation
    }

    /// Transforms a pose so that all camera-frame bearings are preserved.
    pub fn apply_pose(&self, p: &Pose2) -> Pose2 {
        Pose2 {
            position: self.apply(&p.position),
            orientation: p.orientation.minus(self.rotation),
        }
    }
}

/// Similarity `x -> scale * rotation * x + translation` of space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sim3 {
    pub scale: f64,
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl Sim3 {
    pub fn identity() -> Self {
        Sim3 {
            scale: 1.0,
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.rotation * x * self.scale + self.translation
    }

    pub fn apply_pose(&self, p: &Pose3) -> Pose3 {
        Pose3 {
            position: self.apply(&p.position),
            rotation: p.rotation * self.rotation.transpose(),
        }
    }
}

fn check_pair_lengths(n_src: usize, n_dst: usize, min: usize) -> Result<()> {
    if n_src != n_dst {
        return Err(Error::InvalidArgument(format!(
            "point lists differ in length ({n_src} vs {n_dst})"
        )));
    }
    if n_src < min {
        return Err(Error::DegenerateConfiguration(format!(
            "need at least {min} points, got {n_src}"
        )));
    }
    Ok(())
}

/// Least-squares similarity taking `source` onto `target`, with the rms residual.
pub fn align_similarity_2d(source: &[Vec2], target: &[Vec2]) -> Result<(Sim2, f64)> {
    check_pair_lengths(source.len(), target.len(), 2)?;
    let n = source.len() as f64;
    let mx = source.iter().sum::<Vec2>() / n;
    let my = target.iter().sum::<Vec2>() / n;
    let (mut dot, mut cross, mut var) = (0.0, 0.0, 0.0);
    for (x, y) in source.iter().zip(target) {
        let a = x - mx;
        let b = y - my;
        dot += a.dot(&b);
        cross += a.x * b.y - a.y * b.x;
        var += a.norm_squared();
    }
    let spread = source.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1.0);
    if var <= 1e-24 * spread * spread {
        return Err(Error::DegenerateConfiguration(
            "source points coincide".into(),
        ));
    }
    let theta = cross.atan2(dot);
    let scale = (dot * dot + cross * cross).sqrt() / var;
    let rot = rot2(theta);
    let translation = my - rot * mx * scale;
    let sim = Sim2 {
        scale,
        rotation: Angle::from_raw(theta),
        translation,
    };
    let rms = (source
        .iter()
        .zip(target)
        .map(|(x, y)| (sim.apply(x) - y).norm_squared())
        .sum::<f64>()
        / n)
        .sqrt();
    Ok((sim, rms))
}

pub fn align_similarity_3d(source: &[Vec3], target: &[Vec3]) -> Result<(Sim3, f64)> {
    check_pair_lengths(source.len(), target.len(), 3)?;
    let n = source.len() as f64;
    let mx = source.iter().sum::<Vec3>() / n;
    let my = target.iter().sum::<Vec3>() / n;
    let mut cov = Mat3::zeros();
    let mut scatter = Mat3::zeros();
    let mut var = 0.0;
    for (x, y) in source.iter().zip(target) {
        let a = x - mx;
        let b = y - my;
        cov += b * a.transpose();
        scatter += a * a.transpose();
        var += a.norm_squared();
    }
    let sv = scatter.symmetric_eigenvalues();
    let mut sv: Vec<f64> = sv.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    if sv[0] <= 0.0 || sv[1] <= 1e-20 * sv[0] {
        return Err(Error::DegenerateConfiguration(
            "source points are collinear".into(),
        ));
    }
    let svd = cov.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let d = (u * vt).determinant().signum();
    let s = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, d));
    let rotation = u * s * vt;
    let trace: f64 = svd.singular_values[0] + svd.singular_values[1] + d * svd.singular_values[2];
    let scale = trace / var;
    let translation = my - rotation * mx * scale;
    let sim = Sim3 {
        scale,
        rotation,
        translation,
    };
    let rms = (source
        .iter()
        .zip(target)
        .map(|(x, y)| (sim.apply(x) - y).norm_squared())
        .sum::<f64>()
        / n)
        .sqrt();
    Ok((sim, rms))
}

/// Rotation `R` minimizing `sum |R u_i - v_i|^2`.
pub fn rotation_from_directions(pairs: &[(UnitVec3, UnitVec3)]) -> Result<Mat3> {
    if pairs.len() < 2 {
        return Err(Error::DegenerateConfiguration(
            "need at least two direction pairs".into(),
        ));
    }
    let u0 = pairs[0].0;
    if !pairs.iter().any(|(u, _)| u0.cross(u).norm() > 1e-9) {
        return Err(Error::DegenerateConfiguration(
            "all source directions are parallel".into(),
        ));
    }
    let h: Mat3 = pairs
        .iter()
        .map(|(u, v)| v.into_inner() * u.transpose())
        .sum();
    let svd = h.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let d = (u * vt).determinant().signum();
    Ok(u * Mat3::from_diagonal(&Vec3::new(1.0, 1.0, d)) * vt)
}
