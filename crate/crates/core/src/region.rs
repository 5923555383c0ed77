//! How much of a disk or ball a camera inside it sees.
//!
//! Disk frame: the observer is at the origin and the disk centre lies on the
//! positive x axis (`theta = 0` points at the centre). Ball frame: the
//! observer is at the origin looking along +z and the ball centre is at
//! `(x0, 0, z0)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::quad::integrate;
use crate::stochastic::{chunked_count, proportion, uniform_in_ball};

/// A camera inside a disk of radius `r`, at distance `d` from its centre,
/// oriented at `phi` with half-FOV `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiskObserver {
    pub r: f64,
    pub d: f64,
    pub phi: f64,
    pub delta: f64,
}

impl DiskObserver {
    pub fn new(r: f64, d: f64, phi: f64, delta: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::OutOfRange(format!("radius {r}")));
        }
        if !(0.0..=r).contains(&d) {
            return Err(Error::OutOfRange(format!("distance {d} outside [0, {r}]")));
        }
        if !(0.0..=PI).contains(&delta) {
            return Err(Error::OutOfRange(format!("half-FOV {delta} outside [0, pi]")));
        }
        if !phi.is_finite() {
            return Err(Error::NonFinite("orientation"));
        }
        Ok(DiskObserver { r, d, phi, delta })
    }

    pub fn eps(&self) -> f64 {
        self.d / self.r
    }
}

/// Distance from the observer to the circle along direction `theta`.
pub fn rho_polar(theta: f64, d: f64, r: f64) -> Result<f64> {
    if !(0.0..=r).contains(&d) {
        return Err(Error::OutOfRange(format!("distance {d} outside [0, {r}]")));
    }
    Ok(rho_unchecked(theta, d, r))
}

fn rho_unchecked(theta: f64, d: f64, r: f64) -> f64 {
    let s = theta.sin();
    (d * theta.cos() + (r * r - d * d * s * s).max(0.0).sqrt()).max(0.0)
}

/// Area of the disk visible to the observer, by quadrature of `rho^2 / 2`.
pub fn slice_area_quadrature(obs: &DiskObserver) -> f64 {
    let (a, b) = (obs.phi - obs.delta, obs.phi + obs.delta);
    // rho is clamped (and kinked) at theta = pi/2 + k pi when d = r.
    let first = ((a - FRAC_PI_2) / PI).floor() as i64;
    let breaks: Vec<f64> = (first..=first + 4).map(|k| FRAC_PI_2 + PI * k as f64).collect();
    let f = |t: f64| 0.5 * rho_unchecked(t, obs.d, obs.r).powi(2);
    integrate(f, a, b, 1e-12 * obs.r * obs.r, &breaks)
}

/// Closed-form visible area for interior observers.
pub fn slice_area_closed(obs: &DiskObserver) -> Result<f64> {
    let e = obs.eps();
    if e >= 1.0 {
        return Err(Error::BoundaryCase);
    }
    let r2 = obs.r * obs.r;
    let prim = |t: f64| {
        let s = e * t.sin();
        (e * obs.r / 2.0).powi(2) * (2.0 * t).sin() + r2 / 2.0 * (s * (1.0 - s * s).sqrt() + s.asin())
    };
    Ok(obs.delta * r2 + prim(obs.phi + obs.delta) - prim(obs.phi - obs.delta))
}

/// The published value for an observer on the unit circle:
/// `2 delta + cos 2delta cos 2phi`.
pub fn slice_area_boundary_published(delta: f64, phi: f64) -> f64 {
    2.0 * delta + (2.0 * delta).cos() * (2.0 * phi).cos()
}

/// Direct integration of the clamped `rho` for an observer on the unit
/// circle, valid while `|phi| + delta <= pi/2`.
pub fn slice_area_boundary_exact(delta: f64, phi: f64) -> f64 {
    2.0 * delta + (2.0 * delta).sin() * (2.0 * phi).cos()
}

/// The published value on the unit disk for a camera pointing at the centre:
/// `delta + t + sin t (cos delta + cos t)` with `t = asin(eps sin delta)`.
pub fn slice_area_centre_published(eps: f64, delta: f64) -> f64 {
    let t = (eps * delta.sin()).asin();
    delta + t + t.sin() * (delta.cos() + t.cos())
}

/// Mean fraction of the disk seen, averaged over orientation and position.
pub fn average_probability(delta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&delta) {
        return Err(Error::OutOfRange(format!("half-FOV {delta} outside [0, pi]")));
    }
    Ok(delta / PI)
}

/// `(1 / 2 pi^2 r^2) int_0^1 int_0^2pi A(phi, eps) dphi deps`, evaluated on the
/// unit disk.
pub fn average_probability_quadrature(delta: f64) -> Result<f64> {
    average_probability(delta)?;
    let inner = |e: f64| {
        let f = |phi: f64| slice_area_closed(&DiskObserver { r: 1.0, d: e, phi, delta }).unwrap_or(0.0);
        integrate(f, 0.0, TAU, 1e-11, &[])
    };
    Ok(integrate(inner, 0.0, 1.0, 1e-10, &[]) / (2.0 * PI * PI))
}

/// Average over orientation of the fraction of the disk seen at `eps`.
pub fn orientation_average(eps: f64, delta: f64) -> Result<f64> {
    let obs = DiskObserver::new(1.0, eps, 0.0, delta)?;
    let f = |phi: f64| slice_area_quadrature(&DiskObserver { phi, ..obs });
    Ok(integrate(f, 0.0, TAU, 1e-9, &[]) / (TAU * PI))
}

/// Monte Carlo estimate of the visible area with its standard error.
pub fn slice_area_mc(obs: &DiskObserver, samples: u64, seed: u64) -> (f64, f64) {
    let hits = chunked_count(samples, seed, |rng| {
        let p = uniform_in_ball(rng, 2) * obs.r + Vec3::new(obs.d, 0.0, 0.0);
        let off = (p.y.atan2(p.x) - obs.phi).rem_euclid(TAU);
        off.min(TAU - off) <= obs.delta
    });
    let (p, se) = proportion(hits, samples);
    let area = PI * obs.r * obs.r;
    (p * area, se * area)
}

/// A camera inside a ball of radius `r` centred at `(x0, 0, z0)` in the
/// camera frame, with a circular cone of half-angle `delta` along +z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallObserver {
    pub r: f64,
    pub x0: f64,
    pub z0: f64,
    pub delta: f64,
}

impl BallObserver {
    pub fn new(r: f64, x0: f64, z0: f64, delta: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::OutOfRange(format!("radius {r}")));
        }
        if !(x0.is_finite() && z0.is_finite()) || x0 * x0 + z0 * z0 > r * r * (1.0 + 1e-12) {
            return Err(Error::OutOfRange(format!("observer outside the ball: ({x0}, {z0})")));
        }
        if !(delta > 0.0 && delta <= PI) {
            return Err(Error::OutOfRange(format!("half-angle {delta} outside (0, pi]")));
        }
        Ok(BallObserver { r, x0, z0, delta })
    }

    /// Solid angle of the viewing cone.
    pub fn fov(&self) -> f64 {
        TAU * (1.0 - self.delta.cos())
    }

    fn forward(&self) -> Result<()> {
        if self.delta > FRAC_PI_2 + 1e-15 {
            return Err(Error::OutOfRange(format!("half-angle {} is not a forward cone", self.delta)));
        }
        Ok(())
    }
}

const HALF_SPACE_TOL: f64 = 1e-12;

/// Cylindrical radius at which the cone meets the sphere at azimuth `phi`.
pub fn cone_sphere_rho(phi: f64, obs: &BallObserver) -> Result<f64> {
    obs.forward()?;
    let BallObserver { r, x0, z0, delta } = *obs;
    let (s, co) = phi.sin_cos();
    if delta >= FRAC_PI_2 - HALF_SPACE_TOL {
        // The cone opens to the half-space z >= 0.
        let disc = r * r - z0 * z0 - x0 * x0 * s * s;
        if disc < 0.0 {
            return Err(Error::NoIntersection);
        }
        return Ok((x0 * co + disc.sqrt()).max(0.0));
    }
    let c = delta.tan();
    let disc = r * r - x0 * x0 + c * c * (r * r - z0 * z0) + 2.0 * c * x0 * z0 * co - c * c * x0 * x0 * s * s;
    if disc < 0.0 {
        return Err(Error::NoIntersection);
    }
    Ok((c / (1.0 + c * c) * (z0 + c * x0 * co + disc.sqrt())).max(0.0))
}

/// The axially symmetric case `x0 = 0`.
pub fn cone_sphere_rho_axial(obs: &BallObserver) -> Result<f64> {
    if obs.x0 != 0.0 {
        return Err(Error::InvalidArgument("axial formula needs x0 = 0".into()));
    }
    cone_sphere_rho(0.0, obs)
}

/// Published closed form of the visible volume for `x0 = 0`, evaluated as
/// printed; the half-space form is used at `delta = pi/2`.
pub fn visible_volume_axial_closed(obs: &BallObserver) -> Result<f64> {
    obs.forward()?;
    if obs.x0 != 0.0 {
        return Err(Error::InvalidArgument("axial formula needs x0 = 0".into()));
    }
    let BallObserver { r, z0, delta, .. } = *obs;
    if delta >= FRAC_PI_2 - HALF_SPACE_TOL {
        return Ok(visible_volume_half_space_published(r, z0));
    }
    let c = delta.tan();
    let rho0 = cone_sphere_rho_axial(obs)?;
    Ok(TAU / 3.0 * (r.powi(3) - rho0.powi(3) / c) - TAU / 3.0 * (r * r - rho0 * rho0).max(0.0).powf(1.5)
        + PI * z0 * rho0 * rho0)
}

/// Published half-space visible volume `2pi/3 (r^3 - |z0|^3) + pi z0 (r^2 - z0^2)`.
pub fn visible_volume_half_space_published(r: f64, z0: f64) -> f64 {
    TAU / 3.0 * (r.powi(3) - z0.abs().powi(3)) + PI * z0 * (r * r - z0 * z0)
}

/// Whether the axial closed form describes the visible region: the cone must
/// meet the sphere on its upper half (`rho0 / c >= z0`).
pub fn axial_closed_applies(obs: &BallObserver) -> Result<bool> {
    let rho0 = cone_sphere_rho_axial(obs)?;
    let height = if obs.delta >= FRAC_PI_2 - HALF_SPACE_TOL { 0.0 } else { rho0 / obs.delta.tan() };
    Ok(height >= obs.z0 - 1e-12 * obs.r)
}

/// Visible volume by quadrature in spherical coordinates about the observer:
/// `int_0^delta sin(a) int_0^2pi rho(a, phi)^3 / 3 dphi da`, with `rho` the
/// distance to the sphere along each ray.
pub fn visible_volume_quadrature(obs: &BallObserver) -> f64 {
    let BallObserver { r, x0, z0, delta } = *obs;
    let k = x0 * x0 + z0 * z0 - r * r;
    let reach = |a: f64, phi: f64| {
        let (sa, ca) = a.sin_cos();
        let b = sa * phi.cos() * x0 + ca * z0;
        (b + (b * b - k).max(0.0).sqrt()).max(0.0)
    };
    let scale = r.powi(3);
    let ring = |a: f64| {
        // Symmetric in phi about the x-z plane.
        2.0 * integrate(|phi| reach(a, phi).powi(3) / 3.0, 0.0, PI, 1e-12 * scale, &[]) * a.sin()
    };
    integrate(ring, 0.0, delta, 1e-11 * scale, &[])
}

/// Monte Carlo estimate of the visible volume with its standard error.
pub fn visible_volume_mc(obs: &BallObserver, samples: u64, seed: u64) -> (f64, f64) {
    let centre = Vec3::new(obs.x0, 0.0, obs.z0);
    let cos_d = obs.delta.cos();
    let hits = chunked_count(samples, seed, |rng| {
        let p = uniform_in_ball(rng, 3) * obs.r + centre;
        p.z >= p.norm() * cos_d
    });
    let (p, se) = proportion(hits, samples);
    let vol = 2.0 * TAU / 3.0 * obs.r.powi(3);
    (p * vol, se * vol)
}

/// A closed form compared against quadrature.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discrepancy {
    pub case: String,
    pub params: Vec<(String, f64)>,
    pub closed: f64,
    pub quadrature: f64,
    /// `closed - quadrature`.
    pub difference: f64,
    pub agrees: bool,
}

impl Discrepancy {
    fn new(case: &str, params: &[(&str, f64)], closed: f64, quadrature: f64, tol: f64) -> Self {
        Discrepancy {
            case: case.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            closed,
            quadrature,
            difference: closed - quadrature,
            agrees: (closed - quadrature).abs() <= tol,
        }
    }
}

/// The published special cases evaluated against quadrature on a fixed
/// grid of inputs in the unit disk and ball.
pub fn discrepancy_report() -> Result<Vec<Discrepancy>> {
    let mut out = Vec::new();
    for &(delta, phi) in &[(0.3, 0.0), (0.5, 0.4), (0.7, -0.6), (PI / 4.0, 0.0)] {
        let q = slice_area_quadrature(&DiskObserver::new(1.0, 1.0, phi, delta)?);
        let p = [("delta", delta), ("phi", phi)];
        out.push(Discrepancy::new("disk boundary, published", &p, slice_area_boundary_published(delta, phi), q, 1e-9));
        out.push(Discrepancy::new("disk boundary, direct", &p, slice_area_boundary_exact(delta, phi), q, 1e-9));
    }
    for &(eps, delta) in &[(0.0, 0.8), (0.5, FRAC_PI_2), (0.5, 0.8), (0.9, 2.0), (0.3, PI)] {
        let q = slice_area_quadrature(&DiskObserver::new(1.0, eps, 0.0, delta)?);
        out.push(Discrepancy::new(
            "disk centre-pointing, published",
            &[("eps", eps), ("delta", delta)],
            slice_area_centre_published(eps, delta),
            q,
            1e-9,
        ));
    }
    for &z0 in &[-1.0, -0.5, 0.0, 0.5, 0.9, 1.0] {
        let obs = BallObserver::new(1.0, 0.0, z0, FRAC_PI_2)?;
        let q = visible_volume_quadrature(&obs);
        out.push(Discrepancy::new(
            "ball half-space, published",
            &[("z0", z0)],
            visible_volume_axial_closed(&obs)?,
            q,
            1e-6 * q.abs().max(1.0),
        ));
    }
    for &(z0, delta) in &[(-0.5, 0.5), (0.0, 0.8), (0.5, 0.3), (0.5, 1.3), (0.9, 1.2)] {
        let obs = BallObserver::new(1.0, 0.0, z0, delta)?;
        let q = visible_volume_quadrature(&obs);
        out.push(Discrepancy::new(
            "ball axial cone, published",
            &[("z0", z0), ("delta", delta)],
            visible_volume_axial_closed(&obs)?,
            q,
            1e-6 * q.abs().max(1.0),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disk(r: f64, d: f64, phi: f64, delta: f64) -> DiskObserver {
        DiskObserver::new(r, d, phi, delta).unwrap()
    }

    #[test]
    fn polar_boundary() {
        for k in 0..12 {
            let t = k as f64 * 0.5;
            assert!((rho_polar(t, 0.0, 2.0).unwrap() - 2.0).abs() < 1e-15);
        }
        assert!((rho_polar(0.0, 0.3, 1.0).unwrap() - 1.3).abs() < 1e-15);
        assert_eq!(rho_polar(PI, 1.0, 1.0).unwrap(), 0.0);
        assert!(rho_polar(0.0, 1.1, 1.0).is_err());
        // The boundary point lies on the circle.
        let (d, r, t) = (0.4, 1.5, 2.1);
        let rho = rho_polar(t, d, r).unwrap();
        let p = nalgebra::Vector2::new(rho * t.cos() - d, rho * t.sin());
        assert!((p.norm() - r).abs() < 1e-14);
    }

    #[test]
    fn slice_area_trivial_cases() {
        for &(d, phi) in &[(0.0, 0.0), (0.5, 1.0), (1.0, 2.0), (0.99, -0.4)] {
            assert!((slice_area_quadrature(&disk(1.0, d, phi, PI)) - PI).abs() < 1e-10);
        }
        assert!((slice_area_quadrature(&disk(2.0, 0.0, 0.7, 0.4)) - 0.4 * 4.0).abs() < 1e-10);
        assert!((slice_area_closed(&disk(2.0, 0.0, 0.7, 0.4)).unwrap() - 1.6).abs() < 1e-14);
        assert_eq!(slice_area_closed(&disk(1.0, 1.0, 0.0, 0.4)), Err(Error::BoundaryCase));
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let r = 0.5 + 2.0 * rng.random::<f64>();
            let e = (1.0 - 1e-6) * rng.random::<f64>();
            let obs = disk(r, e * r, TAU * rng.random::<f64>(), PI * rng.random::<f64>());
            let q = slice_area_quadrature(&obs);
            let c = slice_area_closed(&obs).unwrap();
            assert!((q - c).abs() < 1e-10 * r * r, "{obs:?}: {q} vs {c}");
        }
    }

    #[test]
    fn slice_area_symmetry() {
        for &(e, phi, delta) in &[(0.3, 0.4, 0.5), (0.8, 2.0, 1.1), (1.0, 0.3, 0.9)] {
            let a = slice_area_quadrature(&disk(1.0, e, phi, delta));
            assert!((a - slice_area_quadrature(&disk(1.0, e, -phi, delta))).abs() < 1e-11);
            assert!((a - slice_area_quadrature(&disk(1.0, e, phi + TAU, delta))).abs() < 1e-11);
        }
    }

    #[test]
    fn slice_area_monte_carlo() {
        for &(e, phi, delta) in &[(0.5, 0.3, 0.6), (0.9, 2.5, 1.4), (1.0, 1.0, 0.5)] {
            let obs = disk(1.0, e, phi, delta);
            let (m, se) = slice_area_mc(&obs, 400_000, 17);
            let q = slice_area_quadrature(&obs);
            assert!((m - q).abs() <= 3.0 * se, "{obs:?}: mc {m} +- {se}, quad {q}");
        }
    }

    #[test]
    fn boundary_special_case() {
        for &(delta, phi) in &[(0.3, 0.1), (0.6, -0.5), (0.2, 1.2)] {
            let q = slice_area_quadrature(&disk(1.0, 1.0, phi, delta));
            assert!((slice_area_boundary_exact(delta, phi) - q).abs() < 1e-10);
            assert!((slice_area_boundary_published(delta, phi) - q).abs() > 1e-3);
        }
    }

    #[test]
    fn centre_pointing_published_form() {
        // Agreement holds at eps = 0, eps sin delta = 0 and delta = pi/2 only.
        let at = |e: f64, d: f64| slice_area_centre_published(e, d) - slice_area_quadrature(&disk(1.0, e, 0.0, d));
        assert!(at(0.0, 0.8).abs() < 1e-10);
        assert!(at(0.6, FRAC_PI_2).abs() < 1e-10);
        assert!(at(0.3, PI).abs() < 1e-10);
        assert!(at(0.5, 0.8).abs() > 1e-3);
    }

    #[test]
    fn average_probability_identities() {
        assert_eq!(average_probability(PI).unwrap(), 1.0);
        assert_eq!(average_probability(FRAC_PI_2).unwrap(), 0.5);
        assert!(average_probability(4.0).is_err());
        for delta in [0.3, 1.0, 2.5] {
            let q = average_probability_quadrature(delta).unwrap();
            assert!((q - delta / PI).abs() < 1e-6, "{delta}: {q}");
        }
        for e in [0.0, 0.4, 0.9, 1.0] {
            let p = orientation_average(e, 0.7).unwrap();
            assert!((p - 0.7 / PI).abs() < 1e-6, "{e}: {p}");
        }
    }

    fn ball(x0: f64, z0: f64, delta: f64) -> BallObserver {
        BallObserver::new(1.0, x0, z0, delta).unwrap()
    }

    #[test]
    fn intersection_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let (x0, z0) = loop {
                let x = 2.0 * rng.random::<f64>() - 1.0;
                let z = 2.0 * rng.random::<f64>() - 1.0;
                if x * x + z * z < 1.0 {
                    break (x, z);
                }
            };
            let delta = 0.05 + 1.4 * rng.random::<f64>();
            let phi = TAU * rng.random::<f64>();
            let o = ball(x0, z0, delta);
            let rho = cone_sphere_rho(phi, &o).unwrap();
            let c = delta.tan();
            let p = Vec3::new(rho * phi.cos(), rho * phi.sin(), rho / c);
            assert!((p.x * p.x + p.y * p.y - c * c * p.z * p.z).abs() < 1e-10);
            assert!(((p - Vec3::new(x0, 0.0, z0)).norm_squared() - 1.0).abs() < 1e-10);
            let axial = ball(0.0, z0, delta);
            assert_eq!(cone_sphere_rho(phi, &axial).unwrap(), cone_sphere_rho_axial(&axial).unwrap());
        }
        assert!(cone_sphere_rho_axial(&ball(0.0, 1.0, 0.05)).unwrap() > 0.0);
        assert!(cone_sphere_rho(0.0, &ball(0.0, 0.0, 2.0)).is_err());
    }

    #[test]
    fn quadrature_against_sector() {
        for delta in [0.2, 0.9, FRAC_PI_2, 2.5, PI] {
            let v = visible_volume_quadrature(&ball(0.0, 0.0, delta));
            let sector = TAU / 3.0 * (1.0 - delta.cos());
            assert!((v - sector).abs() < 1e-9, "{delta}");
        }
    }

    #[test]
    fn quadrature_against_monte_carlo() {
        for &(x0, z0, delta) in &[(0.3, -0.2, 0.7), (-0.5, 0.5, 1.2), (0.1, 0.9, 0.4), (0.6, 0.0, 2.2)] {
            let o = ball(x0, z0, delta);
            let q = visible_volume_quadrature(&o);
            let (m, se) = visible_volume_mc(&o, 400_000, 23);
            assert!((q - m).abs() <= 3.0 * se, "{o:?}: quad {q} mc {m} +- {se}");
        }
    }

    #[test]
    fn quadrature_monotone_in_delta() {
        let mut last = 0.0;
        for k in 1..=16 {
            let v = visible_volume_quadrature(&ball(0.4, -0.3, PI * k as f64 / 16.0));
            assert!(v >= last - 1e-12);
            last = v;
        }
        assert!((last - 2.0 * TAU / 3.0).abs() < 1e-9);
    }

    #[test]
    fn axial_closed_forms() {
        let half = |z0: f64| visible_volume_axial_closed(&ball(0.0, z0, FRAC_PI_2)).unwrap();
        assert!((half(0.0) - TAU / 3.0).abs() < 1e-14);
        assert!(half(-1.0).abs() < 1e-14);
        // The half-space form matches the ball cap below the centre, and
        // misses the part of the ball behind the centre plane above it.
        for z0 in [-0.8, -0.5, -0.1, 0.0] {
            assert!((half(z0) - visible_volume_quadrature(&ball(0.0, z0, FRAC_PI_2))).abs() < 1e-9);
        }
        let q = visible_volume_quadrature(&ball(0.0, 0.5, FRAC_PI_2));
        assert!((half(0.5) - q).abs() > 0.1);
        for &(z0, delta) in &[(-0.5, 0.5), (0.0, 0.8), (0.3, 0.3), (-0.9, 1.3)] {
            let o = ball(0.0, z0, delta);
            assert!(axial_closed_applies(&o).unwrap());
            let q = visible_volume_quadrature(&o);
            assert!((visible_volume_axial_closed(&o).unwrap() - q).abs() < 1e-9 * q.max(1.0));
        }
        let wide = ball(0.0, 0.9, 1.2);
        assert!(!axial_closed_applies(&wide).unwrap());
        assert!((visible_volume_axial_closed(&wide).unwrap() - visible_volume_quadrature(&wide)).abs() > 1e-3);
    }

    #[test]
    fn report_flags_published_typos() {
        let rep = discrepancy_report().unwrap();
        assert!(rep.iter().filter(|d| d.case == "disk boundary, direct").all(|d| d.agrees));
        assert!(rep.iter().any(|d| d.case == "disk boundary, published" && !d.agrees));
        assert!(rep.iter().any(|d| d.case == "ball half-space, published" && !d.agrees));
    }
}
