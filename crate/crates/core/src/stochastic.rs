//! Sighting probabilities for uniformly random orientations, the expected
//! sighting counts they imply, and a seeded Monte Carlo estimator.

use nalgebra::{Quaternion, UnitQuaternion, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Pose2, Pose3, Vec2, Vec3};
use crate::graph::{CameraPose, Dimension};

fn check_fov(fov: f64, dim: Dimension) -> Result<()> {
    if !(0.0..=dim.full_fov()).contains(&fov) {
        return Err(Error::OutOfRange(format!("fov {fov} outside [0, {}]", dim.full_fov())));
    }
    Ok(())
}

/// Probability that a camera with uniformly random orientation sees a given
/// other camera.
pub fn p_sees(fov: f64, dim: Dimension) -> Result<f64> {
    check_fov(fov, dim)?;
    Ok(fov / dim.full_fov())
}

/// Probability that two independently oriented cameras see each other.
pub fn p_mutual(fov: f64, dim: Dimension) -> Result<f64> {
    Ok(p_sees(fov, dim)?.powi(2))
}

/// Expected number of sightings among `n` randomly oriented cameras.
pub fn expected_sightings(n: usize, fov: f64, dim: Dimension) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 cameras, got {n}")));
    }
    Ok((n * (n - 1)) as f64 * p_sees(fov, dim)?)
}

/// Sightings needed for a full reconstruction: `3n - 4` in the plane and
/// `3n - 3` in space.
pub fn required_sightings(n: usize, dim: Dimension) -> usize {
    match dim {
        Dimension::Two => (3 * n).saturating_sub(4),
        Dimension::Three => (3 * n).saturating_sub(3),
    }
}

/// Smallest FOV whose expected sighting count reaches the reconstruction
/// requirement; an error when that FOV exceeds the full circle or sphere.
pub fn min_fov_expected(n: usize, dim: Dimension) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 cameras, got {n}")));
    }
    let fov = required_sightings(n, dim) as f64 * dim.full_fov() / (n * (n - 1)) as f64;
    if fov > dim.full_fov() {
        return Err(Error::OutOfRange(format!(
            "{n} cameras need fov {fov:.4}, beyond the full {:.4}",
            dim.full_fov()
        )));
    }
    Ok(fov)
}

/// Upper bound on `P[Y <= a]` for the sighting count `Y`, from Markov's
/// inequality applied to `n(n-1) - Y`.
pub fn reverse_markov_upper(a: f64, n: usize, fov: f64, dim: Dimension) -> Result<f64> {
    let m = (n * n.saturating_sub(1)) as f64;
    if !(a < m) {
        return Err(Error::InvalidArgument(format!("threshold {a} must be below n(n-1) = {m}")));
    }
    let e = expected_sightings(n, fov, dim)?;
    Ok(((m - e) / (m - a)).clamp(0.0, 1.0))
}

/// Monte Carlo configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub dim: Dimension,
    pub fov: f64,
    pub n: usize,
}

/// Positions held fixed across samples; otherwise they are drawn uniformly in
/// the unit disk or ball.
#[derive(Clone, Copy, Debug)]
pub enum FixedPositions<'a> {
    Planar(&'a [Vec2]),
    Spatial(&'a [Vec3]),
}

/// Empirical sighting statistics with standard errors of the means.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McStats {
    pub samples: u64,
    pub mean_sightings: f64,
    pub se_sightings: f64,
    pub p_sees: f64,
    pub se_sees: f64,
    pub p_mutual: f64,
    pub se_mutual: f64,
}

/// Samples per independently seeded chunk.
pub const MC_CHUNK: u64 = 4096;

#[derive(Clone, Copy, Default)]
struct Tally {
    y: u64,
    y2: u128,
    m: u64,
    m2: u128,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally { y: self.y + o.y, y2: self.y2 + o.y2, m: self.m + o.m, m2: self.m2 + o.m2 }
    }
}

/// Uniform point in the unit disk (`dim = 2`, zero z) or ball (`dim = 3`).
pub fn uniform_in_ball<R: Rng>(rng: &mut R, dim: usize) -> Vec3 {
    loop {
        let mut p = Vec3::zeros();
        for k in 0..dim {
            p[k] = 2.0 * rng.random::<f64>() - 1.0;
        }
        if p.norm_squared() <= 1.0 {
            return p;
        }
    }
}

/// Haar-uniform rotation from a normalized 4D Gaussian quaternion.
pub fn random_rotation<R: Rng>(rng: &mut R) -> nalgebra::Matrix3<f64> {
    let q = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    UnitQuaternion::from_quaternion(Quaternion::from(q)).to_rotation_matrix().into_inner()
}

fn count_sightings<P: CameraPose>(poses: &[P], fov: f64) -> Result<(u64, u64)> {
    let n = poses.len();
    let mut sees = vec![false; n * n];
    let mut y = 0;
    for i in 0..n {
        for j in 0..n {
            if i != j && P::in_fov(&poses[i].bearing_to(&poses[j])?, fov) {
                sees[i * n + j] = true;
                y += 1;
            }
        }
    }
    let mut m = 0;
    for i in 0..n {
        for j in i + 1..n {
            if sees[i * n + j] && sees[j * n + i] {
                m += 1;
            }
        }
    }
    Ok((y, m))
}

fn run_chunk(cfg: &McConfig, fixed: Option<FixedPositions>, chunk: u64, count: u64) -> Result<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chunk);
    let mut t = Tally::default();
    for _ in 0..count {
        let (y, m) = match cfg.dim {
            Dimension::Two => {
                let poses = (0..cfg.n)
                    .map(|k| {
                        let p = match fixed {
                            Some(FixedPositions::Planar(p)) => p[k],
                            _ => uniform_in_ball(&mut rng, 2).xy(),
                        };
                        Pose2::new(p, std::f64::consts::TAU * rng.random::<f64>())
                    })
                    .collect::<Result<Vec<_>>>()?;
                count_sightings(&poses, cfg.fov)?
            }
            Dimension::Three => {
                let poses = (0..cfg.n)
                    .map(|k| {
                        let p = match fixed {
                            Some(FixedPositions::Spatial(p)) => p[k],
                            _ => uniform_in_ball(&mut rng, 3),
                        };
                        Pose3::new(p, random_rotation(&mut rng))
                    })
                    .collect::<Result<Vec<_>>>()?;
                count_sightings(&poses, cfg.fov)?
            }
        };
        t = t.merge(Tally { y, y2: (y as u128).pow(2), m, m2: (m as u128).pow(2) });
    }
    Ok(t)
}

/// Standard error of the mean of `scale * X` from integer sums of `X` and `X^2`.
fn mean_se(sum: u64, sum2: u128, samples: u64, scale: f64) -> (f64, f64) {
    let s = samples as f64;
    let mean = sum as f64 / s;
    if samples < 2 {
        return (mean * scale, 0.0);
    }
    let var = ((sum2 as f64 - s * mean * mean) / (s - 1.0)).max(0.0);
    (mean * scale, (var / s).sqrt() * scale)
}

/// Sighting statistics over `cfg.samples` independent draws of orientations
/// (and positions unless fixed).
///
/// Work is split into chunks of [`MC_CHUNK`] samples, each seeded from
/// `(seed, chunk index)`, and the integer tallies are summed, so results do not
/// depend on the number of worker threads.
pub fn mc_sighting_stats(cfg: &McConfig, fixed: Option<FixedPositions>) -> Result<McStats> {
    if cfg.samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    if cfg.n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 cameras, got {}", cfg.n)));
    }
    check_fov(cfg.fov, cfg.dim)?;
    match (fixed, cfg.dim) {
        (None, _) => {}
        (Some(FixedPositions::Planar(p)), Dimension::Two) if p.len() == cfg.n => {}
        (Some(FixedPositions::Spatial(p)), Dimension::Three) if p.len() == cfg.n => {}
        _ => return Err(Error::InvalidArgument("fixed positions do not match n and dim".into())),
    }
    let chunks = cfg.samples.div_ceil(MC_CHUNK);
    let tallies = (0..chunks)
        .into_par_iter()
        .map(|c| run_chunk(cfg, fixed, c, MC_CHUNK.min(cfg.samples - c * MC_CHUNK)))
        .collect::<Result<Vec<_>>>()?;
    let t = tallies.into_iter().fold(Tally::default(), Tally::merge);
    let pairs = (cfg.n * (cfg.n - 1)) as f64;
    let (mean_sightings, se_sightings) = mean_se(t.y, t.y2, cfg.samples, 1.0);
    let (p_sees, se_sees) = mean_se(t.y, t.y2, cfg.samples, 1.0 / pairs);
    let (p_mutual, se_mutual) = mean_se(t.m, t.m2, cfg.samples, 2.0 / pairs);
    Ok(McStats { samples: cfg.samples, mean_sightings, se_sightings, p_sees, se_sees, p_mutual, se_mutual })
}

/// Counts the samples for which `hit` is true, over chunks of [`MC_CHUNK`]
/// draws seeded from `(seed, chunk index)`; independent of the thread count.
pub fn chunked_count<F>(samples: u64, seed: u64, hit: F) -> u64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    (0..samples.div_ceil(MC_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            (0..MC_CHUNK.min(samples - c * MC_CHUNK)).filter(|_| hit(&mut rng)).count() as u64
        })
        .sum()
}

/// Binomial proportion and its standard error.
pub fn proportion(hits: u64, samples: u64) -> (f64, f64) {
    let p = hits as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}

/// One analytic value against its Monte Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McCheck {
    pub analytic: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub pass: bool,
}

impl McCheck {
    pub fn new(analytic: f64, empirical: f64, std_error: f64) -> Self {
        let pass = (analytic - empirical).abs() <= 3.0 * std_error + 1e-12;
        McCheck { analytic, empirical, std_error, pass }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McReport {
    pub inputs: McConfig,
    pub expected_sightings: McCheck,
    pub p_sees: McCheck,
    pub p_mutual: McCheck,
}

pub fn mc_report(cfg: &McConfig, fixed: Option<FixedPositions>) -> Result<McReport> {
    let s = mc_sighting_stats(cfg, fixed)?;
    Ok(McReport {
        inputs: *cfg,
        expected_sightings: McCheck::new(
            expected_sightings(cfg.n, cfg.fov, cfg.dim)?,
            s.mean_sightings,
            s.se_sightings,
        ),
        p_sees: McCheck::new(p_sees(cfg.fov, cfg.dim)?, s.p_sees, s.se_sees),
        p_mutual: McCheck::new(p_mutual(cfg.fov, cfg.dim)?, s.p_mutual, s.se_mutual),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    const D2: Dimension = Dimension::Two;
    const D3: Dimension = Dimension::Three;

    fn truncated(x: f64) -> f64 {
        (x * 100.0).floor() / 100.0
    }

    #[test]
    fn closed_forms() {
        assert_eq!(p_sees(PI / 2.0, D2).unwrap(), 0.25);
        assert_eq!(p_sees(TAU, D2).unwrap(), 1.0);
        assert_eq!(p_sees(PI, D3).unwrap(), 0.25);
        assert!(p_sees(7.0, D2).is_err());
        assert!(p_sees(-0.1, D3).is_err());
        assert_eq!(p_mutual(TAU, D2).unwrap(), 1.0);
        assert_eq!(p_mutual(PI, D2).unwrap(), 0.25);
        assert_eq!(expected_sightings(2, TAU, D2).unwrap(), 2.0);
        let f = 1.3;
        assert!((expected_sightings(6, f, D2).unwrap() - 30.0 * f / TAU).abs() < 1e-14);
        for k in 0..=10 {
            let fov = TAU * k as f64 / 10.0;
            let p = p_sees(fov, D2).unwrap();
            assert!((p_mutual(fov, D2).unwrap() - p * p).abs() < 1e-15);
        }
    }

    #[test]
    fn reverse_markov() {
        let e = expected_sightings(6, PI, D2).unwrap();
        assert_eq!(reverse_markov_upper(e, 6, PI, D2).unwrap(), 1.0);
        assert_eq!(reverse_markov_upper(0.0, 6, TAU, D2).unwrap(), 0.0);
        assert!((reverse_markov_upper(10.0, 6, PI, D2).unwrap() - 0.75).abs() < 1e-15);
        assert!(reverse_markov_upper(30.0, 6, PI, D2).is_err());
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn tables_of_minimal_fov() {
        let t2 = [(6, 2.93), (7, 2.54), (8, 2.24), (9, 2.00), (10, 1.81), (11, 1.65)];
        for (n, v) in t2 {
            assert!((truncated(min_fov_expected(n, D2).unwrap()) - v).abs() < 1e-12, "n = {n}");
        }
        let t3 = [(9, 4.18), (10, 3.76), (11, 3.42), (12, 3.14), (13, 2.89), (14, 2.69)];
        for (n, v) in t3 {
            assert!((truncated(min_fov_expected(n, D3).unwrap()) - v).abs() < 1e-12, "n = {n}");
        }
        assert!((min_fov_expected(12, D3).unwrap() - PI).abs() < 1e-14);
        assert!(min_fov_expected(2, D3).is_err());
        assert!(min_fov_expected(3, D3).is_ok());
    }

    #[test]
    fn expectation_meets_requirement() {
        for n in 2..40 {
            let e = expected_sightings(n, min_fov_expected(n, D2).unwrap(), D2).unwrap();
            assert!((e - (3 * n - 4) as f64).abs() < 1e-9);
            if let Ok(f) = min_fov_expected(n, D3) {
                let e = expected_sightings(n, f, D3).unwrap();
                assert!((e - (3 * n - 3) as f64).abs() < 1e-9);
            }
        }
    }

    fn cfg(dim: Dimension, fov: f64, n: usize, samples: u64) -> McConfig {
        McConfig { samples, seed: 11, dim, fov, n }
    }

    #[test]
    fn full_fov_sees_everything() {
        let s = mc_sighting_stats(&cfg(D2, TAU, 4, 1000), None).unwrap();
        assert_eq!(s.p_sees, 1.0);
        assert_eq!(s.p_mutual, 1.0);
        assert_eq!(s.se_sees, 0.0);
        let s = mc_sighting_stats(&cfg(D3, 2.0 * TAU, 3, 500), None).unwrap();
        assert_eq!(s.mean_sightings, 6.0);
    }

    #[test]
    fn matches_closed_forms_2d() {
        let r = mc_report(&cfg(D2, PI / 2.0, 2, 1_000_000), None).unwrap();
        assert!(r.p_sees.pass && r.p_mutual.pass && r.expected_sightings.pass, "{r:?}");
        let pts = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 2.0), Vec2::new(-1.0, 1.0)];
        let r = mc_report(&cfg(D2, 2.0, 4, 200_000), Some(FixedPositions::Planar(&pts))).unwrap();
        assert!(r.p_sees.pass && r.p_mutual.pass, "{r:?}");
    }

    #[test]
    fn matches_closed_forms_3d() {
        let r = mc_report(&cfg(D3, PI, 5, 200_000), None).unwrap();
        assert!(r.p_sees.pass && r.p_mutual.pass && r.expected_sightings.pass, "{r:?}");
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let c = cfg(D3, 2.0, 4, 3 * MC_CHUNK + 17);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| mc_sighting_stats(&c, None).unwrap());
        let b = four.install(|| mc_sighting_stats(&c, None).unwrap());
        assert_eq!(a, b);
        let other = mc_sighting_stats(&McConfig { seed: 12, ..c }, None).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn error_halves_with_four_times_samples() {
        let a = mc_sighting_stats(&cfg(D2, 1.0, 3, 40_000), None).unwrap();
        let b = mc_sighting_stats(&cfg(D2, 1.0, 3, 160_000), None).unwrap();
        let ratio = a.se_sees / b.se_sees;
        assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn invalid_configs() {
        assert!(mc_sighting_stats(&cfg(D2, 1.0, 3, 0), None).is_err());
        let pts = [Vec2::zeros()];
        assert!(mc_sighting_stats(&cfg(D2, 1.0, 3, 10), Some(FixedPositions::Planar(&pts))).is_err());
    }
}
