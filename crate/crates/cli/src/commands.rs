use std::f64::consts::{PI, TAU};
use std::path::Path;

use camsight::geometry::{Pose2, Pose3, Vec2};
use camsight::graph::{synthesize, CameraId, Dimension, Scene, SightingGraph};
use camsight::io::{
    self, graph_from_file, graph_to_file, read_scene, residuals, scene_to_file, AnyScene, DocPose,
    ReconstructionFile, SightingFile,
};
use camsight::recon2d::{self, Gauge, SequentialStep};
use camsight::recon3d;
use camsight::region::{self, BallObserver, DiskObserver};
use camsight::stochastic::{self, random_rotation, uniform_in_ball, McConfig};
use camsight::visibility;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{emit, read_file, CliError, CliResult, Kind, Mode};

fn dimension(dim: u8) -> CliResult<Dimension> {
    Dimension::try_from(dim).map_err(CliError::input)
}

pub fn wants_csv(out: Option<&Path>) -> bool {
    out.and_then(|p| p.extension()).is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn json_of<T: Serialize>(v: &T) -> CliResult<String> {
    Ok(io::to_json(v)?)
}

pub fn generate(
    kind: Kind,
    n: Option<usize>,
    dim: u8,
    fov: Option<f64>,
    solid: Option<&str>,
    seed: u64,
    out: Option<&Path>,
) -> CliResult<()> {
    let need_n = || n.ok_or_else(|| CliError::input("--n is required for this kind"));
    let text = match kind {
        Kind::Random => {
            let n = need_n()?;
            if n < 2 {
                return Err(CliError::input("--n must be at least 2"));
            }
            let d = dimension(dim)?;
            let fov = fov.unwrap_or(d.full_fov());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            match d {
                Dimension::Two => {
                    let cams = (0..n)
                        .map(|k| {
                            let p = uniform_in_ball(&mut rng, 2).xy();
                            Ok((CameraId(k as u32), Pose2::new(p, TAU * rng.random::<f64>() - PI)?))
                        })
                        .collect::<camsight::Result<Vec<_>>>()?;
                    json_of(&scene_to_file(&Scene::new(fov, cams)?))?
                }
                Dimension::Three => {
                    let cams = (0..n)
                        .map(|k| {
                            let p = uniform_in_ball(&mut rng, 3);
                            Ok((CameraId(k as u32), Pose3::new(p, random_rotation(&mut rng))?))
                        })
                        .collect::<camsight::Result<Vec<_>>>()?;
                    json_of(&scene_to_file(&Scene::new(fov, cams)?))?
                }
            }
        }
        Kind::Polygon => {
            let mut s = visibility::regular_polygon_scene(need_n()?)?;
            if let Some(f) = fov {
                s = s.with_fov(f)?;
            }
            json_of(&scene_to_file(&s))?
        }
        Kind::Platonic => {
            let name = solid.ok_or_else(|| CliError::input("--solid is required for platonic scenes"))?;
            let mut s = visibility::platonic_scene(name)?;
            if let Some(f) = fov {
                s = s.with_fov(f)?;
            }
            json_of(&scene_to_file(&s))?
        }
    };
    let inputs = json!({ "kind": kind, "n": n, "dim": dim, "fov": fov, "solid": solid });
    emit(out, &text, "generate", inputs, Some(seed))
}

pub fn sight(scene: &Path, noise: f64, seed: u64, out: Option<&Path>) -> CliResult<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let text = match read_scene(&read_file(scene)?)? {
        AnyScene::Two(s) => json_of(&graph_to_file::<Pose2>(&synthesize(&s, noise, &mut rng)?))?,
        AnyScene::Three(s) => json_of(&graph_to_file::<Pose3>(&synthesize(&s, noise, &mut rng)?))?,
    };
    let inputs = json!({ "scene": scene.display().to_string(), "noise": noise });
    emit(out, &text, "sight", inputs, Some(seed))
}

struct Solved<P> {
    poses: std::collections::BTreeMap<CameraId, P>,
    gauge: Gauge,
    rms: f64,
    order: Option<Vec<CameraId>>,
    steps: Option<Vec<SequentialStep>>,
}

fn reconstruction_file<P: DocPose>(g: &SightingGraph<P::Bearing>, s: Solved<P>, mode: Mode) -> CliResult<ReconstructionFile> {
    Ok(ReconstructionFile {
        kind: "reconstruction".into(),
        dim: P::DIM.into(),
        mode: match mode {
            Mode::Batch => "batch".into(),
            Mode::Sequential => "sequential".into(),
        },
        gauge: s.gauge,
        rms: s.rms,
        cameras: s.poses.iter().map(|(id, p)| p.to_doc(*id)).collect(),
        residuals: residuals(g, &s.poses)?,
        order: s.order.map(|o| o.iter().map(|c| c.0).collect()),
        steps: s.steps,
        adjustment: None,
    })
}

pub fn solve(path: &Path, dim: Option<u8>, mode: Mode, out: Option<&Path>) -> CliResult<()> {
    let f: SightingFile = io::from_json(&read_file(path)?)?;
    if let Some(d) = dim {
        if d != f.dim {
            return Err(CliError::input(format!("--dim {d} does not match the file's dim {}", f.dim)));
        }
    }
    let order = |seed: &[CameraId], steps: &[SequentialStep]| {
        Some(seed.iter().copied().chain(steps.iter().map(|s| s.camera)).collect())
    };
    let (doc, count) = match dimension(f.dim)? {
        Dimension::Two => {
            let g = graph_from_file::<Pose2>(&f)?;
            let solved = match mode {
                Mode::Batch => {
                    let r = recon2d::solve_batch_2d(&g)?;
                    Solved { poses: r.poses, gauge: r.gauge, rms: r.residual, order: None, steps: None }
                }
                Mode::Sequential => {
                    let s = recon2d::solve_sequential_2d(&g)?;
                    let r = s.reconstruction;
                    let order = order(&s.seed, &s.steps);
                    Solved { poses: r.poses, gauge: r.gauge, rms: r.residual, order, steps: Some(s.steps) }
                }
            };
            (reconstruction_file(&g, solved, mode)?, g.len())
        }
        Dimension::Three => {
            let g = graph_from_file::<Pose3>(&f)?;
            let solved = match mode {
                Mode::Batch => {
                    let r = recon3d::solve_batch_3d(&g)?;
                    Solved { poses: r.poses, gauge: r.gauge, rms: r.residual, order: None, steps: None }
                }
                Mode::Sequential => {
                    let s = recon3d::solve_sequential_3d(&g)?;
                    let r = s.reconstruction;
                    let order = order(&s.seed, &s.steps);
                    Solved { poses: r.poses, gauge: r.gauge, rms: r.residual, order, steps: Some(s.steps) }
                }
            };
            (reconstruction_file(&g, solved, mode)?, g.len())
        }
    };
    eprintln!(
        "{}",
        json!({ "cameras": doc.cameras.len(), "sightings": count, "rms": doc.rms, "mode": doc.mode })
    );
    let inputs = json!({ "sightings": path.display().to_string(), "dim": f.dim, "mode": mode });
    emit(out, &json_of(&doc)?, "solve", inputs, None)
}

pub fn csv_of(columns: &[&str], rows: &[Vec<Value>]) -> String {
    let mut s = columns.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(cell).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains(',') || s.contains('"') => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn analyze(scene: &Path, out: Option<&Path>) -> CliResult<()> {
    let (report, convex) = match read_scene(&read_file(scene)?)? {
        AnyScene::Two(s) => {
            let pts: Vec<Vec2> = s.cameras().iter().map(|(_, p)| p.position()).collect();
            let convex = if pts.len() >= 3 { Some(visibility::is_convex_position_2d(&pts)?) } else { None };
            (visibility::fov_report_2d(&s)?, convex)
        }
        AnyScene::Three(s) => (visibility::fov_report_3d(&s)?, None),
    };
    let text = if wants_csv(out) {
        let rows: Vec<Vec<Value>> = report
            .per_camera
            .iter()
            .enumerate()
            .map(|(k, (id, f))| {
                let poly = report.polyhedral.as_ref().map(|p| p[k].1);
                vec![json!(id.0), json!(f), json!(poly), json!(*f <= report.scene_fov + 1e-12)]
            })
            .collect();
        csv_of(&["camera", "required_fov", "polyhedral_fov", "feasible"], &rows)
    } else {
        let mut doc = serde_json::to_value(&report).map_err(|e| CliError::input(e.to_string()))?;
        let obj = doc.as_object_mut().unwrap();
        obj.insert("kind".into(), json!("fov-report"));
        obj.insert("convex_position".into(), json!(convex));
        if report.dim == 2 && report.per_camera.len() >= 3 {
            obj.insert("mutual_lower_bound".into(), json!(visibility::min_fov_mutual_2d(report.per_camera.len())?));
        }
        json_of(&doc)?
    };
    emit(out, &text, "analyze", json!({ "scene": scene.display().to_string() }), None)
}

#[derive(Serialize)]
struct CheckRow {
    quantity: &'static str,
    analytic: f64,
    empirical: f64,
    std_error: f64,
    pass: bool,
}

pub fn prob(
    n: usize,
    dim: u8,
    fov: Option<f64>,
    a: Option<f64>,
    samples: u64,
    seed: u64,
    out: Option<&Path>,
) -> CliResult<()> {
    let d = dimension(dim)?;
    let min_fov = stochastic::min_fov_expected(n, d).ok();
    let fov = match (fov, min_fov) {
        (Some(f), _) => f,
        (None, Some(f)) => f,
        (None, None) => return Err(CliError::input(format!("no feasible expected FOV for n = {n}; pass --fov"))),
    };
    let cfg = McConfig { samples, seed, dim: d, fov, n };
    let rep = stochastic::mc_report(&cfg, None)?;
    let checks = vec![
        CheckRow {
            quantity: "p_sees",
            analytic: rep.p_sees.analytic,
            empirical: rep.p_sees.empirical,
            std_error: rep.p_sees.std_error,
            pass: rep.p_sees.pass,
        },
        CheckRow {
            quantity: "p_mutual",
            analytic: rep.p_mutual.analytic,
            empirical: rep.p_mutual.empirical,
            std_error: rep.p_mutual.std_error,
            pass: rep.p_mutual.pass,
        },
        CheckRow {
            quantity: "expected_sightings",
            analytic: rep.expected_sightings.analytic,
            empirical: rep.expected_sightings.empirical,
            std_error: rep.expected_sightings.std_error,
            pass: rep.expected_sightings.pass,
        },
    ];
    let markov = match a {
        Some(a) => Some(stochastic::reverse_markov_upper(a, n, fov, d)?),
        None => None,
    };
    let doc = json!({
        "kind": "prob-report",
        "inputs": cfg,
        "analytic": {
            "p_sees": rep.p_sees.analytic,
            "p_mutual": rep.p_mutual.analytic,
            "expected_sightings": rep.expected_sightings.analytic,
            "required_sightings": stochastic::required_sightings(n, d),
            "min_fov_expected": min_fov,
            "reverse_markov_threshold": a,
            "reverse_markov_upper": markov,
        },
        "checks": checks,
    });
    let text = if wants_csv(out) { table_csv(&doc["checks"]) } else { json_of(&doc)? };
    let inputs = json!({ "n": n, "dim": dim, "fov": fov, "a": a, "samples": samples });
    emit(out, &text, "prob", inputs, Some(seed))
}

/// CSV of an array of flat objects, columns in field order.
pub fn table_csv(rows: &Value) -> String {
    let Some(items) = rows.as_array() else {
        return String::new();
    };
    let columns: Vec<String> = items
        .first()
        .and_then(|r| r.as_object())
        .map(|o| o.keys().cloned().collect())
        .unwrap_or_default();
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let body: Vec<Vec<Value>> = items
        .iter()
        .map(|r| cols.iter().map(|c| r.get(*c).cloned().unwrap_or(Value::Null)).collect())
        .collect();
    csv_of(&cols, &body)
}

fn verdict(reference: f64, mc: f64, se: f64) -> bool {
    (reference - mc).abs() <= 3.0 * se + 1e-12
}

pub fn region(dim: u8, delta: f64, radius: f64, samples: u64, seed: u64, out: Option<&Path>) -> CliResult<()> {
    let d = dimension(dim)?;
    let mut rows = Vec::new();
    let doc = match d {
        Dimension::Two => {
            let avg = region::average_probability(delta)?;
            for k in 0..=10 {
                let eps = k as f64 / 10.0;
                let obs = DiskObserver::new(radius, eps * radius, 0.0, delta)?;
                let closed = region::slice_area_closed(&obs).ok();
                let quad = region::slice_area_quadrature(&obs);
                let (mc, se) = region::slice_area_mc(&obs, samples, seed.wrapping_add(k));
                rows.push(json!({
                    "eps": eps,
                    "area_closed": closed,
                    "area_quadrature": quad,
                    "area_mc": mc,
                    "mc_std_error": se,
                    "mc_pass": verdict(quad, mc, se),
                    "mean_probability": region::orientation_average(eps, delta)?,
                    "mean_probability_analytic": avg,
                }));
            }
            json!({
                "kind": "region-report",
                "dim": 2,
                "inputs": { "delta": delta, "radius": radius, "samples": samples, "seed": seed },
                "average_probability": avg,
                "average_probability_quadrature": region::average_probability_quadrature(delta)?,
                "rows": rows,
                "discrepancies": region::discrepancy_report()?,
            })
        }
        Dimension::Three => {
            for k in 0..=4 {
                let z0 = radius * (k as f64 / 2.0 - 1.0);
                let obs = BallObserver::new(radius, 0.0, z0, delta)?;
                let closed = region::visible_volume_axial_closed(&obs).ok();
                let applies = region::axial_closed_applies(&obs).ok();
                let quad = region::visible_volume_quadrature(&obs);
                let (mc, se) = region::visible_volume_mc(&obs, samples, seed.wrapping_add(k));
                rows.push(json!({
                    "z0": z0,
                    "volume_closed": closed,
                    "closed_applies": applies,
                    "volume_quadrature": quad,
                    "volume_mc": mc,
                    "mc_std_error": se,
                    "mc_pass": verdict(quad, mc, se),
                    "closed_minus_quadrature": closed.map(|c| c - quad),
                }));
            }
            json!({
                "kind": "region-report",
                "dim": 3,
                "inputs": { "delta": delta, "radius": radius, "samples": samples, "seed": seed },
                "fov": TAU * (1.0 - delta.cos()),
                "rows": rows,
                "discrepancies": region::discrepancy_report()?,
            })
        }
    };
    let text = if wants_csv(out) { table_csv(&doc["rows"]) } else { json_of(&doc)? };
    let inputs = json!({ "dim": dim, "delta": delta, "radius": radius, "samples": samples });
    emit(out, &text, "region", inputs, Some(seed))
}
