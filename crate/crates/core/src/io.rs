//! JSON interchange documents for scenes, sightings and reconstructions.
//!
//! Every document carries a `kind` tag. Numbers are written with shortest
//! round-trip precision, so reading a document back reproduces the values
//! bit for bit.

use std::collections::BTreeMap;

use nalgebra::Unit;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    angle_between, bearing_from_pixel, normalize_angle, unit_from_pixel3, Angle, Mat3, Pose2, Pose3,
    UnitVec3, Vec2, Vec3,
};
use crate::graph::{CameraId, CameraPose, Scene, Scene2, Scene3, Sighting, SightingGraph};
use crate::recon2d::{AdjustReport, Gauge, SequentialStep};

fn doc_err(msg: impl Into<String>) -> Error {
    Error::Document(msg.into())
}

/// One camera as stored in a document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraDoc {
    pub id: u32,
    pub position: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<f64>,
    /// World-to-camera rotation, row major.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<[f64; 9]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SightingDoc {
    pub obs: u32,
    pub tgt: u32,
    /// Pinhole pixel; present when the target is in front of the camera.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pixel: Option<Vec<f64>>,
    /// Camera-frame bearing: the angle in 2D, the unit direction in 3D.
    /// Takes precedence over `pixel` when both are given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bearing: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub kind: String,
    pub dim: u8,
    pub fov: f64,
    pub cameras: Vec<CameraDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SightingFile {
    pub kind: String,
    pub dim: u8,
    /// Camera ids; defaults to the ids referenced by the sightings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cameras: Option<Vec<u32>>,
    pub sightings: Vec<SightingDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualDoc {
    pub obs: u32,
    pub tgt: u32,
    /// Angle between measured and predicted bearing, radians.
    pub angle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionFile {
    pub kind: String,
    pub dim: u8,
    pub mode: String,
    pub gauge: Gauge,
    pub rms: f64,
    pub cameras: Vec<CameraDoc>,
    pub residuals: Vec<ResidualDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<SequentialStep>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjustment: Option<AdjustReport>,
}

/// Pose types that can be written to and read from documents.
pub trait DocPose: CameraPose {
    fn to_doc(&self, id: CameraId) -> CameraDoc;
    fn from_doc(doc: &CameraDoc) -> Result<Self>;
    fn bearing_to_vec(b: &Self::Bearing) -> Vec<f64>;
    fn bearing_from_vec(v: &[f64]) -> Result<Self::Bearing>;
    fn bearing_from_pixel(p: &[f64]) -> Result<Self::Bearing>;
    fn angular_error(measured: &Self::Bearing, predicted: &Self::Bearing) -> f64;
}

fn expect_len(v: &[f64], n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(doc_err(format!("{what} needs {n} components, got {}", v.len())));
    }
    Ok(())
}

impl DocPose for Pose2 {
    fn to_doc(&self, id: CameraId) -> CameraDoc {
        let p = self.position();
        CameraDoc { id: id.0, position: vec![p.x, p.y], orientation: Some(self.orientation().radians()), rotation: None }
    }

    fn from_doc(doc: &CameraDoc) -> Result<Self> {
        expect_len(&doc.position, 2, "2D position")?;
        let o = doc.orientation.ok_or_else(|| doc_err(format!("camera {} lacks orientation", doc.id)))?;
        Pose2::new(Vec2::new(doc.position[0], doc.position[1]), o)
    }

    fn bearing_to_vec(b: &Angle) -> Vec<f64> {
        vec![b.radians()]
    }

    fn bearing_from_vec(v: &[f64]) -> Result<Angle> {
        expect_len(v, 1, "2D bearing")?;
        normalize_angle(v[0])
    }

    fn bearing_from_pixel(p: &[f64]) -> Result<Angle> {
        expect_len(p, 1, "2D pixel")?;
        bearing_from_pixel(p[0])
    }

    fn angular_error(measured: &Angle, predicted: &Angle) -> f64 {
        measured.distance(*predicted)
    }
}

impl DocPose for Pose3 {
    fn to_doc(&self, id: CameraId) -> CameraDoc {
        let p = self.position();
        let r = self.rotation();
        let mut rot = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                rot[3 * i + j] = r[(i, j)];
            }
        }
        CameraDoc { id: id.0, position: vec![p.x, p.y, p.z], orientation: None, rotation: Some(rot) }
    }

    fn from_doc(doc: &CameraDoc) -> Result<Self> {
        expect_len(&doc.position, 3, "3D position")?;
        let r = doc.rotation.ok_or_else(|| doc_err(format!("camera {} lacks rotation", doc.id)))?;
        let p = Vec3::new(doc.position[0], doc.position[1], doc.position[2]);
        Pose3::new(p, Mat3::from_row_slice(&r))
    }

    fn bearing_to_vec(b: &UnitVec3) -> Vec<f64> {
        vec![b.x, b.y, b.z]
    }

    fn bearing_from_vec(v: &[f64]) -> Result<UnitVec3> {
        expect_len(v, 3, "3D bearing")?;
        let d = Vec3::new(v[0], v[1], v[2]);
        if !d.iter().all(|x| x.is_finite()) || d.norm() == 0.0 {
            return Err(doc_err("3D bearing must be a finite nonzero vector"));
        }
        // Keep stored unit vectors bit for bit.
        if (d.norm() - 1.0).abs() < 1e-12 {
            Ok(Unit::new_unchecked(d))
        } else {
            Ok(Unit::new_normalize(d))
        }
    }

    fn bearing_from_pixel(p: &[f64]) -> Result<UnitVec3> {
        expect_len(p, 2, "3D pixel")?;
        unit_from_pixel3(p[0], p[1])
    }

    fn angular_error(measured: &UnitVec3, predicted: &UnitVec3) -> f64 {
        angle_between(measured, predicted)
    }
}

pub fn scene_to_file<P: DocPose>(scene: &Scene<P>) -> SceneFile {
    SceneFile {
        kind: "scene".into(),
        dim: P::DIM.into(),
        fov: scene.fov(),
        cameras: scene.cameras().iter().map(|(id, p)| p.to_doc(*id)).collect(),
    }
}

pub fn scene_from_file<P: DocPose>(f: &SceneFile) -> Result<Scene<P>> {
    check_kind(&f.kind, "scene")?;
    check_dim(f.dim, P::DIM.into())?;
    let cams = f.cameras.iter().map(|c| Ok((CameraId(c.id), P::from_doc(c)?))).collect::<Result<Vec<_>>>()?;
    Scene::new(f.fov, cams)
}

pub fn graph_to_file<P: DocPose>(g: &SightingGraph<P::Bearing>) -> SightingFile {
    SightingFile {
        kind: "sightings".into(),
        dim: P::DIM.into(),
        cameras: Some(g.cameras().iter().map(|c| c.0).collect()),
        sightings: g
            .sightings()
            .iter()
            .map(|s| SightingDoc {
                obs: s.observer.0,
                tgt: s.target.0,
                pixel: P::pixel(&s.bearing),
                bearing: Some(P::bearing_to_vec(&s.bearing)),
            })
            .collect(),
    }
}

pub fn graph_from_file<P: DocPose>(f: &SightingFile) -> Result<SightingGraph<P::Bearing>> {
    check_kind(&f.kind, "sightings")?;
    check_dim(f.dim, P::DIM.into())?;
    let sightings = f
        .sightings
        .iter()
        .map(|s| {
            let bearing = match (&s.bearing, &s.pixel) {
                (Some(b), _) => P::bearing_from_vec(b)?,
                (None, Some(p)) => P::bearing_from_pixel(p)?,
                (None, None) => return Err(doc_err(format!("sighting {} -> {} has neither pixel nor bearing", s.obs, s.tgt))),
            };
            Ok(Sighting { observer: CameraId(s.obs), target: CameraId(s.tgt), bearing })
        })
        .collect::<Result<Vec<_>>>()?;
    let cameras = match &f.cameras {
        Some(c) => c.iter().map(|&i| CameraId(i)).collect(),
        None => {
            let mut ids: Vec<CameraId> = sightings.iter().flat_map(|s| [s.observer, s.target]).collect();
            ids.sort();
            ids.dedup();
            ids
        }
    };
    SightingGraph::new(cameras, sightings)
}

/// Per-sighting angular residuals of `poses` against the measured bearings.
pub fn residuals<P: DocPose>(g: &SightingGraph<P::Bearing>, poses: &BTreeMap<CameraId, P>) -> Result<Vec<ResidualDoc>> {
    let mut out = Vec::with_capacity(g.len());
    for s in g.sightings() {
        let (Some(o), Some(t)) = (poses.get(&s.observer), poses.get(&s.target)) else {
            continue;
        };
        let predicted = o.bearing_to(t)?;
        out.push(ResidualDoc { obs: s.observer.0, tgt: s.target.0, angle: P::angular_error(&s.bearing, &predicted) });
    }
    Ok(out)
}

pub fn poses_from_file<P: DocPose>(f: &ReconstructionFile) -> Result<BTreeMap<CameraId, P>> {
    check_kind(&f.kind, "reconstruction")?;
    check_dim(f.dim, P::DIM.into())?;
    f.cameras.iter().map(|c| Ok((CameraId(c.id), P::from_doc(c)?))).collect()
}

fn check_kind(kind: &str, want: &str) -> Result<()> {
    if kind != want {
        return Err(doc_err(format!("expected a {want} document, got {kind:?}")));
    }
    Ok(())
}

fn check_dim(dim: u8, want: u8) -> Result<()> {
    if dim != want {
        return Err(doc_err(format!("expected dim {want}, got {dim}")));
    }
    Ok(())
}

/// The `kind` and `dim` tags of a JSON document.
pub fn peek(json: &str) -> Result<(String, Option<u8>)> {
    #[derive(Deserialize)]
    struct Head {
        kind: String,
        dim: Option<u8>,
    }
    let h: Head = serde_json::from_str(json).map_err(|e| doc_err(e.to_string()))?;
    Ok((h.kind, h.dim))
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| doc_err(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| doc_err(e.to_string()))
}

/// Scenes of either dimension.
#[derive(Clone, Debug)]
pub enum AnyScene {
    Two(Scene2),
    Three(Scene3),
}

pub fn read_scene(json: &str) -> Result<AnyScene> {
    let f: SceneFile = from_json(json)?;
    match f.dim {
        2 => Ok(AnyScene::Two(scene_from_file(&f)?)),
        3 => Ok(AnyScene::Three(scene_from_file(&f)?)),
        d => Err(doc_err(format!("dim must be 2 or 3, got {d}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::synthesize;
    use crate::recon3d::test_support::random_scene;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scene_and_sightings_round_trip_3d() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let scene = random_scene(&mut rng, 5).with_fov(3.0).unwrap();
        let text = to_json(&scene_to_file(&scene)).unwrap();
        let back: Scene3 = scene_from_file(&from_json(&text).unwrap()).unwrap();
        assert_eq!(back, scene);
        let g = synthesize(&scene, 1e-3, &mut rng).unwrap();
        let text = to_json(&graph_to_file::<Pose3>(&g)).unwrap();
        let back = graph_from_file::<Pose3>(&from_json(&text).unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn pixel_only_sightings() {
        let json = r#"{"kind":"sightings","dim":2,"sightings":[
            {"obs":0,"tgt":1,"pixel":[0.0]},{"obs":1,"tgt":0,"pixel":[1.0]}]}"#;
        let g = graph_from_file::<Pose2>(&from_json(json).unwrap()).unwrap();
        assert_eq!(g.cameras(), &[CameraId(0), CameraId(1)]);
        assert!((g.get(CameraId(1), CameraId(0)).unwrap().radians() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_documents() {
        let dup = r#"{"kind":"sightings","dim":2,"sightings":[
            {"obs":0,"tgt":1,"pixel":[0.0]},{"obs":0,"tgt":1,"pixel":[0.1]}]}"#;
        assert!(matches!(
            graph_from_file::<Pose2>(&from_json(dup).unwrap()),
            Err(Error::DuplicateSighting { .. })
        ));
        let wrong = r#"{"kind":"scene","dim":3,"fov":1.0,"cameras":[]}"#;
        assert!(from_json::<SightingFile>(wrong).is_err());
        let f = SightingFile { kind: "scene".into(), dim: 3, cameras: None, sightings: vec![] };
        assert!(graph_from_file::<Pose3>(&f).is_err());
        assert!(matches!(read_scene("{"), Err(Error::Document(_))));
        let short = r#"{"kind":"scene","dim":2,"fov":1.0,"cameras":[{"id":0,"position":[1.0]}]}"#;
        assert!(read_scene(short).is_err());
        assert_eq!(peek(wrong).unwrap(), ("scene".to_string(), Some(3)));
    }
}
