use std::f64::consts::TAU;

use camsight::geometry::{Pose2, Pose3};
use camsight::graph::{synthesize, CameraId, Scene};
use camsight::io::{self, graph_from_file, graph_to_file, poses_from_file, read_scene, scene_to_file, AnyScene};
use camsight::recon2d::{compare_to_truth_2d, solve_batch_2d};
use camsight::recon3d::{compare_to_truth_3d, solve_batch_3d};
use camsight::stochastic::random_rotation;
use camsight::{visibility, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn planar_scene_survives_documents_and_solve() {
    let scene = visibility::regular_polygon_scene(7).unwrap();
    let text = io::to_json(&scene_to_file(&scene)).unwrap();
    let AnyScene::Two(back) = read_scene(&text).unwrap() else { panic!("expected a planar scene") };
    assert_eq!(io::to_json(&scene_to_file(&back)).unwrap(), text);

    let g = synthesize(&back, 0.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(g.len(), 42);
    let doc = io::to_json(&graph_to_file::<Pose2>(&g)).unwrap();
    let g = graph_from_file::<Pose2>(&io::from_json(&doc).unwrap()).unwrap();
    let rec = solve_batch_2d(&g).unwrap();
    let truth = scene.cameras().iter().cloned().collect();
    let (pos, ori) = compare_to_truth_2d(&rec.poses, &truth).unwrap();
    assert!(pos < 1e-10 && ori < 1e-10, "{pos} {ori}");
}

#[test]
fn spatial_scene_solves_from_its_sighting_document() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cams = (0..6)
        .map(|k| {
            let p = camsight::geometry::Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0));
            (CameraId(k), Pose3::new(p, random_rotation(&mut rng)).unwrap())
        })
        .collect();
    let scene = Scene::new(2.0 * TAU, cams).unwrap();
    let g = synthesize(&scene, 0.0, &mut rng).unwrap();
    let doc = io::to_json(&graph_to_file::<Pose3>(&g)).unwrap();
    let g = graph_from_file::<Pose3>(&io::from_json(&doc).unwrap()).unwrap();
    let rec = solve_batch_3d(&g).unwrap();
    let truth = scene.cameras().iter().cloned().collect();
    let (pos, ang) = compare_to_truth_3d(&rec.poses, &truth).unwrap();
    assert!(pos < 1e-8 && ang < 1e-8, "{pos} {ang}");
}

#[test]
fn reconstruction_document_round_trips_poses() {
    let json = r#"{"kind":"reconstruction","dim":2,"mode":"batch","gauge":{"anchor":0,"scale_pair":[0,1]},"rms":0.0,
        "cameras":[{"id":0,"position":[0.0,0.0],"orientation":0.0},{"id":1,"position":[1.0,0.0],"orientation":3.0}],
        "residuals":[]}"#;
    let f: io::ReconstructionFile = io::from_json(json).unwrap();
    let poses = poses_from_file::<Pose2>(&f).unwrap();
    assert_eq!(poses[&CameraId(1)].orientation().radians(), 3.0);
    assert!(matches!(poses_from_file::<Pose3>(&f), Err(Error::Document(_))));
}

#[test]
fn split_graph_reports_its_components() {
    let scene = visibility::regular_polygon_scene(4).unwrap();
    let g = synthesize(&scene, 0.0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let keep: Vec<_> = g
        .sightings()
        .iter()
        .filter(|s| (s.observer.0 < 2) == (s.target.0 < 2))
        .cloned()
        .collect();
    let g = camsight::graph::SightingGraph::new(g.cameras().to_vec(), keep).unwrap();
    match solve_batch_2d(&g) {
        Err(Error::NotConnected { components }) => assert_eq!(components.len(), 2),
        other => panic!("{other:?}"),
    }
}
