#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use bddl_core::parser::{parse_activity, Activity};
use bddl_core::sampler::ObjectLibrary;
use bddl_core::scene::{load_scene, Pose, SceneObject, SceneState};
use bddl_core::taxonomy::{load_taxonomy, Taxonomy};
use nalgebra::{UnitQuaternion, Vector3};
use proptest::prelude::*;

pub fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn read(rel: &str) -> String {
    fs::read_to_string(data().join(rel)).unwrap()
}

pub fn corpus() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(data().join("activities")).unwrap() {
        let dir = entry.unwrap().path();
        if dir.is_dir() {
            let name = dir.file_name().unwrap().to_string_lossy().into_owned();
            out.push((name, fs::read_to_string(dir.join("problem0.bddl")).unwrap()));
        }
    }
    out.sort();
    out
}

pub fn activity(name: &str) -> Activity {
    parse_activity(&read(&format!("activities/{name}/problem0.bddl"))).unwrap()
}

pub fn taxonomy() -> Taxonomy {
    load_taxonomy(&read("taxonomy.txt")).unwrap()
}

pub fn library() -> ObjectLibrary {
    ObjectLibrary::from_json(&read("object_library.json")).unwrap()
}

pub fn apartment() -> SceneState {
    load_scene(&read("scenes/apartment.json")).unwrap()
}

pub fn object(id: &str, center: Vector3<f64>, half: Vector3<f64>, orientation: UnitQuaternion<f64>) -> SceneObject {
    SceneObject {
        id: id.into(),
        category: "thing".into(),
        pose: Pose { position: center, orientation },
        half_extents: half,
        room_id: None,
    }
}

pub fn axis_box(id: &str, center: [f64; 3], half: [f64; 3]) -> SceneObject {
    object(id, Vector3::from(center), Vector3::from(half), UnitQuaternion::identity())
}

pub fn arb_vec(lo: f64, hi: f64) -> impl Strategy<Value = Vector3<f64>> {
    (lo..hi, lo..hi, lo..hi).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

pub fn arb_rotation() -> impl Strategy<Value = UnitQuaternion<f64>> {
    (-3.2f64..3.2, -1.6f64..1.6, -3.2f64..3.2).prop_map(|(r, p, y)| UnitQuaternion::from_euler_angles(r, p, y))
}

/// Arbitrarily rotated box.
pub fn arb_object(id: &'static str) -> impl Strategy<Value = SceneObject> {
    (arb_vec(-2.0, 2.0), arb_vec(0.01, 1.0), arb_rotation()).prop_map(move |(c, h, q)| object(id, c, h, q))
}

/// Axis-aligned box, small enough that random pairs are often close.
pub fn arb_axis_object(id: &'static str) -> impl Strategy<Value = SceneObject> {
    (arb_vec(-1.0, 1.0), arb_vec(0.02, 0.8))
        .prop_map(move |(c, h)| object(id, c, h, UnitQuaternion::identity()))
}
