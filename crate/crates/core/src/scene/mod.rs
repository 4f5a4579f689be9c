//! Object-centric kinematic world model.
//!
//! A [`SceneState`] is an immutable snapshot: objects keyed by id, each with
//! a pose and a local box, plus 2.5D rooms (floor polygon and elevation).
//! Replaying a trajectory produces fresh snapshots via [`apply_frame`].

mod geometry;

use std::collections::BTreeMap;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

pub use geometry::{
    gap_distance, horizontal_overlap_ratio, is_simple, point_in_polygon, signed_area, world_aabb, Aabb,
};

const QUAT_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("format error at {location}: {message}")]
    Format { location: String, message: String },
    #[error("invalid `{id}`: {reason}")]
    InvariantViolation { id: String, reason: String },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
}

fn format_err(e: serde_json::Error) -> SceneError {
    SceneError::Format {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Pose {
    pub fn at(position: Vector3<f64>) -> Self {
        Pose { position, orientation: UnitQuaternion::identity() }
    }

    /// Builds a pose from `[x,y,z]` and `[w,x,y,z]`; the quaternion must
    /// already be unit length. Components are stored unmodified.
    pub fn from_arrays(position: [f64; 3], orientation: [f64; 4]) -> Result<Self, String> {
        let [w, x, y, z] = orientation;
        let q = Quaternion::new(w, x, y, z);
        let norm = q.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > QUAT_NORM_TOLERANCE {
            return Err(format!("orientation norm {norm} is not 1"));
        }
        if position.iter().any(|v| !v.is_finite()) {
            return Err("non-finite position".into());
        }
        Ok(Pose {
            position: Vector3::from(position),
            orientation: UnitQuaternion::new_unchecked(q),
        })
    }

    fn orientation_array(&self) -> [f64; 4] {
        let q = self.orientation.quaternion();
        [q.w, q.i, q.j, q.k]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub id: String,
    pub category: String,
    pub pose: Pose,
    pub half_extents: Vector3<f64>,
    pub room_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Room {
    pub id: String,
    /// Counterclockwise, simple, at least three vertices.
    pub floor_polygon: Vec<[f64; 2]>,
    pub floor_z: f64,
}

impl Room {
    /// Room type used by `inroom` directives: the id without a trailing
    /// `_<digits>` instance suffix (`kitchen_0` -> `kitchen`).
    pub fn room_type(&self) -> &str {
        room_type(&self.id)
    }

    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        point_in_polygon([x, y], &self.floor_polygon)
    }

    /// Axis-aligned bounds of the floor polygon as `(min, max)`.
    pub fn xy_bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.floor_polygon {
            for i in 0..2 {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }
}

pub fn room_type(id: &str) -> &str {
    match id.rsplit_once('_') {
        Some((base, suffix)) if !base.is_empty() && !suffix.is_empty() && suffix.bytes().all(|b| b.is_ascii_digit()) => {
            base
        }
        _ => id,
    }
}

/// Immutable snapshot of objects and rooms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SceneState {
    pub objects: BTreeMap<String, SceneObject>,
    pub rooms: BTreeMap<String, Room>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObject {
    id: String,
    category: String,
    position: [f64; 3],
    orientation: [f64; 4],
    half_extents: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    room: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRoom {
    id: String,
    floor_z: f64,
    polygon: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    objects: Vec<RawObject>,
    rooms: Vec<RawRoom>,
}

fn validate_room(room: &Room) -> Result<(), SceneError> {
    let bad = |reason: &str| Err(SceneError::InvariantViolation { id: room.id.clone(), reason: reason.into() });
    if room.floor_polygon.len() < 3 {
        return bad("floor polygon needs at least 3 vertices");
    }
    if room.floor_polygon.iter().flatten().any(|v| !v.is_finite()) || !room.floor_z.is_finite() {
        return bad("non-finite coordinate");
    }
    if !is_simple(&room.floor_polygon) {
        return bad("floor polygon self-intersects");
    }
    if signed_area(&room.floor_polygon) <= 0.0 {
        return bad("floor polygon must be counterclockwise with positive area");
    }
    Ok(())
}

fn validate_object(obj: &SceneObject) -> Result<(), SceneError> {
    if !obj.half_extents.iter().all(|h| h.is_finite() && *h > 0.0) {
        return Err(SceneError::InvariantViolation {
            id: obj.id.clone(),
            reason: format!("half extents must be positive, got {:?}", obj.half_extents.as_slice()),
        });
    }
    Ok(())
}

impl SceneState {
    /// Builds a snapshot, checking every object, room and cross-reference.
    pub fn new(objects: Vec<SceneObject>, rooms: Vec<Room>) -> Result<Self, SceneError> {
        let mut scene = SceneState::default();
        for room in rooms {
            validate_room(&room)?;
            let id = room.id.clone();
            if scene.rooms.insert(id.clone(), room).is_some() {
                return Err(SceneError::InvariantViolation { id, reason: "duplicate room id".into() });
            }
        }
        for obj in objects {
            if scene.objects.contains_key(&obj.id) {
                return Err(SceneError::InvariantViolation { id: obj.id, reason: "duplicate object id".into() });
            }
            scene.insert_object(obj)?;
        }
        Ok(scene)
    }

    /// Adds or replaces an object after validating it.
    pub fn insert_object(&mut self, obj: SceneObject) -> Result<(), SceneError> {
        validate_object(&obj)?;
        if let Some(room) = &obj.room_id {
            if !self.rooms.contains_key(room) {
                return Err(SceneError::InvariantViolation {
                    id: obj.id.clone(),
                    reason: format!("unknown room `{room}`"),
                });
            }
        }
        if self.rooms.contains_key(&obj.id) {
            return Err(SceneError::InvariantViolation {
                id: obj.id.clone(),
                reason: "id already names a room".into(),
            });
        }
        self.objects.insert(obj.id.clone(), obj);
        Ok(())
    }

    pub fn object(&self, id: &str) -> Option<&SceneObject> {
        self.objects.get(id)
    }

    pub fn room(&self, id: &str) -> Option<&Room> {
        self.rooms.get(id)
    }

    /// First room (in id order) whose floor polygon contains the point.
    pub fn room_containing(&self, x: f64, y: f64) -> Option<&Room> {
        self.rooms.values().find(|r| r.contains_xy(x, y))
    }

    pub fn to_json(&self) -> String {
        let raw = RawScene {
            objects: self
                .objects
                .values()
                .map(|o| RawObject {
                    id: o.id.clone(),
                    category: o.category.clone(),
                    position: o.pose.position.into(),
                    orientation: o.pose.orientation_array(),
                    half_extents: o.half_extents.into(),
                    room: o.room_id.clone(),
                })
                .collect(),
            rooms: self
                .rooms
                .values()
                .map(|r| RawRoom { id: r.id.clone(), floor_z: r.floor_z, polygon: r.floor_polygon.clone() })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("scene serializes");
        s.push('\n');
        s
    }
}

/// Parses a JSON scene file.
pub fn load_scene(source: &str) -> Result<SceneState, SceneError> {
    let raw: RawScene = serde_json::from_str(source).map_err(format_err)?;
    let objects = raw
        .objects
        .into_iter()
        .map(|o| {
            let pose = Pose::from_arrays(o.position, o.orientation)
                .map_err(|reason| SceneError::InvariantViolation { id: o.id.clone(), reason })?;
            Ok(SceneObject {
                id: o.id,
                category: o.category,
                pose,
                half_extents: Vector3::from(o.half_extents),
                room_id: o.room,
            })
        })
        .collect::<Result<Vec<_>, SceneError>>()?;
    let rooms = raw
        .rooms
        .into_iter()
        .map(|r| Room { id: r.id, floor_polygon: r.polygon, floor_z: r.floor_z })
        .collect();
    SceneState::new(objects, rooms)
}

pub type Frame = BTreeMap<String, Pose>;

/// Returns a new snapshot with the frame's poses applied. The input is untouched.
pub fn apply_frame(scene: &SceneState, frame: &Frame) -> Result<SceneState, SceneError> {
    if let Some(id) = frame.keys().find(|id| !scene.objects.contains_key(*id)) {
        return Err(SceneError::UnknownObject(id.clone()));
    }
    let mut next = scene.clone();
    for (id, pose) in frame {
        if let Some(o) = next.objects.get_mut(id) {
            o.pose = *pose;
        }
    }
    Ok(next)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPose {
    position: [f64; 3],
    orientation: [f64; 4],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrame {
    t: u64,
    poses: BTreeMap<String, RawPose>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFrame {
    pub t: u64,
    pub poses: Frame,
}

/// Parses a JSON Lines trajectory; blank lines are skipped.
pub fn parse_trajectory(source: &str) -> Result<Vec<TrajectoryFrame>, SceneError> {
    let mut frames = Vec::new();
    for (i, line) in source.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawFrame = serde_json::from_str(line).map_err(|e| SceneError::Format {
            location: format!("line {}", i + 1),
            message: e.to_string(),
        })?;
        let mut poses = Frame::new();
        for (id, p) in raw.poses {
            let pose = Pose::from_arrays(p.position, p.orientation).map_err(|reason| SceneError::Format {
                location: format!("line {}", i + 1),
                message: format!("{id}: {reason}"),
            })?;
            poses.insert(id, pose);
        }
        frames.push(TrajectoryFrame { t: raw.t, poses });
    }
    Ok(frames)
}

/// Serializes one trajectory frame as a single JSON line (no newline).
pub fn trajectory_line(frame: &TrajectoryFrame) -> String {
    let poses: serde_json::Map<String, serde_json::Value> = frame
        .poses
        .iter()
        .map(|(id, p)| {
            let position: [f64; 3] = p.position.into();
            (id.clone(), serde_json::json!({ "position": position, "orientation": p.orientation_array() }))
        })
        .collect();
    serde_json::json!({ "t": frame.t, "poses": poses }).to_string()
}
