//! The six kinematic predicates, evaluated on box geometry.
//!
//! Every predicate works on world AABBs ([`world_aabb`]); thresholds come
//! from [`PredicateParams`]. Boundaries are inclusive throughout.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::parser::Atom;
use crate::scene::{gap_distance, horizontal_overlap_ratio, world_aabb, Room, SceneObject, SceneState};
use crate::taxonomy::GroundScope;

/// Slack on ratio thresholds so that inclusive boundaries survive rounding
/// in the area and volume products.
const RATIO_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PredicateKind {
    NextTo,
    Inside,
    OnFloor,
    OnTop,
    Touching,
    Under,
}

impl PredicateKind {
    pub const ALL: [PredicateKind; 6] = [
        PredicateKind::NextTo,
        PredicateKind::Inside,
        PredicateKind::OnFloor,
        PredicateKind::OnTop,
        PredicateKind::Touching,
        PredicateKind::Under,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PredicateKind::NextTo => "nextto",
            PredicateKind::Inside => "inside",
            PredicateKind::OnFloor => "onfloor",
            PredicateKind::OnTop => "ontop",
            PredicateKind::Touching => "touching",
            PredicateKind::Under => "under",
        }
    }

    /// Case-insensitive lookup by BDDL name.
    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(name))
    }

    pub fn arity(self) -> usize {
        2
    }
}

impl fmt::Display for PredicateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Geometric thresholds. Distances in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredicateParams {
    pub touch_epsilon: f64,
    pub support_gap: f64,
    pub footprint_ratio: f64,
    pub inside_ratio: f64,
    pub nextto_scale: f64,
}

impl Default for PredicateParams {
    fn default() -> Self {
        PredicateParams {
            touch_epsilon: 0.001,
            support_gap: 0.02,
            footprint_ratio: 0.5,
            inside_ratio: 0.5,
            nextto_scale: 0.5,
        }
    }
}

impl PredicateParams {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("touch_epsilon", self.touch_epsilon),
            ("support_gap", self.support_gap),
            ("nextto_scale", self.nextto_scale),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [("footprint_ratio", self.footprint_ratio), ("inside_ratio", self.inside_ratio)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(format!("{name} must lie in (0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound term `{0}`")]
    UnboundTerm(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("no scene object or room `{0}`")]
    UnknownInstance(String),
    #[error("`{id}` is not a {expected}")]
    WrongInstanceKind { id: String, expected: &'static str },
    #[error("predicate `{predicate}` expects {expected} arguments, got {got}")]
    Arity { predicate: String, expected: usize, got: usize },
}

pub fn touching(a: &SceneObject, b: &SceneObject, p: &PredicateParams) -> bool {
    gap_distance(&world_aabb(a), &world_aabb(b)) <= p.touch_epsilon
}

/// Gap no larger than `nextto_scale` times the smaller footprint diagonal.
pub fn next_to(a: &SceneObject, b: &SceneObject, p: &PredicateParams) -> bool {
    let (ba, bb) = (world_aabb(a), world_aabb(b));
    let threshold = p.nextto_scale * ba.footprint_diagonal().min(bb.footprint_diagonal());
    gap_distance(&ba, &bb) <= threshold
}

/// Fraction of `a`'s box volume that lies within `b`'s box.
pub fn inside_ratio(a: &SceneObject, b: &SceneObject) -> f64 {
    let (ba, bb) = (world_aabb(a), world_aabb(b));
    let v = ba.volume();
    if v <= 0.0 {
        return 0.0;
    }
    ba.intersection_volume(&bb) / v
}

pub fn inside(a: &SceneObject, b: &SceneObject, p: &PredicateParams) -> bool {
    inside_ratio(a, b) >= p.inside_ratio - RATIO_SLACK
}

/// `a` rests directly on `b`: enough footprint overlap, a small
/// non-negative vertical gap, and not contained in `b`.
pub fn on_top(a: &SceneObject, b: &SceneObject, p: &PredicateParams) -> bool {
    let (ba, bb) = (world_aabb(a), world_aabb(b));
    let lift = ba.min.z - bb.max.z;
    horizontal_overlap_ratio(&ba, &bb) >= p.footprint_ratio - RATIO_SLACK
        && (0.0..=p.support_gap).contains(&lift)
        && !inside(a, b, p)
}

/// `a` lies below `b` with enough of `a`'s footprint covered. Contact is
/// not required.
pub fn under(a: &SceneObject, b: &SceneObject, p: &PredicateParams) -> bool {
    let (ba, bb) = (world_aabb(a), world_aabb(b));
    horizontal_overlap_ratio(&ba, &bb) >= p.footprint_ratio - RATIO_SLACK && ba.max.z <= bb.min.z + p.support_gap
}

pub fn on_floor(a: &SceneObject, room: &Room, p: &PredicateParams) -> bool {
    let ba = world_aabb(a);
    let c = ba.center();
    (ba.min.z - room.floor_z).abs() <= p.support_gap && room.contains_xy(c.x, c.y)
}

fn object<'s>(scene: &'s SceneState, id: &str) -> Result<&'s SceneObject, EvalError> {
    scene.object(id).ok_or_else(|| {
        if scene.room(id).is_some() {
            EvalError::WrongInstanceKind { id: id.to_string(), expected: "scene object" }
        } else {
            EvalError::UnknownInstance(id.to_string())
        }
    })
}

/// Evaluates a predicate on concrete scene ids. For `OnFloor` the second id
/// names a room.
pub fn eval_ground(
    kind: PredicateKind,
    args: &[&str],
    scene: &SceneState,
    p: &PredicateParams,
) -> Result<bool, EvalError> {
    let [a, b] = args else {
        return Err(EvalError::Arity { predicate: kind.name().into(), expected: 2, got: args.len() });
    };
    let a = object(scene, a)?;
    if kind == PredicateKind::OnFloor {
        let room = scene.room(b).ok_or_else(|| {
            if scene.object(b).is_some() {
                EvalError::WrongInstanceKind { id: b.to_string(), expected: "room" }
            } else {
                EvalError::UnknownInstance(b.to_string())
            }
        })?;
        return Ok(on_floor(a, room, p));
    }
    let b = object(scene, b)?;
    Ok(match kind {
        PredicateKind::NextTo => next_to(a, b, p),
        PredicateKind::Inside => inside(a, b, p),
        PredicateKind::OnTop => on_top(a, b, p),
        PredicateKind::Touching => touching(a, b, p),
        PredicateKind::Under => under(a, b, p),
        PredicateKind::OnFloor => unreachable!(),
    })
}

/// Evaluates an activity atom whose terms are bound by `scope`.
pub fn eval_atom(atom: &Atom, scope: &GroundScope, scene: &SceneState, p: &PredicateParams) -> Result<bool, EvalError> {
    let ids = atom
        .args
        .iter()
        .map(|t| scope.get(t).ok_or_else(|| EvalError::UnboundTerm(t.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let kind = PredicateKind::from_name(&atom.predicate)
        .ok_or_else(|| EvalError::UnknownPredicate(atom.predicate.clone()))?;
    eval_ground(kind, &ids, scene, p)
}
