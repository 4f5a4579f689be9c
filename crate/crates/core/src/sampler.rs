//! Activity instantiation: seeded rejection sampling of init conditions,
//! and verified loading of instances sampled elsewhere.
//!
//! Terms that appear as the first argument of a positive kinematic init
//! atom are *movable*: they are spawned with dimensions from an
//! [`ObjectLibrary`] and placed by their first such atom in support order.
//! All other terms are grounded onto existing scene instances.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::logic::{check_init, GoalReport, LogicError};
use crate::parser::{Activity, Literal};
use crate::predicates::{eval_ground, PredicateKind, PredicateParams};
use crate::scene::{load_scene, room_type, world_aabb, Aabb, Pose, SceneError, SceneObject, SceneState};
use crate::taxonomy::{ground_selected_terms, instance_room, GroundScope, Taxonomy, TaxonomyError, FLOOR_SYNSET};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplerError {
    #[error("cyclic support among: {}", .0.join(", "))]
    CyclicSupport(Vec<String>),
    #[error("sampling failed for {atom} after {attempts} attempts")]
    SamplingFailed { atom: String, attempts: u32 },
    #[error(transparent)]
    Grounding(#[from] TaxonomyError),
    #[error("no object library entry for synset `{0}` or its ancestors")]
    MissingLibraryEntry(String),
    #[error("cannot sample init literal {0}")]
    UnsupportedInit(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("init conditions violated: {}", .0.join(", "))]
    InitViolated(Vec<String>),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerParams {
    pub max_attempts_per_atom: u32,
    /// Vertical clearance left between a placed object and its support, meters.
    pub clearance: f64,
    pub seed: u64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        SamplerParams { max_attempts_per_atom: 100, clearance: 0.005, seed: 0 }
    }
}

impl SamplerParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_attempts_per_atom < 1 {
            return Err("max_attempts_per_atom must be at least 1".into());
        }
        if !(self.clearance >= 0.0 && self.clearance.is_finite()) {
            return Err(format!("clearance must be non-negative, got {}", self.clearance));
        }
        Ok(())
    }
}

/// Default half extents per synset, for objects spawned by the sampler.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectLibrary {
    half_extents: BTreeMap<String, [f64; 3]>,
}

impl ObjectLibrary {
    pub fn from_json(source: &str) -> Result<Self, SamplerError> {
        let lib: ObjectLibrary = serde_json::from_str(source).map_err(|e| SamplerError::Format(e.to_string()))?;
        for (synset, h) in &lib.half_extents {
            if !h.iter().all(|v| v.is_finite() && *v > 0.0) {
                return Err(SamplerError::Format(format!("non-positive half extents for `{synset}`")));
            }
        }
        Ok(lib)
    }

    pub fn insert(&mut self, synset: impl Into<String>, half_extents: [f64; 3]) {
        self.half_extents.insert(synset.into(), half_extents);
    }

    /// Entry for the synset or its nearest ancestor that has one.
    pub fn lookup(&self, taxonomy: &Taxonomy, synset: &str) -> Option<[f64; 3]> {
        if let Some(h) = self.half_extents.get(synset) {
            return Some(*h);
        }
        taxonomy.ancestors(synset).find_map(|s| self.half_extents.get(s).copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledInstance {
    pub scene: SceneState,
    pub scope: GroundScope,
    pub activity_name: String,
    /// `None` for instances loaded from files.
    pub seed: Option<u64>,
}

fn placement(lit: &Literal) -> Option<(PredicateKind, &str, &str)> {
    if lit.negated || lit.atom.is_inroom() {
        return None;
    }
    let kind = PredicateKind::from_name(&lit.atom.predicate)?;
    match lit.atom.args.as_slice() {
        [x, y] => Some((kind, x.as_str(), y.as_str())),
        _ => None,
    }
}

/// Orders init literals for placement: room directives first, then positive
/// atoms so that an object is placed before anything is placed relative to
/// it, then negated atoms.
pub fn order_constraints(init: &[Literal]) -> Result<Vec<Literal>, SamplerError> {
    let rooms = init.iter().filter(|l| l.atom.is_inroom());
    let negatives = init.iter().filter(|l| l.negated);
    let positives: Vec<&Literal> = init.iter().filter(|l| !l.negated && !l.atom.is_inroom()).collect();

    // edge i -> j when atom i places the object that atom j places something on
    let supportee = |l: &Literal| l.atom.args.first().cloned();
    let reference = |l: &Literal| l.atom.args.get(1).cloned();
    let n = positives.len();
    let mut indegree = vec![0usize; n];
    let mut edges = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && supportee(positives[i]).is_some() && supportee(positives[i]) == reference(positives[j]) {
                edges[i].push(j);
                indegree[j] += 1;
            }
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut sorted = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        sorted.push(i);
        for &j in &edges[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.insert(j);
            }
        }
    }
    if sorted.len() < n {
        let stuck = (0..n).filter(|&i| indegree[i] > 0).map(|i| positives[i].to_string()).collect();
        return Err(SamplerError::CyclicSupport(stuck));
    }

    let mut out: Vec<Literal> = rooms.cloned().collect();
    out.extend(sorted.into_iter().map(|i| positives[i].clone()));
    out.extend(negatives.cloned());
    Ok(out)
}

/// Everything a sampling run reads besides the activity and base scene.
#[derive(Debug, Clone, Copy)]
pub struct SamplingContext<'a> {
    pub taxonomy: &'a Taxonomy,
    pub library: &'a ObjectLibrary,
    pub predicate_params: PredicateParams,
}

struct Placer<'a> {
    ctx: SamplingContext<'a>,
    params: SamplerParams,
    scope: GroundScope,
    scene: SceneState,
    placed: BTreeSet<String>,
    /// Positive kinematic atoms and negated atoms as (kind, ids, negated, text).
    checks: Vec<(PredicateKind, [String; 2], bool, String)>,
    room_filters: Vec<(String, String)>,
    /// Directed containment pairs allowed to intersect.
    overlap_ok: BTreeSet<(String, String)>,
}

impl Placer<'_> {
    fn ready(&self, ids: &[String; 2]) -> bool {
        ids.iter().all(|id| self.placed.contains(id) || self.scene.room(id).is_some())
    }

    /// First violated constraint among those whose objects are all placed.
    fn violation(&self) -> Option<String> {
        let p = &self.ctx.predicate_params;
        for (kind, ids, negated, text) in &self.checks {
            if !self.ready(ids) {
                continue;
            }
            let args = [ids[0].as_str(), ids[1].as_str()];
            match eval_ground(*kind, &args, &self.scene, p) {
                Ok(v) if v != *negated => {}
                _ => return Some(text.clone()),
            }
        }
        for (id, ty) in &self.room_filters {
            if self.placed.contains(id) && instance_room(&self.scene, id).map(room_type) != Some(ty.as_str()) {
                return Some(format!("(inroom {id} {ty})"));
            }
        }
        None
    }

    fn collides(&self, id: &str) -> bool {
        let Some(obj) = self.scene.object(id) else { return false };
        let b = world_aabb(obj);
        self.scene.objects.values().any(|o| {
            o.id != id
                && !self.overlap_ok.contains(&(id.to_string(), o.id.clone()))
                && !self.overlap_ok.contains(&(o.id.clone(), id.to_string()))
                && b.intersection_volume(&world_aabb(o)) > 1e-12
        })
    }

    fn propose(&self, rng: &mut ChaCha8Rng, kind: PredicateKind, half: Vector3<f64>, reference: &str) -> Option<Vector3<f64>> {
        let p = &self.ctx.predicate_params;
        let clearance = self.params.clearance;
        if kind == PredicateKind::OnFloor {
            let room = self.scene.room(reference)?;
            let (lo, hi) = room.xy_bounds();
            let x = uniform(rng, lo[0] + half.x, hi[0] - half.x)?;
            let y = uniform(rng, lo[1] + half.y, hi[1] - half.y)?;
            return Some(Vector3::new(x, y, room.floor_z + clearance + half.z));
        }
        let rb = world_aabb(self.scene.object(reference)?);
        match kind {
            PredicateKind::OnTop => {
                let x = uniform(rng, rb.min.x + half.x, rb.max.x - half.x)?;
                let y = uniform(rng, rb.min.y + half.y, rb.max.y - half.y)?;
                Some(Vector3::new(x, y, rb.max.z + clearance + half.z))
            }
            PredicateKind::Inside => {
                let mut c = Vector3::zeros();
                for i in 0..3 {
                    c[i] = uniform(rng, rb.min[i] + half[i], rb.max[i] - half[i])?;
                }
                Some(c)
            }
            PredicateKind::Under => {
                let x = uniform(rng, rb.min.x + half.x, rb.max.x - half.x)?;
                let y = uniform(rng, rb.min.y + half.y, rb.max.y - half.y)?;
                let z = match self.scene.room_containing(x, y) {
                    Some(room) => room.floor_z + clearance + half.z,
                    None => rb.min.z - clearance - half.z,
                };
                Some(Vector3::new(x, y, z))
            }
            PredicateKind::NextTo | PredicateKind::Touching => {
                let mine = Aabb::from_center(Vector3::zeros(), half);
                let max_gap = if kind == PredicateKind::NextTo {
                    0.98 * p.nextto_scale * mine.footprint_diagonal().min(rb.footprint_diagonal())
                } else {
                    0.5 * p.touch_epsilon
                };
                let gap = rng.random_range(0.0..=max_gap);
                let side = rng.random_range(0..4u8);
                let (axis, other) = if side < 2 { (0, 1) } else { (1, 0) };
                let mut c = Vector3::zeros();
                c[axis] = if side % 2 == 0 { rb.max[axis] + gap + half[axis] } else { rb.min[axis] - gap - half[axis] };
                c[other] = rng.random_range(rb.min[other]..=rb.max[other]);
                let floor = self
                    .scene
                    .room_containing(c.x, c.y)
                    .filter(|room| (rb.min.z - room.floor_z).abs() <= p.support_gap);
                c.z = match floor {
                    Some(room) => room.floor_z + clearance + half.z,
                    None => rb.min.z + half.z,
                };
                Some(c)
            }
            PredicateKind::OnFloor => unreachable!(),
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Option<f64> {
    if lo > hi {
        None
    } else if lo == hi {
        Some(lo)
    } else {
        Some(rng.random_range(lo..=hi))
    }
}

fn unique_id(scene: &SceneState, base: &str) -> String {
    if scene.object(base).is_none() && scene.room(base).is_none() {
        return base.to_string();
    }
    (1..)
        .map(|k| format!("{base}_{k}"))
        .find(|id| scene.object(id).is_none() && scene.room(id).is_none())
        .expect("some suffix is free")
}

/// Grounds `activity` onto `base_scene`, spawns its movable objects, and
/// places them so that every init literal holds.
pub fn sample_instance(
    activity: &Activity,
    base_scene: &SceneState,
    ctx: SamplingContext<'_>,
    params: SamplerParams,
) -> Result<SampledInstance, SamplerError> {
    params.validate().map_err(SamplerError::Format)?;
    let ordered = order_constraints(&activity.init)?;

    for lit in ordered.iter().filter(|l| !l.atom.is_inroom()) {
        if placement(lit).is_none() && PredicateKind::from_name(&lit.atom.predicate).is_none() {
            return Err(SamplerError::UnsupportedInit(lit.to_string()));
        }
    }

    let movable: BTreeSet<&str> = ordered.iter().filter_map(placement).map(|(_, x, _)| x).collect();
    for term in &movable {
        let synset = activity.synset_of(term).unwrap_or_default();
        if ctx.taxonomy.ancestors(synset).any(|s| s == FLOOR_SYNSET) {
            return Err(SamplerError::UnsupportedInit(format!("floor term `{term}` placed as an object")));
        }
    }

    let mut scope = ground_selected_terms(activity, ctx.taxonomy, base_scene, params.seed, |t| !movable.contains(t))?;
    let mut scene = base_scene.clone();
    let mut spawned: BTreeMap<String, SceneObject> = BTreeMap::new();
    for decl in activity.objects.iter().filter(|d| movable.contains(d.term.as_str())) {
        let half = ctx
            .library
            .lookup(ctx.taxonomy, &decl.synset)
            .ok_or_else(|| SamplerError::MissingLibraryEntry(decl.synset.clone()))?;
        let mut taken = scene.clone();
        for o in spawned.values() {
            taken.objects.insert(o.id.clone(), o.clone());
        }
        let id = unique_id(&taken, &decl.term);
        scope.bind(decl.term.clone(), id.clone());
        spawned.insert(
            id.clone(),
            SceneObject {
                id,
                category: decl.synset.clone(),
                pose: Pose::at(Vector3::zeros()),
                half_extents: Vector3::from(half),
                room_id: None,
            },
        );
    }

    let bound = |t: &str| scope.get(t).map(str::to_string);
    let mut checks = Vec::new();
    let mut room_filters = Vec::new();
    let mut overlap_ok = BTreeSet::new();
    for lit in &ordered {
        if lit.atom.is_inroom() {
            if let (Some(id), Some(ty)) = (lit.atom.args.first().and_then(|t| bound(t)), lit.atom.args.get(1)) {
                if spawned.contains_key(&id) {
                    room_filters.push((id, ty.clone()));
                }
            }
            continue;
        }
        let kind = PredicateKind::from_name(&lit.atom.predicate).expect("checked above");
        let [x, y] = lit.atom.args.as_slice() else {
            return Err(SamplerError::UnsupportedInit(lit.to_string()));
        };
        let ids = [bound(x).expect("all terms bound"), bound(y).expect("all terms bound")];
        if !lit.negated && kind == PredicateKind::Inside {
            overlap_ok.insert((ids[0].clone(), ids[1].clone()));
        }
        checks.push((kind, ids, lit.negated, lit.to_string()));
    }
    // (x, z) when x sits inside z through any chain of containers
    loop {
        let extra: Vec<_> = overlap_ok
            .iter()
            .flat_map(|(a, b)| overlap_ok.iter().filter(move |(c, _)| c == b).map(move |(_, d)| (a.clone(), d.clone())))
            .filter(|(a, d)| a != d && !overlap_ok.contains(&(a.clone(), d.clone())))
            .collect();
        if extra.is_empty() {
            break;
        }
        overlap_ok.extend(extra);
    }

    let mut placer = Placer {
        ctx,
        params,
        scope,
        placed: scene.objects.keys().cloned().collect(),
        scene: std::mem::take(&mut scene),
        checks,
        room_filters,
        overlap_ok,
    };
    if let Some(v) = placer.violation() {
        return Err(SamplerError::InitViolated(vec![v]));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(1);
    for lit in &ordered {
        let Some((kind, x, y)) = placement(lit) else { continue };
        let xid = placer.scope.get(x).expect("bound").to_string();
        if placer.placed.contains(&xid) {
            continue;
        }
        let yid = placer.scope.get(y).expect("bound").to_string();
        let template = spawned.get(&xid).expect("movable objects are spawned").clone();
        let mut done = false;
        for _ in 0..params.max_attempts_per_atom {
            let Some(center) = placer.propose(&mut rng, kind, template.half_extents, &yid) else { continue };
            let mut obj = template.clone();
            obj.pose = Pose::at(center);
            placer.scene.insert_object(obj)?;
            placer.placed.insert(xid.clone());
            if placer.violation().is_none() && !placer.collides(&xid) {
                done = true;
                break;
            }
            placer.placed.remove(&xid);
            placer.scene.objects.remove(&xid);
        }
        if !done {
            return Err(SamplerError::SamplingFailed { atom: lit.to_string(), attempts: params.max_attempts_per_atom });
        }
    }

    let report = check_init(activity, &placer.scope, ctx.taxonomy, &placer.scene, &ctx.predicate_params)?;
    if report.q_score < 1.0 {
        return Err(SamplerError::InitViolated(report.failed_leaves().map(|l| l.expr.clone()).collect()));
    }
    Ok(SampledInstance {
        scene: placer.scene,
        scope: placer.scope,
        activity_name: activity.problem_name.clone(),
        seed: Some(params.seed),
    })
}

/// A loaded instance with the init report computed on load.
#[derive(Debug, Clone, PartialEq)]
pub struct Presampled {
    pub instance: SampledInstance,
    pub report: GoalReport,
    pub warnings: Vec<String>,
}

/// Loads a scene and term-binding pair and re-checks the activity's init
/// conditions on it. In strict mode any unmet init literal is an error;
/// otherwise it is reported as a warning.
pub fn load_presampled(
    scene_source: &str,
    scope_source: &str,
    activity: &Activity,
    taxonomy: &Taxonomy,
    predicate_params: &PredicateParams,
    strict: bool,
) -> Result<Presampled, SamplerError> {
    let scene = load_scene(scene_source)?;
    let scope = GroundScope::from_json(scope_source).map_err(|e| SamplerError::Format(format!("scope: {e}")))?;
    scope.validate(&scene).map_err(SamplerError::Format)?;
    if let Some(d) = activity.objects.iter().find(|d| scope.get(&d.term).is_none()) {
        return Err(SamplerError::Format(format!("scope does not bind `{}`", d.term)));
    }
    let report = check_init(activity, &scope, taxonomy, &scene, predicate_params)?;
    let failed: Vec<String> = report.failed_leaves().map(|l| l.expr.clone()).collect();
    if !failed.is_empty() && strict {
        return Err(SamplerError::InitViolated(failed));
    }
    let warnings = failed
        .into_iter()
        .map(|leaf| format!("init literal not satisfied: {leaf}"))
        .collect();
    Ok(Presampled {
        instance: SampledInstance { scene, scope, activity_name: activity.problem_name.clone(), seed: None },
        report,
        warnings,
    })
}
