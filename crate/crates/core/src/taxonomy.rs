//! Synset forest, subsumption, and grounding of activity terms onto scene
//! instances.
//!
//! Taxonomy files are line-oriented text with two sections:
//!
//! ```text
//! [hierarchy]
//! apple.n.01 fruit.n.01     # child parent
//! fruit.n.01 food.n.01
//! food.n.01                 # a root may be listed alone
//! [categories]
//! apple apple.n.01          # scene category -> synset
//! ```
//!
//! Rooms are instances of [`FLOOR_SYNSET`], so `floor.n.01_1`-style terms
//! ground to room ids.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::parser::Activity;
use crate::scene::{room_type, world_aabb, SceneState};

pub const FLOOR_SYNSET: &str = "floor.n.01";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaxonomyError {
    #[error("taxonomy line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("cycle in synset hierarchy: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("category maps to unknown synset `{0}`")]
    DanglingReference(String),
    #[error("synset `{0}` has more than one parent")]
    MultipleParents(String),
    #[error("unknown synset `{0}`")]
    UnknownSynset(String),
    #[error("no injective assignment exists for term `{0}`")]
    Unsatisfiable(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Taxonomy {
    nodes: BTreeSet<String>,
    parent_of: BTreeMap<String, Option<String>>,
    category_to_synset: BTreeMap<String, String>,
}

impl Taxonomy {
    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    pub fn contains(&self, synset: &str) -> bool {
        self.nodes.contains(synset)
    }

    pub fn parent(&self, synset: &str) -> Option<&str> {
        self.parent_of.get(synset).and_then(|p| p.as_deref())
    }

    /// Synset of a scene category. A category that is itself a synset name
    /// resolves to that synset.
    pub fn synset_of_category(&self, category: &str) -> Option<&str> {
        self.category_to_synset
            .get(category)
            .map(String::as_str)
            .or_else(|| self.nodes.get(category).map(String::as_str))
    }

    /// The synset followed by its ancestors, nearest first.
    pub fn ancestors<'a>(&'a self, synset: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        std::iter::successors(Some(synset), move |s| self.parent(s))
    }

    fn check(&self, synset: &str) -> Result<(), TaxonomyError> {
        if self.contains(synset) {
            Ok(())
        } else {
            Err(TaxonomyError::UnknownSynset(synset.to_string()))
        }
    }
}

/// Parses a taxonomy file and checks that the hierarchy is a forest.
pub fn load_taxonomy(source: &str) -> Result<Taxonomy, TaxonomyError> {
    #[derive(PartialEq)]
    enum Sec {
        None,
        Hierarchy,
        Categories,
    }
    let mut sec = Sec::None;
    let mut tax = Taxonomy::default();
    let mut categories = Vec::new();

    for (i, raw) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "[hierarchy]" => {
                sec = Sec::Hierarchy;
                continue;
            }
            "[categories]" => {
                sec = Sec::Categories;
                continue;
            }
            _ => {}
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match (&sec, fields.as_slice()) {
            (Sec::Hierarchy, [root]) => {
                tax.nodes.insert(root.to_string());
                tax.parent_of.entry(root.to_string()).or_insert(None);
            }
            (Sec::Hierarchy, [child, parent]) => {
                let prev = tax.parent_of.insert(child.to_string(), Some(parent.to_string()));
                if matches!(prev, Some(Some(p)) if p != *parent) {
                    return Err(TaxonomyError::MultipleParents(child.to_string()));
                }
                tax.nodes.insert(child.to_string());
                tax.nodes.insert(parent.to_string());
                tax.parent_of.entry(parent.to_string()).or_insert(None);
            }
            (Sec::Categories, [category, synset]) => categories.push((category.to_string(), synset.to_string())),
            (Sec::None, _) => {
                return Err(TaxonomyError::Format { line: line_no, message: "entry before any section header".into() })
            }
            _ => {
                return Err(TaxonomyError::Format {
                    line: line_no,
                    message: format!("expected two names, got `{line}`"),
                })
            }
        }
    }

    for (category, synset) in categories {
        if !tax.nodes.contains(&synset) {
            return Err(TaxonomyError::DanglingReference(synset));
        }
        tax.category_to_synset.insert(category, synset);
    }

    // every walk to a root must terminate
    let mut settled: BTreeSet<&str> = BTreeSet::new();
    for start in &tax.nodes {
        let mut path: Vec<&str> = Vec::new();
        let mut cur = Some(start.as_str());
        while let Some(s) = cur {
            if settled.contains(s) {
                break;
            }
            if let Some(pos) = path.iter().position(|p| *p == s) {
                let mut cycle: Vec<String> = path[pos..].iter().map(|s| s.to_string()).collect();
                cycle.push(s.to_string());
                return Err(TaxonomyError::CycleDetected(cycle));
            }
            path.push(s);
            cur = tax.parent(s);
        }
        settled.extend(path);
    }
    Ok(tax)
}

/// True iff `ancestor` is reachable from `synset` by zero or more parent links.
pub fn is_a(taxonomy: &Taxonomy, synset: &str, ancestor: &str) -> Result<bool, TaxonomyError> {
    taxonomy.check(synset)?;
    taxonomy.check(ancestor)?;
    Ok(taxonomy.ancestors(synset).any(|s| s == ancestor))
}

fn subsumed(taxonomy: &Taxonomy, synset: &str, ancestor: &str) -> bool {
    taxonomy.ancestors(synset).any(|s| s == ancestor)
}

/// Scene instances whose synset falls under `synset`, sorted by id. Rooms
/// count as instances of the floor synset.
pub fn candidate_instances(
    taxonomy: &Taxonomy,
    synset: &str,
    scene: &SceneState,
) -> Result<Vec<String>, TaxonomyError> {
    taxonomy.check(synset)?;
    let mut out: Vec<String> = scene
        .objects
        .values()
        .filter(|o| {
            taxonomy
                .synset_of_category(&o.category)
                .is_some_and(|s| subsumed(taxonomy, s, synset))
        })
        .map(|o| o.id.clone())
        .collect();
    if taxonomy.contains(FLOOR_SYNSET) && subsumed(taxonomy, FLOOR_SYNSET, synset) {
        out.extend(scene.rooms.keys().cloned());
        out.sort();
    }
    Ok(out)
}

/// Activity term to scene instance (object or room id).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroundScope {
    bindings: BTreeMap<String, String>,
}

impl GroundScope {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, term: &str) -> Option<&str> {
        self.bindings.get(term).map(String::as_str)
    }

    pub fn bind(&mut self, term: impl Into<String>, instance: impl Into<String>) {
        self.bindings.insert(term.into(), instance.into());
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Checks injectivity and that every bound instance exists in `scene`.
    pub fn validate(&self, scene: &SceneState) -> Result<(), String> {
        let mut seen = BTreeMap::new();
        for (term, id) in &self.bindings {
            if scene.object(id).is_none() && scene.room(id).is_none() {
                return Err(format!("`{term}` is bound to missing instance `{id}`"));
            }
            if let Some(other) = seen.insert(id, term) {
                return Err(format!("`{other}` and `{term}` share instance `{id}`"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scope serializes");
        s.push('\n');
        s
    }

    pub fn from_json(source: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(source)
    }
}

/// Candidates for one declared term, after applying the activity's
/// `inroom` directives for that term.
pub fn term_candidates(
    activity: &Activity,
    taxonomy: &Taxonomy,
    scene: &SceneState,
    term: &str,
) -> Result<Vec<String>, TaxonomyError> {
    let synset = activity
        .synset_of(term)
        .ok_or_else(|| TaxonomyError::Unsatisfiable(term.to_string()))?;
    let rooms: Vec<&str> = activity
        .init
        .iter()
        .filter(|l| !l.negated && l.atom.is_inroom() && l.atom.args.first().is_some_and(|a| a == term))
        .filter_map(|l| l.atom.args.get(1).map(String::as_str))
        .collect();
    let mut cands = candidate_instances(taxonomy, synset, scene)?;
    if !rooms.is_empty() {
        cands.retain(|id| {
            let ty = instance_room(scene, id).map(room_type);
            ty.is_some_and(|ty| rooms.iter().all(|r| *r == ty))
        });
    }
    Ok(cands)
}

/// Room id an instance belongs to: a room is its own room; an object uses
/// its declared room, else the room under its box center.
pub fn instance_room<'s>(scene: &'s SceneState, id: &str) -> Option<&'s str> {
    if let Some(room) = scene.room(id) {
        return Some(room.id.as_str());
    }
    let obj = scene.object(id)?;
    if let Some(r) = &obj.room_id {
        return Some(r.as_str());
    }
    let c = world_aabb(obj).center();
    scene.room_containing(c.x, c.y).map(|r| r.id.as_str())
}

/// Binds every declared term to a distinct candidate instance.
pub fn ground_terms(
    activity: &Activity,
    taxonomy: &Taxonomy,
    scene: &SceneState,
    seed: u64,
) -> Result<GroundScope, TaxonomyError> {
    ground_selected_terms(activity, taxonomy, scene, seed, |_| true)
}

/// Like [`ground_terms`] but only for terms accepted by `select`.
pub fn ground_selected_terms(
    activity: &Activity,
    taxonomy: &Taxonomy,
    scene: &SceneState,
    seed: u64,
    select: impl Fn(&str) -> bool,
) -> Result<GroundScope, TaxonomyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    for decl in activity.objects.iter().filter(|d| select(&d.term)) {
        let mut cands = term_candidates(activity, taxonomy, scene, &decl.term)?;
        cands.shuffle(&mut rng);
        terms.push((decl.term.clone(), cands));
    }
    let assignment = injective_assignment(&terms)?;
    let mut scope = GroundScope::new();
    for ((term, cands), idx) in terms.iter().zip(assignment) {
        scope.bind(term.clone(), cands[idx].clone());
    }
    Ok(scope)
}

/// Augmenting-path bipartite matching. Returns, per term, the index of its
/// chosen candidate. Candidate order encodes preference.
fn injective_assignment(terms: &[(String, Vec<String>)]) -> Result<Vec<usize>, TaxonomyError> {
    let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
    let mut choice: Vec<Option<usize>> = vec![None; terms.len()];

    fn augment<'a>(
        t: usize,
        terms: &'a [(String, Vec<String>)],
        owner: &mut BTreeMap<&'a str, usize>,
        choice: &mut [Option<usize>],
        visited: &mut BTreeSet<&'a str>,
    ) -> bool {
        for (ci, inst) in terms[t].1.iter().enumerate() {
            if !visited.insert(inst.as_str()) {
                continue;
            }
            let free = match owner.get(inst.as_str()).copied() {
                None => true,
                Some(other) => augment(other, terms, owner, choice, visited),
            };
            if free {
                owner.insert(inst.as_str(), t);
                choice[t] = Some(ci);
                return true;
            }
        }
        false
    }

    for t in 0..terms.len() {
        let mut visited = BTreeSet::new();
        if !augment(t, terms, &mut owner, &mut choice, &mut visited) {
            return Err(TaxonomyError::Unsatisfiable(terms[t].0.clone()));
        }
    }
    Ok(choice.into_iter().map(|c| c.expect("every term matched")).collect())
}
