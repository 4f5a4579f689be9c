//! Simulator-independent engine for household-activity tasks written in
//! BDDL: typed object terms, kinematic init conditions, and first-order
//! goal conditions over six geometric predicates.
//!
//! Pipeline: [`parser`] turns problem text into an [`parser::Activity`];
//! [`taxonomy`] grounds its terms onto a [`scene::SceneState`];
//! [`sampler`] creates (or verifies) instances satisfying the init list;
//! [`logic`] compiles goals and scores them with [`predicates`];
//! [`bench`] measures evaluation throughput across worker counts.

pub mod bench;
pub mod logic;
pub mod parser;
pub mod predicates;
pub mod sampler;
pub mod scene;
pub mod taxonomy;
