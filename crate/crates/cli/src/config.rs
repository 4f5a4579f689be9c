//! Engine configuration file (TOML).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bddl_core::predicates::PredicateParams;
use bddl_core::sampler::{ObjectLibrary, SamplerParams};
use bddl_core::taxonomy::{load_taxonomy, Taxonomy};
use serde::Deserialize;

pub const CONFIG_ENV: &str = "ENGINE_CONFIG";
pub const DEFAULT_CONFIG: &str = "engine.toml";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub predicate_params: PredicateParams,
    pub sampler_params: SamplerParams,
    pub taxonomy_path: Option<PathBuf>,
    pub object_library_path: Option<PathBuf>,
    pub strict: bool,
}

impl EngineConfig {
    /// Parses a config; relative paths resolve against `base_dir`.
    pub fn from_toml(source: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: EngineConfig = toml::from_str(source).context("invalid engine config")?;
        for path in [&mut cfg.taxonomy_path, &mut cfg.object_library_path].into_iter().flatten() {
            if path.is_relative() {
                *path = base_dir.join(&*path);
            }
            if !path.exists() {
                bail!("configured path {} does not exist", path.display());
            }
        }
        cfg.predicate_params.validate().map_err(anyhow::Error::msg)?;
        cfg.sampler_params.validate().map_err(anyhow::Error::msg)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let source = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&source, base).with_context(|| format!("in {}", path.display()))
    }

    /// Loads `explicit` if given, else the file named by `ENGINE_CONFIG`,
    /// else `engine.toml` in the working directory if present, else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        if let Some(p) = explicit {
            return Self::from_file(p);
        }
        if let Some(p) = std::env::var_os(CONFIG_ENV) {
            return Self::from_file(Path::new(&p));
        }
        let default = Path::new(DEFAULT_CONFIG);
        if default.exists() {
            return Self::from_file(default);
        }
        Ok(Self::default())
    }

    pub fn taxonomy(&self) -> Result<Taxonomy> {
        let path = self.taxonomy_path.as_ref().context("no taxonomy_path configured")?;
        let source = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        load_taxonomy(&source).with_context(|| format!("in {}", path.display()))
    }

    pub fn object_library(&self) -> Result<ObjectLibrary> {
        let path = self.object_library_path.as_ref().context("no object_library_path configured")?;
        let source = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        ObjectLibrary::from_json(&source).with_context(|| format!("in {}", path.display()))
    }
}
