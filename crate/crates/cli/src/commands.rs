//! Subcommand implementations. Each writes machine output to `out`,
//! diagnostics to `err`, and returns the process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use bddl_core::bench::{run_bench, speedup_table, synthetic_workload, BenchConfig, BenchReport};
use bddl_core::logic::{check_init, compile, score_goal};
use bddl_core::parser::{classify_kinematic, default_supported, parse_activity, Activity};
use bddl_core::sampler::{load_presampled, sample_instance, SampledInstance, SamplingContext};
use bddl_core::scene::{apply_frame, load_scene, parse_trajectory, SceneError};
use bddl_core::taxonomy::GroundScope;
use serde_json::json;
use walkdir::WalkDir;

use crate::config::EngineConfig;
use crate::manifest::{parse_manifest, render_markdown, render_plain};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_activity(path: &Path) -> Result<Activity> {
    let src = read(path)?;
    parse_activity(&src).map_err(|e| anyhow!("{}:{e}", path.display()))
}

/// Files named directly plus every `.bddl` file under named directories,
/// in path order.
pub fn collect_bddl(paths: &[PathBuf]) -> Vec<PathBuf> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = WalkDir::new(p)
                .into_iter()
                .filter_map(|e| e.ok())
                .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "bddl"))
                .map(|e| e.into_path())
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    files
}

pub fn validate(paths: &[PathBuf], out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut code = EXIT_OK;
    for file in collect_bddl(paths) {
        let name = file.display().to_string();
        let result = read(&file).and_then(|src| parse_activity(&src).map_err(|e| anyhow!("{name}:{e}")));
        match result {
            Ok(_) => writeln!(out, "{}", json!({ "path": name, "ok": true }))?,
            Err(e) => {
                code = EXIT_DOMAIN;
                writeln!(err, "{e:#}")?;
                writeln!(out, "{}", json!({ "path": name, "ok": false, "error": format!("{e:#}") }))?;
            }
        }
    }
    Ok(code)
}

pub fn classify(
    paths: &[PathBuf],
    supported: Option<&[String]>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let supported = match supported {
        Some(list) => list.iter().map(|s| s.to_ascii_lowercase()).collect(),
        None => default_supported(),
    };
    let (mut kinematic, mut total) = (0usize, 0usize);
    for file in collect_bddl(paths) {
        total += 1;
        let name = file.display().to_string();
        match load_activity(&file) {
            Ok(act) => {
                let c = classify_kinematic(&act, &supported);
                kinematic += usize::from(c.kinematic_only);
                let line = json!({
                    "path": name,
                    "activity": act.problem_name,
                    "kinematic_only": c.kinematic_only,
                    "unsupported_predicates": c.unsupported_predicates,
                });
                writeln!(out, "{line}")?;
            }
            Err(e) => {
                writeln!(err, "{e:#}")?;
                let line = json!({ "path": name, "kinematic_only": false, "parse_error": format!("{e:#}") });
                writeln!(out, "{line}")?;
            }
        }
    }
    let summary = format!("{kinematic} of {total} kinematic-only");
    writeln!(out, "{}", json!({ "summary": summary, "kinematic_only": kinematic, "total": total }))?;
    writeln!(err, "{summary}")?;
    Ok(EXIT_OK)
}

pub struct SampleArgs<'a> {
    pub activity: &'a Path,
    pub scene: &'a Path,
    pub seed: Option<u64>,
    pub out_scene: &'a Path,
    pub out_scope: &'a Path,
}

pub fn sample(args: SampleArgs<'_>, cfg: &EngineConfig, out: &mut dyn Write) -> Result<i32> {
    let activity = load_activity(args.activity)?;
    let scene = load_scene(&read(args.scene)?).with_context(|| args.scene.display().to_string())?;
    let taxonomy = cfg.taxonomy()?;
    let library = cfg.object_library()?;
    let mut params = cfg.sampler_params;
    if let Some(seed) = args.seed {
        params.seed = seed;
    }
    let ctx = SamplingContext { taxonomy: &taxonomy, library: &library, predicate_params: cfg.predicate_params };
    let SampledInstance { scene, scope, .. } = sample_instance(&activity, &scene, ctx, params)?;
    std::fs::write(args.out_scene, scene.to_json()).with_context(|| args.out_scene.display().to_string())?;
    std::fs::write(args.out_scope, scope.to_json()).with_context(|| args.out_scope.display().to_string())?;
    let report = check_init(&activity, &scope, &taxonomy, &scene, &cfg.predicate_params)?;
    writeln!(out, "{}", report.to_json())?;
    Ok(EXIT_OK)
}

struct Loaded {
    activity: Activity,
    instance: SampledInstance,
    taxonomy: bddl_core::taxonomy::Taxonomy,
}

fn load_instance(activity: &Path, scene: &Path, scope: &Path, cfg: &EngineConfig, err: &mut dyn Write) -> Result<Loaded> {
    let act = load_activity(activity)?;
    let taxonomy = cfg.taxonomy()?;
    let loaded = load_presampled(&read(scene)?, &read(scope)?, &act, &taxonomy, &cfg.predicate_params, cfg.strict)?;
    for w in &loaded.warnings {
        writeln!(err, "warning: {w}")?;
    }
    Ok(Loaded { activity: act, instance: loaded.instance, taxonomy })
}

pub fn evaluate(
    activity: &Path,
    scene: &Path,
    scope: &Path,
    init: bool,
    cfg: &EngineConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let l = load_instance(activity, scene, scope, cfg, err)?;
    let (scene, scope) = (&l.instance.scene, &l.instance.scope);
    let report = if init {
        check_init(&l.activity, scope, &l.taxonomy, scene, &cfg.predicate_params)?
    } else {
        let compiled = compile(&l.activity.goal, scope, &l.taxonomy, scene)?;
        score_goal(&compiled, scene, &cfg.predicate_params)?
    };
    writeln!(out, "{}", report.to_json())?;
    Ok(EXIT_OK)
}

pub struct ReplayArgs<'a> {
    pub activity: &'a Path,
    pub scene: &'a Path,
    pub scope: &'a Path,
    pub trajectory: &'a Path,
}

pub fn replay(args: ReplayArgs<'_>, cfg: &EngineConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let l = load_instance(args.activity, args.scene, args.scope, cfg, err)?;
    let frames = parse_trajectory(&read(args.trajectory)?).with_context(|| args.trajectory.display().to_string())?;
    let compiled = compile(&l.activity.goal, &l.instance.scope, &l.taxonomy, &l.instance.scene)?;
    let mut state = l.instance.scene;
    let mut first_success = None;
    let mut last_satisfied = false;
    for (index, frame) in frames.iter().enumerate() {
        state = apply_frame(&state, &frame.poses).map_err(|e| match e {
            SceneError::UnknownObject(id) => anyhow!("frame {index} (t={}): unknown object id `{id}`", frame.t),
            other => anyhow!("frame {index} (t={}): {other}", frame.t),
        })?;
        let report = score_goal(&compiled, &state, &cfg.predicate_params)?;
        if report.satisfied && first_success.is_none() {
            first_success = Some(frame.t);
        }
        last_satisfied = report.satisfied;
        let line = json!({ "t": frame.t, "satisfied": report.satisfied, "q_score": report.q_score, "leaves": report.leaves });
        writeln!(out, "{line}")?;
    }
    let summary = json!({
        "summary": { "frames": frames.len(), "satisfied": last_satisfied, "first_success_frame": first_success }
    });
    writeln!(out, "{summary}")?;
    Ok(EXIT_OK)
}

pub struct BenchArgs<'a> {
    pub workers: Vec<usize>,
    pub frames: usize,
    pub seed: u64,
    pub activity: Option<&'a Path>,
    pub scene: Option<&'a Path>,
    pub scope: Option<&'a Path>,
    pub tables: usize,
    pub duration_cap: Duration,
    pub json_out: Option<&'a Path>,
    pub baseline: Option<&'a Path>,
}

pub fn bench(args: BenchArgs<'_>, cfg: &EngineConfig, out: &mut dyn Write) -> Result<i32> {
    let (scene, activity, taxonomy) = match (args.activity, args.scene) {
        (Some(a), Some(s)) => {
            let scene = load_scene(&read(s)?).with_context(|| s.display().to_string())?;
            (scene, load_activity(a)?, cfg.taxonomy()?)
        }
        (None, None) => synthetic_workload(args.tables, args.seed),
        _ => return Err(anyhow!("--activity and --scene must be given together")),
    };
    let scope = match args.scope {
        Some(p) => Some(GroundScope::from_json(&read(p)?).with_context(|| p.display().to_string())?),
        None => None,
    };
    let config = BenchConfig {
        workers: args.workers,
        frames_per_worker: args.frames,
        scene,
        activity,
        taxonomy,
        scope,
        predicate_params: cfg.predicate_params,
        seed: args.seed,
        duration_cap: args.duration_cap,
    };
    let report = run_bench(&config)?;
    write!(out, "{}", report.render_table())?;
    if let Some(path) = args.json_out {
        std::fs::write(path, report.to_json()).with_context(|| path.display().to_string())?;
    }
    if let Some(path) = args.baseline {
        let baseline: BenchReport = serde_json::from_str(&read(path)?).with_context(|| path.display().to_string())?;
        writeln!(out)?;
        write!(out, "{}", speedup_table(&baseline, &report)?.render_table())?;
    }
    Ok(EXIT_OK)
}

pub fn stats(manifest: &Path, markdown: bool, out: &mut dyn Write) -> Result<i32> {
    let rows = parse_manifest(&read(manifest)?).with_context(|| manifest.display().to_string())?;
    let table = if markdown { render_markdown(&rows) } else { render_plain(&rows) };
    write!(out, "{table}")?;
    Ok(EXIT_OK)
}
