//! Command implementations behind the `graspforge` binary. Each writes its
//! outputs into `out` and returns the paths it wrote.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{
    ablation_run, curves_csv, emit_report, grid_csv, moving_csv, moving_events_csv, moving_target_eval,
    robustness_grid, AblationResult, RobustnessSpec,
};
use crate::config::RunConfig;
use crate::ddpg;
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mocap::{self, synth_demo, write_sequence, DemoKind};
use crate::par::Exec;
use crate::rng;
use crate::sim::{Scene, SceneConfig};
use crate::train::{contact_mask_for, metrics_csv, training_loop, Checkpoint, FeatureSet, Task, TrainOutcome};

/// Process exit code for an error: 3 for numerical failures, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    log::debug!("wrote {}", path.display());
    Ok(path.to_path_buf())
}

fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

/// Write a synthetic demonstration as `<kind>_seed<seed>.mocap`.
pub fn cmd_synth(kind: DemoKind, scene: &SceneConfig, seed: u64, out: &Path) -> Result<PathBuf> {
    ensure_dir(out)?;
    let scene = Scene::new(scene)?;
    let seq = synth_demo(kind, &scene, seed);
    write(&out.join(format!("{}_seed{seed}.mocap", kind.name())), write_sequence(&seq))
}

/// Extract one `<stem>.goal.json` per demonstration file.
pub fn cmd_extract(cfg: &RunConfig, files: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    if files.is_empty() {
        return Err(Error::Config("no demonstration files given".into()));
    }
    let seqs = files.iter().map(|f| mocap::load_sequence(f)).collect::<Result<Vec<_>>>()?;
    ensure_dir(out)?;
    let scene = Scene::new(&cfg.scene)?;
    files
        .iter()
        .zip(seqs)
        .map(|(f, seq)| {
            let mask = contact_mask_for(&cfg.demos, &scene, &seq)?;
            let mut goal = mocap::extract_reward_params(&seq, cfg.weights.k_p, cfg.weights.k_alpha, &mask)?;
            if cfg.demos.position_features == FeatureSet::Palm {
                goal.set_position_features(&seq, &[1], cfg.weights.k_p)?;
            }
            let stem = f.file_stem().map_or("demo".into(), |s| s.to_string_lossy().into_owned());
            let path = out.join(format!("{stem}.goal.json"));
            ddpg::save_versioned(&path, &goal)?;
            Ok(path)
        })
        .collect()
}

/// Train and write `config.toml`, `metrics.csv` and `checkpoint.json`.
pub fn cmd_train(cfg: &RunConfig, seed: u64, out: &Path) -> Result<TrainOutcome> {
    ensure_dir(out)?;
    write(&out.join("config.toml"), cfg.resolved().to_toml())?;
    let outcome = training_loop(cfg, seed, Some(out))?;
    write(&out.join("metrics.csv"), metrics_csv(&outcome.metrics))?;
    outcome.checkpoint.save(&out.join("checkpoint.json"))?;
    Ok(outcome)
}

/// Run every configured ablation arm × seed; writes `curves.csv`,
/// `naturalness.csv` and per-run metrics under `runs/`.
pub fn cmd_ablate(cfg: &RunConfig, out: &Path, exec: Exec) -> Result<AblationResult> {
    let spec = &cfg.ablation;
    if spec.arms.is_empty() || spec.seeds.is_empty() {
        return Err(Error::Config("ablation needs at least one arm and one seed".into()));
    }
    ensure_dir(out)?;
    let result = ablation_run(cfg, &spec.arms, &spec.seeds, exec);
    write(&out.join("curves.csv"), curves_csv(&result))?;
    let mut nat = String::from("arm,seed,final_success,wrist_deviation,error\n");
    for r in &result.runs {
        let dir = out.join("runs").join(format!("{}_seed{}", r.arm.name().replace('+', "_"), r.seed));
        ensure_dir(&dir)?;
        write(&dir.join("metrics.csv"), metrics_csv(&r.metrics))?;
        let deviation = match &r.checkpoint {
            Some(ck) => {
                let task = ck.task()?;
                let rot = task.cfg.episode.training_rotation();
                let ev = task.evaluate(&ck.policy(), r.seed, cfg.train.eval_episodes, &rot, None, exec)?;
                format!("{:?}", ev.wrist_deviation)
            }
            None => String::new(),
        };
        let fin = r.final_success().map_or(String::new(), |s| format!("{s:?}"));
        let err = r.error.as_deref().unwrap_or("").replace(',', ";");
        let _ = writeln!(nat, "{},{},{fin},{deviation},{err}", r.arm, r.seed);
    }
    write(&out.join("naturalness.csv"), nat)?;
    Ok(result)
}

fn spec_for(ck: &Checkpoint, spec: Option<&RobustnessSpec>, seed: Option<u64>) -> RobustnessSpec {
    let mut s = spec.cloned().unwrap_or_else(|| ck.run.robustness.clone());
    if let Some(seed) = seed {
        s.seeds = vec![seed];
    }
    s
}

/// Yaw × pitch grid; writes `grid.csv` and `grid.svg`.
pub fn cmd_robust(
    checkpoint: &Path,
    spec: Option<&RobustnessSpec>,
    seed: Option<u64>,
    out: &Path,
    exec: Exec,
) -> Result<Vec<PathBuf>> {
    let ck = Checkpoint::load(checkpoint)?;
    let spec = spec_for(&ck, spec, seed);
    let cells = robustness_grid(&ck, &spec, exec)?;
    ensure_dir(out)?;
    let csv = write(&out.join("grid.csv"), grid_csv(&cells))?;
    let (svg, _) = super::render_file(&csv)?;
    Ok(vec![csv, write(&out.join("grid.svg"), svg)?])
}

/// Success vs target speed; writes `moving.csv`, `moving_events.csv` and `moving.svg`.
pub fn cmd_moving(
    checkpoint: &Path,
    spec: Option<&RobustnessSpec>,
    seed: Option<u64>,
    out: &Path,
    exec: Exec,
) -> Result<Vec<PathBuf>> {
    let ck = Checkpoint::load(checkpoint)?;
    let spec = spec_for(&ck, spec, seed);
    let results = moving_target_eval(&ck, &spec, exec)?;
    ensure_dir(out)?;
    let csv = write(&out.join("moving.csv"), moving_csv(&results))?;
    let events = write(&out.join("moving_events.csv"), moving_events_csv(&results, ck.run.scene.dt))?;
    let (svg, _) = super::render_file(&csv)?;
    Ok(vec![csv, events, write(&out.join("moving.svg"), svg)?])
}

pub fn cmd_report(files: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    if files.is_empty() {
        return Err(Error::Config("no input files given".into()));
    }
    emit_report(files, out)
}

#[derive(Serialize)]
struct SceneDump {
    scene: SceneConfig,
    obs_dim: usize,
    n_action: usize,
    n_sensors: usize,
    arm_reach: f64,
    total_reach: f64,
    mid_pose: Vec<f64>,
    mid_pose_links: Vec<Vec3>,
    sample_episode: Option<EpisodeDump>,
}

#[derive(Serialize)]
struct EpisodeDump {
    demo: String,
    t_min: usize,
    j_min: usize,
    t_s: usize,
    q0: Vec<f64>,
    target_links: Vec<Vec3>,
    agent_links: Vec<Vec3>,
    goal_positions: Vec<Vec3>,
    contact_mask: Vec<bool>,
}

/// Write `scene.json`: resolved geometry, dimensions and one sampled episode start.
pub fn cmd_dump_scene(cfg: &RunConfig, seed: u64, out: &Path) -> Result<PathBuf> {
    let scene = Scene::new(&cfg.scene)?;
    let mid = scene.mid_pose();
    let task = Task::new(cfg)?;
    let setup = task.sample_setup(&cfg.episode.training_rotation(), &mut rng::stream(seed, rng::SETUP))?;
    let demo = &task.demos[setup.demo];
    let state = scene.reset(setup.target_pose, &setup.target_angles, &setup.q0)?;
    let sample = EpisodeDump {
        demo: demo.seq.source_id.clone(),
        t_min: demo.goal.t_min,
        j_min: demo.goal.j_min,
        t_s: setup.t_s,
        q0: setup.q0.clone(),
        target_links: scene.target_links(&state).iter().map(|p| p.pos).collect(),
        agent_links: scene.agent_hand_links(&state.q).iter().map(|p| p.pos).collect(),
        goal_positions: setup.goals.world_goal_pos.clone(),
        contact_mask: demo.goal.contact_mask.clone(),
    };
    let dump = SceneDump {
        scene: scene.config().clone(),
        obs_dim: scene.obs_dim(),
        n_action: scene.n_action(),
        n_sensors: scene.n_sensors(),
        arm_reach: scene.arm_reach(),
        total_reach: scene.total_reach(),
        mid_pose_links: scene.agent_hand_links(&mid).iter().map(|p| p.pos).collect(),
        mid_pose: mid,
        sample_episode: Some(sample),
    };
    ensure_dir(out)?;
    let text = serde_json::to_string_pretty(&dump).map_err(|e| Error::Config(e.to_string()))?;
    write(&out.join("scene.json"), text)
}
