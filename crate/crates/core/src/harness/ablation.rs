use std::collections::BTreeMap;

use super::{AblationArm, CURVES_SCHEMA};
use crate::config::RunConfig;
use crate::par::Exec;
use crate::train::{training_loop, Checkpoint, FeatureSet, MetricRow};

/// Reward overrides for one ablation arm.
pub fn apply_arm(cfg: &RunConfig, arm: AblationArm) -> RunConfig {
    let mut c = cfg.clone();
    c.weights.k_pi = 0.0;
    c.weights.k_alphai = 0.0;
    match arm {
        AblationArm::Full => {}
        AblationArm::FullImitation => {
            [c.weights.k_pi, c.weights.k_alphai] = cfg.ablation.imitation_weights;
        }
        AblationArm::Baseline1 => c.demos.position_features = FeatureSet::Palm,
        AblationArm::Baseline2 => c.weights.k_c = Some(0.0),
    }
    c
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub epoch: u64,
    pub env_steps: u64,
    pub success: f64,
}

#[derive(Clone, Debug)]
pub struct RunCurve {
    pub arm: AblationArm,
    pub seed: u64,
    pub metrics: Vec<MetricRow>,
    pub checkpoint: Option<Checkpoint>,
    pub error: Option<String>,
}

impl RunCurve {
    pub fn points(&self) -> Vec<CurvePoint> {
        self.metrics
            .iter()
            .map(|r| CurvePoint { epoch: r.epoch, env_steps: r.env_steps, success: r.eval_success_rate })
            .collect()
    }

    pub fn final_success(&self) -> Option<f64> {
        self.metrics.last().map(|r| r.eval_success_rate)
    }
}

#[derive(Clone, Debug)]
pub struct AblationResult {
    pub runs: Vec<RunCurve>,
}

impl AblationResult {
    pub fn run(&self, arm: AblationArm, seed: u64) -> Option<&RunCurve> {
        self.runs.iter().find(|r| r.arm == arm && r.seed == seed)
    }

    /// Final success per seed for `arm`, in seed order of the run list.
    pub fn final_successes(&self, arm: AblationArm) -> Vec<f64> {
        self.runs.iter().filter(|r| r.arm == arm).filter_map(RunCurve::final_success).collect()
    }
}

/// Train every `(arm, seed)` pair. All arms use the same seeds, so episode
/// setups are paired across arms. A failing run is recorded and skipped.
pub fn ablation_run(cfg: &RunConfig, arms: &[AblationArm], seeds: &[u64], exec: Exec) -> AblationResult {
    let jobs: Vec<(AblationArm, u64)> = arms.iter().flat_map(|&a| seeds.iter().map(move |&s| (a, s))).collect();
    let runs = exec.map(&jobs, |&(arm, seed)| {
        let c = apply_arm(cfg, arm);
        match training_loop(&c, seed, None) {
            Ok(out) => RunCurve { arm, seed, metrics: out.metrics, checkpoint: Some(out.checkpoint), error: None },
            Err(e) => {
                log::warn!("ablation arm {arm} seed {seed} failed: {e}");
                RunCurve { arm, seed, metrics: Vec::new(), checkpoint: None, error: Some(e.to_string()) }
            }
        }
    });
    AblationResult { runs }
}

/// Long-format curves: one row per (arm, seed, evaluation).
pub fn curves_csv(result: &AblationResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["arm", "seed", "epoch", "env_steps", "success"]).expect("in-memory write");
    for r in &result.runs {
        for p in r.points() {
            w.write_record([
                r.arm.name().to_string(),
                r.seed.to_string(),
                p.epoch.to_string(),
                p.env_steps.to_string(),
                format!("{:?}", p.success),
            ])
            .expect("in-memory write");
        }
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
    format!("{CURVES_SCHEMA}\n{body}")
}

/// `(label, epoch) → (mean, standard error, n)` with the sample standard
/// deviation; the error is 0 for a single run.
pub fn curve_summary(rows: &[(String, u64, f64)]) -> BTreeMap<(String, u64), (f64, f64, usize)> {
    let mut groups: BTreeMap<(String, u64), Vec<f64>> = BTreeMap::new();
    for (label, epoch, v) in rows {
        groups.entry((label.clone(), *epoch)).or_default().push(*v);
    }
    groups
        .into_iter()
        .map(|(k, v)| {
            let n = v.len();
            let mean = v.iter().sum::<f64>() / n as f64;
            let se = if n > 1 {
                let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            (k, (mean, se, n))
        })
        .collect()
}
