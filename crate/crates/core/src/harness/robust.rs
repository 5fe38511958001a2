use std::fmt::Write as _;

use super::{RobustnessSpec, EVENTS_SCHEMA, GRID_SCHEMA, MOVING_SCHEMA};
use crate::error::{Error, Result};
use crate::geom::{self, Axis, Pose, Rot3, Vec3};
use crate::par::Exec;
use crate::reward::resolve_goals;
use crate::train::{Checkpoint, Motion, Task};

/// `R_train · Rz(yaw) · Ry(pitch)`; exactly `R_train` at zero offset.
pub fn cell_rotation(train: &Rot3, yaw_deg: f64, pitch_deg: f64) -> Rot3 {
    if yaw_deg == 0.0 && pitch_deg == 0.0 {
        return *train;
    }
    train.mul(&Rot3::from_yaw_pitch(yaw_deg.to_radians(), pitch_deg.to_radians()))
}

/// Whether every goal of every demo, with the target at the centre of the
/// placement box and orientation `rot`, lies within `tol` of the arm's
/// workspace (a disc in the plane for an all-z-axis arm, a ball otherwise).
pub fn cell_reachable(task: &Task, rot: &Rot3, tol: f64) -> Result<bool> {
    let ec = &task.cfg.episode;
    let centre = geom::scale(geom::add(ec.target_pos_min, ec.target_pos_max), 0.5);
    let pose = Pose::new(centre, *rot);
    let scene = &task.scene;
    let planar = scene.config().arm_axes.iter().all(|a| *a == Axis::Z);
    let reach = scene.total_reach();
    for d in &task.demos {
        let angles = &d.seq.frame(ec.pregrasp_frame(d.goal.t_min)).target_angles;
        let links = scene.hand_links(&pose, angles);
        let goals = resolve_goals(&d.goal, &links[d.goal.j_min])?;
        for g in &goals.world_goal_pos {
            let ok = if planar {
                g[2].abs() <= tol && g[0].hypot(g[1]) <= reach + tol
            } else {
                geom::norm(*g) <= reach + tol
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridCell {
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub reachable: bool,
    /// Success rate per evaluation seed; empty when unreachable.
    pub per_seed: Vec<f64>,
    pub episodes: usize,
}

impl GridCell {
    pub fn success_rate(&self) -> Option<f64> {
        (!self.per_seed.is_empty()).then(|| self.per_seed.iter().sum::<f64>() / self.per_seed.len() as f64)
    }
}

/// Greedy success of the checkpoint's policy over the yaw × pitch grid.
/// Cells are evaluated in parallel under `exec`; results do not depend on it.
pub fn robustness_grid(ck: &Checkpoint, spec: &RobustnessSpec, exec: Exec) -> Result<Vec<GridCell>> {
    spec.validate()?;
    let task = ck.task()?;
    let policy = ck.policy();
    let train_rot = task.cfg.episode.training_rotation();
    let cells: Vec<(f64, f64)> =
        spec.pitch_deg.iter().flat_map(|&p| spec.yaw_deg.iter().map(move |&y| (y, p))).collect();
    exec.map(&cells, |&(yaw, pitch)| {
        let rot = cell_rotation(&train_rot, yaw, pitch);
        let reachable = cell_reachable(&task, &rot, spec.reach_tolerance)?;
        let mut per_seed = Vec::new();
        if reachable {
            for &seed in &spec.seeds {
                let ev = task.evaluate(&policy, seed, spec.episodes_per_cell, &rot, None, Exec::Sequential)?;
                per_seed.push(ev.success_rate());
            }
        }
        Ok(GridCell { yaw_deg: yaw, pitch_deg: pitch, reachable, per_seed, episodes: spec.episodes_per_cell })
    })
    .into_iter()
    .collect()
}

pub fn grid_csv(cells: &[GridCell]) -> String {
    let mut s = format!("{GRID_SCHEMA}\nyaw_deg,pitch_deg,reachable,success_rate,episodes,seeds\n");
    for c in cells {
        let rate = c.success_rate().map_or(String::new(), |r| format!("{r:?}"));
        let _ =
            writeln!(s, "{:?},{:?},{},{rate},{},{}", c.yaw_deg, c.pitch_deg, c.reachable, c.episodes, c.per_seed.len());
    }
    s
}

/// One direction change: `(seed, episode, step, direction)`.
pub type MotionEvent = (u64, usize, usize, Vec3);

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedResult {
    pub speed: f64,
    pub per_seed: Vec<f64>,
    pub events: Vec<MotionEvent>,
}

impl SpeedResult {
    pub fn success_rate(&self) -> f64 {
        self.per_seed.iter().sum::<f64>() / self.per_seed.len().max(1) as f64
    }

    pub fn stderr(&self) -> f64 {
        let n = self.per_seed.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.success_rate();
        let var = self.per_seed.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    }
}

/// Steps between direction changes for `period` seconds at time step `dt`.
pub fn period_steps(period: f64, dt: f64) -> Result<usize> {
    let k = (period / dt).round();
    if !(k >= 1.0) {
        return Err(Error::Config(format!("direction period {period} s is shorter than one step")));
    }
    Ok(k as usize)
}

/// Success rate per target speed, at the training orientation.
pub fn moving_target_eval(ck: &Checkpoint, spec: &RobustnessSpec, exec: Exec) -> Result<Vec<SpeedResult>> {
    spec.validate()?;
    let task = ck.task()?;
    let policy = ck.policy();
    let rot = task.cfg.episode.training_rotation();
    let steps = period_steps(spec.direction_change_period, task.scene.config().dt)?;
    spec.speeds
        .iter()
        .map(|&speed| {
            let motion = Motion { speed, period_steps: steps };
            let mut per_seed = Vec::new();
            let mut events = Vec::new();
            for &seed in &spec.seeds {
                let ev = task.evaluate(&policy, seed, spec.episodes_per_cell, &rot, Some(motion), exec)?;
                per_seed.push(ev.success_rate());
                for (ep, evs) in ev.motion_events.iter().enumerate() {
                    events.extend(evs.iter().map(|&(step, dir)| (seed, ep, step, dir)));
                }
            }
            Ok(SpeedResult { speed, per_seed, events })
        })
        .collect()
}

pub fn moving_csv(results: &[SpeedResult]) -> String {
    let mut s = format!("{MOVING_SCHEMA}\nspeed,success_rate,stderr,seeds\n");
    for r in results {
        let _ = writeln!(s, "{:?},{:?},{:?},{}", r.speed, r.success_rate(), r.stderr(), r.per_seed.len());
    }
    s
}

pub fn moving_events_csv(results: &[SpeedResult], dt: f64) -> String {
    let mut s = format!("{EVENTS_SCHEMA}\nspeed,seed,episode,step,time,dx,dy,dz\n");
    for r in results {
        for &(seed, ep, step, d) in &r.events {
            let _ =
                writeln!(s, "{:?},{seed},{ep},{step},{:?},{:?},{:?},{:?}", r.speed, step as f64 * dt, d[0], d[1], d[2]);
        }
    }
    s
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[0.9, 0.5, 0.4, 0.1]) + 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-12);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[0.5, 0.5, 0.5]), 0.0);
    }

    #[test]
    fn zero_offset_is_training_rotation() {
        let r = Rot3::about(Axis::Z, 2.0);
        assert_eq!(cell_rotation(&r, 0.0, 0.0), r);
        assert!(cell_rotation(&r, 15.0, -30.0).is_orthonormal(1e-12));
    }

    #[test]
    fn period_in_steps() {
        assert_eq!(period_steps(0.5, 0.02).unwrap(), 25);
        assert!(period_steps(0.001, 0.02).is_err());
    }
}
