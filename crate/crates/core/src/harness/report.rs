use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::csvio::{read_table, Table};
use super::svg::{self, Series};
use super::{curve_summary, CURVES_SCHEMA, GRID_SCHEMA, MOVING_SCHEMA};
use crate::error::{Error, Result};
use crate::train::METRICS_SCHEMA;

const KNOWN: [&str; 4] = [METRICS_SCHEMA, CURVES_SCHEMA, GRID_SCHEMA, MOVING_SCHEMA];

fn check_version(t: &Table) -> Result<()> {
    if KNOWN.contains(&t.schema.as_str()) {
        return Ok(());
    }
    match KNOWN.iter().find(|k| k.trim_start_matches("#schema=").split('/').next() == Some(t.schema_name())) {
        Some(k) => Err(Error::Schema(format!("{}: `{}` does not match supported `{k}`", t.origin, t.schema))),
        None => Err(Error::Schema(format!("{}: unknown schema `{}`", t.origin, t.schema))),
    }
}

fn curves_figure(t: &Table) -> Result<(String, String)> {
    let labels = t.strings("arm")?;
    let epochs = t.numbers("epoch")?;
    let success = t.numbers("success")?;
    let rows: Vec<(String, u64, f64)> =
        labels.iter().zip(&epochs).zip(&success).map(|((l, e), s)| (l.to_string(), *e as u64, *s)).collect();
    let summary = curve_summary(&rows);
    let mut by_arm: BTreeMap<String, Vec<(u64, f64, f64, usize)>> = BTreeMap::new();
    for ((arm, epoch), (m, se, n)) in &summary {
        by_arm.entry(arm.clone()).or_default().push((*epoch, *m, *se, *n));
    }
    let mut text = String::from("arm,epoch,mean_success,stderr,n\n");
    let series: Vec<Series> = by_arm
        .iter()
        .map(|(arm, pts)| {
            for (e, m, se, n) in pts {
                let _ = writeln!(text, "{arm},{e},{m:.4},{se:.4},{n}");
            }
            Series {
                label: arm.clone(),
                points: pts.iter().map(|p| (p.0 as f64, p.1)).collect(),
                band: Some(pts.iter().map(|p| p.2).collect()),
            }
        })
        .collect();
    Ok((svg::line_plot("Success rate (mean ± s.e.)", "epoch", "success rate", &series, Some((0.0, 1.0))), text))
}

fn metrics_figure(t: &Table) -> Result<(String, String)> {
    let epochs = t.numbers("epoch")?;
    let success = t.numbers("eval_success_rate")?;
    for c in ["env_steps", "critic_loss", "actor_obj", "r_p", "r_alpha", "r_c", "r_a", "r_I"] {
        t.column(c)?;
    }
    let points: Vec<(f64, f64)> = epochs.into_iter().zip(success).collect();
    let text = match points.last() {
        Some((e, s)) => format!("final epoch {e}: eval success {s:.4}\n"),
        None => "no evaluations\n".to_string(),
    };
    let series = vec![Series { label: "eval".into(), points, band: None }];
    Ok((svg::line_plot("Evaluation success", "epoch", "success rate", &series, Some((0.0, 1.0))), text))
}

fn grid_figure(t: &Table) -> Result<(String, String)> {
    let yaw = t.numbers("yaw_deg")?;
    let pitch = t.numbers("pitch_deg")?;
    let reachable = t.strings("reachable")?;
    let rate = t.strings("success_rate")?;
    let mut ys: Vec<f64> = yaw.clone();
    let mut ps: Vec<f64> = pitch.clone();
    for v in [&mut ys, &mut ps] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let mut values = vec![vec![None; ys.len()]; ps.len()];
    let mut text = String::new();
    for k in 0..yaw.len() {
        let c = ys.iter().position(|v| *v == yaw[k]).expect("collected above");
        let r = ps.iter().position(|v| *v == pitch[k]).expect("collected above");
        if reachable[k] == "true" {
            values[r][c] = rate[k].parse::<f64>().ok();
        }
    }
    let reached: Vec<f64> = values.iter().flatten().flatten().copied().collect();
    let _ = writeln!(
        text,
        "{} cells, {} reachable, mean success {:.4}",
        yaw.len(),
        reached.len(),
        reached.iter().sum::<f64>() / reached.len().max(1) as f64
    );
    let fmt = |v: &Vec<f64>| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>();
    Ok((svg::heatmap("Success by target orientation", "yaw (deg)", "pitch (deg)", &fmt(&ys), &fmt(&ps), &values), text))
}

fn moving_figure(t: &Table) -> Result<(String, String)> {
    let speed = t.numbers("speed")?;
    let rate = t.numbers("success_rate")?;
    let se = t.numbers("stderr")?;
    let mut text = String::new();
    for (s, r) in speed.iter().zip(&rate) {
        let _ = writeln!(text, "speed {s}: success {r:.4}");
    }
    let series = vec![Series { label: "moving".into(), points: speed.into_iter().zip(rate).collect(), band: Some(se) }];
    Ok((svg::line_plot("Success vs target speed", "speed (m/s)", "success rate", &series, Some((0.0, 1.0))), text))
}

/// SVG and summary text for one CSV file.
pub fn render_file(path: &Path) -> Result<(String, String)> {
    let t = read_table(path)?;
    check_version(&t)?;
    match t.schema.as_str() {
        s if s == CURVES_SCHEMA => curves_figure(&t),
        s if s == METRICS_SCHEMA => metrics_figure(&t),
        s if s == GRID_SCHEMA => grid_figure(&t),
        _ => moving_figure(&t),
    }
}

/// Write `<stem>.svg` per input plus `summary.txt` into `out`.
pub fn emit_report(files: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut written = Vec::new();
    let mut summary = String::new();
    for f in files {
        let (svg, text) = render_file(f)?;
        let stem = f.file_stem().map_or("report".into(), |s| s.to_string_lossy().into_owned());
        let path = out.join(format!("{stem}.svg"));
        std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
        let _ = writeln!(summary, "== {stem}\n{text}");
        written.push(path);
    }
    let path = out.join("summary.txt");
    std::fs::write(&path, summary).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}
