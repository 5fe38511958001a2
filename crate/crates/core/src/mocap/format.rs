//! Line-oriented text format.
//!
//! ```text
//! mocap v1 dt=<sec> nf=<int> ntf=<int> nalpha=<int>
//! <t> | <actor xyz ...> | <target xyz ...> | <target R row-major ...> | <actor angles> | <target angles>
//! ...
//! actor_features: <ids>
//! target_features: <ids>
//! actor_wrist: <id>
//! source: <free text>
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Numbers are parsed with
//! Rust's locale-independent float parser.

use std::fmt::Write as _;
use std::path::Path;

use super::{MocapFrame, MocapSequence};
use crate::error::{Error, Result};
use crate::geom::Rot3;

pub fn load_sequence(path: &Path) -> Result<MocapSequence> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sequence(&text)
}

struct Header {
    dt: f64,
    nf: usize,
    ntf: usize,
    nalpha: usize,
}

fn parse_header(line: &str, lineno: usize) -> Result<Header> {
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some("mocap") || tokens.next() != Some("v1") {
        return Err(Error::parse(lineno, "expected header `mocap v1 ...`"));
    }
    let (mut dt, mut nf, mut ntf, mut nalpha) = (None, None, None, None);
    for tok in tokens {
        let (key, val) = tok.split_once('=').ok_or_else(|| Error::parse(lineno, format!("bad field `{tok}`")))?;
        let int = || val.parse::<usize>().map_err(|_| Error::parse(lineno, format!("bad {key}")));
        match key {
            "dt" => dt = Some(val.parse::<f64>().map_err(|_| Error::parse(lineno, "bad dt"))?),
            "nf" => nf = Some(int()?),
            "ntf" => ntf = Some(int()?),
            "nalpha" => nalpha = Some(int()?),
            _ => return Err(Error::parse(lineno, format!("unknown header field `{key}`"))),
        }
    }
    let missing = |k: &str| Error::parse(lineno, format!("header is missing `{k}`"));
    Ok(Header {
        dt: dt.ok_or_else(|| missing("dt"))?,
        nf: nf.ok_or_else(|| missing("nf"))?,
        ntf: ntf.ok_or_else(|| missing("ntf"))?,
        nalpha: nalpha.ok_or_else(|| missing("nalpha"))?,
    })
}

fn floats(section: &str, lineno: usize) -> Result<Vec<f64>> {
    section
        .split_whitespace()
        .map(|s| s.parse::<f64>().map_err(|_| Error::parse(lineno, format!("bad number `{s}`"))))
        .collect()
}

fn ids(rest: &str, lineno: usize) -> Result<Vec<usize>> {
    rest.split_whitespace()
        .map(|s| s.parse::<usize>().map_err(|_| Error::parse(lineno, format!("bad id `{s}`"))))
        .collect()
}

fn parse_frame(line: &str, lineno: usize, h: &Header) -> Result<MocapFrame> {
    let sections: Vec<&str> = line.split('|').collect();
    if sections.len() != 6 {
        return Err(Error::parse(lineno, format!("expected 6 `|` sections, got {}", sections.len())));
    }
    let t = sections[0].trim().parse::<usize>().map_err(|_| Error::parse(lineno, "bad timestep index"))?;
    let actor = floats(sections[1], lineno)?;
    let target = floats(sections[2], lineno)?;
    let rots = floats(sections[3], lineno)?;
    let actor_angles = floats(sections[4], lineno)?;
    let target_angles = floats(sections[5], lineno)?;
    if actor.len() % 3 != 0 || target.len() % 3 != 0 {
        return Err(Error::parse(lineno, "position sections must hold xyz triples"));
    }
    if rots.len() != 3 * target.len() {
        return Err(Error::parse(lineno, "need one 3x3 rotation per target link"));
    }
    if actor_angles.len() != h.nalpha {
        return Err(Error::parse(
            lineno,
            format!("{} actor angles, header says nalpha={}", actor_angles.len(), h.nalpha),
        ));
    }
    Ok(MocapFrame {
        t,
        actor_link_pos: actor.chunks(3).map(|c| [c[0], c[1], c[2]]).collect(),
        target_link_pos: target.chunks(3).map(|c| [c[0], c[1], c[2]]).collect(),
        target_link_rot: rots.chunks(9).map(Rot3::from_rows).collect(),
        actor_angles,
        target_angles,
    })
}

/// Parse and validate a sequence.
pub fn parse_sequence(text: &str) -> Result<MocapSequence> {
    let mut header = None;
    let mut frames = Vec::new();
    let (mut actor_ids, mut target_ids, mut wrist, mut source) = (None, None, 0, String::new());
    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(h) = &header else {
            header = Some(parse_header(line, lineno)?);
            continue;
        };
        if let Some((key, rest)) = line.split_once(':') {
            match key.trim() {
                "actor_features" => actor_ids = Some(ids(rest, lineno)?),
                "target_features" => target_ids = Some(ids(rest, lineno)?),
                "actor_wrist" => wrist = rest.trim().parse().map_err(|_| Error::parse(lineno, "bad actor_wrist id"))?,
                "source" => source = rest.trim().to_string(),
                other => return Err(Error::parse(lineno, format!("unknown footer key `{other}`"))),
            }
            continue;
        }
        if actor_ids.is_some() || target_ids.is_some() {
            return Err(Error::parse(lineno, "frame line after footer"));
        }
        frames.push(parse_frame(line, lineno, h)?);
    }
    let h = header.ok_or(Error::Parse { line: None, msg: "empty file".into() })?;
    let actor_feature_ids =
        actor_ids.ok_or(Error::Parse { line: None, msg: "missing actor_features footer".into() })?;
    let target_feature_ids =
        target_ids.ok_or(Error::Parse { line: None, msg: "missing target_features footer".into() })?;
    if actor_feature_ids.len() != h.nf || target_feature_ids.len() != h.ntf {
        return Err(Error::Parse {
            line: None,
            msg: format!(
                "footer lists {} actor / {} target features, header says nf={} ntf={}",
                actor_feature_ids.len(),
                target_feature_ids.len(),
                h.nf,
                h.ntf
            ),
        });
    }
    let seq = MocapSequence {
        frames,
        dt: h.dt,
        actor_feature_ids,
        target_feature_ids,
        actor_wrist_id: wrist,
        source_id: source,
    };
    seq.validate()?;
    Ok(seq)
}

fn join(out: &mut String, vals: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in vals {
        if !first {
            out.push(' ');
        }
        first = false;
        // `{:?}` is shortest round-trip and always keeps a decimal point.
        write!(out, "{v:?}").unwrap();
    }
}

/// Serialize; `parse_sequence(&write_sequence(s)) == s` for valid sequences.
pub fn write_sequence(seq: &MocapSequence) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "mocap v1 dt={:?} nf={} ntf={} nalpha={}",
        seq.dt,
        seq.actor_feature_ids.len(),
        seq.target_feature_ids.len(),
        seq.n_alpha()
    )
    .unwrap();
    for fr in &seq.frames {
        write!(out, "{} | ", fr.t).unwrap();
        join(&mut out, fr.actor_link_pos.iter().flatten().copied());
        out.push_str(" | ");
        join(&mut out, fr.target_link_pos.iter().flatten().copied());
        out.push_str(" | ");
        join(&mut out, fr.target_link_rot.iter().flat_map(|r| r.rows()));
        out.push_str(" | ");
        join(&mut out, fr.actor_angles.iter().copied());
        out.push_str(" | ");
        join(&mut out, fr.target_angles.iter().copied());
        out.push('\n');
    }
    let list = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
    writeln!(out, "actor_features: {}", list(&seq.actor_feature_ids)).unwrap();
    writeln!(out, "target_features: {}", list(&seq.target_feature_ids)).unwrap();
    writeln!(out, "actor_wrist: {}", seq.actor_wrist_id).unwrap();
    if !seq.source_id.is_empty() {
        writeln!(out, "source: {}", seq.source_id).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    const ID: &str = "1 0 0 0 1 0 0 0 1";

    fn three_frames(indices: [usize; 3], rot: &str) -> String {
        let mut s = String::from("# hand-written\nmocap v1 dt=0.05 nf=1 ntf=1 nalpha=1\n");
        for (k, t) in indices.iter().enumerate() {
            s.push_str(&format!("{t} | 0.{k} 0 0 | 1 0 0 | {rot} | 0.1 | 0.2 0.3\n"));
        }
        s.push_str("actor_features: 0\ntarget_features: 0\n");
        s
    }

    #[test]
    fn well_formed_file() {
        let seq = parse_sequence(&three_frames([1, 2, 3], ID)).unwrap();
        assert_eq!(seq.len(), 3);
        assert_eq!(seq.dt, 0.05);
        assert_eq!(seq.frames[2].actor_link_pos[0], [0.2, 0.0, 0.0]);
        assert_eq!(seq.frames[0].target_angles, vec![0.2, 0.3]);
        assert_eq!(parse_sequence(&write_sequence(&seq)).unwrap(), seq);
    }

    #[test]
    fn gap_in_timesteps_names_frame() {
        let err = parse_sequence(&three_frames([1, 2, 4], ID)).unwrap_err();
        match err {
            Error::Invariant { frame: Some(4), .. } => {}
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn zero_rotation_rejected() {
        let err = parse_sequence(&three_frames([1, 2, 3], "0 0 0 0 0 0 0 0 0")).unwrap_err();
        assert!(err.to_string().contains("orthonormal"), "{err}");
    }

    #[test]
    fn malformed_lines() {
        assert!(parse_sequence("mocap v2 dt=1 nf=1 ntf=1 nalpha=0\n").is_err());
        let s = three_frames([1, 2, 3], ID).replace("0.1 | 0.2", "x | 0.2");
        assert!(matches!(parse_sequence(&s), Err(Error::Parse { line: Some(_), .. })));
        let s = three_frames([1, 2, 3], ID).replace("nf=1", "nf=2");
        assert!(parse_sequence(&s).is_err());
    }
}
