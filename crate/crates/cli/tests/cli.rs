use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = r#"
[agent]
hidden = [16, 16]
batch_size = 32

[episode]
horizon = 40
n_e = 50
updates_per_round = 10

[train]
total_steps = 400
steps_per_epoch = 100
eval_every_epochs = 2
eval_episodes = 4
"#;

fn graspforge_log(level: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graspforge")).args(args).env("GRASPFORGE_LOG", level).output().unwrap()
}

fn graspforge(args: &[&str]) -> Output {
    graspforge_log("error", args)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&graspforge(&[])), 2);
    assert_eq!(code(&graspforge(&["frobnicate"])), 2);
    assert_eq!(code(&graspforge(&["train", "--seed", "minus-one"])), 2);
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = graspforge(&["train", "--config", missing.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nope.toml"), "{}", stderr(&o));

    let o = graspforge(&["extract", "--out", dir.path().to_str().unwrap(), "absent.mocap"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("absent.mocap"), "{}", stderr(&o));
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", "[train]\ntotal_steps = \"many\"\n");
    let o = graspforge(&["train", "--config", &bad, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));

    let mocap = dir.path().join("broken.mocap");
    std::fs::write(&mocap, "not a mocap file\n").unwrap();
    let o = graspforge(&["extract", "--out", dir.path().to_str().unwrap(), mocap.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));

    let csv = dir.path().join("v9.csv");
    std::fs::write(&csv, "#schema=graspforge-curves/9\narm,seed,epoch,env_steps,success\n").unwrap();
    let o = graspforge(&["report", "--out", dir.path().to_str().unwrap(), csv.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn diverging_training_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "diverge.toml",
        &TINY.replace("batch_size = 32", "batch_size = 32\ncritic_lr = 1e300\nactor_lr = 1e300"),
    );
    let o = graspforge(&["train", "--config", &cfg, "--out", dir.path().join("run").to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("non-finite"), "{}", stderr(&o));
}

#[test]
fn synth_extract_train_pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tiny.toml", TINY);
    let out = |n: &str| dir.path().join(n).to_string_lossy().into_owned();

    for run in ["s1", "s2"] {
        let o = graspforge(&["synth", "--kind", "clap", "--seed", "4", "--out", &out(run)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let demo = dir.path().join("s1/clap_seed4.mocap");
    assert_eq!(std::fs::read(&demo).unwrap(), std::fs::read(dir.path().join("s2/clap_seed4.mocap")).unwrap());
    let o = graspforge(&["extract", "--out", &out("goals"), demo.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("goals/clap_seed4.goal.json").exists());

    for run in ["t1", "t2"] {
        let o = graspforge(&["train", "--config", &cfg, "--seed", "2", "--out", &out(run)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for f in ["metrics.csv", "checkpoint.json", "config.toml"] {
        assert_eq!(
            std::fs::read(dir.path().join("t1").join(f)).unwrap(),
            std::fs::read(dir.path().join("t2").join(f)).unwrap(),
            "{f}"
        );
    }

    let ck = dir.path().join("t1/checkpoint.json");
    let o = graspforge(&["moving", "--checkpoint", ck.to_str().unwrap(), "--seed", "1", "--out", &out("m")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = graspforge(&["report", "--out", &out("r"), &out("m/moving.csv"), &out("t1/metrics.csv")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(std::fs::read_to_string(dir.path().join("r/moving.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn dump_scene_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = graspforge(&["dump-scene", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("scene.json")).unwrap();
    assert!(text.contains("\"obs_dim\""));
}

#[test]
fn log_level_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let quiet = graspforge_log("error", &["dump-scene", "--out", out]);
    assert_eq!(code(&quiet), 0);
    assert!(stderr(&quiet).is_empty(), "{}", stderr(&quiet));
    let loud = graspforge_log("debug", &["dump-scene", "--out", out]);
    assert_eq!(code(&loud), 0);
    assert!(stderr(&loud).contains("scene.json"), "{}", stderr(&loud));
}
