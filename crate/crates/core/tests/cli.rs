use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ssh_hoti::config::ExperimentConfig;
use ssh_hoti::output::read_manifest;

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssh-hoti"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const QUICK: &str = r#"
[run]
k_points_per_segment = 8
gap_grid = 41
wilson_grid = 41
realizations = 4
disorder_levels = [0.0, 0.1]
z_grid = [0.0, 10.0, 20.0]
"#;

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == "csv") {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn every_subcommand_writes_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), QUICK);
    for cmd in ["bands", "invariants", "spectrum", "evolve", "disorder-sweep", "coupler", "entangle"] {
        let out = tmp.path().join(cmd);
        let o = bin(&[cmd, "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let m = read_manifest(&out).unwrap();
        assert_eq!(m.command, cmd);
        assert!(!m.outputs.is_empty());
        for f in &m.outputs {
            assert!(out.join(f).exists(), "{cmd}: missing {f}");
        }
    }
}

#[test]
fn identical_inputs_give_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), QUICK);
    for cmd in ["disorder-sweep", "spectrum", "evolve"] {
        let a = tmp.path().join(format!("{cmd}-a"));
        let b = tmp.path().join(format!("{cmd}-b"));
        for (dir, threads) in [(&a, "1"), (&b, "3")] {
            let o = bin(
                &[cmd, "--config", &cfg, "--seed", "11", "--threads", threads, "--out", dir.to_str().unwrap()],
                tmp.path(),
            );
            assert!(o.status.success());
        }
        let (fa, fb) = (csv_files(&a), csv_files(&b));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{cmd} outputs differ");
    }
}

#[test]
fn manifest_config_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), QUICK);
    let first = tmp.path().join("first");
    assert!(bin(&["disorder-sweep", "--config", &cfg, "--seed", "5", "--out", first.to_str().unwrap()], tmp.path())
        .status
        .success());
    let m = read_manifest(&first).unwrap();
    assert_eq!(m.seed, 5);
    assert_eq!(m.config_sha256, m.config.hash().unwrap());

    let second = tmp.path().join("second");
    let mut config = m.config.clone();
    config.output.dir = None;
    let cfg2 = tmp.path().join("replay.toml");
    fs::write(&cfg2, config.to_toml_string().unwrap()).unwrap();
    assert!(bin(
        &["disorder-sweep", "--config", cfg2.to_str().unwrap(), "--out", second.to_str().unwrap()],
        tmp.path()
    )
    .status
    .success());
    assert_eq!(csv_files(&first), csv_files(&second));
}

#[test]
fn seed_changes_disorder_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), QUICK);
    let run = |seed: &str| {
        let dir = tmp.path().join(format!("s{seed}"));
        assert!(bin(&["disorder-sweep", "--config", &cfg, "--seed", seed, "--out", dir.to_str().unwrap()], tmp.path())
            .status
            .success());
        fs::read(dir.join("realizations.csv")).unwrap()
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn json_format_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), QUICK);
    let out = tmp.path().join("bands");
    let o = bin(&["bands", "--config", &cfg, "--format", "json", "--out", out.to_str().unwrap()], tmp.path());
    assert!(o.status.success());
    let rows: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("bands.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3 * 8 + 1);
    assert!(rows[0]["E1"].is_f64());
    assert!(!out.join("bands.csv").exists());
}

#[test]
fn default_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin(&["coupler"], tmp.path());
    assert!(o.status.success());
    assert!(tmp.path().join("out/coupler/manifest.json").exists());
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write_config(tmp.path(), "[run]\nnot_a_key = 1\n");
    assert_eq!(bin(&["bands", "--config", &bad], tmp.path()).status.code(), Some(2));
    assert_eq!(bin(&["bands", "--config", "missing.toml"], tmp.path()).status.code(), Some(2));
    assert_eq!(bin(&["reproduce", "fig7"], tmp.path()).status.code(), Some(2));
    assert_eq!(bin(&["bands", "--format", "xml"], tmp.path()).status.code(), Some(2));
    assert_eq!(bin(&["bands", "--threads", "0"], tmp.path()).status.code(), Some(2));
    let o = bin(&["reproduce", "fig7"], tmp.path());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("fig1") && err.contains("robustness"));
}

#[test]
fn gapless_request_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[lattice]\nnx_cells = 4\nny_cells = 4\nd_a_x = 12.0\nd_a_y = 12.0\nd_b_x = 12.0\nd_b_y = 12.0\n",
    );
    assert_eq!(bin(&["invariants", "--config", &cfg], tmp.path()).status.code(), Some(3));
}

#[test]
fn bands_rows_match_path_points() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), QUICK);
    let out = tmp.path().join("b");
    assert!(bin(&["bands", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path()).status.success());
    let text = fs::read_to_string(out.join("bands.csv")).unwrap();
    let gap: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("gap.json")).unwrap()).unwrap();
    assert_eq!(text.lines().count() - 1, gap["path_points"].as_u64().unwrap() as usize);
}

#[test]
fn reproduce_fig4_covers_the_separation_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fig4");
    assert!(bin(&["reproduce", "fig4", "--out", out.to_str().unwrap()], tmp.path()).status.success());
    let text = fs::read_to_string(out.join("finite_gap.csv")).unwrap();
    let d_a: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(d_a.len(), 5);
    for (got, want) in d_a.iter().zip([13.0, 13.1, 13.2, 13.3, 13.4]) {
        assert!((got - want).abs() < 1e-9);
    }
}

#[test]
fn reproduce_fig2_emits_thirty_lattices() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fig2");
    assert!(bin(&["reproduce", "fig2", "--out", out.to_str().unwrap()], tmp.path()).status.success());
    let text = fs::read_to_string(out.join("lattice_grid.csv")).unwrap();
    assert_eq!(text.lines().count() - 1, 30);
    let m = read_manifest(&out).unwrap();
    let images = m.outputs.iter().filter(|f| f.starts_with("lattices/") && f.ends_with(".pgm")).count();
    assert_eq!(images, 30);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut count = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        count += 1;
    }
    assert!(count >= 2);
}
