use std::fs;
use std::process::{Command, Output};

use ep_holonomy::io::track_from_json;
use ep_holonomy::{track, EPRecord, HamiltonianFamily, ParameterLoop, TrackOptions};
use tempfile::TempDir;

fn ephol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ephol")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn out_path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn read_eps(path: &str) -> Vec<EPRecord> {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const TWO_EP: &str =
    r#"{"vertices": [[0.9, 1.55], [2.4, 1.55], [2.4, 2.05], [0.9, 2.05]], "samples_per_segment": 200}"#;
const THREE_EP: &str =
    r#"{"vertices": [[1.0, 1.5], [3.3, 1.5], [3.3, 2.25], [1.0, 2.25]], "samples_per_segment": 200}"#;

#[test]
fn locate_paper_family_finds_three_eps() {
    let dir = TempDir::new().unwrap();
    let out = out_path(&dir, "eps.json");
    let o = ephol(&["locate", "--family", "paper3x3", "--region", "0.4,3.5,1.6,2.2", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let eps = read_eps(&out);
    assert_eq!(eps.len(), 3);
    let near = |a: f64, b: f64| {
        eps.iter().any(|e| (e.location.alpha - a).abs() <= 1e-3 && (e.location.beta - b).abs() <= 1e-3)
    };
    assert!(near(1.041, 1.948) && near(2.072, 1.686) && near(2.959, 2.052));
    assert!(stdout(&o).starts_with("3 EP(s)"));
}

#[test]
fn locate_tep_family_finds_origin() {
    let dir = TempDir::new().unwrap();
    let out = out_path(&dir, "eps.json");
    let o = ephol(&["locate", "--family", "tep3x3", "--region", "-1,1,-1,1", "--grid", "41,41", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let eps = read_eps(&out);
    assert_eq!(eps.len(), 1);
    assert!(eps[0].location.alpha.abs() < 1e-8 && eps[0].location.beta.abs() < 1e-8);
}

#[test]
fn locate_csv_writes_the_grid() {
    let o = ephol(&["locate", "--family", "paper2x2", "--region", "-1,1,-1,1", "--grid", "5,4", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,beta,min_gap,abs_discriminant");
    assert_eq!(lines.len(), 21);
    // beta is the slow index
    assert!(lines[1].starts_with("-1.0000000000000000e0,-1.0000000000000000e0,"));
    assert!(lines[2].starts_with("-5.0000000000000000e-1,-1.0000000000000000e0,"));
}

#[test]
fn outputs_are_deterministic() {
    let args = ["locate", "--family", "paper3x3", "--region", "0.4,3.5,1.6,2.2", "--grid", "80,40"];
    assert_eq!(ephol(&args).stdout, ephol(&args).stdout);
}

#[test]
fn malformed_config_names_the_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "run.json", r#"{"family": "paper3x3", "region": [0.4, 3.5, 1.6, 2.2], "grid": [10, "x"]}"#);
    let o = ephol(&["locate", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("`grid[1]`"), "{}", stderr(&o));

    let cfg = write(&dir, "typo.json", r#"{"family": "paper3x3", "regoin": [0, 1, 0, 1]}"#);
    let o = ephol(&["locate", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("regoin"), "{}", stderr(&o));

    let cfg = write(&dir, "syntax.json", r#"{"family": "paper3x3",,}"#);
    assert_eq!(code(&ephol(&["locate", "--config", &cfg])), 2);
}

#[test]
fn config_file_drives_a_run_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let out = out_path(&dir, "eps.json");
    let cfg = write(
        &dir,
        "run.json",
        &format!(r#"{{"family": "paper2x2", "region": [5, 6, 5, 6], "grid": [21, 21], "out": {out:?}}}"#),
    );
    let o = ephol(&["locate", "--config", &cfg, "--region", "-1,1,-1,1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read_eps(&out).len(), 1);
}

#[test]
fn two_ep_loop_needs_three_cycles() {
    let dir = TempDir::new().unwrap();
    let l = write(&dir, "loop.json", TWO_EP);
    let out = out_path(&dir, "track.json");
    let o = ephol(&["track", "--family", "paper3x3", "--loop", &l, "--cycles", "3", "--track-vectors", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = stdout(&o);
    assert!(summary.contains("order 3, signed order 3"), "{summary}");
    assert!(summary.contains("identity after cycle 3"), "{summary}");

    // The file re-parses into exactly what the library computes.
    let parsed = track_from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    let f = HamiltonianFamily::paper_3x3();
    let l = ParameterLoop::rectangle(0.9, 1.55, 2.4, 2.05, 200).unwrap().with_cycles(3);
    assert_eq!(parsed, track(&f, &l, TrackOptions::default().with_vectors()).unwrap());
}

#[test]
fn three_ep_loop_returns_one_mode_after_one_cycle() {
    let dir = TempDir::new().unwrap();
    let l = write(&dir, "loop.json", THREE_EP);
    let out = out_path(&dir, "track.json");
    let o = ephol(&["track", "--family", "paper3x3", "--loop", &l, "--cycles", "2", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = stdout(&o);
    assert!(summary.contains("identity after cycle 2"), "{summary}");
    let mut returns: Vec<&str> = summary.rsplit("modes return after ").next().unwrap().trim().split(',').collect();
    returns.sort();
    assert_eq!(returns, ["1", "2", "2"]);
}

#[test]
fn loop_through_an_ep_is_a_runtime_error() {
    let dir = TempDir::new().unwrap();
    // The bottom edge runs along beta = 1.948 through the EP near alpha = 1.0415.
    let l = write(
        &dir,
        "loop.json",
        r#"{"vertices": [[0.9, 1.9480027488707912], [1.2, 1.9480027488707912], [1.2, 2.1], [0.9, 2.1]], "samples_per_segment": 50}"#,
    );
    let o = ephol(&["track", "--family", "paper3x3", "--loop", &l]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("LoopTooCloseToEP"), "{}", stderr(&o));
}

#[test]
fn surface_row_count_matches_grid() {
    let dir = TempDir::new().unwrap();
    let out = out_path(&dir, "sheet.csv");
    let o =
        ephol(&["surface", "--family", "paper3x3", "--region", "0.4,3.5,1.6,2.2", "--grid", "175,60", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 10_501);
    assert_eq!(text.lines().next().unwrap(), "alpha,beta,re1,im1,re2,im2,re3,im3,flag");
}

#[test]
fn constant_family_gives_flat_clean_sheets() {
    let dir = TempDir::new().unwrap();
    let zero = "[[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]";
    let fam = write(
        &dir,
        "const.json",
        &format!(
            r#"{{"kind": "custom-affine", "n": 3, "base": [[1,0],[0,0],[0,0],[0,0],[2,0],[0,0],[0,0],[0,0],[3,0]], "grad_alpha": {zero}, "grad_beta": {zero}}}"#
        ),
    );
    let o = ephol(&["surface", "--family", &fam, "--region", "0,1,0,1", "--grid", "6,5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 30);
    for r in &rows {
        assert_eq!(&r[2..], &rows[0][2..]);
        assert_eq!(r[8], "0");
    }
}

#[test]
fn ep_on_a_grid_node_flags_its_scanline() {
    let dir = TempDir::new().unwrap();
    let out = out_path(&dir, "eps.json");
    assert_eq!(code(&ephol(&["locate", "--family", "paper3x3", "--region", "0.4,3.5,1.6,2.2", "--out", &out])), 0);
    let ep = read_eps(&out)[0].location;
    let region = format!("{},{},{},{}", ep.alpha - 0.2, ep.alpha + 0.2, ep.beta - 0.1, ep.beta + 0.1);
    let o = ephol(&["surface", "--family", "paper3x3", "--region", &region, "--grid", "9,5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let flagged: Vec<bool> = text.lines().skip(1).map(|l| l.ends_with(",1")).collect();
    assert!(flagged[18..27].iter().all(|&f| f), "{}", stderr(&o));
    assert!(stderr(&o).contains("scanline 2"));
}

#[test]
fn verify_algebra_suite_is_fast_and_passes() {
    let start = std::time::Instant::now();
    let o = ephol(&["verify", "--only", "algebra"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(start.elapsed().as_secs_f64() < 1.0);
    let text = stdout(&o);
    assert!(text.contains("PASS [6]") && text.contains("PASS [7]") && !text.contains("[1]"));
}

#[test]
fn verify_rejects_a_corrupted_family_file() {
    let dir = TempDir::new().unwrap();
    let fam = write(&dir, "bad.json", r#"{"kind": "paper3x3", "n": 3, "base": [[1, 0]]}"#);
    assert_eq!(code(&ephol(&["verify", "--family", &fam, "--only", "algebra"])), 2);
    let fam = write(&dir, "unknown.json", r#"{"kind": "paper4x4", "n": 4}"#);
    let o = ephol(&["verify", "--family", &fam]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("kind"), "{}", stderr(&o));
}

#[test]
fn verify_exit_status_follows_the_table() {
    let o = ephol(&["verify"]);
    let text = stdout(&o);
    let fails = text.lines().filter(|l| l.starts_with("FAIL")).count();
    let passes = text.lines().filter(|l| l.starts_with("PASS")).count();
    assert_eq!(fails + passes, 8, "{text}");
    assert_eq!(code(&o), if fails == 0 { 0 } else { 1 });
    for id in 2..=8 {
        assert!(text.contains(&format!("PASS [{id}]")), "{text}");
    }
}

#[test]
fn algebra_tables_as_json() {
    let o = ephol(&["algebra", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let tables = v.as_array().unwrap();
    assert_eq!(tables.len(), 6);
    let chained = &tables[4];
    assert_eq!(chained["n"], 4);
    assert!(chained["orderings"].as_array().unwrap().iter().all(|o| o["order"] == 4));
}

#[test]
fn unsupported_formats_are_config_errors() {
    assert_eq!(code(&ephol(&["algebra", "--format", "csv"])), 2);
    assert_eq!(code(&ephol(&["surface", "--family", "paper2x2", "--region", "-1,1,-1,1", "--format", "json"])), 2);
    assert_eq!(code(&ephol(&["locate", "--family", "definitely/not/here.json", "--region", "0,1,0,1"])), 2);
}
