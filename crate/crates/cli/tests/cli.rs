use std::path::Path;
use std::process::{Command, Output};

fn betti(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betti"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn verify_abstract_single_trial_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = betti(&["verify-abstract", "--seed", "0", "--trials", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let r = read_json(&out);
    assert_eq!(r["summary"]["pass"], true);
    for key in ["version", "config", "records", "summary", "config_hash"] {
        assert!(r.get(key).is_some(), "{key}");
    }
    for rec in r["records"].as_array().unwrap() {
        for key in ["name", "paper_ref", "lhs", "rhs", "margin", "pass"] {
            assert!(rec.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn corrupted_tolerance_fails_with_margins() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = betti(&["verify-abstract", "--trials", "2", "--tolerance", "1e-30", "--quiet", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("FAIL duhamel.quadrature-error"), "{}", stderr(&o));
    let r = read_json(&out);
    assert_eq!(r["summary"]["pass"], false);
    let failing: Vec<_> = r["records"].as_array().unwrap().iter().filter(|x| x["pass"] == false).collect();
    assert!(!failing.is_empty());
    assert!(failing.iter().all(|x| x["margin"].is_number()));
}

#[test]
fn out_of_range_tolerance_is_invalid_input() {
    let o = betti(&["verify-abstract", "--trials", "1", "--tolerance", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tolerance"));
}

#[test]
fn determinism_modulo_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = betti(&["verify-abstract", "--seed", "7", "--trials", "3", "--quiet", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
        let mut v = read_json(&p);
        v["summary"]["wall_time_seconds"] = serde_json::Value::Null;
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn sphere_bound_is_zero() {
    let o = betti(&["betti-bound", "sphere", "--rho0", "0.5", "--t0", "1", "--subdivision", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS   betti.main[rho0=0.5,t0=1]"), "{}", stdout(&o));
}

#[test]
fn flat_torus_grid_all_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = betti(&["betti-bound", "flat-torus", "--subdivision", "1", "--grid", "5", "--quiet", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = read_json(&out);
    let reports = r["betti_reports"].as_array().unwrap();
    assert_eq!(reports.len(), 25);
    for b in reports {
        assert_eq!(b["b1_oracle"], 2);
        assert!(b["bound_main"].as_f64().unwrap() >= 2.0);
        assert_eq!(b["pass"], true);
    }
}

#[test]
fn boundary_edge_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("open.off");
    std::fs::write(&path, "OFF\n4 3 0\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n").unwrap();
    for cmd in ["betti-bound", "mesh-info"] {
        let o = betti(&[cmd, path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2));
        assert!(stderr(&o).contains("mesh not closed"), "{}", stderr(&o));
    }
}

#[test]
fn mesh_info_examples() {
    let dir = tempfile::tempdir().unwrap();
    for (name, chi, b1) in [("tetrahedron", 2, 0), ("flat-torus", 0, 2), ("genus2", -2, 4)] {
        let out = dir.path().join(format!("{name}.json"));
        let o = betti(&["mesh-info", name, "--subdivision", "1", "--quiet", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        let d = &read_json(&out)["details"];
        assert_eq!(d["euler_characteristic"], chi);
        assert_eq!(d["b1_hodge"], b1);
        assert_eq!(d["b1_homology"], b1);
    }
}

#[test]
fn gen_fixture_round_trips_through_mesh_info() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.off");
    let o = betti(&["gen-fixture", "genus2", "--subdivision", "0", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let json = dir.path().join("g.json");
    let o = betti(&["mesh-info", path.to_str().unwrap(), "--quiet", "--out", json.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read_json(&json)["details"]["b1_homology"], 4);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    std::fs::write(&cfg, "seed = 5\n[verify-abstract]\ntrials = 2\nmax_points = 6\n").unwrap();
    let out = dir.path().join("r.json");
    let o = betti(&[
        "verify-abstract",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "1",
        "--quiet",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let c = &read_json(&out)["config"];
    assert_eq!((c["seed"].as_u64(), c["trials"].as_u64(), c["max_points"].as_u64()), (Some(5), Some(1), Some(6)));

    std::fs::write(&cfg, "[verify-abstract]\ntrails = 2\n").unwrap();
    let o = betti(&["verify-abstract", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("config line 2"), "{}", stderr(&o));
}

#[test]
fn unknown_surface_is_invalid_input() {
    let o = betti(&["betti-bound", "klein-bottle"]);
    assert_eq!(o.status.code(), Some(2));
    let o = betti(&["betti-bound", "flat-torus", "--rho0", "abc"]);
    assert_eq!(o.status.code(), Some(2));
    let o = betti(&["betti-bound", "flat-torus", "--rho0", "-1", "--subdivision", "0"]);
    assert_eq!(o.status.code(), Some(2));
}
