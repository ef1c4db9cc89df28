use std::fs;
use std::process::Command;

fn sotea() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sotea"))
}

fn stdout_of(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn problems_lists_twelve() {
    let text = stdout_of(sotea().arg("problems"));
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().next().unwrap().starts_with("pressure_vessel"));
    let json: serde_json::Value = serde_json::from_str(&stdout_of(sotea().args(["problems", "--json"]))).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 12);
}

#[test]
fn sweep_dry_run_counts_cells() {
    assert!(stdout_of(sotea().args(["sweep", "--dry-run"])).starts_with("cells: 7560 "));
    assert!(stdout_of(sotea().args(["sweep", "--dry-run", "--runs", "2"])).starts_with("cells: 504 "));
    let plan: serde_json::Value = serde_json::from_str(&stdout_of(sotea().arg("sweep"))).unwrap();
    assert_eq!(plan["configs"].as_array().unwrap().len(), 21);
    assert_eq!(plan["runs_per_config"], 30);
    assert_eq!(plan["max_evals"], 150000);
}

#[test]
fn run_then_analyze_writes_parseable_csv() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    fs::write(
        &plan,
        r#"{"problems":["sys_lin_eq"],
            "configs":[{"family":"sotea","k_max":3},{"family":"cga","radius":4},
                       {"family":"pea_ga","selection":"linear_ranking","operators":"two"}],
            "runs_per_config":2,"max_evals":3000}"#,
    )
    .unwrap();
    let store = dir.path().join("store");
    let out = stdout_of(sotea().args(["run", plan.to_str().unwrap(), "--out-dir", store.to_str().unwrap(), "--jobs", "2"]));
    assert!(out.contains("6 cells, 6 computed"), "{out}");
    let listed = stdout_of(sotea().args(["analyze", store.to_str().unwrap()]));
    assert_eq!(listed.lines().count(), 5);
    for path in listed.lines() {
        let mut rdr = csv::Reader::from_path(path).unwrap();
        let width = rdr.headers().unwrap().len();
        for rec in rdr.records() {
            assert_eq!(rec.unwrap().len(), width);
        }
    }
    let finals = fs::read_to_string(store.join("analysis/finals.csv")).unwrap();
    assert_eq!(finals.lines().count(), 7);
    let topo = stdout_of(sotea().args(["topology", store.to_str().unwrap()]));
    let topo = fs::read_to_string(topo.trim()).unwrap();
    assert!(topo.contains("sys_lin_eq,sotea_k3,c_ave,"));
    assert!(topo.contains("sys_lin_eq,cga_r4,k_ave,8.0"));
}

#[test]
fn grow_writes_metrics_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("g.json");
    fs::write(&cfg, r#"{"model":"ba","m0":3,"m":2,"n":300}"#).unwrap();
    let out_dir = dir.path().join("out");
    stdout_of(sotea().args(["grow", cfg.to_str().unwrap(), "--seed", "4", "--out-dir", out_dir.to_str().unwrap()]));
    let csv = fs::read_to_string(out_dir.join("growth.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("0,ba,300,597,300,"));
    assert!(fs::read_to_string(out_dir.join("grow_0_ba.dot")).unwrap().starts_with("graph ba {"));
}

#[test]
fn topology_study_from_protocol() {
    let dir = tempfile::tempdir().unwrap();
    let proto = dir.path().join("study.json");
    fs::write(
        &proto,
        r#"{"problem":"griewangk","sizes":[20],"k_max":[3,5],"runs":1,"generations":20,"snapshot_every":10,"seed_base":0}"#,
    )
    .unwrap();
    let path = stdout_of(sotea().args(["topology", "--study", proto.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]));
    let text = fs::read_to_string(path.trim()).unwrap();
    assert!(text.contains("20,3,samples,2.0"));
    assert!(text.contains("20,all,c_ave,"));
}

#[test]
fn bad_usage_fails() {
    for args in [vec!["bogus"], vec!["problems", "--nope"], vec![], vec!["run", "/nonexistent/plan.json"]] {
        let out = sotea().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
