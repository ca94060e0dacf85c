use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use virtual_residue::cycles::IntegralResult;
use virtual_residue::report::{load_scenario, Cache, Lookup, REPORT_SCHEMA, TRACE_COLUMNS};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn scenario(name: &str) -> PathBuf {
    scenarios().join(format!("{name}.toml"))
}

fn vres(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vres"));
    cmd.args(args);
    match cache {
        Some(d) => cmd.env("VRES_CACHE_DIR", d),
        None => cmd.env_remove("VRES_CACHE_DIR"),
    };
    cmd.output().expect("vres runs")
}

fn run_scenario(path: &Path, out: &Path, extra: &[&str], cache: Option<&Path>) -> Output {
    let mut args = vec!["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    vres(&args, cache)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn assert_valid(report: &Value) {
    let schema: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(report).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "report violates schema: {errors:#?}");
}

/// Report with the run-dependent timing fields removed.
fn stable(mut r: Value) -> Value {
    r.as_object_mut().unwrap().remove("generated_unix");
    for row in r["rows"].as_array_mut().unwrap() {
        row.as_object_mut().unwrap().remove("wall_seconds");
        row.as_object_mut().unwrap().remove("cached");
    }
    r
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn every_bundled_scenario_builds() {
    let mut count = 0;
    for entry in std::fs::read_dir(scenarios()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let file = load_scenario(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            assert_eq!(file.schema, "vres-scenario/1");
            file.build().unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            count += 1;
        }
    }
    assert!(count >= 10);
}

#[test]
fn passing_run_writes_a_valid_report_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario(&scenario("line-z2"), dir.path(), &[], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert_valid(&r);
    assert_eq!(r["schema"], "vres-report/1");
    assert_eq!(r["status"], "pass");
    assert!(r["verdicts"].as_array().unwrap().iter().all(|v| v["passed"] == true));
    let mut traces = 0;
    for row in r["rows"].as_array().unwrap() {
        if let Some(t) = row["trace"].as_str() {
            let mut rd = csv::Reader::from_path(dir.path().join(t)).unwrap();
            assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), TRACE_COLUMNS);
            let records = rd.records().collect::<Result<Vec<_>, _>>().unwrap();
            assert!(!records.is_empty());
            for rec in records {
                rec[0].parse::<usize>().unwrap();
                for f in 1..4 {
                    rec[f].parse::<f64>().unwrap();
                }
            }
            traces += 1;
        }
    }
    assert!(traces > 0);
}

#[test]
fn runs_are_deterministic_for_a_seed() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let path = scenario("mq-1-1");
    for (d, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let out = run_scenario(&path, d.path(), &["--seed", seed, "--budget", "20000"], None);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (ra, rb, rc) = (stable(report(a.path())), stable(report(b.path())), stable(report(c.path())));
    assert_eq!(ra, rb);
    let mq = |r: &Value| r["rows"].as_array().unwrap().iter().find(|row| row["method"] == "mq").unwrap()["value"].clone();
    assert_ne!(mq(&ra), mq(&rc));
}

#[test]
fn exponential_rows_carry_only_the_exp_t_deformation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario(&scenario("mq-1-1"), dir.path(), &["--budget", "20000", "--t", "2"], None);
    assert_eq!(code(&out), 0);
    let r = report(dir.path());
    for row in r["rows"].as_array().unwrap() {
        if row["method"] == "mq" {
            assert_eq!(row["deformation"]["kind"], "exp-t");
            assert_eq!(row["deformation"]["t"], 2.0);
        } else {
            assert!(row.get("deformation").is_none());
        }
    }
}

#[test]
fn cross_check_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario(&scenario("plane-t03"), dir.path(), &["--method", "contour", "--method", "oracle", "--eps", "1.5"], None);
    assert_eq!(code(&out), 1);
    let r = report(dir.path());
    assert_valid(&r);
    assert_eq!(r["status"], "cross-check-failed");
    assert!(r["verdicts"].as_array().unwrap().iter().any(|v| v["passed"] == false));
}

#[test]
fn invalid_requests_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "schema = \"vres-scenario/9\"\nname = \"x\"\n[scene]\nkind = \"monomial\"\nexponents = [1]\nweight = \"1\"\n").unwrap();
    assert_eq!(code(&run_scenario(&bad, &dir.path().join("o"), &[], None)), 2);
    std::fs::write(&bad, "schema = \"vres-scenario/1\"\nname = \"x\"\n[scene]\nkind = \"monomial\"\nexponents = [1]\nweight = \"1 +\"\n").unwrap();
    assert_eq!(code(&run_scenario(&bad, &dir.path().join("o"), &[], None)), 2);
    std::fs::write(&bad, "schema = \"vres-scenario/1\"\nname = \"x\"\ncolour = 3\n[scene]\nkind = \"monomial\"\nexponents = [1]\nweight = \"1\"\n").unwrap();
    assert_eq!(code(&run_scenario(&bad, &dir.path().join("o"), &[], None)), 2);
    assert_eq!(code(&run_scenario(&dir.path().join("missing.toml"), &dir.path().join("o"), &[], None)), 2);
    assert_eq!(code(&vres(&["check", "geometry"], None)), 2);
    assert!(!dir.path().join("o").join("report.json").exists());
}

#[test]
fn method_failure_exits_three_with_a_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario(&scenario("growth-violation"), dir.path(), &[], None);
    assert_eq!(code(&out), 3);
    let r = report(dir.path());
    assert_valid(&r);
    assert_eq!(r["status"], "method-failed");
    let errors = r["errors"].as_array().unwrap();
    assert!(errors.iter().any(|e| e["method"] == "mq" && e["message"].as_str().unwrap().contains("growth")));
    assert!(r["rows"].as_array().unwrap().iter().any(|row| row["method"] == "contour"));

    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario(&scenario("line-z3"), dir.path(), &["--nodes", "3"], None);
    assert_eq!(code(&out), 3);
    assert_valid(&report(dir.path()));
}

#[test]
fn cache_hits_misses_and_ignores_corruption() {
    let cache = tempfile::tempdir().unwrap();
    let work = tempfile::tempdir().unwrap();
    let path = work.path().join("s.toml");
    std::fs::copy(scenario("line-z3"), &path).unwrap();
    let first = work.path().join("a");
    assert_eq!(code(&run_scenario(&path, &first, &[], Some(cache.path()))), 0);
    let r1 = report(&first);
    assert!(r1["rows"].as_array().unwrap().iter().all(|r| r["cached"] == false));

    let second = work.path().join("b");
    assert_eq!(code(&run_scenario(&path, &second, &[], Some(cache.path()))), 0);
    let r2 = report(&second);
    assert!(r2["rows"].as_array().unwrap().iter().all(|r| r["cached"] == true));
    assert_eq!(stable(r1.clone()), stable(r2));

    let text = std::fs::read_to_string(&path).unwrap();
    let changed = text.lines().map(|l| if l.starts_with("weight") { "weight = \"z1 + 2\"".to_string() } else { l.to_string() }).collect::<Vec<_>>().join("\n");
    assert_ne!(text, changed);
    std::fs::write(&path, changed).unwrap();
    let third = work.path().join("c");
    assert_eq!(code(&run_scenario(&path, &third, &[], Some(cache.path()))), 0);
    assert!(report(&third)["rows"].as_array().unwrap().iter().all(|r| r["cached"] == false));

    let mut entries = Vec::new();
    for shard in std::fs::read_dir(cache.path()).unwrap() {
        let shard = shard.unwrap().path();
        if shard.is_dir() {
            entries.extend(std::fs::read_dir(shard).unwrap().map(|e| e.unwrap().path()));
        }
    }
    assert!(!entries.is_empty());
    for e in &entries {
        std::fs::write(e, "{ not json").unwrap();
    }
    let fourth = work.path().join("d");
    let out = run_scenario(&path, &fourth, &[], Some(cache.path()));
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("corrupt"));
    assert!(report(&fourth)["rows"].as_array().unwrap().iter().all(|r| r["cached"] == false));

    for e in &entries {
        std::fs::write(e, "{ not json").unwrap();
    }
    let gc = vres(&["cache", "gc"], Some(cache.path()));
    assert_eq!(code(&gc), 0);
    assert!(String::from_utf8_lossy(&gc.stdout).contains(&format!("removed 0 stale and {} corrupt", entries.len())));
    assert_eq!(code(&vres(&["cache", "gc"], None)), 2);
}

#[test]
fn cache_entries_from_another_version_are_stale() {
    let dir = tempfile::tempdir().unwrap();
    let r = IntegralResult { value: num_complex::Complex64::new(1.0, -2.0), error: 1e-9, count: 64, converged: true, trace: Vec::new() };
    let old = Cache::with_version(dir.path(), "0.0.1").unwrap();
    let key = old.key("scene", "contour", "{}");
    old.store(&key, &r).unwrap();
    assert_eq!(old.lookup(&key).unwrap(), Lookup::Hit(r.clone()));

    let new = Cache::with_version(dir.path(), "0.0.2").unwrap();
    assert_ne!(new.key("scene", "contour", "{}"), key);
    assert!(matches!(new.lookup(&key).unwrap(), Lookup::Stale(v) if v == "0.0.1"));
    let gc = new.gc().unwrap();
    assert_eq!((gc.kept, gc.removed_stale, gc.removed_corrupt), (0, 1, 0));
    assert_eq!(old.lookup(&key).unwrap(), Lookup::Miss);
}

#[test]
fn sweep_writes_one_row_per_value() {
    let out = vres(&["--no-cache", "sweep", scenario("line-z2").to_str().unwrap(), "--method", "contour", "--method", "oracle", "--param", "nodes", "--values", "8", "16", "32"], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut rd = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), ["parameter", "value", "component", "method", "value_re", "value_im", "error", "count"]);
    let rows: Vec<_> = rd.records().map(|r| r.unwrap()).collect();
    let contour: Vec<_> = rows.iter().filter(|r| &r[3] == "contour").collect();
    assert_eq!(contour.len(), 3);
    assert!(contour.iter().all(|r| &r[0] == "nodes"));
    assert_eq!(contour.iter().map(|r| r[1].parse::<f64>().unwrap()).collect::<Vec<_>>(), [8.0, 16.0, 32.0]);
    for r in contour {
        assert!((r[4].parse::<f64>().unwrap() - 1.0).abs() < 1e-6);
    }

    let out = vres(&["--no-cache", "sweep", scenario("line-z2").to_str().unwrap(), "--param", "budget", "--values", "100"], None);
    assert_eq!(code(&out), 2);
}

#[test]
fn check_suites_run_from_the_command_line() {
    let out = vres(&["check", "algebra", "--seed", "3"], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).lines().count() >= 1);
}
