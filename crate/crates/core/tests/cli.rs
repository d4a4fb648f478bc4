use std::path::Path;
use std::process::{Command, Output};

use ris_swipt::config::{Scenario, ScenarioConfig};
use ris_swipt::montecarlo::run_campaign;
use ris_swipt::solvers::{solve, Method};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ris-swipt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut value = serde_json::to_value(ScenarioConfig::default()).unwrap();
    edit(&mut value);
    let path = dir.join("scenario.json");
    std::fs::write(&path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn solve_default_scenario() {
    let o = run(&["solve"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| {
            ["TS ", "PS ", "DS ", "AS "]
                .iter()
                .any(|m| l.starts_with(m))
        })
        .collect();
    assert_eq!(rows.len(), 4, "{text}");
    for row in rows {
        let cols: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(cols[1], "true");
        assert_eq!(cols[7], "true", "certified: {row}");
        assert_eq!(cols[2], cols[8], "solver vs oracle L: {row}");
    }
}

#[test]
fn solve_json_report() {
    let o = run(&["solve", "--format", "json", "--p-t-dbm", "12"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let methods = v["methods"].as_array().unwrap();
    assert_eq!(methods.len(), 4);
    let inputs = Scenario::new(ScenarioConfig::default())
        .unwrap()
        .inputs_at(12.0);
    for (row, m) in methods.iter().zip(Method::ALL) {
        assert_eq!(row["method"], m.as_str());
        assert_eq!(
            row["l"].as_u64().unwrap() as usize,
            solve(m, &inputs).unwrap().l
        );
    }
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), |v| {
        v["geometry"].as_object_mut().unwrap().remove("l_max");
    });
    let o = run(&["solve", "--config", &path]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("missing field `l_max`"), "{err}");
    assert!(err.contains("line"), "{err}");
}

#[test]
fn infeasible_scenario_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), |v| v["snr0_db"] = 60.0.into());
    let o = run(&["solve", "--config", &path]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert_eq!(text.matches(" false ").count(), 4, "{text}");
}

#[test]
fn verify_exit_codes() {
    let o = run(&["verify", "--n-random", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 failures"));

    let o = run(&[
        "verify",
        "--n-random",
        "50",
        "--seed",
        "4",
        "--grid-steps",
        "10000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let o = run(&[
        "verify",
        "--n-random",
        "50",
        "--grid-steps",
        "10000",
        "--inject-fault",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    let replay = text
        .lines()
        .find_map(|l| l.trim().strip_prefix("replay: "))
        .expect("failing input is printed");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("replay.json");
    std::fs::write(&path, replay).unwrap();
    let path = path.to_string_lossy();

    let o = run(&["verify", "--replay", &path, "--inject-fault"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["verify", "--replay", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn sweep_rejects_bad_requests() {
    let o = run(&[
        "sweep", "--axis", "distance", "--from", "0", "--to", "1", "--steps", "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("distance"));
    let o = run(&["sweep", "--preset", "fig9"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["sweep", "--preset", "fig1", "--axis", "e0_j"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&[
        "sweep", "--axis", "p_t_dbm", "--from", "10", "--to", "0", "--steps", "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn single_point_sweep_matches_library() {
    let o = run(&[
        "sweep", "--axis", "p_t_dbm", "--from", "-2.5", "--to", "-2.5", "--steps", "1", "--trials",
        "4000", "--seed", "8",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut config = ScenarioConfig::default();
    config.fluctuation.n_trials = 4000;
    config.fluctuation.seed = 8;
    let scenario = Scenario::new(config).unwrap();
    let inputs = scenario.inputs_at(-2.5);
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for (row, m) in rows.iter().zip(Method::ALL) {
        assert_eq!(&row[0], "p_t_dbm");
        assert_eq!(&row[2], m.as_str());
        let mc = run_campaign(m, &inputs, &scenario.config.fluctuation).unwrap();
        assert_eq!(row[4].parse::<f64>().unwrap(), mc.mean_updated_fraction);
        assert_eq!(
            row[6].parse::<f64>().unwrap(),
            solve(m, &inputs).unwrap().fraction()
        );
    }
}

#[test]
fn json_sweep_output() {
    let o = run(&[
        "sweep",
        "--axis",
        "bias_stds",
        "--from",
        "0",
        "--to",
        "2",
        "--steps",
        "3",
        "--trials",
        "500",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[11]["bias_stds"], 2.0);
    assert_eq!(rows[11]["method"], "AS");
}

#[test]
fn defaults_round_trip() {
    let o = run(&["defaults"]);
    assert_eq!(o.status.code(), Some(0));
    let c = ScenarioConfig::from_json_str(&stdout(&o)).unwrap();
    assert_eq!(c, ScenarioConfig::default());
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--format", "xml"]).status.code(), Some(1));
}

#[test]
fn worker_override_is_validated() {
    let o = bin()
        .args(["solve"])
        .env("RIS_SWIPT_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin()
        .args(["solve"])
        .env("RIS_SWIPT_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}
