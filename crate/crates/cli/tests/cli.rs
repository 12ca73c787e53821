use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const C: f64 = 299_792_458.0;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn cfmimo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfmimo"))
        .args(args)
        .output()
        .unwrap()
}

fn run(scenario: &Path, experiment: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "--scenario",
        scenario.to_str().unwrap(),
        "--experiment",
        experiment,
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    cfmimo(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn cp_report_on_two_ap_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&fixture("two_ap.toml"), "cp", dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_json(&dir.path().join("cp_report_ue0.json"));
    let approx = report["cp_min_approx_samples"].as_f64().unwrap();
    let want = 400e6 * 30.0 / C;
    assert!((approx - want).abs() <= 1e-12 * want, "{approx} vs {want}");
    assert!((approx - 40.03).abs() < 5e-3);
    let exact = report["cp_min_exact_samples"].as_f64().unwrap();
    assert!(exact >= approx);
    assert_eq!(report["per_ap"][0]["ap"], 0);
}

#[test]
fn isi_sweep_rows_are_nonincreasing() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&fixture("two_ap.toml"), "isi-sweep", dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("isi_sweep_ue0.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("cp_len,evm"));
    let rows: Vec<(usize, f64)> = lines
        .map(|l| {
            let (cp, evm) = l.split_once(',').unwrap();
            (cp.parse().unwrap(), evm.parse().unwrap())
        })
        .collect();
    assert_eq!(
        rows.iter().map(|r| r.0).collect::<Vec<_>>(),
        vec![0, 8, 16, 32, 48]
    );
    for w in rows.windows(2) {
        assert!(w[1].1 <= w[0].1, "{rows:?}");
    }
    assert!(rows[0].1 > 1e-2);
    assert!(rows[4].1 < 1e-6);
}

#[test]
fn unknown_experiment_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&fixture("two_ap.toml"), "plot", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn missing_scenario_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&dir.path().join("nope.toml"), "cp", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.toml"));
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let base = fs::read_to_string(fixture("two_ap.toml")).unwrap();
    let cases = [
        (
            base.replace("num_antennas = 4", "num_antennas = 0"),
            "array.num_antennas",
        ),
        (
            base.replace("num_antennas = 4", "num_antennas = \"four\""),
            "array.num_antennas",
        ),
        (
            base.replace("power_profile = [1.0, 0.4]", "power_profile = [1.0]"),
            "paths.power_profile",
        ),
        (
            base.replace("carrier_frequency_hz = 28e9\n", ""),
            "carrier_frequency_hz",
        ),
        (
            base.replace("num_subcarriers = 64", "num_subcarriers = 64\nextra = 1"),
            "extra",
        ),
    ];
    for (i, (text, field)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{i}.toml"));
        fs::write(&path, text).unwrap();
        let o = run(&path, "cp", &dir.path().join(format!("out{i}")), &[]);
        assert_eq!(o.status.code(), Some(2), "case {i}");
        assert!(stderr(&o).contains(field), "case {i}: {}", stderr(&o));
    }
}

#[test]
fn cp_values_longer_than_symbol_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("two_ap.toml"))
        .unwrap()
        .replace("48]", "80]");
    let path = dir.path().join("long_cp.toml");
    fs::write(&path, text).unwrap();
    let o = run(&path, "isi-sweep", &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("isi.cp_values"));
}

#[test]
fn unwritable_output_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let o = run(&fixture("two_ap.toml"), "cp", &blocker.join("sub"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn bad_flags_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let s = fixture("two_ap.toml");
    for extra in [
        &["--sweep", "num_aps=2,1"][..],
        &["--sweep", "carrier=1"],
        &["--seed", "-4"],
        &["--frequency", "avg"],
    ] {
        let o = run(&s, "cp", dir.path(), extra);
        assert_eq!(o.status.code(), Some(2), "{extra:?}");
    }
    let o = run(&s, "correlation", dir.path(), &["--frequency", "64"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&s, "cp", dir.path(), &["--sweep", "num_aps=1,2,3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn manifest_lists_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = fixture("three_ap_two_ue.toml");
    for exp in ["channel", "squint", "cp", "isi-sweep", "correlation"] {
        let out = dir.path().join(exp);
        let o = run(&scenario, exp, &out, &["--seed", "21"]);
        assert!(o.status.success(), "{exp}: {}", stderr(&o));
        let manifest = read_json(&out.join("manifest.json"));
        assert_eq!(manifest["experiment"], exp);
        assert_eq!(manifest["seed"], 21);
        assert_eq!(manifest["tool_version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(manifest["scenario_checksum"].as_str().unwrap().len(), 64);
        let listed: Vec<&str> = manifest["artifacts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|a| a["path"].as_str().unwrap())
            .collect();
        let mut on_disk: Vec<String> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n != "manifest.json")
            .collect();
        on_disk.sort();
        let mut sorted = listed.clone();
        sorted.sort();
        assert_eq!(sorted, on_disk, "{exp}");
        assert!(!listed.is_empty());
    }
    let squint = read_json(&dir.path().join("squint/squint_ue1.json"));
    assert_eq!(squint["micro"].as_array().unwrap().len(), 3);
    assert_eq!(
        squint["micro"][0]["reference_doas"]
            .as_array()
            .unwrap()
            .len(),
        3
    );
    let meta = read_json(&dir.path().join("correlation/correlation_ue0.json"));
    assert_eq!(meta["is_psd"], true);
    assert_eq!(meta["expectation"], "fixed-doas");
    assert_eq!(meta["frequency"], "avg");
}

#[test]
fn channel_binary_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&fixture("three_ap_two_ue.toml"), "channel", dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = fs::read(dir.path().join("channel_ue1.bin")).unwrap();
    let bin = cfmimo::export::read_channel_binary(&bytes[..]).unwrap();
    assert_eq!(
        (bin.num_aps, bin.num_antennas, bin.num_subcarriers),
        (3, 8, 32)
    );
    let csv = fs::read_to_string(dir.path().join("channel.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .filter(|r: &Vec<&str>| r[0] == "1")
        .collect();
    assert_eq!(rows.len(), bin.entries.len());
    for (row, h) in rows.iter().zip(&bin.entries) {
        assert_eq!(row[5].parse::<f64>().unwrap(), h.re);
        assert_eq!(row[6].parse::<f64>().unwrap(), h.im);
    }
}

#[test]
fn sweep_writes_one_directory_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &fixture("two_ap.toml"),
        "cp",
        dir.path(),
        &["--sweep", "bandwidth_hz=100e6,200e6,400e6"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let mut approx = Vec::new();
    for w in ["100000000", "200000000", "400000000"] {
        let r = read_json(
            &dir.path()
                .join(format!("bandwidth_hz_{w}/cp_report_ue0.json")),
        );
        approx.push(r["cp_min_approx_samples"].as_f64().unwrap());
    }
    assert!((approx[2] - 4.0 * approx[0]).abs() < 1e-9);
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["sweep"]["parameter"], "bandwidth_hz");
    assert_eq!(manifest["artifacts"].as_array().unwrap().len(), 3);
    assert_eq!(
        manifest["artifacts"][0]["path"],
        "bandwidth_hz_100000000/cp_report_ue0.json"
    );

    let o = run(
        &fixture("three_ap_two_ue.toml"),
        "channel",
        &dir.path().join("ant"),
        &["--sweep", "num_antennas=2,4"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = fs::read(dir.path().join("ant/num_antennas_4/channel_ue0.bin")).unwrap();
    assert_eq!(
        cfmimo::export::read_channel_binary(&bytes[..])
            .unwrap()
            .num_antennas,
        4
    );
}
