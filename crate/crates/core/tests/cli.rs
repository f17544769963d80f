use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use moran_core::cli::IfsSpecFile;
use serde_json::Value;

fn specs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn spec(name: &str) -> PathBuf {
    specs_dir().join(format!("{name}.json"))
}

fn moran(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moran"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str], out: &Path) -> Output {
    let output = moran(args, out);
    assert!(output.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&output.stderr));
    output
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn error_of(output: &Output) -> Value {
    serde_json::from_str(String::from_utf8_lossy(&output.stderr).trim()).expect("stderr is a JSON error")
}

#[test]
fn dim_on_dyadic_is_one() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["dim", "--spec", spec("dyadic").to_str().unwrap()], dir.path());
    let report = read_json(&dir.path().join("dim.json"));
    let t = report["root"]["t_star"].as_f64().unwrap();
    assert!((t - 1.0).abs() < 1e-9, "t* = {t}");
    let run = read_json(&dir.path().join("dim.run.json"));
    assert_eq!(run["command"], "dim");
    assert_eq!(run["spec_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn dedup_overlap_counts() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["dedup", "--spec", spec("overlap3").to_str().unwrap(), "--depth", "8"], dir.path());
    let csv = fs::read_to_string(dir.path().join("dedup.csv")).unwrap();
    let allowed: Vec<u64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(allowed, (1..=8).map(|n| (1u64 << (n + 1)) - 1).collect::<Vec<_>>());
}

#[test]
fn outputs_are_deterministic() {
    let cases: [&[&str]; 4] = [
        &["pressure", "--depth", "6"],
        &["check-sep", "--depth", "3", "--steps", "4"],
        &["assouad", "--depth", "6"],
        &["render"],
    ];
    for args in cases {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        for dir in [&a, &b] {
            let mut full = args.to_vec();
            let s = spec("golden_mean");
            full.extend(["--spec", s.to_str().unwrap()]);
            run_ok(&full, dir.path());
        }
        let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(names.len() >= 2);
        for name in names {
            // the run report carries wall time
            if name.to_string_lossy().ends_with(".run.json") {
                continue;
            }
            assert_eq!(
                fs::read(a.path().join(&name)).unwrap(),
                fs::read(b.path().join(&name)).unwrap(),
                "{args:?}: {name:?} differs"
            );
        }
    }
}

#[test]
fn seeded_sampling_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let s = spec("biased");
        let args = ["localdim", "--spec", s.to_str().unwrap(), "--depth", "200", "--samples", "8", "--seed", "7"];
        run_ok(&args, dir.path());
    }
    assert_eq!(fs::read(a.path().join("localdim.json")).unwrap(), fs::read(b.path().join("localdim.json")).unwrap());
}

#[test]
fn small_furstenberg_demo() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["furstenberg-demo", "--depth", "8", "--jmax", "3", "--anchor-len", "2"], dir.path());
    let certs = read_json(&dir.path().join("furstenberg-certificates.json"));
    assert_eq!(certs["gap"], serde_json::json!(["7/10", "6/7"]));
    let csv = fs::read_to_string(dir.path().join("furstenberg-convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
    assert!(fs::read_to_string(dir.path().join("furstenberg.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn invalid_spec_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"dimension": 1, "maps": [{"type": "homothety", "r": "3/2", "a": "0"}], "subshift": {"alphabet": 1, "forbidden": []}}"#,
    )
    .unwrap();
    let output = moran(&["dim", "--spec", bad.to_str().unwrap()], dir.path());
    assert_eq!(output.status.code(), Some(1));
    let err = error_of(&output);
    assert_eq!(err["exit_code"], 1);
    assert!(err["message"].as_str().unwrap().contains("maps[0].r"), "{err}");

    let output = moran(&["dim", "--spec", spec("dyadic").to_str().unwrap(), "--precision", "80"], dir.path());
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn budget_overrun_exits_two_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec("overlap3");
    let args = ["dedup", "--spec", s.to_str().unwrap(), "--depth", "12", "--budget", "100"];
    let output = moran(&args, dir.path());
    assert_eq!(output.status.code(), Some(2));
    assert_eq!(error_of(&output)["error"], "budget");
    let csv = fs::read_to_string(dir.path().join("dedup.csv")).unwrap();
    assert!(csv.lines().count() > 1);
}

#[test]
fn shipped_specs_round_trip() {
    let mut count = 0;
    for entry in fs::read_dir(specs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let parsed = IfsSpecFile::from_json(&text).unwrap_or_else(|e| panic!("{path:?}: {e}"));
        let construction = parsed.construction().unwrap();
        let back = IfsSpecFile::from_construction(&construction, parsed.label.clone());
        let again = IfsSpecFile::from_json(&back.to_json()).unwrap();
        assert_eq!(again.construction().unwrap().system(), construction.system(), "{path:?}");
        assert_eq!(again.construction().unwrap().subshift(), construction.subshift(), "{path:?}");
        count += 1;
    }
    assert!(count >= 9);
}

#[test]
fn render_both_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["render", "--spec", spec("half_third").to_str().unwrap(), "--depth", "4", "--gaps"], dir.path());
    let svg = fs::read_to_string(dir.path().join("render.svg")).unwrap();
    assert!(svg.contains("gaps"));
    run_ok(&["render", "--spec", spec("affine_stacked").to_str().unwrap(), "--depth", "3"], dir.path());
    let svg = fs::read_to_string(dir.path().join("render.svg")).unwrap();
    assert_eq!(svg.matches("fill-opacity").count(), 2 + 4 + 8);
}

#[test]
fn measures_from_specs() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["entropy", "--spec", spec("golden_mean").to_str().unwrap(), "--depth", "200", "--samples", "16"], dir.path());
    let report = read_json(&dir.path().join("entropy.json"));
    let exact = report["exact"].as_f64().unwrap();
    assert!((exact - 2.0 / 3.0 * 2f64.ln()).abs() < 1e-12, "h = {exact}");

    run_ok(&["localdim", "--spec", spec("biased").to_str().unwrap(), "--depth", "2000", "--samples", "16"], dir.path());
    let report = read_json(&dir.path().join("localdim.json"));
    let mean = report["mean"].as_f64().unwrap();
    assert!((mean - 0.811278).abs() < 0.05, "mean = {mean}");

    let bad = dir.path().join("bad_measure.json");
    let mut file: Value = read_json(&spec("biased"));
    file["measure"]["probs"] = serde_json::json!(["1/4", "1/2"]);
    fs::write(&bad, file.to_string()).unwrap();
    let output = moran(&["entropy", "--spec", bad.to_str().unwrap()], dir.path());
    assert_eq!(output.status.code(), Some(1), "probabilities not summing to one");
    assert!(error_of(&output)["message"].as_str().unwrap().contains("measure"));
}
