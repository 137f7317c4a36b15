#![allow(clippy::excessive_precision)]

use std::path::Path;
use std::process::{Command, Output};

use mirror_spectra_cli::output::{fmt_float, Document};
use rug::Float;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mirror-spectra"));
    c.env_remove("MIRROR_SPECTRA_PRECISION");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn doc(o: &Output) -> Document {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), stderr(o));
    Document::parse_csv(&stdout(o)).unwrap()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn meta<'a>(d: &'a Document, key: &str) -> &'a str {
    &d.meta.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no {key} in header")).1
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn endpoint_labels(svg: &str) -> Vec<String> {
    svg.split("class=\"endpoint\">").skip(1).map(|t| t.split('<').next().unwrap().to_string()).collect()
}

/// Whether `label` rounds to `printed` at the number of digits printed.
fn agrees(label: &str, printed: &str) -> bool {
    let digits = printed.chars().filter(char::is_ascii_digit).count();
    let x = Float::with_val(192, Float::parse(label).unwrap());
    fmt_float(&x, digits) == printed
}

fn has_label(svg: &str, printed: &str) -> bool {
    endpoint_labels(svg).iter().any(|l| agrees(l, printed))
}

#[test]
fn ground_state_row() {
    let d = doc(&run(&["spectrum", "--sheet", "1", "--parity", "even"]));
    assert_eq!(d.rows.len(), 1);
    assert_eq!(d.column("sigma").unwrap(), ["0.353553390593273762"]);
    assert_eq!(d.column("re_eps").unwrap(), ["0"]);
    assert_eq!(d.column("im_eps").unwrap(), ["4.59435880983691894"]);
    assert_eq!(meta(&d, "precision_bits"), "192");
    assert_eq!(meta(&d, "tol"), "1e-40");
    assert!(meta(&d, "tool").starts_with("mirror-spectra "));
    assert!(meta(&d, "theta").starts_with("0.785398163397448309"));
}

#[test]
fn odd_states_of_the_second_sheet() {
    let d = doc(&run(&["spectrum", "--sheet", "2", "--parity", "odd"]));
    let expect = [
        (0.0449074054136668986, 429.937612699070933, -86.9352869839236228),
        (0.241612973133940861, 87.33324987160330085, -160.859744733070428),
        (0.478766031821187121, -33.7154767687408649, -54.1710567496918622),
    ];
    assert_eq!(d.rows.len(), 3);
    for (row, (s, re, im)) in d.rows.iter().zip(expect) {
        assert_eq!(row[1], "odd");
        assert!((num(&row[2]) - s).abs() < 1e-12);
        assert!((num(&row[3]) - re).abs() < 1e-9 * re.abs());
        assert!((num(&row[4]) - im).abs() < 1e-9 * im.abs());
    }
}

#[test]
fn verify_columns_on_the_first_sheet() {
    let d = doc(&run(&["spectrum", "--sheet", "1", "--verify"]));
    assert_eq!(d.columns[5..], ["wronskian", "g_component", "psi_residual", "pole"]);
    assert_eq!(d.column("parity").unwrap(), ["even", "odd"]);
    let odd = &d.rows[1];
    assert_eq!(odd[2], "0.612117371646167268");
    assert_eq!(odd[3], "-13.8783047780366906");
    assert_eq!(odd[4], "6.16129624324434869");
    for row in &d.rows {
        for cell in &row[5..] {
            assert!(num(cell) < 1e-20, "{cell}");
        }
    }
}

#[test]
fn low_coupling_is_flagged_but_runs() {
    let o = run(&["spectrum", "--sheet", "1", "--parity", "even", "--theta", "0.3"]);
    let d = doc(&o);
    assert!(stderr(&o).contains("outside the supported range"));
    assert!(meta(&d, "theta").starts_with("0.29999999999999998"));
    assert_eq!(meta(&d, "theta_flag"), "outside [pi/8, pi/2)");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["spectrum", "--theta", "1.6"]).status.code(), Some(3));
    assert_eq!(run(&["spectrum", "--precision-bits", "32"]).status.code(), Some(3));
    assert_eq!(run(&["spectrum", "--precision-bits", "64", "--tol", "1e-30"]).status.code(), Some(3));
    assert_eq!(run(&["spectrum", "--sheet", "0"]).status.code(), Some(3));
    assert_eq!(run(&["spectrum", "--digits", "0"]).status.code(), Some(3));
    assert_eq!(run(&["spectrum", "--no-such-flag"]).status.code(), Some(3));
    assert_eq!(run(&["orbit", "--out", "/nonexistent/dir/o.csv"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    // no sign change of the level function below ε = 10⁶
    let o = run(&["selfdual", "--quick", "--n", "100000"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("no sign change"));
}

#[test]
fn precision_from_the_environment() {
    let o = bin().env("MIRROR_SPECTRA_PRECISION", "256").args(["spectrum", "--parity", "even"]).output().unwrap();
    let d = doc(&o);
    assert_eq!(meta(&d, "precision_bits"), "256");
    assert_eq!(d.column("im_eps").unwrap(), ["4.59435880983691894"]);
    let o = bin().env("MIRROR_SPECTRA_PRECISION", "abc").args(["spectrum"]).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn first_orbit_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("orbit1.csv");
    let o = run(&["orbit", "--sheet", "1", "--npoints", "64", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let d = Document::parse_csv(&read(&csv)).unwrap();
    assert_eq!(d.rows.len(), 64);
    assert_eq!(d.rows[0][1], "0");
    assert_eq!(d.rows[0][2], "1.99625115231373393");
    assert!(agrees(&d.rows[63][2], "-22.1838257068"));
    assert_eq!(d.rows[63][3], "0");
    let svg = read(&csv.with_extension("svg"));
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert_eq!(endpoint_labels(&svg).len(), 2);
    assert!(has_label(&svg, "1.9962511523"));
    assert!(has_label(&svg, "-22.1838257068"));
}

#[test]
fn second_orbit_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("orbit2.csv");
    let o = run(&["orbit", "--sheet", "2", "--npoints", "64", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = read(&csv.with_extension("svg"));
    assert!(has_label(&svg, "-24.183825694"));
    assert!(has_label(&svg, "535.493519474"));
}

#[test]
fn joint_spiral_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("spiral.csv");
    let o = run(&["orbit", "--sheet", "1,2,3", "--log-scale", "--npoints", "64", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let d = Document::parse_csv(&read(&csv)).unwrap();
    for k in ["1", "2", "3"] {
        assert_eq!(d.column("sheet").unwrap().iter().filter(|s| **s == k).count(), 64);
    }
    let svg = read(&csv.with_extension("svg"));
    assert_eq!(svg.matches("<polyline").count(), 3);
    assert_eq!(endpoint_labels(&svg).len(), 6);
    for printed in ["1.9962511523", "-22.1838257068", "535.493519474", "-24.183825694", "535.49726832", "-12391.6479693"] {
        assert!(has_label(&svg, printed), "{printed}");
    }
    assert!(svg.contains("log(1+|eps|)"));
}

#[test]
fn csv_round_trips_at_the_printed_precision() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s2.csv");
    let o = run(&["spectrum", "--sheet", "2", "--digits", "25", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = read(&csv);
    let d = Document::parse_csv(&text).unwrap();
    assert_eq!(d.to_csv(), text);
    assert_eq!(d.rows.len(), 6);
    for row in &d.rows {
        for cell in &row[2..] {
            let x = Float::with_val(192, Float::parse(cell).unwrap());
            assert_eq!(&fmt_float(&x, 25), cell);
        }
    }
}

#[test]
fn json_output() {
    let o = run(&["spectrum", "--sheet", "1", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["meta"]["precision_bits"], "192");
    assert_eq!(v["records"].as_array().unwrap().len(), 2);
    assert_eq!(v["records"][0]["im_eps"], "4.59435880983691894");
}

#[test]
fn self_dual_ground_state_digits() {
    let d = doc(&run(&["selfdual", "--n", "0", "--digits", "40"]));
    assert_eq!(d.column("log_eps").unwrap(), ["2.881815429926296782477139871723632922216"]);
    assert_eq!(meta(&d, "theta"), "ignored (b = 1)");
    let d = doc(&run(&["selfdual", "--n", "0", "--digits", "10", "--precision-bits", "128", "--tol", "1e-30"]));
    assert_eq!(d.column("log_eps").unwrap(), ["2.881815430"]);
}

#[test]
fn self_dual_first_excited_level() {
    let d = doc(&run(&["selfdual", "--n", "1"]));
    let eps = num(d.column("eps").unwrap()[0]);
    assert!(eps > 17.85);
    for col in ["level_residual", "cycle_residual"] {
        assert!(num(d.column(col).unwrap()[0]) < 1e-40);
    }
}

#[test]
fn quick_verify_passes() {
    let d = doc(&run(&["verify", "--quick"]));
    assert_eq!(meta(&d, "precision_bits"), "64");
    assert!(d.meta.iter().any(|(k, _)| k == "seed"));
    assert!(d.rows.len() >= 15);
    assert!(d.column("status").unwrap().iter().all(|s| *s == "PASS"));
}

#[test]
fn fault_fails_on_pole_cancellation() {
    let o = run(&["verify", "--quick", "--fault"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("pole cancellation"));
    let d = Document::parse_csv(&stdout(&o)).unwrap();
    let i = d.column("check").unwrap().iter().position(|c| *c == "pole cancellation").unwrap();
    assert_eq!(d.rows[i][3], "FAIL");
    assert_eq!(meta(&d, "fault"), "eps detuned");
}
