use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use volterra_cli::io::{SpectrumRecord, Table};

fn volterra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_volterra"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn spectrum_of_constant_chain() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "c.json", r#"{"n": 3, "u": [4, 4, 4]}"#);
    let out = dir.path().join("s.json");
    assert_eq!(volterra(&["spectrum", "--input", s(&input), "--output", s(&out)]).status.code(), Some(0));
    let rec: SpectrumRecord = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rec.n, 3);
    for (got, want) in rec.lambda.iter().zip([-2.0, -1.0, -1.0, 1.0, 1.0, 2.0]) {
        assert!((got - want).abs() < 1e-12, "{:?}", rec.lambda);
    }
    assert!(rec.gaps.iter().all(|g| g.closed));
    assert_eq!(rec.mu.len(), 3);
    assert_eq!(rec.sigma.len(), 3);
}

#[test]
fn spectrum_from_a_coefficients() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.json", r#"{"n": 3, "a": [1, 2, 3]}"#);
    let out = volterra(&["spectrum", "--input", s(&input)]);
    assert_eq!(out.status.code(), Some(0));
    let rec: SpectrumRecord = serde_json::from_slice(&out.stdout).unwrap();
    assert!((rec.mu[0][0] + 2.0).abs() < 1e-12 && (rec.mu[0][1] - 2.0).abs() < 1e-12, "{:?}", rec.mu[0]);
}

#[test]
fn input_errors_and_invariant_violations() {
    let dir = TempDir::new().unwrap();
    let mismatch = write(&dir, "m.json", r#"{"n": 2, "u": [1, 1, 1]}"#);
    assert_eq!(volterra(&["spectrum", "--input", s(&mismatch)]).status.code(), Some(2));
    let garbage = write(&dir, "g.json", "{");
    assert_eq!(volterra(&["spectrum", "--input", s(&garbage)]).status.code(), Some(2));
    assert_eq!(volterra(&["spectrum", "--input", "/nonexistent/chain.json"]).status.code(), Some(2));
    let negative = write(&dir, "n.json", r#"{"n": 3, "a": [1, -2, 1]}"#);
    let out = volterra(&["spectrum", "--input", s(&negative)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("a_2"));
    assert_eq!(volterra(&["evolve", "--bogus"]).status.code(), Some(2));
}

#[test]
fn evolve_direct_constant_chain_rows_identical() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "c.json", r#"{"n": 4, "u": [1.5, 1.5, 1.5, 1.5]}"#);
    let out = volterra(&["evolve", "--input", s(&input), "--method", "direct", "--t-end", "0.5", "--dt", "0.01"]);
    assert_eq!(out.status.code(), Some(0));
    let table = Table::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(table.header[..5], ["t", "u_1", "u_2", "u_3", "u_4"]);
    assert_eq!(table.rows.len(), 6);
    assert_eq!(table.rows.last().unwrap()[0], 0.5);
    for row in &table.rows {
        assert_eq!(row[1..5], [1.5; 4]);
    }
}

#[test]
fn evolve_spectral_matches_direct() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "h.json", r#"{"n": 3, "u": [2, 3, 4]}"#);
    let run = |method: &str| {
        let out = volterra(&["evolve", "--input", s(&input), "--method", method]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        Table::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap()
    };
    let (d, sp) = (run("direct"), run("spectral"));
    assert_eq!(d.column("t"), sp.column("t"));
    for i in 1..=3 {
        let name = format!("u_{i}");
        for (a, b) in d.column(&name).unwrap().iter().zip(sp.column(&name).unwrap()) {
            assert!(((a - b) / a).abs() < 1e-4, "{name}: {a} vs {b}");
        }
    }
    assert!(sp.header.contains(&"mu_2_1".to_string()));
    assert!(sp.column("odd_period_residual").unwrap().iter().all(|r| *r < 1e-10));
}

#[test]
fn evolve_is_reproducible_and_lf_terminated() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "c.json", r#"{"n": 4, "u": [0.7, 1.3, 1.9, 0.6]}"#);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = volterra(&["evolve", "--input", s(&input), "--t-end", "0.3", "--output", s(p)]);
        assert_eq!(out.status.code(), Some(0));
    }
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    assert!(!bytes.contains(&b'\r'));
}

#[test]
fn evolve_rejects_bad_step_and_reports_blow_up() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "c.json", r#"{"n": 3, "u": [2, 3, 4]}"#);
    assert_eq!(volterra(&["evolve", "--input", s(&input), "--dt", "0"]).status.code(), Some(2));
    assert_eq!(volterra(&["evolve", "--input", s(&input), "--dt", "-0.1"]).status.code(), Some(2));
    let stiff = write(&dir, "s.json", r#"{"n": 3, "u": [40, 60, 80]}"#);
    let out = volterra(&["evolve", "--input", s(&stiff), "--method", "direct", "--dt", "0.5"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t = "));
}

#[test]
fn verify_constant_and_seeded_chains() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "c.json", r#"{"n": 3, "u": [4, 4, 4]}"#);
    let report = dir.path().join("r.json");
    let out = volterra(&["verify", "--input", s(&input), "--t-end", "0.2", "--dt", "0.01", "--output", s(&report)]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    let u_dev = json["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "u_deviation")
        .unwrap()["max_residual"]
        .as_f64()
        .unwrap();
    assert!(u_dev < 1e-12);

    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = volterra(&["verify", "--seed", "11", "--t-end", "0.5", "--output", s(p)]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn verify_flip_fails_and_still_writes_report() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "h.json", r#"{"n": 4, "u": [0.8, 1.7, 1.2, 0.6]}"#);
    let report = dir.path().join("r.json");
    let out = volterra(&["verify", "--input", s(&input), "--t-end", "0.5", "--flip-sigma", "2,3", "--output", s(&report)]);
    assert_eq!(out.status.code(), Some(1));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["passed"], false);
    let out = volterra(&["verify", "--input", s(&input), "--flip-sigma", "4,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lemma_exact_sweep() {
    let dir = TempDir::new().unwrap();
    let rows = dir.path().join("rows.csv");
    let out = volterra(&["lemma", "--n", "3", "--s-min", "-4", "--s-max", "7", "--output", s(&rows)]);
    assert_eq!(out.status.code(), Some(0));
    let mut r = csv::Reader::from_path(&rows).unwrap();
    let mut seen = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        let (sv, value, resid) = (&rec[1], rec[2].parse::<f64>().unwrap(), rec[3].parse::<f64>().unwrap());
        assert_eq!(resid, 0.0);
        match sv {
            "0" => assert_eq!(value, 0.0),
            "3" => assert_eq!(value, 1.0),
            _ => {}
        }
        seen += 1;
    }
    assert_eq!(seen, 12);
    assert_eq!(volterra(&["lemma", "--mode", "float", "--trials", "10"]).status.code(), Some(0));
    assert_eq!(volterra(&["lemma", "--n", "0"]).status.code(), Some(2));
}

#[test]
fn plot_u_and_mu() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "h.json", r#"{"n": 4, "u": [0.8, 1.7, 1.2, 0.6]}"#);
    let csv = dir.path().join("t.csv");
    let out = volterra(&["evolve", "--input", s(&input), "--output", s(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let svg = dir.path().join("mu.svg");
    assert_eq!(volterra(&["plot", "--input", s(&csv), "--output", s(&svg), "--what", "mu"]).status.code(), Some(0));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.matches("<polyline").count() == 3);
    assert_eq!(text.matches("fill-opacity").count(), 3);
    assert_eq!(volterra(&["plot", "--input", s(&csv), "--output", s(&svg)]).status.code(), Some(0));
    assert_eq!(fs::read_to_string(&svg).unwrap().matches("<polyline").count(), 4);
}

#[test]
fn plot_rejections() {
    let dir = TempDir::new().unwrap();
    let svg = dir.path().join("x.svg");
    let empty = write(&dir, "e.csv", "");
    assert_eq!(volterra(&["plot", "--input", s(&empty), "--output", s(&svg)]).status.code(), Some(2));
    let unknown = write(&dir, "u.csv", "t,u_1,u_2,velocity\n0,1,1,3\n");
    assert_eq!(volterra(&["plot", "--input", s(&unknown), "--output", s(&svg)]).status.code(), Some(2));
    let no_mu = write(&dir, "d.csv", "t,u_1,u_2\n0,1,1\n1,1,1\n");
    assert_eq!(
        volterra(&["plot", "--input", s(&no_mu), "--output", s(&svg), "--what", "mu"]).status.code(),
        Some(2)
    );
    // mu_1_0 far outside the only gap of the chain (1, 2)
    let outside = write(&dir, "o.csv", "t,u_1,u_2,mu_1_0,mu_1_1\n0,1,2,5,0\n");
    assert_eq!(
        volterra(&["plot", "--input", s(&outside), "--output", s(&svg), "--what", "mu"]).status.code(),
        Some(3)
    );
}
