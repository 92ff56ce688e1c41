use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coherence::{KrausSet, PureState};
use coherence_cli::formats::{read_json, to_json, ChannelFile, DensityFile, ProtocolFile, RoofFile, StateFile};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coherence"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

struct Files(TempDir);

impl Files {
    fn new() -> Self {
        Files(TempDir::new().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    }

    fn state(&self, name: &str, amplitudes: &[f64]) -> String {
        let psi = PureState::from_real(amplitudes).unwrap();
        self.write(name, &to_json(&StateFile::from_state(&psi)).unwrap())
    }

    fn squares(&self, name: &str, weights: &[f64]) -> String {
        let amps: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        self.state(name, &amps)
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn measure_prints_twelve_decimals() {
    let f = Files::new();
    let half = f.state("half.json", &[1.0, 1.0]);
    let uniform = f.state("uniform.json", &[1.0, 1.0, 1.0]);
    let peaked = f.squares("peaked.json", &[0.8, 0.1, 0.1]);

    let o = run(&["measure", &half, "--f", "shannon"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "1.000000000000"));
    let o = run(&["measure", &uniform, "--f", "l1"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "2.000000000000"));
    let o = run(&["measure", &peaked, "--f", "kyfan", "--l", "2"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "0.200000000000"));
    let o = run(&["measure", &uniform, "--f", "alpha", "--alpha", "0.5"]);
    assert_eq!(code(&o), 0);
    let value: f64 = stdout(&o).trim().parse().unwrap();
    assert!((value - 3f64.log2()).abs() < 1e-11);
}

#[test]
fn usage_errors_exit_with_two() {
    let f = Files::new();
    let half = f.state("half.json", &[1.0, 1.0]);
    assert_eq!(code(&run(&["measure", &half, "--f", "alpha"])), 2);
    assert_eq!(code(&run(&["measure", &half, "--f", "kyfan", "--l", "1"])), 2);
    assert_eq!(code(&run(&["measure", &half, "--f", "entropy"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["convert", &half])), 2);
}

#[test]
fn invalid_inputs_exit_with_one() {
    let f = Files::new();
    let unnormalized = f.write("bad.json", r#"{"dim": 2, "amplitudes": [[1, 0], [1, 0]]}"#);
    let o = run(&["measure", &unnormalized, "--f", "l1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not 1"));
    let missing = f.path("missing.json");
    assert_eq!(code(&run(&["measure", p(&missing), "--f", "l1"])), 1);
    let garbage = f.write("garbage.json", "{ not json");
    assert_eq!(code(&run(&["measure", &garbage, "--f", "l1"])), 1);
    let extra = f.write("extra.json", r#"{"dim": 1, "amplitudes": [[1, 0]], "norm": 1}"#);
    assert_eq!(code(&run(&["measure", &extra, "--f", "l1"])), 1);
}

#[test]
fn nearly_normalized_input_is_rescaled_with_a_warning() {
    let f = Files::new();
    let near = f.write("near.json", r#"{"dim": 2, "amplitudes": [[0.7071068, 0], [0.7071068, 0]]}"#);
    let o = run(&["measure", &near, "--f", "shannon"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(stdout(&o).trim(), "1.000000000000");
}

#[test]
fn convert_reproduces_the_two_copy_example() {
    let f = Files::new();
    let psi = f.state("psi.json", &[1.0, 1.0, 0.0]);
    let phi = f.state("phi.json", &[1.0, 1.0, 1.0]);
    let o = run(&["convert", &psi, &phi]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "0.000000000000"));
    let o = run(&["convert", &psi, &phi, "--copies", "2"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "1.000000000000"));

    let o = run(&["convert", &psi, &phi, "--target-copies", "3"]);
    let text = stdout(&o);
    assert!(text.contains("target copies 2: 0.000000000000 (support shortcut: 0)"), "{text}");
    assert!(text.contains("target copies 3: 0.000000000000 (support shortcut: 0)"), "{text}");

    let out = f.path("empty.json");
    let o = run(&["convert", &psi, &phi, "--protocol", p(&out)]);
    assert_eq!(code(&o), 0);
    let file: ProtocolFile = read_json(&out).unwrap();
    assert!(file.stages.is_empty());
    assert_eq!(file.success_probability, 0.0);
}

#[test]
fn convert_writes_a_verified_protocol() {
    let f = Files::new();
    let psi = f.squares("psi.json", &[0.8, 0.1, 0.1]);
    let phi = f.squares("phi.json", &[0.4, 0.3, 0.3]);
    let out = f.path("protocol.json");
    let o = run(&["convert", &psi, &phi, "--protocol", p(&out)]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("0.333333333333\n"), "{text}");
    assert!(text.contains("2 stages"), "{text}");

    let file: ProtocolFile = read_json(&out).unwrap();
    assert_eq!(file.stages.len(), 2);
    assert!((file.report.composed_success_probability - 1.0 / 3.0).abs() < 1e-9);
    assert!(file.report.success_fidelities.iter().all(|&x| x >= 1.0 - 1e-9));
    assert!(file.report.completeness_residuals.iter().all(|&r| r <= 1e-9));
    assert!(file.report.incoherence_residuals.iter().all(|&r| r <= 1e-9));

    let o = run(&["verify-channel", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).ends_with("verdict: pass\n"));
}

#[test]
fn protocols_for_complex_states_verify() {
    let f = Files::new();
    let psi = f.write(
        "psi.json",
        r#"{"dim": 3, "amplitudes": [[0.6, 0], [0, 0.48], [0, -0.64]]}"#,
    );
    let phi = f.write(
        "phi.json",
        r#"{"dim": 3, "amplitudes": [[0, 0.8], [0.36, 0], [0.48, 0]]}"#,
    );
    let out = f.path("protocol.json");
    assert_eq!(code(&run(&["convert", &psi, &phi, "--protocol", p(&out)])), 0);
    let file: ProtocolFile = read_json(&out).unwrap();
    assert!(file.success_probability > 0.0);
    assert!((file.report.composed_success_probability - file.success_probability).abs() < 1e-9);
    assert!(file.report.success_fidelities.iter().all(|&x| x >= 1.0 - 1e-9));
    assert_eq!(code(&run(&["verify-channel", p(&out)])), 0);
}

#[test]
fn verify_channel_reports_witnesses() {
    let f = Files::new();
    let identity = f.write("id.json", &to_json(&ChannelFile::from_kraus(&KrausSet::identity(3))).unwrap());
    let o = run(&["verify-channel", &identity]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("incoherent: pass"));

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard = format!(
        r#"{{"dim": 2, "operators": [[[[{h}, 0], [{h}, 0]], [[{h}, 0], [{m}, 0]]]]}}"#,
        m = -h
    );
    let hadamard = f.write("h.json", &hadamard);
    let o = run(&["verify-channel", &hadamard]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("operator 0, column 0 has nonzero rows 0 and 1"), "{}", stdout(&o));

    let incomplete = f.write("half.json", r#"{"dim": 1, "operators": [[[[0.5, 0]]]]}"#);
    let o = run(&["verify-channel", &incomplete]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("completeness residual 7.500e-1: fail"), "{}", stdout(&o));
}

#[test]
fn ladder_prints_breakpoints_ratios_and_gamma() {
    let f = Files::new();
    let psi = f.squares("psi.json", &[0.8, 0.1, 0.1]);
    let phi = f.squares("phi.json", &[0.4, 0.3, 0.3]);
    let o = run(&["ladder", &psi, &phi]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("success probability: 0.333333333333"));
    assert!(text.contains("breakpoints: 4 2 1"));
    assert!(text.contains("ratios: 0.333333333333 2.000000000000"));
    assert!(text.contains("gamma: 0.894427191000 0.316227766017 0.316227766017"), "{text}");
}

fn density(f: &Files, name: &str, rho: &coherence::DensityMatrix) -> String {
    f.write(name, &to_json(&DensityFile::from_density(rho)).unwrap())
}

fn upper_bound(o: &Output) -> f64 {
    let text = stdout(o);
    let line = text.lines().find(|l| l.starts_with("upper bound: ")).unwrap();
    line["upper bound: ".len()..].parse().unwrap()
}

#[test]
fn roof_agrees_with_measure_on_pure_and_diagonal_inputs() {
    let f = Files::new();
    let psi = PureState::from_real(&[0.6, 0.0, 0.8]).unwrap();
    let state = f.write("psi.json", &to_json(&StateFile::from_state(&psi)).unwrap());
    let pure = density(&f, "pure.json", &psi.density_matrix());
    let measured = run(&["measure", &state, "--f", "l1"]);
    let roof = run(&["roof", &pure, "--f", "l1"]);
    assert_eq!(code(&roof), 0);
    assert_eq!(format!("{:.12}", upper_bound(&roof)), stdout(&measured).trim());

    let diag = f.write(
        "diag.json",
        r#"{"dim": 2, "entries": [[[0.3, 0], [0, 0]], [[0, 0], [0.7, 0]]]}"#,
    );
    let o = run(&["roof", &diag, "--f", "shannon"]);
    assert_eq!(upper_bound(&o), 0.0);
}

#[test]
fn roof_is_seeded_and_below_the_spectral_value() {
    let f = Files::new();
    let a = PureState::from_real(&[1.0, 1.0, 0.0]).unwrap();
    let b = PureState::from_real(&[0.0, 1.0, -1.0]).unwrap();
    let rho = coherence::DensityMatrix::mixture(&[(0.5, a), (0.5, b)]).unwrap();
    let path = density(&f, "mixed.json", &rho);
    let out = f.path("ensemble.json");
    let args = ["roof", &path, "--f", "shannon", "--restarts", "3", "--seed", "7", "--out", p(&out)];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(stdout(&first), stdout(&second));

    let text = stdout(&first);
    let spectral: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("spectral ensemble: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(upper_bound(&first) <= spectral + 1e-9);

    let file: RoofFile = read_json(&out).unwrap();
    assert_eq!(file.quality, "upper bound");
    let total: f64 = file.ensemble.iter().map(|m| m.weight).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn roof_rejects_invalid_density_matrices() {
    let f = Files::new();
    let bad = f.write(
        "bad.json",
        r#"{"dim": 2, "entries": [[[0.5, 0], [0.9, 0]], [[0.9, 0], [0.5, 0]]]}"#,
    );
    assert_eq!(code(&run(&["roof", &bad, "--f", "l1"])), 1);
}

#[test]
fn paper_demo_passes_and_fails_visibly() {
    let o = run(&["paper-demo"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));

    let o = run(&["paper-demo", "--tolerance", "-1"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL"));

    let o = run(&["paper-demo", "--json"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
    assert!(report["checks"].as_array().unwrap().len() >= 10);
}
