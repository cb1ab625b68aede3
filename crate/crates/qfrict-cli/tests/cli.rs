use qfrict_cli::report::read_rows;
use qfrict_cli::{cmd_sweep, ModelTag, RunConfig};
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

fn run(cfg: &str, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(cfg.as_bytes()).unwrap();
    let mut c = Command::new(env!("CARGO_BIN_EXE_qfrict"));
    c.args(args).arg("--config").arg(f.path()).env_remove("QFRICT_QUAD_TOL");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn uniform_motion_at_rest_gives_zero_power() {
    let o = run("models = PA, Markov\ntrajectory.kind = constant\ntrajectory.v = 0\n", &["compute"], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_rows(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.value == 0.0));
}

#[test]
fn launch_powers_cancel_in_output() {
    let o = run("models = PB, P1\ntrajectory.kind = sudden\n", &["compute"], &[]);
    assert_eq!(code(&o), 0);
    let rows = read_rows(&stdout(&o)).unwrap();
    let get = |m| rows.iter().find(|r| r.model == m).unwrap().value;
    let (b, one) = (get(ModelTag::PB), get(ModelTag::P1));
    assert!(b > 0.0 && (b + one).abs() <= 1e-3 * b);
    assert!(rows.iter().all(|r| r.mode == "leading"));
    let o = run("models = PB\ntrajectory.kind = sudden\n", &["compute", "--mode", "full"], &[]);
    assert_eq!(read_rows(&stdout(&o)).unwrap()[0].mode, "full");
}

#[test]
fn csv_round_trip_is_bit_exact_and_ordered() {
    let cfg = "models = Markov, PA\nmodels.pa_mode = asymptotic\nmodels.markov_mode = small-v\nsweep.variable = v\nsweep.min = 0.001\nsweep.max = 0.02\nsweep.points = 5\n";
    let o = run(cfg, &["sweep", "--jobs", "3"], &[]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().starts_with('#'));
    let rows = read_rows(&text).unwrap();
    let lib = cmd_sweep(&RunConfig::parse(cfg, Path::new(".")).unwrap(), 1).unwrap();
    assert_eq!(rows, lib);
    for (a, b) in rows.iter().zip(&lib) {
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
    let tags: Vec<&str> = rows.iter().map(|r| r.model.tag()).collect();
    assert_eq!(tags, ["Markov"; 5].into_iter().chain(["PA"; 5]).collect::<Vec<_>>());
    assert!(rows[..5].windows(2).all(|w| w[0].x < w[1].x));
    let again = run(cfg, &["sweep", "--jobs", "1"], &[]);
    assert_eq!(stdout(&again), text);
    assert_eq!(rows[0].groups[0], 0.001);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let o = run("models = PA\nmodels.pa_mode = asymptotic\n", &["compute", "--output", out.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(read_rows(&std::fs::read_to_string(out).unwrap()).unwrap().len(), 1);
}

#[test]
fn fit_recovers_closed_form_exponent() {
    let cfg = "models = PA\nmodels.pa_mode = asymptotic\nsweep.variable = z\nsweep.min = 0.5\nsweep.max = 2\nsweep.points = 6\n";
    let o = run(cfg, &["fit-exponent"], &[]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("PA,")).unwrap();
    let slope: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
    assert!((slope + 10.0).abs() < 1e-10, "{slope}");
}

#[test]
fn config_errors_exit_two() {
    let o = run("atom.z = -1\n", &["compute"], &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("atom"));
    assert_eq!(code(&run("bogus = 1\n", &["compute"], &[])), 2);
    assert_eq!(code(&run("models = PA\n", &["compare-models"], &[])), 2);
    assert_eq!(code(&run("models = PA\n", &["sweep"], &[])), 2);
    assert_eq!(code(&run("models = PA\nsweep.variable = v\nsweep.values = 0.01, 0.02, 0.03\n", &["fit-exponent"], &[])), 2);
    assert_eq!(code(&run("models = PA\n", &["compute"], &[("QFRICT_QUAD_TOL", "nope")])), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_qfrict")).arg("compute").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn numeric_failure_exits_three() {
    let o = run("models = Markov\nquad.rel_tol = 1e-13\nquad.max_evals = 1000\n", &["compute"], &[]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Markov"));
}

#[test]
fn zero_values_refuse_fit() {
    let cfg = "models = PB\ntrajectory.kind = constant\nsweep.variable = v\nsweep.min = 0.001\nsweep.max = 0.01\nsweep.points = 4\n";
    let o = run(cfg, &["fit-exponent"], &[]);
    assert_eq!(code(&o), 4);
}

#[test]
fn compare_models_emits_ratios() {
    let cfg = "models = Markov, PB\nmodels.markov_mode = small-v\nmaterial.gamma_damp = 0.2\natom.omega0 = 3\n";
    let o = run(cfg, &["compare-models"], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines().skip(1);
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header, ["sweep_variable", "sweep_value", "v", "Markov", "PB", "markov_power_over_pb"]);
    let vals: Vec<f64> = lines.next().unwrap().split(',').skip(2).map(|s| s.parse().unwrap()).collect();
    assert!((vals[3] - (-vals[1] * vals[0] / vals[2])).abs() < 1e-12 * vals[3]);
}

#[test]
fn loose_tolerance_fails_oracle_check() {
    let o = run("quad.rel_tol = 0.5\n", &["oracle-check"], &[]);
    assert_eq!(code(&o), 5);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("k-constant-pa,FAIL")));
    let o = run("models = PA\n", &["oracle-check"], &[("QFRICT_QUAD_TOL", "0.5")]);
    assert_eq!(code(&o), 5);
    assert!(String::from_utf8_lossy(&o.stderr).contains("k-constant-pb"));
}

#[test]
fn default_oracle_check_passes() {
    let o = run("models = PA\n", &["oracle-check"], &[]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).lines().skip(2).all(|l| !l.contains(",FAIL,")));
}
