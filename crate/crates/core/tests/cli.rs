use std::path::Path;
use std::process::{Command, Output};

use approx::assert_relative_eq;

use awl::model::{ModelSpec, ENUMERATION_LIMIT};
use awl::oracle::enumerate_dos;
use awl::runner::{read_dos, read_trace, write_dos, write_file};
use awl::thermo::{specific_heat, Anchor};

fn awl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_awl"))
        .args(args)
        .output()
        .unwrap()
}

fn write_exact_l4(path: &Path) {
    let exact = enumerate_dos(ModelSpec::ising(4).unwrap(), ENUMERATION_LIMIT).unwrap();
    write_file(path, |b| write_dos(exact.ladder.levels(), &exact.log_g, b)).unwrap();
}

fn config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.cfg");
    let out = dir.join("out");
    std::fs::write(&path, format!("{body}output_dir = {}\n", out.display())).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "model = ising\nL = 4\nalgorithm = awl\neta0 = 1\nmax_sweeps = 3000\n\
         seeds = 5, 6\nreference_dos = exact\ncheck_interval_sweeps = 100\n",
    );
    let out = awl(&["run", &cfg, "--jobs", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out_dir = dir.path().join("out");
    for f in [
        "trace_seed5.csv",
        "trace_seed6.csv",
        "dos_seed5.csv",
        "dos_seed6.csv",
        "runs.csv",
        "summary.csv",
        "epsilon_mean.csv",
    ] {
        assert!(out_dir.join(f).exists(), "{f} missing");
    }

    let rows = read_trace(&out_dir.join("trace_seed5.csv")).unwrap();
    assert!(rows.iter().any(|r| r.event == "halved"));
    assert!(rows.iter().any(|r| r.event == "one_over_t"));
    let halvings: Vec<f64> = rows.iter().filter(|r| r.event == "halved").map(|r| r.sweep).collect();
    assert!(halvings.windows(2).all(|w| w[0] < w[1]));
    assert!(halvings.iter().all(|s| s % 100.0 == 0.0));
    let header = std::fs::read_to_string(out_dir.join("trace_seed5.csv")).unwrap();
    assert!(header.starts_with("sweep,eta,epsilon,l2,event\n"));

    let dos = read_dos(&out_dir.join("dos_seed5.csv")).unwrap();
    assert_eq!(dos.energies.len(), 15);
}

#[test]
fn seed_offset_shifts_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "model = ising\nL = 2\nalgorithm = wl\neta0 = 1\nmax_sweeps = 10\nseeds = 1\n",
    );
    let out = awl(&["run", &cfg, "--seed-offset", "100"]);
    assert!(out.status.success());
    assert!(dir.path().join("out/trace_seed101.csv").exists());
    assert!(!dir.path().join("out/epsilon_mean.csv").exists());
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "model = ising\nL = 7\nalgorithm = wl\neta0 = 1\nmax_sweeps = 10\nseeds = 1\n",
    );
    let out = awl(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");

    let out = awl(&["run", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(awl(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(awl(&["--help"]).status.code(), Some(0));

    // Enumeration reference for a lattice that is too large.
    let cfg = config(
        dir.path(),
        "model = ising\nL = 8\nalgorithm = wl\neta0 = 1\nmax_sweeps = 10\nseeds = 1\nreference_dos = exact\n",
    );
    assert_eq!(awl(&["run", &cfg]).status.code(), Some(1));
}

#[test]
fn potts_strict_ladder_refuses_sampled_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "model = potts\nL = 4\nq = 10\nalgorithm = wl\neta0 = 1\nmax_sweeps = 10\nseeds = 1\n",
    );
    let out = awl(&["run", &cfg, "--strict-ladder", "--discovery-sweeps", "10"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn potts_runs_on_discovered_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "model = potts\nL = 4\nq = 10\nalgorithm = awl\neta0 = 1\nmax_sweeps = 200\nseeds = 1\n",
    );
    let out = awl(&["run", &cfg, "--discovery-sweeps", "5000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let dos = read_dos(&dir.path().join("out/dos_seed1.csv")).unwrap();
    assert_eq!(dos.energies[0], -32);
    assert_eq!(*dos.energies.last().unwrap(), 0);
}

#[test]
fn heat_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let dos_path = dir.path().join("exact.csv");
    write_exact_l4(&dos_path);
    let out_path = dir.path().join("heat.csv");
    let out = awl(&[
        "heat",
        dos_path.to_str().unwrap(),
        "--t-start",
        "1",
        "--t-stop",
        "3",
        "--t-step",
        "0.5",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("T,C"));
    let dos = read_dos(&dos_path).unwrap();
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (t, c) = l.split_once(',').unwrap();
            (t.parse().unwrap(), c.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![1.0, 1.5, 2.0, 2.5, 3.0]);
    for (t, c) in rows {
        let want = specific_heat(&dos.log_g, &dos.energies_f64(), t).unwrap();
        assert_relative_eq!(c, want, max_relative = 1e-15);
    }
}

#[test]
fn error_command_reports_zero_for_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    write_exact_l4(&a);
    for anchor in [Anchor::SumToOne, Anchor::GroundState] {
        let out = awl(&["error", a.to_str().unwrap(), a.to_str().unwrap(), "--anchor", anchor.name()]);
        assert!(out.status.success());
        let text = String::from_utf8_lossy(&out.stdout);
        assert_eq!(text.lines().nth(1), Some("0e0,0e0"));
    }
    let out = awl(&["error", a.to_str().unwrap(), a.to_str().unwrap(), "--anchor", "bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dos_command_enumerates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "model = ising\nL = 4\nalgorithm = wl\neta0 = 1\nmax_sweeps = 10\nseeds = 9\n",
    );
    let out = awl(&["dos", &cfg]);
    assert!(out.status.success());
    let dos = read_dos(&dir.path().join("out/dos_exact.csv")).unwrap();
    let exact = enumerate_dos(ModelSpec::ising(4).unwrap(), ENUMERATION_LIMIT).unwrap();
    assert_eq!(dos.energies, exact.ladder.levels());
    assert_eq!(dos.log_g, exact.log_g);

    let cfg = config(
        dir.path(),
        "model = potts\nL = 8\nalgorithm = wl\neta0 = 1\nmax_sweeps = 10\nseeds = 9\n",
    );
    let out = awl(&["dos", &cfg, "--output", dir.path().join("x.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
