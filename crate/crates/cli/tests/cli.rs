use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nmpgap::decoders::SchedulePolicy;
use nmpgap::graph::{build_ldpc_graph, load_alist};
use nmpgap::metrics::Evaluator;
use nmpgap::scheduling::tau;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmpgap")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn polar_sc_ga_staircase_has_closed_form_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "[code]\nfamily = \"polar\"\nn = 256\nk = 128\n[channel]\nsigma = 0.8\n[decoder]\nkind = \"sc\"\n[metric]\nmode = \"ga\"\ntrials = 1\nstride = 1\n",
    );
    let csv = ok(&["curve", "--config", cfg.to_str().unwrap()]);
    assert!(csv.lines().any(|l| l == "nmp,gap,gap_se,avg_entropy,avg_entropy_se,ber,ber_se"));
    assert_eq!(data_rows(&csv).len(), 256 * 8 + 1);
}

fn ldpc_mc_config(dir: &Path, seed: u64) -> PathBuf {
    let body = format!(
        "seed = {seed}\n[code]\nalist = \"{}\"\n[channel]\nebn0_db = 2.5\n[decoder]\nkind = \"flooding\"\niterations = 4\n[metric]\nmode = \"mc\"\ntrials = 20\nstride = {}\n",
        data("ldpc_3_6_n512.alist").display(),
        2 * 1536
    );
    write_config(dir, "mc.toml", &body)
}

#[test]
fn mc_rows_land_on_iteration_boundaries_and_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ldpc_mc_config(dir.path(), 9);
    let a = ok(&["curve", "--config", cfg.to_str().unwrap()]);
    let rows = data_rows(&a);
    let nmps: Vec<u64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(nmps, (0..=4).map(|i| i * 3072).collect::<Vec<_>>());
    assert!(a.contains("# seed=9") && a.contains("# trials=20") && a.contains("# schedule_hash="));
    let b = ok(&["curve", "--config", cfg.to_str().unwrap(), "--threads", "3"]);
    assert_eq!(a, b);
    let out = dir.path().join("c.csv");
    ok(&["curve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(out).unwrap(), a);
    let c = ok(&["curve", "--config", cfg.to_str().unwrap(), "--seed", "10"]);
    assert_ne!(a, c);
}

#[test]
fn noiseless_bler_point_and_sc_message_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "b.toml",
        "[code]\nfamily = \"polar\"\nn = 64\nk = 32\ndesign_sigma = 0.8\n[decoder]\nkind = \"sc\"\n[bler]\nebn0_db = [200.0]\nmax_trials = 50\n",
    );
    let csv = ok(&["bler", "--config", cfg.to_str().unwrap()]);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 384.0);
}

#[test]
fn bler_sweep_is_monotone_and_early_termination_saves_messages() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "[code]\nalist = \"{}\"\n[decoder]\nkind = \"flooding\"\niterations = 30\nearly_termination = true\n[bler]\nebn0_db = [1.0, 2.0, 3.0]\nmax_trials = 640\nmin_errors = 40\n",
        data("ldpc_3_6_n512.alist").display()
    );
    let cfg = write_config(dir.path(), "b.toml", &body);
    let rows = data_rows(&ok(&["bler", "--config", cfg.to_str().unwrap()]));
    let bler: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let trials: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    let nmp: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    for i in 1..bler.len() {
        // 95% normal-approximation intervals must not put the later point above the earlier.
        let hw = |p: f64, n: f64| 1.96 * (p * (1.0 - p) / n).sqrt();
        assert!(bler[i] - hw(bler[i], trials[i]) <= bler[i - 1] + hw(bler[i - 1], trials[i - 1]), "{bler:?}");
        assert!(nmp[i] < nmp[i - 1], "{nmp:?}");
    }
}

#[test]
fn compare_ranks_a_single_config() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "sc.toml",
        "[code]\nfamily = \"polar\"\nn = 64\nk = 32\n[channel]\nsigma = 0.7\n[decoder]\nkind = \"sc\"\n[metric]\nmode = \"ga\"\ntrials = 1\nstride = 1\n",
    );
    let cfg = write_config(dir.path(), "cmp.toml", "[code]\nfamily = \"polar\"\nn = 64\nk = 32\ndesign_sigma = 0.7\n[compare]\nconfigs = [\"sc.toml\"]\ngap_target = -1.0\n");
    let csv = ok(&["compare", "--config", cfg.to_str().unwrap()]);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "1");
    assert_eq!(rows[0][1], "sc");
    assert_eq!(rows[0][3], "unreachable");
}

#[test]
fn schedule_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let alist = data("ldpc_3_6_n512.alist");
    let body = format!(
        "[code]\nalist = \"{}\"\n[channel]\nebn0_db = 2.5\n[schedule]\nhorizon = 15360\n",
        alist.display()
    );
    let cfg = write_config(dir.path(), "s.toml", &body);
    let out = dir.path().join("greedy.sched");
    ok(&["schedule", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let report = std::fs::read_to_string(dir.path().join("greedy.sched.tau.csv")).unwrap();
    let rows = data_rows(&report);
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["greedy", "layered", "flooding"]);
    let taus: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(taus[0] <= taus[1], "{taus:?}");

    let g = build_ldpc_graph(&load_alist(&std::fs::read_to_string(&alist).unwrap()).unwrap());
    let sched = SchedulePolicy::from_text(&std::fs::read_to_string(&out).unwrap(), &g).unwrap();
    let spec = nmpgap::channel::snr_to_sigma(2.5, 0.5).unwrap();
    assert_eq!(tau(&g, &spec, &sched, 15360, Evaluator::Ga).unwrap(), taus[0]);
}

#[test]
fn invalid_inputs_fail_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.alist", "4 2\n3 3\n");
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &format!("[code]\nalist = \"{}\"\n[channel]\nsigma = 1.0\n", bad.display()),
    );
    let out = run(&["curve", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    let cfg = write_config(dir.path(), "d.toml", "[code]\nfamily = \"chain\"\nchecks = 3\ncheck_degree = 3\n[channel]\nsigma = 1.0\n[decoder]\nkind = \"sc\"\n");
    let out = run(&["curve", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("polar"));

    let out = run(&["curve", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn de_mode_on_a_chain_tree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "t.toml",
        "[code]\nfamily = \"chain\"\nchecks = 3\ncheck_degree = 3\n[channel]\nsigma = 0.9\n[decoder]\nkind = \"layered\"\niterations = 2\n[metric]\nmode = \"de\"\ntrials = 1\nstride = 1\n",
    );
    let rows = data_rows(&ok(&["curve", "--config", cfg.to_str().unwrap()]));
    assert_eq!(rows.len(), 2 * 2 * 9 + 1);
    let gaps: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-9));
}
