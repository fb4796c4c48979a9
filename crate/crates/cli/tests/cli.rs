use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dirrec::synth::generate;
use dirrec::{ConstraintBall, Dataset, FeatureLaw, LinkFunction, LossKind, Vector};
use dirrec_cli::commands::{fit_report, load_dataset, FitRequest};

fn dirrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirrec"))
        .args(args)
        .env("DR_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: [&str; 8] = [
    "--replicates",
    "2",
    "--train-sizes",
    "100,1000",
    "--eval-size",
    "5000",
    "--baseline-size",
    "20000",
];

fn small_figure(fig: &str, out: &Path) -> Output {
    let mut args = vec!["figure", fig, "--out", out.to_str().unwrap()];
    args.extend(SMALL);
    dirrec(&args)
}

fn write_dataset(path: &Path, with_pstar: bool) -> Dataset {
    let law = FeatureLaw::gaussian_iid(2, 1.0);
    let beta = Vector::new(vec![1.0, -3.0]).unwrap();
    let mut data = generate(&law, LinkFunction::Logistic, &beta, 400, 5).unwrap();
    if !with_pstar {
        data.true_probabilities = None;
    }
    let mut buf = Vec::new();
    data.write_csv(&mut buf).unwrap();
    fs::write(path, buf).unwrap();
    data
}

#[test]
fn help_lists_exit_codes() {
    let o = dirrec(&["--help"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for needle in [
        "figure",
        "verify",
        "fit",
        "sweep",
        "Exit codes",
        "DR_THREADS",
    ] {
        assert!(text.contains(needle), "missing {needle}");
    }
    let o = dirrec(&["figure", "--help"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("3  invalid input"));
}

#[test]
fn bad_arguments_exit_3() {
    assert_eq!(code(&dirrec(&["nope"])), 3);
    assert_eq!(code(&dirrec(&["figure", "fig9", "--out", "x"])), 3);
    assert_eq!(code(&dirrec(&["verify", "geometry", "--trials", "0"])), 3);
    let o = Command::new(env!("CARGO_BIN_EXE_dirrec"))
        .args(["verify", "geometry", "--trials", "1"])
        .env("DR_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("DR_THREADS"));
}

#[test]
fn unwritable_out_dir_exits_2_before_work() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let out = blocker.join("sub");
    let o = small_figure("fig4", &out);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("sub"));
}

#[test]
fn figure_outputs_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&small_figure("fig4", &a)), 0);
    assert_eq!(code(&small_figure("fig4", &b)), 0);
    for name in [
        "fig4_cells.csv",
        "fig4_agg.csv",
        "fig4_panel_a.svg",
        "fig4_panel_b.svg",
    ] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn panels_are_well_formed_svg() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_figure("fig6", tmp.path())), 0);
    for name in ["fig6_panel_a.svg", "fig6_panel_b.svg"] {
        let text = fs::read_to_string(tmp.path().join(name)).unwrap();
        let doc = roxmltree::Document::parse(&text).expect("valid XML");
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        let lines = doc
            .descendants()
            .filter(|n| n.has_tag_name("polyline"))
            .count();
        assert_eq!(lines, 6, "{name}: one series per fig6 cell");
    }
}

#[test]
fn manifest_records_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_figure("fig5", tmp.path())), 0);
    let text = fs::read_to_string(tmp.path().join("manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in [
        "command",
        "config_digest",
        "base_seed",
        "tool_version",
        "started_at",
        "finished_at",
        "output_paths",
    ] {
        assert!(m.get(key).is_some(), "missing {key}");
    }
    assert_eq!(m["config_digest"].as_str().unwrap().len(), 64);
    assert_eq!(m["base_seed"], 0);
    assert!(m["command"]
        .as_str()
        .unwrap()
        .starts_with("dirrec figure fig5"));
    let paths = m["output_paths"].as_array().unwrap();
    assert_eq!(paths.len(), 5);
    for p in paths {
        assert!(Path::new(p.as_str().unwrap()).exists());
    }
    let configs = m["configs"].as_array().unwrap();
    assert_eq!(configs.len(), 6);
    assert!(configs[0]["canonical"]
        .as_str()
        .unwrap()
        .contains("replicates = 2"));
}

#[test]
fn seed_changes_cells_but_not_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&small_figure("fig4", &a)), 0);
    let mut args = vec![
        "figure",
        "fig4",
        "--out",
        b.to_str().unwrap(),
        "--seed",
        "9",
    ];
    args.extend(SMALL);
    assert_eq!(code(&dirrec(&args)), 0);
    let ca = fs::read_to_string(a.join("fig4_cells.csv")).unwrap();
    let cb = fs::read_to_string(b.join("fig4_cells.csv")).unwrap();
    assert_ne!(ca, cb);
    assert_eq!(ca.lines().count(), cb.lines().count());
    assert_eq!(ca.lines().next(), cb.lines().next());
}

#[test]
fn sweep_runs_a_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("probe.cfg");
    fs::write(
        &cfg,
        "# small run\nlaw = gaussian_iid\nlink = logistic\nbeta_star = 1,1\nloss = logistic\nradius = inf\n\
         train_sizes = 100,300\nreplicates = 2\neval_size = 2000\nbaseline_size = 5000\nbase_seed = 3\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = dirrec(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cells = fs::read_to_string(out.join("sweep_cells.csv")).unwrap();
    assert_eq!(cells.lines().count(), 1 + 2 * 2);
    assert!(cells
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("sweep,probe,gaussian_iid,logistic,logistic"));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["base_seed"], 3);
}

#[test]
fn malformed_config_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    for text in [
        "law = gaussian_iid\nlink = logistic\n",
        "law = gaussian_iid\nlink = logistic\nbeta_star = 1,1\nloss = logistic\ncolour = red\n",
        "law = gaussian_iid\nlink = logistic\nbeta_star = 1,1\nloss = logistic\nreplicates = 0\n",
        "this line has no equals sign\n",
    ] {
        let cfg = tmp.path().join("bad.cfg");
        fs::write(&cfg, text).unwrap();
        let o = dirrec(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 3, "{text}: {}", stderr(&o));
    }
    assert!(!out.exists(), "no output directory for rejected configs");
    let o = dirrec(&[
        "sweep",
        "--config",
        "/nonexistent/x.cfg",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn fit_report_matches_in_process_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("d.csv");
    write_dataset(&csv, true);
    for (loss, radius) in [
        ("square", "inf"),
        ("logistic", "inf"),
        ("square", "0.3"),
        ("logistic", "0.3"),
    ] {
        let report = tmp.path().join(format!("{loss}_{radius}.json"));
        let o = dirrec(&[
            "fit",
            "--data",
            csv.to_str().unwrap(),
            "--loss",
            loss,
            "--radius",
            radius,
            "--report",
            report.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let from_cli: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
        let stdout: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(from_cli, stdout);

        let data = load_dataset(&csv).unwrap();
        let ball = if radius == "inf" {
            ConstraintBall::unbounded()
        } else {
            ConstraintBall::new(0.3).unwrap()
        };
        let req = FitRequest::new(csv.clone(), LossKind::parse(loss).unwrap(), ball);
        let direct = serde_json::to_value(fit_report(&data, &req).unwrap()).unwrap();
        let cli_beta = from_cli["fit"]["beta_tilde"].as_array().unwrap();
        let direct_beta = direct["fit"]["beta_tilde"].as_array().unwrap();
        for (a, b) in cli_beta.iter().zip(direct_beta) {
            assert!((a.as_f64().unwrap() - b.as_f64().unwrap()).abs() <= 1e-12);
        }
        for key in [
            "empirical_phi_risk",
            "excess_01",
            "excess_phi",
            "sine_theta",
            "bound_sin",
            "bound_bartlett",
        ] {
            let (a, b) = (
                from_cli["risk"][key].as_f64().unwrap(),
                direct["risk"][key].as_f64().unwrap(),
            );
            assert!((a - b).abs() <= 1e-12, "{key}: {a} vs {b}");
        }
        if radius != "inf" {
            let norm: f64 = cli_beta
                .iter()
                .map(|v| v.as_f64().unwrap().powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(norm <= 0.3 + 1e-9);
        }
        let r = &from_cli["risk"];
        assert!(r["excess_01"].as_f64().unwrap() <= r["bound_sin"].as_f64().unwrap() + 1e-12);
        assert!(r["bound_sin"].as_f64().unwrap() <= r["bound_bartlett"].as_f64().unwrap() + 1e-12);
    }
}

#[test]
fn fit_without_true_probabilities_reports_nulls() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("d.csv");
    write_dataset(&csv, false);
    let o = dirrec(&["fit", "--data", csv.to_str().unwrap(), "--loss", "logistic"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["risk"]["empirical_phi_risk"].as_f64().unwrap() > 0.0);
    for key in [
        "excess_01",
        "std_error_01",
        "excess_phi",
        "sine_theta",
        "fstar_norm",
        "bound_sin",
        "bound_bartlett",
    ] {
        assert!(v["risk"][key].is_null(), "{key} should be null");
    }
    assert!(v["radius"].is_null());
}

#[test]
fn fit_rejects_bad_labels_with_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("bad.csv");
    fs::write(&csv, "x1,x2,y\n0.1,0.2,1\n0.3,0.4,0\n").unwrap();
    let o = dirrec(&["fit", "--data", csv.to_str().unwrap(), "--loss", "square"]);
    assert_eq!(code(&o), 3);
    let err = stderr(&o);
    assert!(err.contains("labels must be -1 or +1"), "{err}");
    assert!(err.contains("line 3"), "{err}");

    fs::write(&csv, "x1,x2,y\n0.1,oops,1\n").unwrap();
    assert_eq!(
        code(&dirrec(&[
            "fit",
            "--data",
            csv.to_str().unwrap(),
            "--loss",
            "square"
        ])),
        3
    );
    assert_eq!(
        code(&dirrec(&[
            "fit",
            "--data",
            csv.to_str().unwrap(),
            "--loss",
            "hinge"
        ])),
        3
    );
    assert_eq!(
        code(&dirrec(&[
            "fit",
            "--data",
            "/nonexistent.csv",
            "--loss",
            "square"
        ])),
        2
    );
    let good = tmp.path().join("good.csv");
    write_dataset(&good, true);
    assert_eq!(
        code(&dirrec(&[
            "fit",
            "--data",
            good.to_str().unwrap(),
            "--loss",
            "square",
            "--radius",
            "-1"
        ])),
        3
    );
}

#[test]
fn verify_reports_pass_lines() {
    let o = dirrec(&["verify", "geometry", "--trials", "5", "--seed", "2"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("PASS geometry."))
            .count(),
        5
    );
    let o = dirrec(&[
        "verify",
        "--property",
        "bounds.bound_validity",
        "--trials",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(
        code(&dirrec(&[
            "verify",
            "--property",
            "no.such",
            "--trials",
            "3"
        ])),
        3
    );
}
