use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kgbayes::cli::{EXIT_DATA, EXIT_OK, EXIT_USAGE};
use kgbayes::dataset::load_csv;
use kgbayes::model_io::{self, Model};

fn kb() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/synthetic200.kb")
}

fn kgbayes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgbayes")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn encode_fit_predict_rules() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("student.csv");
    let out = kgbayes(&["encode", s(&kb()), "--label", "Student", "-o", s(&csv)]);
    assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
    let ds = load_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(ds.n_rows(), 200);
    assert!(!ds.feature_names().iter().any(|f| f == "Student"));

    let phase1 = dir.path().join("phase1.json");
    let trace = dir.path().join("trace.csv");
    let out = kgbayes(&["fit", s(&csv), "--model", "mbnb-em", "--phase1-only", "--trace", s(&trace), "-o", s(&phase1)]);
    assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("phase,iteration,loglik\n1,0,"), "{text}");

    for model in ["mbnb", "mbnb-em", "hbm"] {
        let json = dir.path().join(format!("{model}.json"));
        let mut args = vec!["fit", s(&csv), "--model", model, "-o", s(&json)];
        if model == "hbm" {
            args.extend(["--k-grid", "2..3", "--restarts", "2"]);
        }
        let out = kgbayes(&args);
        assert_eq!(code(&out), EXIT_OK, "{model}: {}", String::from_utf8_lossy(&out.stderr));
        if model == "mbnb-em" {
            let out = kgbayes(&["fit", s(&csv), "--model", model, "--trace", s(&trace), "-o", s(&json)]);
            assert_eq!(code(&out), EXIT_OK);
            let text = std::fs::read_to_string(&trace).unwrap();
            assert!(text.lines().any(|l| l.starts_with("2,0,")), "{text}");
        }
        let loaded = model_io::load(&json).unwrap();
        assert_eq!(loaded.feature_names(), &ds.feature_names()[..]);

        let pred = dir.path().join(format!("{model}-pred.csv"));
        let out = kgbayes(&["predict", s(&json), s(&csv), "--theta", "0.8", "-o", s(&pred)]);
        assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
        let text = std::fs::read_to_string(&pred).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.ends_with("posterior,decision"), "{header}");
        assert_eq!(text.lines().count(), 201);
        assert!(text.lines().skip(1).all(|l| {
            let d = l.rsplit(',').next().unwrap();
            ["positive", "negative", "rejected"].contains(&d)
        }));

        let rules = dir.path().join(format!("{model}-rules.txt"));
        let out = kgbayes(&[
            "rules", s(&json), "--theta", "0.9", "--target", "Student", "--data", s(&csv), "-o", s(&rules),
        ]);
        assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
        let text = std::fs::read_to_string(&rules).unwrap();
        assert!(text.contains("Student SubClassOf:"), "{text}");
        if matches!(loaded, Model::Hbm(_)) {
            assert!(text.contains("Student_1"), "{text}");
        }
    }
}

#[test]
fn eval_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report");
    let out = kgbayes(&[
        "eval", s(&kb()), "--folds", "3", "--problems", "3", "--k-grid", "2..3", "--restarts", "2", "-o",
        s(&report),
    ]);
    assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["summary.csv", "problems.csv", "rank_test.txt", "problems/P1.csv"] {
        assert!(report.join(f).is_file(), "missing {f}");
    }
    let summary = std::fs::read_to_string(report.join("summary.csv")).unwrap();
    // one row per model and metric
    assert_eq!(summary.lines().next(), Some("model,metric,mean,std"));
    assert_eq!(summary.lines().count(), 1 + 3 * 4);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&kgbayes(&[])), EXIT_USAGE);
    assert_eq!(code(&kgbayes(&["encode", "--no-such-flag"])), EXIT_USAGE);
    assert_eq!(code(&kgbayes(&["fit", "x.csv", "--model", "svm", "-o", "m.json"])), EXIT_USAGE);
    assert_eq!(code(&kgbayes(&["fit", "x.csv", "--phase1-only", "-o", "m.json"])), EXIT_USAGE);
    let out = kgbayes(&["eval", s(&kb()), "--k-grid", "ten", "-o", "unused"]);
    assert_eq!(code(&out), EXIT_USAGE);
    assert!(String::from_utf8_lossy(&out.stderr).contains("K grid"));
}

#[test]
fn bad_data_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("all_pos.csv");
    std::fs::write(&csv, "a,b,label\n1,0,1\n?,1,1\n").unwrap();
    let json = dir.path().join("m.json");
    let out = kgbayes(&["fit", s(&csv), "-o", s(&json)]);
    assert_eq!(code(&out), EXIT_DATA, "{}", String::from_utf8_lossy(&out.stderr));

    std::fs::write(&csv, "a,b,label\n1,2,1\n").unwrap();
    let out = kgbayes(&["fit", s(&csv), "-o", s(&json)]);
    assert_eq!(code(&out), EXIT_DATA);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"kind\": \"mbnb\"}").unwrap();
    let out = kgbayes(&["predict", s(&broken), s(&csv), "-o", s(&dir.path().join("p.csv"))]);
    assert_eq!(code(&out), EXIT_DATA);
    assert!(!kgbayes(&["encode", "/no/such.kb", "-o", s(&json)]).status.success());
}
