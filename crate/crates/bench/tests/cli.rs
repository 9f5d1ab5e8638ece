use std::process::Command;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geopg-bench"))
}

#[test]
fn synthetic_run_succeeds_and_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench()
        .args(["--synthetic", "60,40,2", "--alpha", "1e-3", "--mu-scale", "1e-3", "--solver", "geopg,geopg-b,apg-b"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}\n{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains("f-diff"));
    assert!(stdout.contains("rate geopg "));
    let csvs = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert_eq!(csvs, 3);
}

#[test]
fn libsvm_input_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("tiny.svm");
    std::fs::write(&data, "1 1:0.5 2:1\n-1 1:-1 3:0.25\n1 2:2 3:-1\n-1 1:1.5\n").unwrap();
    let out = bench()
        .args(["--problem", "logistic", "--alpha", "1e-2", "--mu", "1e-3", "--criterion", "gradmap", "--tol", "1e-10"])
        .arg("--data")
        .arg(&data)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_arguments_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["--alpha", "1e-3"],
        &["--synthetic", "10"],
        &["--synthetic", "10,5", "--solver", "sgd"],
        &["--synthetic", "10,5", "--eta", "1.5"],
    ];
    for args in cases {
        let out = bench().args(args).arg("--out").arg(dir.path()).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}
