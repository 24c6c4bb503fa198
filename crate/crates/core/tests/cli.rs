use std::process::Command;

fn biotbench(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_biotbench")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn run_prints_csv() {
    let (code, out, err) = biotbench(&["run", "--problem", "mandel2d", "--h", "1/8", "--precond", "bu", "--nu", "0.2"]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("problem,variant,precond"));
    assert!(lines[1].starts_with("mandel2d,full,bu,false,0.125,0.01,0.2,"), "{}", lines[1]);
}

#[test]
fn run_writes_file_and_reports_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let (code, _, _) = biotbench(&[
        "run", "--h", "1/4", "--precond", "bd", "--tol", "1e-14", "--max-iter", "2", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",2,false,"));
}

#[test]
fn bad_arguments_exit_with_two() {
    let (code, _, err) = biotbench(&["run", "--precond", "bz"]);
    assert_eq!(code, 2);
    assert!(err.contains("error"));
    let (code, _, _) = biotbench(&["run", "--h", "0.3"]);
    assert_eq!(code, 2);
}

#[test]
fn sweep_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    let out = dir.path().join("out.csv");
    std::fs::write(&cfg, "# small grid\nproblem = mandel2d\nprecond = bl, ble\nh = 1/4, 1/8\ntau = 0.1\n").unwrap();
    let (code, _, err) = biotbench(&["sweep", "--spec", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 5);
    assert!(err.contains("max/min iterations"));
}

#[test]
fn analyze_checks() {
    for check in ["infsup", "inequalities", "lsl", "fov"] {
        let (code, out, err) = biotbench(&[
            "analyze", "--check", check, "--h", "1/2", "--tau", "0.01", "--nu", "0.2", "--perm", "1e-6",
        ]);
        assert_eq!(code, 0, "{check}: {err}\n{out}");
        let mut lines = out.lines();
        assert_eq!(lines.next().unwrap(), "kind,check,problem,h,tau,nu,k,quantity,value,bound,pass");
        let rows: Vec<&str> = lines.collect();
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.starts_with(&format!("analysis,{check},mandel2d,0.5,")) && r.ends_with("true")));
    }
    let (code, out, _) = biotbench(&["analyze", "--check", "constants", "--h", "1/2", "--tau", "0.1", "--nu", "0", "--perm", "1"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn export_matrix_market() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = biotbench(&["export-mm", "--out", dir.path().to_str().unwrap(), "--h", "1/2"]);
    assert_eq!(code, 0, "{err}");
    let files: Vec<&str> = out.lines().collect();
    assert_eq!(files.len(), 9);
    for stem in ["full", "diag", "elim"] {
        let path = |ext: &str| dir.path().join(format!("{stem}{ext}"));
        let a = biot_core::la::read_matrix_market(std::io::BufReader::new(std::fs::File::open(path(".mtx")).unwrap()))
            .unwrap();
        let rhs = std::fs::read_to_string(path("_rhs.txt")).unwrap();
        assert_eq!(rhs.lines().count(), a.nrows());
        let blocks = std::fs::read_to_string(path(".blocks")).unwrap();
        assert!(blocks.starts_with(&format!("variant {stem}")));
        let total: usize = blocks
            .lines()
            .filter_map(|l| l.strip_prefix("block "))
            .map(|l| l.split_whitespace().nth(1).unwrap().parse::<usize>().unwrap())
            .sum();
        assert_eq!(total, a.nrows());
    }
}
