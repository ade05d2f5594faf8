use hmonoid::cli;
use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(args.iter().copied(), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn header_and_rows() {
    let (code, out, _) = run(&["count", "--x", "100"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("# hmonoid-csv/1 count"));
    assert_eq!(lines[1], "x,subset,statistic,value");
    assert_eq!(lines[2], "100,hfree2,count,61");
    let (_, out, _) = run(&["count", "--subset", "hfull", "--checkpoints", "10^2,1e3"]);
    assert!(out.contains("100,hfull2,count,14\n"));
    let (_, out, _) = run(&["count", "--instance", "fq:2", "--subset", "all", "--x", "d3"]);
    assert!(out.contains("d3,all,count,15\n"));
    let (_, out, _) = run(&["count", "--x", "100", "--exclude", "2"]);
    assert!(out.contains(",41\n"));
}

#[test]
fn graded_definition_file() {
    let path = std::env::temp_dir().join("hmonoid_cli_def.txt");
    std::fs::write(&path, "q 2\nkappa 2\nd 1 2\nd 2 1\nd 3 2\n").unwrap();
    let (code, out, err) = run(&["count", "--instance", path.to_str().unwrap(), "--subset", "all", "--x", "d3"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("d3,all,count,15\n"), "{out}");
}

#[test]
fn validation_errors_exit_1() {
    for args in [
        vec!["count", "--x", "100", "--h", "1"],
        vec!["count", "--x", "abc"],
        vec!["count"],
        vec!["count", "--x", "d5"],
        vec!["count", "--x", "100", "--instance", "fq:6"],
        vec!["count", "--x", "100", "--exclude", "4"],
        vec!["count", "--x", "100", "--workers", "0"],
        vec!["verify", "--theorem", "nope", "--x", "100"],
        vec!["frobnicate"],
        vec!["count", "--x", "100", "--no-such-flag"],
    ] {
        let (code, _, err) = run(&args);
        assert_eq!(code, 1, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("convolve"));
}

#[test]
fn corrupted_alpha_exits_2() {
    let (code, _, err) = run(&["alpha", "--h", "4", "--inject-alpha-fault"]);
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = run(&["alpha", "--h", "2", "--inject-alpha-fault"]);
    assert_eq!(code, 2);
    let (code, out, _) = run(&["convolve", "--h", "3", "--checkpoints", "1e3,1e6", "--inject-alpha-fault"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    let (code, out, _) = run(&["convolve", "--h", "3", "--checkpoints", "1e3,1e6"]);
    assert_eq!(code, 0);
    assert!(out.lines().skip(2).all(|l| l.ends_with(",true")));
    // the binary maps the same failure to its process exit status
    let status = Command::new(env!("CARGO_BIN_EXE_hmonoid"))
        .args(["alpha", "--h", "5", "--inject-alpha-fault"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));
}

#[test]
fn workers_do_not_change_output() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["count", "--checkpoints", "1e4,1e5,1e6"],
        vec!["moments", "--k", "2", "--checkpoints", "1e4,1e6"],
        vec!["violations", "--subset", "hfull", "--statistic", "bigomega", "--checkpoints", "1e4,1e8"],
        vec!["count", "--instance", "gaussian", "--subset", "hfull", "--h", "3", "--checkpoints", "1e4,1e6"],
        vec!["verify", "--theorem", "hfree-omega2", "--checkpoints", "1e4,1e5", "--cutoff", "1e6"],
    ];
    for args in cases {
        let base = run(&args).1;
        assert!(!base.is_empty());
        for w in ["4", "16"] {
            let mut a = args.clone();
            a.extend(["--workers", w]);
            assert_eq!(run(&a).1, base, "{a:?}");
        }
    }
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join("hmonoid_cli_out.csv");
    let _ = std::fs::remove_file(&path);
    let (code, out, _) = run(&["alpha", "--h", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, "# hmonoid-csv/1 alpha h=3\nr,alpha\n9,-1\n10,-1\n13,1\n14,1\n");
}

#[test]
fn constants_and_lemmas_print() {
    let (code, out, err) = run(&["constants", "--cutoff", "1e6"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.lines().any(|l| l.starts_with("gamma_2,2.1732")));
    assert!(out.lines().any(|l| l.starts_with("A,") && l.ends_with("heuristic")));
    let (code, out, _) = run(&["lemma", "--lemma", "saidakeq", "--checkpoints", "1e3,1e4", "--cutoff", "1e6"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 4);
    let (code, _, _) = run(&["constants", "--instance", "fq:3"]);
    assert_eq!(code, 0);
}
