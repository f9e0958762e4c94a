use std::process::Command;

use phifact::cli::run;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("phifact").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn pair_text_and_json() {
    let (code, out, _) = invoke(&["pair", "4", "7"]);
    assert_eq!(code, 0);
    assert_eq!(out, "c=8 r=8/11 (0.727273)\n");

    let (code, out, _) = invoke(&["--json", "pair", "4", "7"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["c"], 8);
    assert_eq!(v["r_dec"], "0.727273");

    let (code, out, _) = invoke(&["--format", "csv", "pair", "1", "1"]);
    assert_eq!(code, 0);
    assert_eq!(out, "a,b,sum,c,r_num,r_den,r_dec\n1,1,2,1,1,2,0.500000\n");
}

#[test]
fn table1_default_row() {
    let (code, out, _) = invoke(&["table1", "--n", "100"]);
    assert_eq!(code, 0);
    assert_eq!(out, "N,count_gt,total,proportion\n100,2468,9900,0.249\n");
    // the other populations stay reachable
    let (_, out, _) = invoke(&["table1", "--n", "100", "--counting", "ordered"]);
    assert!(out.ends_with("100,2468,10000,0.247\n"), "{out}");
    let (_, out, _) = invoke(&["table1", "--n", "100", "--unordered"]);
    assert!(out.contains("100,1249,5050,"), "{out}");
}

#[test]
fn exit_codes() {
    assert_eq!(invoke(&["verify", "lemma8", "--k-max", "173"]).0, 0);
    let (code, _, err) = invoke(&["verify", "lemma8", "--bogus"]);
    assert_eq!(code, 2);
    assert!(err.contains("--bogus"));
    assert_eq!(invoke(&["frobnicate"]).0, 2);
    assert_eq!(invoke(&["pair", "0", "5"]).0, 2);
    assert_eq!(invoke(&["verify", "lemma7", "--d", "15"]).0, 2);
    assert_eq!(invoke(&["verify", "identity", "--a", "9"]).0, 2);
    assert_eq!(invoke(&["dickson", "check", "--q", "53"]).0, 1);
    assert_eq!(invoke(&["--help"]).0, 0);
}

#[test]
fn every_subcommand_speaks_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.csv");
    let cache = cache.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["pair", "10", "12"],
        vec!["table1", "--n", "10,20"],
        vec!["fig1", "--n", "6", "--no-cache"],
        vec!["fig2", "--max", "9"],
        vec!["verify", "lemma2", "--x", "10000"],
        vec!["verify", "lemma6", "--a-max", "2000", "--q-max", "20"],
        vec!["verify", "lemma7", "--d-max", "50", "--n", "40"],
        vec!["verify", "lemma8", "--q", "11", "--k", "4"],
        vec!["verify", "prop10"],
        vec!["verify", "identity"],
        vec!["verify", "floor", "--sample-max", "300"],
        vec!["dickson", "search", "--limit", "2000"],
        vec!["dickson", "check", "--q", "131"],
        vec!["scan", "theorem2", "--min", "5", "--max", "30"],
        vec!["scan", "lower", "--min", "2", "--max", "30"],
        vec!["cache", "store", "--path", cache, "--n", "8"],
        vec!["cache", "load", "--path", cache],
        vec!["cache", "verify", "--path", cache],
    ];
    for args in runs {
        let mut full = vec!["--json"];
        full.extend(&args);
        let (code, out, err) = invoke(&full);
        assert_eq!(code, 0, "{args:?}: {err}");
        assert!(!out.is_empty(), "{args:?}");
        for line in out.lines() {
            serde_json::from_str::<serde_json::Value>(line)
                .unwrap_or_else(|e| panic!("{args:?}: {line}: {e}"));
        }
    }
}

#[test]
fn output_does_not_depend_on_jobs() {
    for args in [
        vec!["fig1", "--n", "40", "--no-cache"],
        vec!["fig2", "--max", "120"],
        vec!["scan", "lower", "--min", "2", "--max", "60"],
        vec!["--json", "scan", "theorem2", "--min", "20", "--max", "80"],
        vec!["table1", "--n", "30,60"],
        vec!["--json", "verify", "lemma7", "--d-max", "200", "--n", "100"],
    ] {
        let one = invoke(&[&["--jobs", "1"], &args[..]].concat());
        let four = invoke(&[&["--jobs", "4"], &args[..]].concat());
        assert_eq!(one.0, 0);
        assert_eq!(one, four, "{args:?}");
    }
}

#[test]
fn files_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let fig1 = dir.path().join("fig1.csv");
    let cache = dir.path().join("cache").join("pairs.csv");
    let (code, out, _) = invoke(&[
        "fig1",
        "--n",
        "30",
        "--out",
        fig1.to_str().unwrap(),
        "--cache",
        cache.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let written = std::fs::read_to_string(&fig1).unwrap();
    assert_eq!(written.lines().count(), 1 + 30 * 30);
    assert!(cache.exists());

    // a second run is served from the cache and is byte-identical
    std::fs::remove_file(&fig1).unwrap();
    invoke(&["fig1", "--n", "30", "--out", fig1.to_str().unwrap(), "--cache", cache.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(&fig1).unwrap(), written);

    assert_eq!(invoke(&["cache", "verify", "--path", cache.to_str().unwrap()]).0, 0);
    // corrupt one c, keeping the row self-consistent: c(4,7) = 8, claim 11 (r = 1)
    let text = std::fs::read_to_string(&cache).unwrap();
    let bad = text.replacen("\n4,7,11,8,8,11,0.727273\n", "\n4,7,11,11,1,1,1.000000\n", 1);
    assert_ne!(bad, text);
    std::fs::write(&cache, bad).unwrap();
    let (code, _, err) = invoke(&["cache", "verify", "--path", cache.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("line"), "{err}");

    let (code, _, err) = invoke(&["cache", "load", "--path", dir.path().join("missing.csv").to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn binary_exit_codes_and_streams() {
    let bin = env!("CARGO_BIN_EXE_phifact");
    let dir = tempfile::tempdir().unwrap();

    let ok = Command::new(bin).args(["pair", "4", "7"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout), "c=8 r=8/11 (0.727273)\n");
    assert!(ok.stderr.is_empty());

    let usage = Command::new(bin).args(["pair", "4"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    assert!(usage.stdout.is_empty());
    assert!(!usage.stderr.is_empty());

    // the cache directory comes from the environment when no path is given
    let stored = Command::new(bin)
        .args(["cache", "store", "--n", "5"])
        .env("PHIFACT_CACHE", dir.path())
        .output()
        .unwrap();
    assert_eq!(stored.status.code(), Some(0));
    assert!(dir.path().join("pairs.csv").exists());

    let unset = Command::new(bin)
        .args(["cache", "load"])
        .env_remove("PHIFACT_CACHE")
        .output()
        .unwrap();
    assert_eq!(unset.status.code(), Some(2));
}
