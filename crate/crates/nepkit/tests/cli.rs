mod common;

use std::path::Path;

use common::{batch, handle};
use nepkit::cli::run_cli;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn nepkit(data: &Path, now: &str, args: &[&str]) -> Run {
    let mut argv = vec![
        "nepkit".to_string(),
        "--data-dir".into(),
        data.display().to_string(),
    ];
    argv.extend(["--now".to_string(), now.to_string()]);
    argv.extend(args.iter().map(|a| a.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn ok(data: &Path, now: &str, args: &[&str]) -> String {
    let run = nepkit(data, now, args);
    assert_eq!(run.code, 0, "{args:?} failed: {}", run.err);
    run.out
}

#[test]
fn end_to_end_issue() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let batch_file = dir.path().join("batch.txt");
    std::fs::write(&batch_file, batch("abc", 1, 5)).unwrap();
    let t = "2024-03-04T09:00:00Z";

    assert_eq!(
        ok(&data, t, &["ingest", batch_file.to_str().unwrap()]),
        "registered 5 new papers (5 in corpus)\n"
    );
    assert_eq!(
        ok(&data, t, &["compose", "--date", "2024-03-04"]),
        "nep-all 2024-03-04 composed with 5 papers\n"
    );
    ok(
        &data,
        t,
        &[
            "report",
            "add",
            "nep-mac",
            "--subject",
            "Macroeconomics",
            "--editor",
            "Ed Itor",
        ],
    );
    ok(&data, t, &["subscribe", "nep-mac", "a@example.org"]);
    ok(&data, t, &["subscribe", "nep-mac", "b@example.org"]);
    assert!(ok(&data, t, &["pending", "nep-mac"]).contains("2024-03-04\tpending"));

    let opened = ok(
        &data,
        "2024-03-04T09:01:00Z",
        &["open", "nep-mac", "2024-03-04", "--mode", "presorted"],
    );
    assert!(opened
        .starts_with("nep-mac 2024-03-04 source v1 (5 papers)\n1\tRePEc:abc:wpaper:0001\tPaper 1"));
    let (h1, h3, h4) = (handle("abc", 1), handle("abc", 3), handle("abc", 4));
    ok(
        &data,
        "2024-03-04T09:05:00Z",
        &["select", "nep-mac", "2024-03-04", &h4, &h1, &h3],
    );
    ok(
        &data,
        "2024-03-04T09:07:00Z",
        &["order", "nep-mac", "2024-03-04", &h3, &h1, &h4],
    );
    let sent = ok(
        &data,
        "2024-03-04T09:08:00Z",
        &["send", "nep-mac", "2024-03-04"],
    );
    assert!(sent.ends_with("delivered to 2 subscribers\n"), "{sent}");

    let snapshot =
        std::fs::read_to_string(data.join("reports/nep-mac/issues/2024-03-04/sent/1.ri")).unwrap();
    assert_eq!(
        snapshot,
        format!(
            "Report: nep-mac\nIssue: 2024-03-04\nStage: sent\nVersion: 1\nMode: presorted\nCreated: 2024-03-04T09:08:00Z\n\n3 {h3}\n1 {h1}\n4 {h4}\n"
        )
    );
    for who in ["a@example.org", "b@example.org"] {
        let body =
            std::fs::read_to_string(data.join(format!("outbox/nep-mac/2024-03-04/{who}.txt")))
                .unwrap();
        assert!(body
            .starts_with("NEP Report: nep-mac — Macroeconomics\nIssue: 2024-03-04\n\n1. Paper 3"));
    }
    assert_eq!(
        ok(&data, t, &["status", "nep-mac", "2024-03-04"]),
        "nep-mac 2024-03-04 sent\n"
    );

    let pn = ok(&data, t, &["metrics", "pn", "--n", "3"]);
    assert_eq!(pn, "report\tissue\tsent\trelevant\tp_at_n\nnep-mac\t2024-03-04\t3\t2\t0.6667\nTOTAL\t\t1\t1\t0.6667\n");
    let durations = ok(&data, t, &["metrics", "durations"]);
    assert!(
        durations.contains("nep-mac\t1\t1\t1.0000\t7.0000\n"),
        "{durations}"
    );
    assert!(
        durations.contains("\n\nfrom_minutes\tto_minutes\tsessions\n6.0000\t9.0000\t1\n"),
        "{durations}"
    );
    let out_file = dir.path().join("rsl.tsv");
    ok(
        &data,
        t,
        &[
            "metrics",
            "rsl",
            "--min-presorted",
            "1",
            "--out",
            out_file.to_str().unwrap(),
        ],
    );
    assert_eq!(
        std::fs::read_to_string(out_file).unwrap(),
        "report\tavg_rsl\nnep-mac\t0.8000\nTOTAL\t0.8000\n"
    );
    assert!(ok(&data, t, &["stats"]).contains("subscriptions\t2\n"));
    assert!(ok(&data, t, &["train", "nep-mac"]).starts_with("trained nep-mac on 1 issues"));
}

#[test]
fn handles_can_come_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let t = "2024-03-04T09:00:00Z";
    let batch_file = dir.path().join("batch.txt");
    std::fs::write(&batch_file, batch("abc", 1, 3)).unwrap();
    ok(&data, t, &["ingest", batch_file.to_str().unwrap()]);
    ok(&data, t, &["compose", "--date", "2024-03-04"]);
    ok(
        &data,
        t,
        &[
            "report",
            "add",
            "nep-mac",
            "--subject",
            "S",
            "--editor",
            "E",
        ],
    );
    ok(
        &data,
        t,
        &["open", "nep-mac", "2024-03-04", "--mode", "unsorted"],
    );
    let list = dir.path().join("picks.txt");
    std::fs::write(
        &list,
        format!("{}\n\n{}\n", handle("abc", 2), handle("abc", 3)),
    )
    .unwrap();
    let out = ok(
        &data,
        t,
        &[
            "select",
            "nep-mac",
            "2024-03-04",
            "--file",
            list.to_str().unwrap(),
        ],
    );
    assert_eq!(out, "nep-mac 2024-03-04 selection v1 (2 papers)\n");
}

#[test]
fn failures_exit_with_one_and_explain() {
    let dir = tempfile::tempdir().unwrap();
    let t = "2024-03-04T09:00:00Z";
    let run = nepkit(
        dir.path(),
        t,
        &["open", "nep-mac", "2024-03-04", "--mode", "unsorted"],
    );
    assert_eq!(run.code, 1);
    assert_eq!(run.err, "error: report `nep-mac` not found\n");

    ok(
        dir.path(),
        t,
        &[
            "report",
            "add",
            "nep-mac",
            "--subject",
            "S",
            "--editor",
            "E",
        ],
    );
    ok(dir.path(), t, &["compose", "--date", "2024-03-04"]);
    ok(
        dir.path(),
        t,
        &["open", "nep-mac", "2024-03-04", "--mode", "unsorted"],
    );
    let run = nepkit(dir.path(), t, &["select", "nep-mac", "2024-03-04"]);
    assert_eq!(run.code, 1);
    assert!(run.err.contains("no paper selected"), "{}", run.err);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let t = "2024-03-04T09:00:00Z";
    for args in [
        &["frobnicate"][..],
        &["compose", "--date", "04/03/2024"],
        &["open", "nep-mac", "2024-03-04", "--mode", "sideways"],
        &["metrics", "nothing"],
    ] {
        let run = nepkit(dir.path(), t, args);
        assert_eq!(run.code, 2, "{args:?}");
        assert!(!run.err.is_empty());
    }
    let run = nepkit(dir.path(), "yesterday", &["stats"]);
    assert_eq!(run.code, 2);
}

#[test]
fn help_goes_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let run = nepkit(dir.path(), "2024-03-04T09:00:00Z", &["--help"]);
    assert_eq!(run.code, 0);
    assert!(run.out.contains("Usage: nepkit"));
}
