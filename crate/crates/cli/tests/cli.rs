use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn primewin(args: &[&str]) -> Output {
    primewin_in(None, args)
}

fn primewin_in(cache: Option<&Path>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_primewin"));
    cmd.args(args)
        .arg("--quiet")
        .env_remove("PRIMEWIN_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.env("PRIMEWIN_CACHE_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json_lines(o: &Output) -> Vec<Value> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn small_primes(limit: u64) -> Vec<u64> {
    (2..=limit)
        .filter(|&n| (2..).take_while(|d| d * d <= n).all(|d| n % d != 0))
        .collect()
}

fn legendre(a: u64, p: u64) -> i8 {
    let mut r = 1u64;
    let (mut b, mut e) = (a % p, (p - 1) / 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}

#[test]
fn prime_lookups() {
    let o = primewin(&["prime", "nth", "8560"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "88259"));
    assert_eq!(stdout(&primewin(&["prime", "nth", "1"])).trim(), "2");
    assert_eq!(
        stdout(&primewin(&["prime", "index", "88289"])).trim(),
        "8562"
    );
    let o = primewin(&["prime", "window", "--m", "5", "--n", "2066981"]);
    assert_eq!(
        stdout(&o).trim(),
        "33611561 33611573 33611603 33611621 33611629 33611653"
    );
}

#[test]
fn prime_errors_map_to_exit_codes() {
    assert_eq!(code(&primewin(&["prime", "index", "88290"])), 2);
    assert_eq!(code(&primewin(&["prime", "nth", "0"])), 2);
    assert_eq!(
        code(&primewin(&["--bound", "1000", "prime", "nth", "1000"])),
        3
    );
}

#[test]
fn search_first_all_plus_window() {
    let o = primewin(&[
        "search",
        "--m",
        "6",
        "--pattern",
        "++",
        "--min-n",
        "2",
        "--first",
    ]);
    assert_eq!(code(&o), 0);
    let recs = json_lines(&o);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["n"], 178633);
    let primes: Vec<u64> = recs[0]["primes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(
        primes,
        [2434589, 2434609, 2434613, 2434657, 2434669, 2434673, 2434681]
    );
}

#[test]
fn search_primroot_first() {
    let o = primewin(&[
        "search",
        "--m",
        "3",
        "--pattern",
        "primroot",
        "--first",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines,
        [
            "n,primes,pattern,witnesses",
            "8560,88259 88261 88289 88301,primroot,"
        ]
    );
}

#[test]
fn search_all_matches_brute_force() {
    let primes = small_primes(1000);
    for pattern in ["++", "+-", "-+", "--"] {
        let want: Vec<u64> = (2..=100u64)
            .filter(|&n| {
                let (p, q) = (primes[n as usize - 1], primes[n as usize]);
                let d1 = if pattern.as_bytes()[0] == b'+' { 1 } else { -1 };
                let d2 = if pattern.as_bytes()[1] == b'+' { 1 } else { -1 };
                legendre(p, q) == d1 && legendre(q, p) == d2
            })
            .collect();
        let o = primewin(&[
            "search",
            "--m",
            "1",
            "--pattern",
            pattern,
            "--max-n",
            "100",
            "--all",
            "--format",
            "bfile",
        ]);
        assert_eq!(code(&o), 0);
        let got: Vec<(u64, u64)> = stdout(&o)
            .lines()
            .map(|l| {
                let (k, n) = l.split_once(' ').unwrap();
                (k.parse().unwrap(), n.parse().unwrap())
            })
            .collect();
        let expected: Vec<(u64, u64)> = want
            .iter()
            .enumerate()
            .map(|(i, &n)| (i as u64 + 1, n))
            .collect();
        assert_eq!(got, expected, "pattern {pattern}");
    }
}

#[test]
fn search_rejects_bad_input() {
    assert_eq!(
        code(&primewin(&["search", "--m", "1", "--pattern", "+x"])),
        2
    );
    assert_eq!(code(&primewin(&["search", "--pattern", "++"])), 2);
    assert_eq!(
        code(&primewin(&[
            "search",
            "--m",
            "2",
            "--pattern",
            "primroot",
            "--strict"
        ])),
        2
    );
    assert_eq!(
        code(&primewin(&[
            "search",
            "--m",
            "1",
            "--pattern",
            "++",
            "--format",
            "xml"
        ])),
        2
    );
    assert_eq!(
        code(&primewin(&[
            "search",
            "--m",
            "1",
            "--pattern",
            "++",
            "--workers",
            "0"
        ])),
        2
    );
}

#[test]
fn search_bound_exceeded() {
    let o = primewin(&[
        "--bound",
        "100000",
        "search",
        "--m",
        "6",
        "--pattern",
        "++",
        "--first",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn matrix_file_pattern_matches_uniform() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("plus.txt");
    std::fs::write(&file, "# all +1, symmetric\ndelta +\n+ +\n+\n").unwrap();
    let spec = format!("matrix:{}", file.display());
    let a = primewin(&["search", "--pattern", &spec, "--max-n", "3000", "--all"]);
    let b = primewin(&[
        "search",
        "--m",
        "2",
        "--pattern",
        "++",
        "--max-n",
        "3000",
        "--all",
    ]);
    assert_eq!(code(&a), 0);
    let ns = |o: &Output| {
        json_lines(o)
            .iter()
            .map(|r| r["n"].as_u64().unwrap())
            .collect::<Vec<_>>()
    };
    assert!(!ns(&b).is_empty());
    assert_eq!(ns(&a), ns(&b));
}

#[test]
fn strict_search_reports_witnesses() {
    let o = primewin(&[
        "search",
        "--m",
        "1",
        "--pattern",
        "++",
        "--strict",
        "--max-n",
        "5000",
        "--limit",
        "3",
    ]);
    assert_eq!(code(&o), 0);
    let recs = json_lines(&o);
    assert_eq!(recs.len(), 3);
    for r in &recs {
        assert_eq!(r["pattern"], "strict:++");
        let witnesses = r["witnesses"].as_object().unwrap();
        assert_eq!(witnesses.len(), 1);
        let (p, q) = (
            r["primes"][0].as_u64().unwrap(),
            r["primes"][1].as_u64().unwrap(),
        );
        let w = witnesses["0,1"].as_u64().unwrap();
        assert!(w > 3 && (q - p) % w == 0 && (q - p) % (w * w) != 0);
    }
}

#[test]
fn search_checkpoint_resume() {
    let dir = TempDir::new().unwrap();
    let ckpt = dir.path().join("ckpt.json");
    let ckpt = ckpt.to_str().unwrap();
    let base = [
        "search",
        "--m",
        "2",
        "--pattern",
        "--",
        "--all",
        "--checkpoint",
        ckpt,
    ];

    let o = primewin(&[&base[..], &["--max-n", "20000", "--time-limit", "0"]].concat());
    assert_eq!(code(&o), 4);
    assert!(json_lines(&o).is_empty());
    assert!(Path::new(ckpt).exists());

    let first = primewin(&[&base[..], &["--max-n", "10000"]].concat());
    let second = primewin(&[&base[..], &["--max-n", "20000"]].concat());
    assert_eq!((code(&first), code(&second)), (0, 0));
    let state: Value = serde_json::from_str(&std::fs::read_to_string(ckpt).unwrap()).unwrap();
    assert_eq!(state["last_n_scanned"], 20000);

    let whole = primewin(&[
        "search",
        "--m",
        "2",
        "--pattern",
        "--",
        "--all",
        "--max-n",
        "20000",
    ]);
    let mut joined = json_lines(&first);
    joined.extend(json_lines(&second));
    assert_eq!(joined, json_lines(&whole));
    assert_eq!(
        state["matches_found"].as_u64().unwrap() as usize,
        joined.len()
    );

    let other = primewin(&[
        "search",
        "--m",
        "3",
        "--pattern",
        "--",
        "--checkpoint",
        ckpt,
    ]);
    assert_eq!(code(&other), 2);
}

#[test]
fn admissible_goldens() {
    for (variant, h) in [("lemma22", ["0", "120"]), ("lemma31", ["0", "9240"])] {
        let o = primewin(&["admissible", "--k", "2", "--variant", variant]);
        assert_eq!(code(&o), 0);
        let set: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(set["h"], serde_json::json!(h));
        assert!(String::from_utf8_lossy(&o.stderr).contains("PASS is_admissible"));
    }
    let o = primewin(&["admissible", "--k", "4"]);
    let set: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(set["witnesses"].as_array().unwrap().len(), 6);
    assert!(!String::from_utf8_lossy(&o.stderr).contains("FAIL"));
    assert_eq!(code(&primewin(&["admissible", "--k", "9"])), 2);
    assert_eq!(code(&primewin(&["admissible", "--k", "1"])), 2);
    assert_eq!(
        code(&primewin(&[
            "admissible",
            "--k",
            "2",
            "--variant",
            "lemma99"
        ])),
        2
    );
}

fn build_cert(dir: &Path, d1: &str, d2: &str) -> std::path::PathBuf {
    let set = dir.join("H.json");
    if !set.exists() {
        let o = primewin(&["admissible", "--k", "2", "--out", set.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let cert = dir.join(format!("cert{d1}{d2}.json"));
    let o = primewin(&[
        "certificate",
        "build",
        "--from",
        set.to_str().unwrap(),
        "--variant",
        "thm13",
        "--m",
        "1",
        "--d1",
        d1,
        "--d2",
        d2,
        "--w",
        "auto",
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    cert
}

#[test]
fn certificate_build_verify_tamper() {
    let dir = TempDir::new().unwrap();
    let cert = build_cert(dir.path(), "+1", "-1");
    let o = primewin(&["certificate", "verify", cert.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(!stdout(&o).contains("FAIL"));

    let mut json: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let b: String = json["b"].as_str().unwrap().to_string();
    let bumped = format!(
        "{}{}",
        &b[..b.len() - 1],
        (b.as_bytes()[b.len() - 1] - b'0' + 2) % 10
    );
    json["b"] = Value::String(bumped);
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, json.to_string()).unwrap();
    let o = primewin(&["certificate", "verify", tampered.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o)
        .lines()
        .any(|l| l.starts_with("FAIL (1) small-prime residues")));

    json.as_object_mut().unwrap().remove("W");
    std::fs::write(&tampered, json.to_string()).unwrap();
    let o = primewin(&["certificate", "verify", tampered.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing field `W`"));
}

#[test]
fn certificate_rejects_small_cutoff() {
    let dir = TempDir::new().unwrap();
    let set = dir.path().join("H.json");
    primewin(&["admissible", "--k", "2", "--out", set.to_str().unwrap()]);
    let o = primewin(&[
        "certificate",
        "build",
        "--from",
        set.to_str().unwrap(),
        "--w",
        "700",
    ]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("too small"));
    let o = primewin(&[
        "certificate",
        "build",
        "--from",
        set.to_str().unwrap(),
        "--d1",
        "0",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn certificate_scan_hits_match_prediction() {
    let dir = TempDir::new().unwrap();
    let cert = build_cert(dir.path(), "+1", "+1");
    let ckpt = dir.path().join("scan.json");
    let args = [
        "certificate",
        "scan",
        cert.to_str().unwrap(),
        "--checkpoint",
        ckpt.to_str().unwrap(),
    ];
    let first = primewin(&[&args[..], &["--max-n", "1000"]].concat());
    let second = primewin(&[&args[..], &["--max-n", "2000"]].concat());
    assert_eq!((code(&first), code(&second)), (0, 0));
    let mut hits = json_lines(&first);
    hits.extend(json_lines(&second));
    let whole = primewin(&[
        "certificate",
        "scan",
        cert.to_str().unwrap(),
        "--max-n",
        "2000",
    ]);
    assert_eq!(hits, json_lines(&whole));
    assert!(!hits.is_empty());
    for hit in &hits {
        for s in hit["symbols"].as_array().unwrap() {
            assert_eq!(s["predicted"], s["observed"]);
            assert_eq!(s["observed"], serde_json::json!([1, 1]));
        }
    }
}

#[test]
fn cache_dir_persists_index_table() {
    let dir = TempDir::new().unwrap();
    let o = primewin_in(Some(dir.path()), &["prime", "nth", "2000000"]);
    assert_eq!(code(&o), 0);
    let table = dir.path().join("prime-index.txt");
    assert!(table.exists());
    assert!(std::fs::read_to_string(&table)
        .unwrap()
        .contains("1000001 "));
    let again = primewin_in(Some(dir.path()), &["prime", "nth", "2000000"]);
    assert_eq!(stdout(&again), stdout(&o));
    assert_eq!(stdout(&o).trim(), "32452843");
}
