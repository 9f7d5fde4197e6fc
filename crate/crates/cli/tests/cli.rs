use std::path::{Path, PathBuf};
use std::process::Command;

use kerneldist::coreset::coreset_size_random;
use kerneldist::features::{kernel_distance_features, read_feature_vector};
use kerneldist::{kernel_distance_sq_exact, GaussianKernel, WeightedPointSet};
use kerneldist_cli::io::{read_point_set, write_point_set, PointSetFile};
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn kd(args: &[&str]) -> Run {
    kd_env(args, &[])
}

fn kd_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kerneldist"));
    cmd.args(args).env_remove("KERNELDIST_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn ok(args: &[&str]) -> Value {
    let r = kd(args);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn sample(name: &str) -> String {
    repo().join("data").join(name).display().to_string()
}

fn check_schema(name: &str, report: &Value) {
    let path = repo()
        .join("schemas")
        .join(format!("{name}-report.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator
        .iter_errors(report)
        .map(|e| e.to_string())
        .collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn without_timing(text: &str) -> String {
    text.lines()
        .filter(|l| !l.contains("wall_time_ms"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn path_in(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

#[test]
fn identical_files_are_at_distance_zero() {
    let p = sample("sample_p.csv");
    let r = ok(&["dist", &p, &p, "--method", "exact"]);
    assert_eq!(r["distance"], 0.0);
    assert_eq!(r["squared_distance"], 0.0);
    assert_eq!(r["error_bound"], Value::Null);
    check_schema("dist", &r);
}

#[test]
fn approximate_methods_match_exact_on_the_sample() {
    let (p, q) = (sample("sample_p.csv"), sample("sample_q.csv"));
    let exact = ok(&["dist", &p, &q])["squared_distance"].as_f64().unwrap();
    let pf = read_point_set(Path::new(&p)).unwrap();
    let qf = read_point_set(Path::new(&q)).unwrap();
    let w = pf.points.total_mass().max(qf.points.total_mass());
    let k = GaussianKernel::new(1.0).unwrap();
    assert!(
        (exact - kernel_distance_sq_exact(&k, &pf.points, &qf.points).unwrap()).abs()
            < 1e-9 * w * w
    );
    for (method, eps) in [
        ("wspd", "0.1"),
        ("wspd", "0.05"),
        ("ifgt", "0.1"),
        ("rff", "0.5"),
    ] {
        let r = ok(&["dist", &p, &q, "--method", method, "--eps", eps]);
        check_schema("dist", &r);
        let eps: f64 = eps.parse().unwrap();
        let u = r["squared_distance"].as_f64().unwrap();
        assert!((u - exact).abs() <= eps * w * w, "{method}: {u} vs {exact}");
        assert!((r["error_bound"].as_f64().unwrap() - eps * w * w).abs() <= 1e-12 * w * w);
    }
    let r = ok(&["dist", &p, &q, "--method", "wspd"]);
    assert!(r["certificate"]["pairs"].as_u64().is_some());
    let r = ok(&["dist", &p, &q, "--method", "ifgt"]);
    assert!(r["certificate"]["tau"].as_u64().unwrap() >= 1);
}

#[test]
fn json_input_mirrors_csv() {
    let dir = TempDir::new().unwrap();
    let p = sample("sample_p.csv");
    let set = read_point_set(Path::new(&p)).unwrap();
    let pj = path_in(&dir, "p.json");
    write_point_set(Path::new(&pj), &set).unwrap();
    let q = sample("sample_q.csv");
    let a = ok(&["dist", &p, &q])["squared_distance"].clone();
    let b = ok(&["dist", &pj, &q])["squared_distance"].clone();
    assert_eq!(a, b);
}

#[test]
fn malformed_csv_reports_the_line() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.csv", "x1,x2\n0,0\n1,2\n3,oops\n");
    let good = sample("sample_p.csv");
    let r = kd(&["dist", &bad, &good]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 4"), "{}", r.stderr);
    let r = kd(&["dist", &path_in(&dir, "missing.csv"), &good]);
    assert_eq!(r.code, 2);
    let unnormalized = write(&dir, "u.csv", "x1,x2,u1,u2\n0,0,1,1\n");
    assert_eq!(kd(&["dist", &unnormalized, &unnormalized]).code, 2);
}

#[test]
fn invalid_parameters_exit_3() {
    let p = sample("sample_p.csv");
    for extra in [
        ["--eps", "1.5"],
        ["--sigma", "0"],
        ["--method", "nope"],
        ["--eps", "x"],
    ] {
        let mut args = vec!["dist", &p, &p];
        args.extend(extra);
        assert_eq!(kd(&args).code, 3, "{extra:?}");
    }
    let dir = TempDir::new().unwrap();
    let d3 = write(&dir, "d3.csv", "x1,x2,x3\n0,0,0\n");
    let r = kd(&["dist", &p, &d3]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("dimension"), "{}", r.stderr);
    assert_eq!(kd(&[]).code, 3);
    assert_eq!(kd(&["--help"]).code, 0);
}

#[test]
fn oriented_inputs() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "x1,x2,u1,u2\n0,0,1,0\n1,0,0,1\n");
    let b = write(&dir, "b.csv", "x1,x2,u1,u2\n0,0,1,0\n1,0,0,-1\n");
    let plain = write(&dir, "c.csv", "x1,x2\n0,0\n");
    assert_eq!(ok(&["dist", &a, &a])["squared_distance"], 0.0);
    let d = ok(&["dist", &a, &b])["squared_distance"].as_f64().unwrap();
    // Only the second normal flips: the difference is twice that point's
    // contribution, |2 u|^2 = 4.
    assert!((d - 4.0).abs() < 1e-12, "{d}");
    assert_eq!(kd(&["dist", &a, &b, "--method", "wspd"]).code, 3);
    assert_eq!(kd(&["dist", &a, &plain]).code, 3);
}

/// Grid of `n` points with a deterministic jitter.
fn cloud(n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .flat_map(|i| {
            let t = i as f64;
            [
                scale * ((t * 0.754877).fract()),
                scale * ((t * 0.569840).fract()),
            ]
        })
        .collect()
}

fn shifted_fixture(dir: &TempDir, n: usize, shift: [f64; 2]) -> (String, String) {
    let coords = cloud(n, 2.0);
    let p = WeightedPointSet::uniform(2, coords).unwrap();
    let q = p.translated(&shift);
    let (pp, qp) = (path_in(dir, "p.csv"), path_in(dir, "q.csv"));
    for (path, set) in [(&pp, p), (&qp, q)] {
        let f = PointSetFile {
            points: set,
            normals: None,
        };
        write_point_set(Path::new(path), &f).unwrap();
    }
    (pp, qp)
}

#[test]
fn align_recovers_a_planted_shift() {
    let dir = TempDir::new().unwrap();
    let (p, q) = shifted_fixture(&dir, 12, [0.83, -1.37]);
    let eps = 0.2;
    let r = ok(&["align", &p, &q, "--mode", "translate", "--eps", "0.2"]);
    check_schema("align", &r);
    let w = 12.0;
    assert!(r["squared_distance"].as_f64().unwrap() <= eps * w * w);
    let t: Vec<f64> = serde_json::from_value(r["motion"]["translation"].clone()).unwrap();
    assert!(
        (t[0] + 0.83).abs() < 0.5 && (t[1] - 1.37).abs() < 0.5,
        "{t:?}"
    );
    let r = ok(&["align", &p, &q, "--mode", "rigid", "--eps", "0.25"]);
    check_schema("align", &r);
    assert!(r["squared_distance"].as_f64().unwrap() <= 0.25 * w * w);
    assert!(r["motion"]["rotation"]["angle"].is_number());
    let r = ok(&[
        "align",
        &p,
        &q,
        "--mode",
        "translate",
        "--coreset",
        "--eps",
        "0.2",
    ]);
    check_schema("align", &r);
    assert!(r["coreset_sizes"].is_array());
}

#[test]
fn align_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (p, q) = shifted_fixture(&dir, 10, [0.3, 0.2]);
    let args = [
        "align", &p, &q, "--mode", "rigid", "--eps", "0.3", "--seed", "7",
    ];
    let a = kd(&args);
    let b = kd(&args);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(without_timing(&a.stdout), without_timing(&b.stdout));
}

#[test]
fn rigid_alignment_guards() {
    let dir = TempDir::new().unwrap();
    let d4 = write(&dir, "d4.csv", "x1,x2,x3,x4\n0,0,0,0\n1,0,0,0\n");
    let r = kd(&["align", &d4, &d4, "--mode", "rigid"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("d = 4"), "{}", r.stderr);
    let big = sample("sample_p.csv");
    let r = kd(&["align", &big, &big, "--mode", "rigid"]);
    assert_eq!(r.code, 5, "{}", r.stderr);
    assert!(r.stderr.contains("budget"), "{}", r.stderr);
}

#[test]
fn coreset_at_eps_one_uses_the_size_floor() {
    let dir = TempDir::new().unwrap();
    let p = sample("sample_p.csv");
    let out = path_in(&dir, "s.csv");
    let r = ok(&["coreset", &p, "--eps", "1", "--delta", "0.5", "--out", &out]);
    check_schema("coreset", &r);
    assert_eq!(
        r["sample_size"].as_u64().unwrap() as usize,
        coreset_size_random(1.0, 0.5, 2).unwrap()
    );
    let s = read_point_set(Path::new(&out)).unwrap();
    assert_eq!(s.points.len() as u64, r["size"].as_u64().unwrap());
    let parent = read_point_set(Path::new(&p)).unwrap();
    assert!((s.points.total_mass() - parent.points.total_mass()).abs() < 1e-9);
}

#[test]
fn coreset_round_trip_respects_the_bound() {
    let dir = TempDir::new().unwrap();
    let p = sample("sample_p.csv");
    for (i, eps) in ["0.3", "0.5"].iter().enumerate() {
        let out = path_in(&dir, &format!("s{i}.json"));
        let r = ok(&["coreset", &p, "--eps", eps, "--seed", "3", "--out", &out]);
        let bound = r["squared_distance_bound"].as_f64().unwrap();
        let d = ok(&["dist", &p, &out])["squared_distance"]
            .as_f64()
            .unwrap();
        assert!(d <= bound, "{d} > {bound}");
    }
}

#[test]
fn coreset_is_seed_deterministic() {
    let dir = TempDir::new().unwrap();
    let p = sample("sample_p.csv");
    let files: Vec<String> = ["a", "b", "c"]
        .iter()
        .map(|n| path_in(&dir, &format!("{n}.csv")))
        .collect();
    for (f, seed) in files.iter().zip(["5", "5", "6"]) {
        ok(&["coreset", &p, "--eps", "0.5", "--seed", seed, "--out", f]);
    }
    let read = |f: &String| std::fs::read(f).unwrap();
    assert_eq!(read(&files[0]), read(&files[1]));
    assert_ne!(read(&files[0]), read(&files[2]));
}

#[test]
fn feature_coreset_reports_a_certificate() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.csv", &{
        let mut s = String::from("x1\n");
        for i in 0..40 {
            s.push_str(&format!("{}\n", (i as f64 * 0.618034).fract() * 3.0));
        }
        s
    });
    let out = path_in(&dir, "s.csv");
    let r = ok(&[
        "coreset", &p, "--method", "feature", "--eps", "0.9", "--delta", "0.5", "--out", &out,
    ]);
    check_schema("coreset", &r);
    assert_eq!(r["method"], "feature-verified");
    let c = &r["certificate"];
    assert!(c["value"].as_f64().unwrap() >= 0.0);
    assert_eq!(c["bound"].as_f64().unwrap(), 0.9 * 40.0 * 40.0);
}

#[test]
fn embeddings_are_deterministic_and_match_in_process_distance() {
    let dir = TempDir::new().unwrap();
    let (p, q) = (sample("sample_p.csv"), sample("sample_q.csv"));
    for method in ["rff", "ifgt"] {
        let extra: &[&str] = if method == "rff" {
            &["--rho", "512", "--seed", "9"]
        } else {
            &["--tau", "8", "--center", "1.5,1.5"]
        };
        let f = |name: &str| path_in(&dir, &format!("{method}-{name}.kdfv"));
        for (input, out) in [(&p, f("p1")), (&p, f("p2")), (&q, f("q"))] {
            let mut args = vec!["embed", input.as_str(), "--method", method, "--out", &out];
            args.extend(extra);
            let r = ok(&args);
            check_schema("embed", &r);
        }
        let bytes = |name: &str| std::fs::read(f(name)).unwrap();
        assert_eq!(bytes("p1"), bytes("p2"));
        let load = |name: &str| read_feature_vector(std::fs::File::open(f(name)).unwrap()).unwrap();
        let (a, b) = (load("p1"), load("q"));
        assert!(a.values.iter().all(|v| v.is_finite()));
        let from_files = kernel_distance_features(&a, &b).unwrap();
        let in_process = match method {
            "rff" => {
                let basis = kerneldist::features::draw_frequencies(1.0, 2, 512, 9).unwrap();
                let pe = kerneldist::features::rff_embed(
                    &basis,
                    &read_point_set(Path::new(&p)).unwrap().points,
                )
                .unwrap();
                let qe = kerneldist::features::rff_embed(
                    &basis,
                    &read_point_set(Path::new(&q)).unwrap().points,
                )
                .unwrap();
                kernel_distance_features(&pe, &qe).unwrap()
            }
            _ => {
                let basis = kerneldist::features::TaylorBasis::new(1.0, vec![1.5, 1.5], 8).unwrap();
                let pe = kerneldist::features::ifgt_embed(
                    &basis,
                    &read_point_set(Path::new(&p)).unwrap().points,
                )
                .unwrap();
                let qe = kerneldist::features::ifgt_embed(
                    &basis,
                    &read_point_set(Path::new(&q)).unwrap().points,
                )
                .unwrap();
                kernel_distance_features(&pe, &qe).unwrap()
            }
        };
        assert_eq!(from_files.to_bits(), in_process.to_bits(), "{method}");
    }
    let bad = kd(&[
        "embed",
        &p,
        "--method",
        "ifgt",
        "--center",
        "1,2,3",
        "--out",
        &path_in(&dir, "x.kdfv"),
    ]);
    assert_eq!(bad.code, 3);
}

#[test]
fn bench_emits_a_deterministic_table() {
    let args = [
        "bench",
        "--suite",
        "dist",
        "--sizes",
        "200,400",
        "--extents",
        "1,4",
        "--eps",
        "0.5",
        "--seed",
        "4",
    ];
    let a = kd(&args);
    assert_eq!(a.code, 0, "{}", a.stderr);
    let header = a.stdout.lines().next().unwrap();
    assert_eq!(
        header,
        "suite,n,dim,extent,eps,method,time_ms,squared_distance,abs_error,error_bound,speedup,status"
    );
    let strip = |s: &str| -> Vec<String> {
        s.lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                format!("{},{},{},{},{}", f[1], f[3], f[5], f[7], f[11])
            })
            .collect()
    };
    let b = kd(&args);
    assert_eq!(strip(&a.stdout), strip(&b.stdout));
    // exact + wspd + ifgt + rff for each (extent, size)
    assert_eq!(strip(&a.stdout).len(), 16);
    for l in a.stdout.lines().skip(1).filter(|l| l.contains(",ok")) {
        let f: Vec<&str> = l.split(',').collect();
        if f[5] != "exact" {
            assert!(
                f[8].parse::<f64>().unwrap() <= f[9].parse::<f64>().unwrap(),
                "{l}"
            );
        }
    }
}

#[test]
fn bench_rejects_bad_suites() {
    assert_eq!(kd(&["bench", "--suite", ""]).code, 3);
    assert_eq!(kd(&["bench", "--suite", "nope"]).code, 3);
    assert_eq!(kd(&["bench", "--suite", "dist", "--sizes", "0"]).code, 3);
}

#[test]
fn thread_count_from_flag_or_environment() {
    let p = sample("sample_p.csv");
    let q = sample("sample_q.csv");
    let base = ok(&["dist", &p, &q, "--method", "wspd"])["squared_distance"].clone();
    let r = kd(&["--threads", "2", "dist", &p, &q, "--method", "wspd"]);
    assert_eq!(r.code, 0);
    assert_eq!(
        serde_json::from_str::<Value>(&r.stdout).unwrap()["squared_distance"],
        base
    );
    let r = kd_env(
        &["dist", &p, &q, "--method", "wspd"],
        &[("KERNELDIST_THREADS", "3")],
    );
    assert_eq!(r.code, 0);
    assert_eq!(
        serde_json::from_str::<Value>(&r.stdout).unwrap()["squared_distance"],
        base
    );
    assert_eq!(kd(&["--threads", "0", "dist", &p, &q]).code, 3);
    assert_eq!(
        kd_env(&["dist", &p, &q], &[("KERNELDIST_THREADS", "many")]).code,
        3
    );
}

#[test]
fn report_written_to_out() {
    let dir = TempDir::new().unwrap();
    let p = sample("sample_p.csv");
    let out = path_in(&dir, "r.json");
    let r = kd(&["dist", &p, &p, "--out", &out]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    check_schema("dist", &v);
}
