use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fraisse"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("fraisse-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn gen(&self, name: &str, args: &[&str]) -> String {
        let path = self.0.join(name);
        let p = path.to_str().unwrap().to_owned();
        let mut full = vec!["gen"];
        full.extend_from_slice(args);
        full.extend_from_slice(&["-o", &p]);
        let out = run(&full);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        p
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn domain_len(v: &Value) -> usize {
    v["domain"].as_array().unwrap().len()
}

#[test]
fn gen_families() {
    let fn3 = json(&run(&["gen", "fn", "--n", "3"]));
    assert_eq!(domain_len(&fn3), 5);
    let d = json(&run(&["gen", "lineq", "--n", "8", "--group", "2", "--diagram"]));
    assert_eq!(domain_len(&d["base"]), 8);
    assert_eq!(domain_len(&d["left"]), 22);
    let am = json(&run(&["gen", "lineq", "--n", "8", "--group", "2"]));
    assert_eq!(domain_len(&am), 36);
    let t = json(&run(&["gen", "template", "--group", "2"]));
    assert_eq!(domain_len(&t), 6);
    let g = json(&run(&["gen", "g", "--shape", "((..)(..))"]));
    assert!(domain_len(&g) > 0);
    assert_eq!(code(&run(&["gen", "fn"])), 2);
    assert_eq!(code(&run(&["gen", "lineq", "--n", "3"])), 2);
    assert_eq!(code(&run(&["gen", "nope"])), 2);
}

#[test]
fn gen_is_deterministic() {
    let a = run(&["gen", "lineq", "--n", "4", "--group", "2x2", "--diagram"]);
    let b = run(&["gen", "lineq", "--n", "4", "--group", "2x2", "--diagram"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn hom_exit_codes() {
    let s = Scratch::new("hom");
    let f3 = s.gen("f3.json", &["fn", "--n", "3"]);
    let f4 = s.gen("f4.json", &["fn", "--n", "4"]);
    let out = run(&["hom", "--from", &f3, "--to", &f4]);
    assert_eq!(code(&out), 1);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "null");
    let out = run(&["hom", "--from", &f4, "--to", &f4]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out).as_object().unwrap().len(), 6);
    let out = run(&["hom", "--from", &f4, "--to", &f4, "--all", "--count"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    let lines: Vec<&str> = text.lines().collect();
    let n: usize = lines.last().unwrap().parse().unwrap();
    assert!(n >= 1);
    assert_eq!(lines.len(), n + 1);
    let out = run(&["hom", "--from", &f4, "--to", &f4, "--kind", "embedding", "--count"]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&run(&["hom", "--from", &f4, "--to", &f4, "--kind", "bogus"])), 2);
    assert_eq!(code(&run(&["hom", "--from", "/nonexistent.json", "--to", &f4])), 2);
}

#[test]
fn hom_reads_stdin() {
    let s = Scratch::new("stdin");
    let f4 = s.gen("f4.json", &["fn", "--n", "4"]);
    let text = std::fs::read_to_string(&f4).unwrap();
    let out = run_with_stdin(&["hom", "--from", "-", "--to", &f4], &text);
    assert_eq!(code(&out), 0);
}

#[test]
fn consist_exit_codes() {
    let s = Scratch::new("consist");
    let am = s.gen("am.json", &["lineq", "--n", "8", "--group", "2"]);
    let t = s.gen("t.json", &["template", "--group", "2"]);
    let trace = s.0.join("trace.json");
    let out = run(&["consist", "--instance", &am, "--template", &t, "--trace", trace.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["consistent"], Value::Bool(false));
    let tr: Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert!(tr.is_object());

    let d = json(&run(&["gen", "lineq", "--n", "4", "--group", "2", "--diagram"]));
    let left = s.0.join("left.json");
    std::fs::write(&left, serde_json::to_string(&d["left"]).unwrap()).unwrap();
    let out = run(&["consist", "--instance", left.to_str().unwrap(), "--template", &t]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&run(&["consist", "--instance", &am, "--template", &t, "--k", "3", "--l", "2"])), 2);
}

#[test]
fn confuse_sweeps() {
    let s = Scratch::new("confuse");
    let d = s.gen("fn3.json", &["fn", "--n", "3", "--diagram"]);
    let out = run(&["confuse", "--diagram", &d, "--m", "2", "--class", "fn"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["coloringsTested"], 256);
    assert_eq!(v["verdict"], Value::Bool(true));
    assert_eq!(v["failureWitnessed"], Value::Bool(true));

    let again = run(&["confuse", "--diagram", &d, "--m", "2", "--class", "fn"]);
    assert_eq!(again.stdout, out.stdout);

    let lq = s.gen("lq2.json", &["lineq", "--n", "2", "--group", "2", "--diagram"]);
    let args = ["confuse", "--diagram", &lq, "--m", "2", "--class", "lineq:2,3,2", "--mode", "sample", "--samples", "6", "--seed", "7"];
    let out = run(&args);
    assert!(matches!(code(&out), 0 | 1));
    assert_eq!(json(&out)["coloringsTested"], 6);
    assert_eq!(run(&args).stdout, out.stdout);

    let big = s.gen("fn6.json", &["fn", "--n", "6", "--diagram"]);
    assert_eq!(code(&run(&["confuse", "--diagram", &big, "--m", "3", "--class", "fn"])), 2);
    assert_eq!(code(&run(&["confuse", "--diagram", &d, "--m", "2", "--class", "what"])), 2);
}

#[test]
fn bounds_subcommand() {
    let out = run(&["bounds", "--n", "2", "--r", "1", "--t", "1", "--find-m"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["minimalM"], "12");
    assert_eq!(v["previous"]["verdict"], Value::Bool(false));
    let v = json(&run(&["bounds", "--n", "2", "--r", "1", "--t", "1", "--m", "11"]));
    assert_eq!(v["verdict"], Value::Bool(false));
    let v = json(&run(&["bounds", "--n", "2", "--r", "1", "--t", "1", "--m", "12"]));
    assert_eq!(v["verdict"], Value::Bool(true));
    assert_eq!(v["q"], "8");
    assert_eq!(v["p"], 3);
    let v = json(&run(&["bounds", "--n", "1", "--r", "1", "--t", "0", "--m", "3"]));
    assert_eq!(v["verdict"], Value::Bool(false));
    assert_eq!(code(&run(&["bounds", "--n", "2", "--r", "3", "--t", "1", "--m", "5"])), 2);
    assert_eq!(code(&run(&["bounds", "--n", "2", "--r", "1", "--t", "1"])), 2);
}

#[test]
fn export_dot() {
    let s = Scratch::new("dot");
    let f3 = s.gen("f3.json", &["fn", "--n", "3"]);
    let out = run(&["export-dot", "--input", &f3, "--symmetric", "B,E"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("digraph structure {"));
    assert!(text.trim_end().ends_with('}'));
    assert!(text.contains("\"v01\""));
    let file = s.0.join("f3.dot");
    let out = run(&["export-dot", "--input", &f3, "-o", file.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(std::fs::read_to_string(file).unwrap().contains("digraph"));
}

#[test]
fn amalgam_matches_gen() {
    let s = Scratch::new("amalgam");
    let d = s.gen("d.json", &["lineq", "--n", "4", "--group", "3", "--diagram"]);
    let via_file = run(&["amalgam", "--diagram", &d]);
    assert_eq!(code(&via_file), 0);
    let direct = run(&["gen", "lineq", "--n", "4", "--group", "3"]);
    assert_eq!(via_file.stdout, direct.stdout);
    let text = std::fs::read_to_string(&d).unwrap();
    let via_stdin = run_with_stdin(&["amalgam", "--diagram", "-"], &text);
    assert_eq!(via_stdin.stdout, direct.stdout);
}
