use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn vcsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vcsp"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn gen(dir: &TempDir, name: &str, n: &str, m: &str, sign: &str) -> String {
    let p = path(dir, name);
    let o = vcsp(&["gen", "--n", n, "--m", m, "--sign", sign, "--out", &p]);
    assert!(o.status.success(), "{}", stderr(&o));
    p
}

fn constraint_lines(p: &str) -> usize {
    std::fs::read_to_string(p)
        .unwrap()
        .lines()
        .filter(|l| l.starts_with("u ") || l.starts_with("b "))
        .count()
}

#[test]
fn gen_counts_and_range_error() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "c3.vcsp", "3", "3", "-");
    assert_eq!(constraint_lines(&p), 38);
    let p = gen(&dir, "c1.vcsp", "1", "1", "+");
    assert_eq!(constraint_lines(&p), 12);

    let o = vcsp(&[
        "gen",
        "--n",
        "3",
        "--m",
        "3",
        "--sign",
        "-",
        "--out",
        &path(&dir, "x"),
    ]);
    assert_eq!(stdout(&o), "vars=18 unaries=18 binaries=20 constraints=38\n");

    let o = vcsp(&["gen", "--n", "2", "--m", "3", "--sign", "-"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("out of range"));
    assert!(o.stdout.is_empty());
}

#[test]
fn gen_to_stdout_matches_file() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "c.vcsp", "4", "2", "+");
    let o = vcsp(&["gen", "--n", "4", "--m", "2", "--sign", "+"]);
    assert_eq!(stdout(&o), std::fs::read_to_string(p).unwrap());
}

#[test]
fn ascend_reports_chain_lengths() {
    let dir = TempDir::new().unwrap();
    let c1 = gen(&dir, "c1.vcsp", "1", "1", "+");
    let o = vcsp(&["ascend", "--instance", &c1, "--start", "000000", "--tie", "error"]);
    assert_eq!(stdout(&o), "steps=7 final_fitness=18 peak=111110 ties=0\n");

    for n in ["2", "5"] {
        let c = gen(&dir, "c2.vcsp", n, "2", "+");
        let o = vcsp(&["ascend", "--instance", &c, "--start", "000000000000"]);
        assert!(stdout(&o).starts_with("steps=21 "), "{}", stdout(&o));
        assert!(stdout(&o).contains("peak=111110000000 ties=0"));
    }

    let o = vcsp(&["ascend", "--instance", &c1, "--start", "0000000"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("length 7"));
}

#[test]
fn raw_order_and_step_cap() {
    let dir = TempDir::new().unwrap();
    let c = gen(&dir, "c.vcsp", "2", "2", "-");
    let o = vcsp(&[
        "ascend",
        "--instance",
        &c,
        "--start",
        "111110000000",
        "--max-steps",
        "3",
        "--raw-order",
    ]);
    assert!(stdout(&o).ends_with("truncated=true\n"), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("steps=3 "));
}

#[test]
fn trace_csv_replays() {
    let dir = TempDir::new().unwrap();
    let c = gen(&dir, "c.vcsp", "3", "3", "+");
    let t = path(&dir, "t.csv");
    let o = vcsp(&["ascend", "--instance", &c, "--trace", &t]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&t).unwrap();
    assert!(text.starts_with("# method=steepest\n# seed=none\n# instance_sha256="));

    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(&t)
        .unwrap();
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["step", "var_index", "var_label", "gain", "fitness_after"]
    );
    let inst = vcsp_landscape::parse_instance(&std::fs::read_to_string(&c).unwrap()).unwrap();
    let mut x = vcsp_landscape::Assignment::zeros(18);
    let mut rows = 0;
    for (t, rec) in rdr.records().enumerate() {
        let rec = rec.unwrap();
        assert_eq!(rec[0].parse::<usize>().unwrap(), t + 1);
        let var: usize = rec[1].parse().unwrap();
        assert_eq!(rec[2], inst.label(var).unwrap().to_string());
        let before = inst.fitness(&x).unwrap();
        x.flip_in_place(var);
        let after = inst.fitness(&x).unwrap();
        assert_eq!(rec[3].parse::<i128>().unwrap(), after - before);
        assert_eq!(rec[4].parse::<i128>().unwrap(), after);
        rows += 1;
    }
    assert_eq!(rows, 49);
}

#[test]
fn random_trials_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let c = gen(&dir, "c.vcsp", "3", "3", "-");
    let args = [
        "ascend",
        "--instance",
        &c,
        "--start",
        "111110000000000000",
        "--method",
        "random",
        "--trials",
        "50",
        "--seed",
        "9",
    ];
    let a = vcsp(&args);
    let b = vcsp(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.starts_with("trials=50 "));
    assert!(out.contains("distinct_ends=1\nend 000000000000000000 0\n"));

    let single = [
        "ascend",
        "--instance",
        &c,
        "--start",
        "111110000000000000",
        "--method",
        "random",
        "--seed",
        "4",
    ];
    assert_eq!(vcsp(&single).stdout, vcsp(&single).stdout);
}

#[test]
fn first_improvement_scan_order() {
    let dir = TempDir::new().unwrap();
    let c = gen(&dir, "c.vcsp", "1", "1", "+");
    let o = vcsp(&[
        "ascend",
        "--instance",
        &c,
        "--method",
        "first",
        "--scan-order",
        "5,4,3,2,1,0",
    ]);
    assert!(stdout(&o).contains("peak=111110"), "{}", stdout(&o));
    let o = vcsp(&[
        "ascend",
        "--instance",
        &c,
        "--method",
        "first",
        "--scan-order",
        "0,1",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn eval_reports_moves() {
    let dir = TempDir::new().unwrap();
    let c = gen(&dir, "c.vcsp", "1", "1", "+");
    let o = vcsp(&["eval", "--instance", &c, "--assignment", "111110"]);
    assert_eq!(stdout(&o), "fitness=18 local_peak=true improving=0\n");
    let o = vcsp(&["eval", "--instance", &c, "--assignment", "100000"]);
    assert_eq!(
        stdout(&o),
        "fitness=3 local_peak=false improving=2\nmove (1,2) 2\nmove (1,4) 1\n"
    );
}

#[test]
fn verify_exit_codes() {
    let o = vcsp(&["verify", "--n", "10", "--m", "10"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("pass steepest_steps+ expected=7161 observed=7161"));
    assert!(out.contains("pass steepest_steps- expected=7161 observed=7161"));
    assert!(out.ends_with("overall=pass\n"));
    assert!(!out.contains("FAIL"));

    let o = vcsp(&["verify", "--n", "4"]);
    assert!(stdout(&o).contains("expected=105 observed=105"));

    let o = vcsp(&["verify", "--n", "1", "--m", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn oracle_reports() {
    let dir = TempDir::new().unwrap();
    let c1 = gen(&dir, "c1.vcsp", "1", "1", "+");
    let o = vcsp(&["oracle", "--instance", &c1, "--ascent-graph", "000000"]);
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 13);
    assert_eq!(
        out.lines().filter(|l| l.starts_with("sink ")).collect::<Vec<_>>(),
        vec!["sink 111110 18"]
    );
    assert!(out.contains("# nodes=13 edges=18 sinks=1 path_lengths=5,7 shortest=5"));

    let c = gen(&dir, "c22.vcsp", "2", "2", "-");
    let o = vcsp(&["oracle", "--instance", &c, "--peaks"]);
    assert_eq!(stdout(&o), "peak 000000000000 0\n# peaks=1\n");

    let o = vcsp(&["oracle", "--instance", &c, "--semismooth"]);
    assert_eq!(stdout(&o), "# semismooth=true\n");

    let big = gen(&dir, "c55.vcsp", "5", "5", "-");
    let o = vcsp(&["oracle", "--instance", &big, "--semismooth"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("exceeds the cap"), "{}", stderr(&o));

    let o = vcsp(&["oracle", "--instance", &c, "--peaks", "--semismooth"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_flags_a_frustrated_face() {
    let dir = TempDir::new().unwrap();
    let p = path(&dir, "pair.vcsp");
    std::fs::write(&p, "vcsp 1\nn 2\nu 0 1\nu 1 1\nb 0 1 -3\n").unwrap();
    let o = vcsp(&["oracle", "--instance", &p, "--semismooth"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        stdout(&o),
        "face_peak 10 1\nface_peak 01 1\n# semismooth=false free=0,1\n"
    );
}

#[test]
fn structure_reports_and_decompositions() {
    let dir = TempDir::new().unwrap();
    let c = path(&dir, "c.vcsp");
    let bags = path(&dir, "c.bags");
    let o = vcsp(&[
        "gen",
        "--n",
        "4",
        "--m",
        "3",
        "--out",
        &c,
        "--decomposition",
        &bags,
    ]);
    assert!(o.status.success());
    let o = vcsp(&["structure", "--instance", &c, "--decomposition", &bags]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "vertices=18 edges=20 cycle=true bags=14 width=2 valid=true degree=3\n"
    );

    // drop the bag that covers the (3,3)-(3,6) edge
    let text = std::fs::read_to_string(&bags).unwrap();
    let broken: Vec<&str> = text.lines().filter(|l| l.trim() != "2 4 5").collect();
    assert_eq!(broken.len(), text.lines().count() - 1);
    std::fs::write(&bags, broken.join("\n")).unwrap();
    let o = vcsp(&["structure", "--instance", &c, "--decomposition", &bags]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("valid=false"));
    assert!(stderr(&o).contains("edge"), "{}", stderr(&o));
}

#[test]
fn structure_writes_dot() {
    let dir = TempDir::new().unwrap();
    let c = gen(&dir, "c.vcsp", "2", "2", "+");
    let dot = path(&dir, "c.dot");
    let o = vcsp(&["structure", "--instance", &c, "--dot", &dot, "--orient"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(Path::new(&dot)).unwrap();
    assert!(text.starts_with("digraph vcsp {\n"));
    assert!(text.ends_with("}\n"));
    assert_eq!(text.matches(" -> ").count(), 13);
    assert!(text.contains("\"(2,6)\" -> \"(1,1)\""));

    let plain = path(&dir, "p.dot");
    vcsp(&["structure", "--instance", &c, "--dot", &plain]);
    let text = std::fs::read_to_string(Path::new(&plain)).unwrap();
    assert!(text.starts_with("graph vcsp {\n"));
    assert_eq!(text.matches(" -- ").count(), 13);
}
