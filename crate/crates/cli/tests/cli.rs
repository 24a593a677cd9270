use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use billiards::codes::codes_equivalent;
use billiards::document::PolygonDocument;
use billiards::periodic::parse_spectrum;
use billiards::{Point2, Polygon};
use tempfile::TempDir;

const SQUARE: &str = "name: square\nvertices:\n0 0\n1 0\n1 1\n0 1\n";
const L_TABLE: &str = "name: L-table
vertices:
0 0
5 0
5 1
3 1
3 3
0 3
labels: b, r, t, s, u, l
";
const RECT: &str = "vertices:\n0 0\n2 0\n2 1\n0 1\n";
const TRIANGLE: &str = "angles: 1/4 1/2 1/4\nlengths: 1 1 1.4142135623730951\n";

struct Env {
    dir: TempDir,
}

impl Env {
    fn new() -> Self {
        Env {
            dir: TempDir::new().unwrap(),
        }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_billiards"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn well_formed(svg: &str) {
    let doc = roxmltree::Document::parse(svg).expect("well-formed XML");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
}

#[test]
fn validate_reports_rationality() {
    let env = Env::new();
    let o = run(&["validate", s(&env.file("sq", SQUARE))]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("k=4 rational N=2\n"), "{}", stdout(&o));
    let o = run(&["validate", s(&env.file("l", L_TABLE))]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("k=6 rational N=2\n"));
    assert!(stdout(&o).contains("90 90 90 270 90 90"));
    let o = run(&["--radians", "validate", s(&env.file("sq", SQUARE))]);
    assert!(stdout(&o).contains("1.57079632679"));
}

#[test]
fn validate_exit_codes() {
    let env = Env::new();
    let o = run(&["validate", s(&env.file("col", "vertices:\n0 0\n1 0\n2 0\n1 1\n"))]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("StraightAngle"));
    let o = run(&["validate", s(&env.file("bad", "vertices:\n0 0\n1 zero\n"))]);
    assert_eq!(code(&o), 2);
    let o = run(&["validate", s(&env.path("missing"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn validate_accepts_formatter_output() {
    let env = Env::new();
    let p = Polygon::new(vec![
        Point2::new(0.1, 0.0),
        Point2::new(2.0 / 3.0, 0.2),
        Point2::new(0.5, 1.0 / 7.0 + 1.0),
    ])
    .unwrap()
    .with_labels(&["a", "b", "c"])
    .unwrap();
    let text = PolygonDocument::from_polygon("tri", &p).format();
    let o = run(&["validate", s(&env.file("tri", &text))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn simulate_perpendicular_bounce() {
    let env = Env::new();
    let sq = env.file("sq", SQUARE);
    let o = run(&["simulate", s(&sq), "--side", "1", "--s", "0.5", "--theta", "0", "-n", "6"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("1,3,1,3,1,3,1"));
    assert!(out.contains("termination: completed"));
    assert!(out.contains("periodic: period 2"));
}

#[test]
fn simulate_l_table_example_orbit() {
    let env = Env::new();
    let l = env.file("l", L_TABLE);
    // Leaves the bottom at x = 4 heading up-left with slope -1/10.
    let theta = format!("{}", -(10f64.atan().to_degrees()));
    let o = run(&["simulate", s(&l), "--side", "b", "--s", "0.8", "--theta", &theta, "-n", "12"]);
    assert_eq!(code(&o), 0);
    let line = stdout(&o).lines().next().unwrap().to_string();
    assert!(line.contains("l,r,t,l,r,b"), "{line}");
    assert!(stdout(&o).contains("periodic: period 6"));
}

#[test]
fn simulate_corner_shot_and_svg() {
    let env = Env::new();
    let sq = env.file("sq", SQUARE);
    let theta = format!("{}", 0.5f64.atan().to_degrees());
    let o = run(&["simulate", s(&sq), "--side", "1", "--s", "0.5", "--theta", &theta]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("corner hit at vertex 3"));

    let svg = env.path("o.svg");
    let args = ["simulate", s(&sq), "--side", "1", "--s", "0.3", "--theta", "20", "--svg", s(&svg)];
    assert_eq!(code(&run(&args)), 0);
    let first = fs::read_to_string(&svg).unwrap();
    well_formed(&first);
    assert_eq!(code(&run(&args)), 0);
    assert_eq!(first, fs::read_to_string(&svg).unwrap());

    let bad = run(&["simulate", s(&sq), "--side", "1", "--s", "1.5", "--theta", "0"]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn spectrum_files() {
    let env = Env::new();
    let sq = env.file("sq", SQUARE);
    let out = env.path("two.txt");
    let o = run(&["spectrum", s(&sq), "-L", "2", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "2 codes\n");
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2);

    let o = run(&["spectrum", s(&sq), "-L", "4"]);
    assert!(stdout(&o).lines().any(|l| l.ends_with(" 1,2,3,4")));

    let l = env.file("l", L_TABLE);
    let out = env.path("l6.txt");
    assert_eq!(code(&run(&["spectrum", s(&l), "-L", "6", "--out", s(&out)])), 0);
    let text = fs::read_to_string(&out).unwrap();
    let poly = billiards::document::parse_document(L_TABLE)
        .unwrap()
        .to_polygon()
        .unwrap();
    let target: Vec<usize> = ["l", "r", "t", "l", "r", "b"]
        .iter()
        .map(|t| poly.parse_side(t).unwrap())
        .collect();
    let (codes, partial) = parse_spectrum(&text, &poly).unwrap();
    assert!(!partial);
    assert!(codes.iter().any(|c| codes_equivalent(c, &target)));
    // Re-running gives the same bytes.
    let again = env.path("l6b.txt");
    run(&["spectrum", s(&l), "-L", "6", "--out", s(&again)]);
    assert_eq!(text, fs::read_to_string(&again).unwrap());
}

#[test]
fn spectrum_budget_exit() {
    let env = Env::new();
    let sq = env.file("sq", SQUARE);
    let out = env.path("partial.txt");
    let o = run(&["--budget", "5", "spectrum", s(&sq), "-L", "8", "--out", s(&out)]);
    assert_eq!(code(&o), 5);
    assert!(fs::read_to_string(&out).unwrap().starts_with("# PARTIAL\n"));
    let odd = run(&["spectrum", s(&sq), "-L", "3"]);
    assert_eq!(code(&odd), 2);
}

#[test]
fn compare_verdicts() {
    let env = Env::new();
    let sq = env.file("sq", SQUARE);
    let big = env.file(
        "big",
        "vertices:\n0 0\n2.598076211353316 1.5\n1.098076211353316 4.098076211353316\n-1.5 2.598076211353316\n",
    );
    let o = run(&["compare", s(&sq), s(&big), "-L", "6", "--labeling", "0"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("similarity: similar scale=3"), "{}", stdout(&o));

    let rect = env.file("rect", RECT);
    let o = run(&["compare", s(&sq), s(&rect), "-L", "6"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("affinely_similar"));

    let quad = env.file("quad", "vertices:\n0 0\n3 0\n3.9 0.6\n3.82 1.18\n");
    let o = run(&["compare", s(&sq), s(&quad), "-L", "6"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("witness "));

    let tri = env.file("tri", TRIANGLE);
    let o = run(&["compare", s(&sq), s(&tri), "-L", "4"]);
    assert_eq!(code(&o), 6);
    assert!(stderr(&o).contains("SideCountMismatch"));
}

#[test]
fn unfold_corridors() {
    let env = Env::new();
    let l = env.file("l", L_TABLE);
    let svg = env.path("u.svg");
    let o = run(&["unfold", s(&l), "l,r,t,l,r,b", "--svg", s(&svg)]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("copies: 6"));
    assert!(out.contains("terminal: translation"));
    assert!(out.contains("interval: ("));
    let text = fs::read_to_string(&svg).unwrap();
    well_formed(&text);
    assert_eq!(text.matches("<polygon").count(), 6);

    let sq = env.file("sq", SQUARE);
    let o = run(&["unfold", s(&sq), "1,3"]);
    assert!(stdout(&o).contains("terminal: translation (0, -2)"));
    assert!(stdout(&o).contains("interval: (0, 1)"));
    let o = run(&["unfold", s(&sq), "1,2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("NotTranslation: rotation π"), "{}", stdout(&o));
    let o = run(&["unfold", s(&sq), "1,1,2"]);
    assert_eq!(code(&o), 7);
    assert!(stderr(&o).contains("RepeatedSymbol"));
    let o = run(&["unfold", s(&sq), "1,9"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn saddle_listing() {
    let env = Env::new();
    let sq = env.file("sq", SQUARE);
    let o = run(&["saddle", s(&sq), "--depth", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "1 3 - 45 1.41421356237\n2 4 - 135 1.41421356237\n");
    let o = run(&["saddle", s(&sq), "--depth", "2"]);
    assert_eq!(stdout(&o).lines().count(), 6);
    assert!(stdout(&o).contains("1 4 2 "));
}
