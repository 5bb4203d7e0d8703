use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use cnret::cli::{self, CliError};
use cnret::evalx::{self, Protocol, QueryRecord, DEFAULT_KS};
use cnret::fixtures;
use cnret::scoring::{ScoreConfig, ScorerRegistry};
use serde_json::{json, Value};
use tempfile::TempDir;

struct Files {
    dir: TempDir,
}

impl Files {
    /// The fixture world written out in the on-disk input formats.
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let mut det = json!({ "vocab": fixtures::VOCAB }).to_string() + "\n";
        for (id, scores) in fixtures::IMAGES {
            let map: serde_json::Map<String, Value> =
                scores.iter().map(|(w, s)| (w.to_string(), json!(s))).collect();
            det += &(json!({ "image": id, "scores": map }).to_string() + "\n");
        }
        fs::write(dir.path().join("detectors.jsonl"), det).unwrap();

        let mut edges = String::from("rel_type,start,end,weight\n");
        for (t, a, b, w) in fixtures::EDGES {
            edges += &format!("{t},{a},{b},{w}\n");
        }
        fs::write(dir.path().join("edges.csv"), edges).unwrap();

        let tags: String = fixtures::TAGS
            .iter()
            .map(|(id, t)| json!({ "image": id, "tags": t }).to_string() + "\n")
            .collect();
        fs::write(dir.path().join("tags.jsonl"), tags).unwrap();

        let mut classes = String::from("word,class\n");
        for (w, c) in fixtures::WORD_CLASSES {
            classes += &format!("{w},{}\n", format!("{c:?}").to_lowercase());
        }
        fs::write(dir.path().join("classes.csv"), classes).unwrap();

        let queries = [
            ("q1", "a chef in a kitchen", "img_kitchen"),
            ("q2", "a man in a tuxedo", "img_prom"),
            ("q3", "a bagel", "img_bakery"),
            ("q4", "a resort", "img_hotel"),
            ("q5", "a dog on grass", "img_dog_park"),
        ];
        let q: String = queries
            .iter()
            .map(|(id, text, gt)| {
                json!({ "query_id": id, "text": text, "ground_truth": [gt], "protocol": "sentence" })
                    .to_string()
                    + "\n"
            })
            .collect();
        fs::write(dir.path().join("queries.jsonl"), q).unwrap();
        Files { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    fn ingest(&self, out: &str) -> Result<String, CliError> {
        run(&[
            "ingest",
            "--detectors",
            &self.arg("detectors.jsonl"),
            "--graph",
            &self.arg("edges.csv"),
            "--corpus",
            &self.arg("tags.jsonl"),
            "--word-classes",
            &self.arg("classes.csv"),
            "--out",
            &self.arg(out),
        ])
    }

    fn snapshot(&self) -> String {
        self.ingest("world.snap").unwrap();
        self.arg("world.snap")
    }
}

fn run(args: &[&str]) -> Result<String, CliError> {
    cli::run(std::iter::once("cnret").chain(args.iter().copied()))
}

fn run_json(args: &[&str]) -> Value {
    let mut full = vec!["--output", "json"];
    full.extend_from_slice(args);
    serde_json::from_str(&run(&full).unwrap()).unwrap()
}

fn exit_code(r: Result<String, CliError>) -> i32 {
    r.expect_err("command should fail").exit_code()
}

#[test]
fn ingest_counts_inputs_and_is_byte_stable() {
    let f = Files::new();
    let summary = run_json(&[
        "ingest",
        "--detectors",
        &f.arg("detectors.jsonl"),
        "--graph",
        &f.arg("edges.csv"),
        "--corpus",
        &f.arg("tags.jsonl"),
        "--word-classes",
        &f.arg("classes.csv"),
        "--out",
        &f.arg("a.snap"),
    ]);
    assert_eq!(summary["images"], 6);
    assert_eq!(summary["vocabulary"], 12);
    assert_eq!(summary["edges"], 11);
    assert_eq!(summary["same_stem_edges"], 1);
    assert_eq!(summary["tagged_images"], 10);

    f.ingest("b.snap").unwrap();
    assert_eq!(fs::read(f.path("a.snap")).unwrap(), fs::read(f.path("b.snap")).unwrap());
}

#[test]
fn ingest_reports_the_bad_line() {
    let f = Files::new();
    let det = fs::read_to_string(f.path("detectors.jsonl")).unwrap();
    let mut lines: Vec<&str> = det.lines().collect();
    lines[3] = "{\"image\": \"broken\", \"scores\": ";
    fs::write(f.path("detectors.jsonl"), lines.join("\n")).unwrap();
    let err = f.ingest("x.snap").unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("detectors.jsonl:4"), "{err}");
    assert!(!f.path("x.snap").exists());
}

#[test]
fn ingest_rejects_bad_edge_weight() {
    let f = Files::new();
    fs::write(f.path("edges.csv"), "rel_type,start,end,weight\nIsA,a,b,-1\n").unwrap();
    let err = f.ingest("x.snap").unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("edges.csv:2"), "{err}");
}

#[test]
fn missing_input_file_is_a_data_error() {
    let f = Files::new();
    let r = run(&["score", "--snapshot", &f.arg("nope.snap"), "chef"]);
    assert_eq!(exit_code(r), 2);
}

#[test]
fn classify_names_the_detectors_used() {
    let f = Files::new();
    let snap = f.snapshot();
    let words = run_json(&["classify", "--snapshot", &snap, "a man in a tuxedo"]);
    let words = words.as_array().unwrap();
    let find = |w: &str| words.iter().find(|x| x["word"] == w).unwrap().clone();
    assert_eq!(find("man")["class"], "detectable");
    assert_eq!(find("tuxedo")["class"], "cn");
    assert_eq!(find("tuxedo")["detectors"], json!(["jacket"]));
    assert_eq!(words.len(), 4);

    let empty = run_json(&["classify", "--snapshot", &snap, ""]);
    assert_eq!(empty, json!([]));
}

#[test]
fn score_ranks_kitchen_first_for_chef() {
    let f = Files::new();
    let snap = f.snapshot();
    let ranked = run_json(&["score", "--snapshot", &snap, "--top-k", "3", "a chef"]);
    let ranked = ranked.as_array().unwrap();
    assert_eq!(ranked.len(), 3);
    assert_eq!(ranked[0]["image"], "img_kitchen");
    assert_eq!(ranked[0]["rank"], 1);

    let all = run_json(&["score", "--snapshot", &snap, "--top-k", "100", "a chef"]);
    assert_eq!(all.as_array().unwrap().len(), 6);
}

#[test]
fn score_rejects_nonpositive_top_k() {
    let f = Files::new();
    let snap = f.snapshot();
    assert_eq!(exit_code(run(&["score", "--snapshot", &snap, "--top-k", "0", "chef"])), 1);
    assert_eq!(exit_code(run(&["score", "--snapshot", &snap, "--top-k=-3", "chef"])), 1);
}

#[test]
fn eval_reports_one_row_per_scorer() {
    let f = Files::new();
    let snap = f.snapshot();
    let queries = f.arg("queries.jsonl");
    let reports = run_json(&["eval", "--snapshot", &snap, "--queries", &queries, "--scorers", "MIL,CN_MAX"]);
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["scorer"], "MIL");
    assert_eq!(reports[1]["scorer"], "CN_MAX");
    let mean = |r: &Value| r["mean_rank"].as_f64().unwrap();
    assert!(mean(&reports[1]) <= mean(&reports[0]));

    let table = run(&["eval", "--snapshot", &snap, "--queries", &queries, "--scorers", "MIL,CN_MAX"]).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("scorer"));
    assert!(lines[2].starts_with("CN_MAX"));
}

#[test]
fn eval_matches_a_direct_library_call() {
    let f = Files::new();
    let snap = f.snapshot();
    let queries = f.arg("queries.jsonl");
    let reports = run_json(&["eval", "--snapshot", &snap, "--queries", &queries, "--scorers", "ESP_MEAN_G"]);

    let ds = cnret::snapshot::load(Path::new(&snap)).unwrap();
    let config = ScoreConfig::default();
    let graph = ds.graph(&config);
    let world = ds.world(&graph);
    let records = evalx::read_queries_jsonl(
        std::io::BufReader::new(fs::File::open(&queries).unwrap()),
        "queries.jsonl",
    )
    .unwrap();
    let scorer = ScorerRegistry::builtin().create("ESP_MEAN_G", &config).unwrap();
    let direct = evalx::evaluate_scorer(scorer.as_ref(), &world, &records, &DEFAULT_KS, 1).unwrap();
    assert_eq!(reports[0], serde_json::to_value(&direct).unwrap());
}

#[test]
fn eval_is_independent_of_jobs() {
    let f = Files::new();
    let snap = f.snapshot();
    let queries = f.arg("queries.jsonl");
    let args = |jobs: &'static str| {
        run(&[
            "--jobs", jobs, "--output", "json", "eval", "--snapshot", &snap, "--queries", &queries,
            "--scorers", "MIL,MILSTEM,CN_MAX,ESP_MIN",
        ])
        .unwrap()
    };
    assert_eq!(args("1"), args("4"));
}

#[test]
fn eval_usage_errors() {
    let f = Files::new();
    let snap = f.snapshot();
    let queries = f.arg("queries.jsonl");
    let unknown = run(&["eval", "--snapshot", &snap, "--queries", &queries, "--scorers", "MIL,NOPE"]);
    let err = unknown.unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains("NOPE"), "{err}");

    let none = run(&["eval", "--snapshot", &snap, "--queries", &queries]);
    assert_eq!(exit_code(none), 1);
    assert_eq!(exit_code(run(&["--jobs", "0", "eval", "--snapshot", &snap])), 1);
    assert_eq!(exit_code(run(&["--aggregator", "median", "score", "chef"])), 1);
}

#[test]
fn eval_fails_on_unknown_ground_truth_image() {
    let f = Files::new();
    let snap = f.snapshot();
    let rec = QueryRecord {
        query_id: "q9".into(),
        text: "a chef".into(),
        ground_truth: ["img_missing".to_string()].into(),
        protocol: Protocol::Sentence,
    };
    fs::write(f.path("bad.jsonl"), serde_json::to_string(&rec).unwrap()).unwrap();
    let r = run(&["eval", "--snapshot", &snap, "--queries", &f.arg("bad.jsonl"), "--scorers", "MIL"]);
    assert_eq!(exit_code(r), 2);
}

#[test]
fn flags_override_config_file_which_overrides_defaults() {
    let f = Files::new();
    let snap = f.snapshot();
    let config = f.path("cnret.toml");
    fs::write(
        &config,
        format!("snapshot = {snap:?}\noutput = \"json\"\nmin-weight = 2.5\n"),
    )
    .unwrap();
    let cfg = config.display().to_string();

    // min-weight 2.5 keeps only chef-kitchen and chef-person.
    let v: Value = serde_json::from_str(&run(&["--config", &cfg, "classify", "chef tuxedo"]).unwrap()).unwrap();
    assert_eq!(v[0]["word"], "chef");
    assert_eq!(v[0]["detectors"], json!(["kitchen", "person"]));
    assert_eq!(v[1]["class"], "undetected");

    let v: Value = serde_json::from_str(
        &run(&["--config", &cfg, "--min-weight", "1", "classify", "chef tuxedo"]).unwrap(),
    )
    .unwrap();
    assert_eq!(v[0]["detectors"], json!(["dish", "kitchen", "person"]));
    assert_eq!(v[1]["class"], "cn");

    let table = run(&["--config", &cfg, "--output", "table", "classify", "chef"]).unwrap();
    assert!(table.starts_with("chef"), "{table}");

    fs::write(&config, "no-such-key = 1\n").unwrap();
    assert_eq!(exit_code(run(&["--config", &cfg, "classify", "chef"])), 1);
}

#[test]
fn binary_exit_codes() {
    let f = Files::new();
    let snap = f.snapshot();
    let bin = env!("CARGO_BIN_EXE_cnret");

    let ok = Command::new(bin).args(["score", "--snapshot", &snap, "a chef"]).output().unwrap();
    assert!(ok.status.success());
    let out = String::from_utf8(ok.stdout).unwrap();
    assert!(out.lines().nth(1).unwrap().contains("img_kitchen"), "{out}");

    let usage = Command::new(bin).args(["score", "--snapshot", &snap, "--top-k", "0", "x"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&usage.stderr).starts_with("error:"));

    let data = Command::new(bin).args(["score", "--snapshot", &f.arg("missing"), "x"]).output().unwrap();
    assert_eq!(data.status.code(), Some(2));

    let help = Command::new(bin).arg("--help").output().unwrap();
    assert!(help.status.success());
}
