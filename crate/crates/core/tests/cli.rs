mod common;

use std::io::Write;
use std::process::{Command, Output, Stdio};

use franka_ik::cli::{FkDocument, PoseDocument, SolutionDocument, SolutionEntry};
use franka_ik::model::default_geometry;
use franka_ik::oracle::dh_forward_kinematics;
use franka_ik::solvers::SingularityKind;
use proptest::prelude::*;

use common::{deg, fixture, joint_distance, CASE1_ROWS, CASE2_ROWS, TABLE_TOL_DEG};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_franka-ik")).args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_franka-ik"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn matches_row(doc: &SolutionDocument, row: &[f64; 7]) -> bool {
    let q = deg(row);
    doc.solutions
        .iter()
        .any(|s| joint_distance(&s.q_rad(), &q).to_degrees() < TABLE_TOL_DEG)
}

#[test]
fn ik_case1_json_and_table() {
    let out = run(&["ik", "--pose", &path("case1.json"), "--lock", "q7", "--value", "-21.32455095", "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: SolutionDocument = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc.singularity, SingularityKind::Type1);
    assert!(doc.param_honored);
    assert_eq!(doc.solutions.len(), 4);
    for row in &CASE1_ROWS {
        assert!(matches_row(&doc, row));
    }
    assert!(stderr(&out).contains("re-orthonormalized"));

    let table = run(&["ik", "--pose", &path("case1.json"), "--lock", "q7", "--value", "-21.32455095", "--table"]);
    assert_eq!(table.status.code(), Some(0));
    let text = stdout(&table);
    assert!(text.contains("-90.00") && text.contains("115.96") && text.contains("-64.04"));
    assert!(text.contains("singularity type1"));
}

#[test]
fn ik_case2_reports_type2() {
    let out = run(&["ik", "--pose", &path("case2.json"), "--lock", "q6", "--value", "193.48937052"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("\"singularity\": \"type2\""));
    assert!(text.contains("\"param_honored\": false"));
    let doc: SolutionDocument = serde_json::from_str(&text).unwrap();
    assert_eq!(doc.solutions.len(), 8);
    assert!(matches_row(&doc, &CASE2_ROWS[0]));
}

#[test]
fn ik_unreachable_exits_two_with_empty_document() {
    let pose = r#"{"R": [1, 0, 0, 0, 1, 0, 0, 0, 1], "t": [0, 0, 3]}"#;
    let out = run_stdin(&["ik", "--pose", "-", "--lock", "q7", "--value", "0"], pose);
    assert_eq!(out.status.code(), Some(2));
    let doc: SolutionDocument = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc.solutions.is_empty());
    assert_eq!(doc.singularity, SingularityKind::None);
}

#[test]
fn ik_input_errors_exit_one() {
    let cases: [(&[&str], &str, &str); 5] = [
        (&["ik", "--pose", "-", "--lock", "q7", "--value", "0"], "{not json", "malformed JSON"),
        (
            &["ik", "--pose", "-", "--lock", "q7", "--value", "0"],
            r#"{"R": [1, 0.01, 0, 0, 1, 0, 0, 0, 1], "t": [0.5, 0, 0.5]}"#,
            "orthonormal",
        ),
        (
            &["ik", "--pose", "-", "--lock", "q7", "--value", "0"],
            r#"{"quat": [1, 0.1, 0, 0], "t": [0.5, 0, 0.5]}"#,
            "quaternion",
        ),
        (&["ik", "--pose", "-", "--lock", "q3", "--value", "0"], "{}", "--lock"),
        (
            &["ik", "--pose", "-", "--lock", "q7", "--value", "0", "--emergency-q1", "200"],
            r#"{"R": [1, 0, 0, 0, 1, 0, 0, 0, 1], "t": [0.5, 0, 0.5]}"#,
            "emergency q1",
        ),
    ];
    for (args, input, needle) in cases {
        let out = run_stdin(args, input);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(stderr(&out).contains(needle), "{needle}: {}", stderr(&out));
    }
    let missing = run(&["ik", "--pose", "/nonexistent/pose.json", "--lock", "q7", "--value", "0"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn ik_without_emergency_reports_null_joints() {
    let out = run(&[
        "ik",
        "--pose",
        &path("case1.json"),
        "--lock",
        "q7",
        "--value",
        "-21.32455095",
        "--no-emergency-q1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("null"));
    let doc: SolutionDocument = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc.solutions.iter().any(|s| s.q_deg[0].is_none() && s.q_deg[2].is_none()));
}

#[test]
fn ik_jacobian_has_42_entries() {
    let out = run(&["ik", "--pose", &path("case1.json"), "--lock", "q7", "--value", "-21.32455095", "--jacobian"]);
    let doc: SolutionDocument = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc.solutions.iter().all(|s| s.jacobian.as_ref().is_some_and(|j| j.len() == 42)));
}

#[test]
fn ik_swivel_and_quaternion_input() {
    let fk = run(&["fk", "--q", "20", "-30", "40", "-100", "25", "110", "-15", "--json"]);
    let doc: FkDocument = serde_json::from_str(&stdout(&fk)).unwrap();
    let pose = doc.pose.to_pose().unwrap().pose;
    let quat = nalgebra::UnitQuaternion::from_matrix(&pose.rotation);
    let input = serde_json::json!({
        "quat": [quat.w, quat.i, quat.j, quat.k],
        "t": doc.pose.t,
    })
    .to_string();
    let out = run_stdin(&["ik", "--pose", "-", "--lock", "swivel", "--value", "30"], &input);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let sols: SolutionDocument = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(sols.param_honored && sols.solutions.len() <= 8);
}

#[test]
fn fk_home_and_case1() {
    let g = default_geometry();
    let out = run(&["fk", "--q", "0", "0", "0", "0", "0", "0", "0", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: FkDocument = serde_json::from_str(&stdout(&out)).unwrap();
    let oracle = dh_forward_kinematics(&[0.0; 7], &g);
    let pose = doc.pose.to_pose().unwrap().pose;
    assert!((pose.position - oracle.position).norm() < 1e-12);
    assert!((pose.rotation - oracle.rotation).amax() < 1e-12);
    assert_eq!(doc.axes.len(), 7);

    let out = run(&["fk", "--q", "90", "0", "-64.04", "-106.86", "131.42", "150.52", "-21.32", "--json"]);
    let doc: FkDocument = serde_json::from_str(&stdout(&out)).unwrap();
    let t = doc.pose.t;
    let expected = [0.61674948, 0.32278029, 0.56790512];
    for (a, b) in t.iter().zip(expected) {
        assert!((a - b).abs() < 5e-4);
    }

    let text = run(&["fk", "--q", "0", "0", "0", "0", "0", "0", "0"]);
    assert!(stdout(&text).contains("s7"));
}

#[test]
fn fk_then_ik_recovers_the_angles() {
    let q = ["35", "-40", "60", "-120", "-30", "95", "12.5"];
    let mut args = vec!["fk", "--json", "--q"];
    args.extend(q);
    let fk = run(&args);
    let out = run_stdin(&["ik", "--pose", "-", "--lock", "q7", "--value", "12.5"], &stdout(&fk));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: SolutionDocument = serde_json::from_str(&stdout(&out)).unwrap();
    let target: [f64; 7] = std::array::from_fn(|i| q[i].parse().unwrap());
    assert!(matches_row(&doc, &target));
    let best = doc
        .solutions
        .iter()
        .map(|s| joint_distance(&s.q_rad(), &deg(&target)))
        .fold(f64::INFINITY, f64::min);
    assert!(best < 1e-9);
}

#[test]
fn fk_arity_and_finiteness() {
    assert_eq!(run(&["fk", "--q", "1", "2", "3"]).status.code(), Some(1));
    assert_eq!(run(&["fk", "--q", "1", "2", "3", "4", "5", "6", "NaN"]).status.code(), Some(1));
}

#[test]
fn verify_small_run_is_deterministic_single_line() {
    let a = run(&["verify", "--n", "1", "--seed", "7", "--lock", "q7"]);
    let b = run(&["verify", "--n", "1", "--seed", "7", "--lock", "q7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).lines().count(), 1);
    assert!(stdout(&a).contains("PASS"));
    assert_eq!(run(&["verify", "--n", "0"]).status.code(), Some(1));
}

#[test]
fn verify_q7_meets_thresholds() {
    let out = run(&["verify", "--n", "300", "--seed", "42", "--lock", "q7", "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let reports: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(reports[0]["recovered"], 300);
}

#[test]
fn bench_prints_statistics() {
    let out = run(&["bench", "--n", "50", "--lock", "q4", "--jacobian"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("min/median/max") && text.contains("jacobian"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(1));
}

#[test]
fn pose_document_round_trips() {
    let text = std::fs::read_to_string(fixture("case2.json")).unwrap();
    let doc = PoseDocument::parse(&text).unwrap();
    let again: PoseDocument = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(doc, again);
}

fn entry() -> impl Strategy<Value = SolutionEntry> {
    (
        proptest::array::uniform7(prop::option::weighted(0.9, -400.0f64..400.0)),
        proptest::array::uniform7(any::<bool>()),
        "[+-]/(up|down)/w[12](/r[1-9])?",
        prop::option::of(prop::collection::vec(-10.0f64..10.0, 42)),
    )
        .prop_map(|(q_deg, limit_ok, branch, jacobian)| SolutionEntry {
            q_deg,
            limit_ok,
            branch,
            jacobian,
        })
}

fn document() -> impl Strategy<Value = SolutionDocument> {
    (
        prop::collection::vec(entry(), 0..=8),
        prop::sample::select(vec![SingularityKind::None, SingularityKind::Type1, SingularityKind::Type2]),
        any::<bool>(),
        0.0f64..1e6,
    )
        .prop_map(|(solutions, singularity, param_honored, timing_us)| SolutionDocument {
            solutions,
            singularity,
            param_honored,
            timing_us,
        })
}

proptest! {
    #[test]
    fn solution_document_round_trips(doc in document()) {
        let text = doc.to_json();
        let back: SolutionDocument = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.to_json(), text);
    }
}
