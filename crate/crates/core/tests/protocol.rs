use std::io::Cursor;
use std::time::Duration;

use tiips_core::benchgen::{generate_split, GenCategory, SampleConfig, Split};
use tiips_core::inductive::InductiveModel;
use tiips_core::protocol::{
    external_inductive_adapter, external_transductive_adapter, serve, OracleStub, Request, RequestKind, Response,
    Session, WireSpec,
};
use tiips_core::transductive::TransductiveModel;
use tiips_core::{Domain, ErrorKind, Example, IoSpec};

fn spec() -> IoSpec {
    IoSpec::new(Domain::String, vec![Example::text("alan Turing1", "1.TURING,Alan").unwrap()]).unwrap()
}

fn request(kind: RequestKind, spec: &IoSpec, id: u64) -> String {
    let r = Request { kind, domain: spec.domain, spec: WireSpec { examples: spec.examples.clone() }, beam: 5, request_id: id };
    serde_json::to_string(&r).unwrap()
}

fn serve_lines(input: &str, stub: &OracleStub) -> Vec<Response> {
    let mut out = Vec::new();
    serve(Cursor::new(input.to_string()), &mut out, |r| stub.handle(r)).unwrap();
    String::from_utf8(out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn stub_answers_with_ground_truth() {
    let tasks = generate_split(Domain::List, GenCategory::LengthGeneralization, Split::Test, 5, 1, &SampleConfig::default()).unwrap();
    let stub = OracleStub::new(tasks.clone());
    let t = &tasks[2];
    let input = format!(
        "{}\n\n{}\nnot json\n",
        request(RequestKind::Subgoal, &t.spec, 7),
        request(RequestKind::Synthesize, &t.spec, 8)
    );
    let rs = serve_lines(&input, &stub);
    assert_eq!(rs.len(), 3);
    assert_eq!(rs[0].request_id, 7);
    assert_eq!(rs[0].subgoals.as_ref().unwrap()[0], serde_json::json!(t.gt_steps[0].outputs));
    assert_eq!(rs[1].request_id, 8);
    assert!(!rs[1].programs.as_ref().unwrap().is_empty());
    assert!(rs[2].error.as_ref().unwrap().starts_with("bad request"));

    // an unknown task gets no subgoals rather than an error
    let other = generate_split(Domain::List, GenCategory::LengthGeneralization, Split::Test, 1, 99, &SampleConfig::default()).unwrap();
    let rs = serve_lines(&format!("{}\n", request(RequestKind::Subgoal, &other[0].spec, 1)), &stub);
    assert_eq!(rs[0].subgoals.as_deref(), Some(&[][..]));
}

fn sh(script: &str) -> String {
    format!("sh -c '{script}'")
}

#[test]
fn session_round_trip_and_adapters() {
    // answers every request with a fixed response carrying its id
    let reply = r#"{"request_id": %s, "subgoals": [["1"], [1], ["1", "2"]], "programs": ["GetAll(NUMBER)", "Nonsense(", 3]}"#;
    let script = format!(
        "while read line; do id=$(echo \"$line\" | sed -e \"s/.*request_id\\\":\\([0-9]*\\).*/\\1/\"); printf \"{}\\n\" \"$id\"; done",
        reply.replace('"', "\\\"")
    );
    let session = Session::spawn(&sh(&script), Duration::from_secs(10)).unwrap().shared();
    let mut ind = external_inductive_adapter(session.clone());
    let mut trans = external_transductive_adapter(session);
    let s = spec();
    let progs = ind.propose(&s, 10).unwrap();
    assert_eq!(progs.len(), 1);
    assert_eq!(progs[0].subprogram.to_string(), "GetAll(NUMBER)");
    let goals = trans.predict_subgoals(&s, 10).unwrap();
    assert_eq!(goals.len(), 1, "entries with the wrong arity or type are dropped");
    let goals = trans.predict_subgoals(&s, 10).unwrap();
    assert_eq!(goals[0].outputs, vec![tiips_core::Value::text("1").unwrap()]);
}

#[test]
fn session_timeout_is_budget_exhaustion() {
    let mut s = Session::spawn(&sh("sleep 5"), Duration::from_millis(200)).unwrap();
    let err = s.request(RequestKind::Subgoal, &spec(), 3).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::BudgetExhausted);
}

#[test]
fn session_rejects_wrong_ids_and_reports_errors() {
    let mut s = Session::spawn(&sh(r#"read l; echo "{\"request_id\": 41}""#), Duration::from_secs(5)).unwrap();
    let err = s.request(RequestKind::Subgoal, &spec(), 3).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::ProtocolError);

    // a stale id is skipped, then the real answer arrives
    let script = r#"read l; echo "{\"request_id\": 0}"; echo "{\"request_id\": 1, \"error\": \"no model\"}""#;
    let mut s = Session::spawn(&sh(script), Duration::from_secs(5)).unwrap();
    let err = s.request(RequestKind::Subgoal, &spec(), 3).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::ProtocolError);
    assert!(err.to_string().contains("no model"));

    let mut s = Session::spawn(&sh("read l; echo garbage"), Duration::from_secs(5)).unwrap();
    assert_eq!(s.request(RequestKind::Synthesize, &spec(), 3).unwrap_err().kind(), ErrorKind::ProtocolError);

    let mut s = Session::spawn(&sh("exit 0"), Duration::from_secs(5)).unwrap();
    std::thread::sleep(Duration::from_millis(100));
    assert_eq!(s.request(RequestKind::Synthesize, &spec(), 3).unwrap_err().kind(), ErrorKind::ProtocolError);
}

#[test]
fn launch_failure_is_a_protocol_error() {
    let err = Session::spawn("/nonexistent/model --flag", Duration::from_secs(1)).err().unwrap();
    assert_eq!(err.kind(), ErrorKind::ProtocolError);
    assert!(Session::spawn("\"unterminated", Duration::from_secs(1)).is_err());
}
