//! Line-delimited JSON protocol for attaching external models as child processes.
//!
//! Request: `{"kind": "subgoal" | "synthesize", "domain", "spec": {"examples"}, "beam", "request_id"}`.
//! Response: `{"request_id", "subgoals": [[value, ..], ..]}` or `{"request_id", "programs": [text, ..]}`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SynthError};
use crate::inductive::{Candidate, InductiveModel};
use crate::list_dsl;
use crate::program::Subprogram;
use crate::transductive::{build_subtask, SubgoalPrediction, TransductiveModel};
use crate::value::{Domain, Example, IoSpec, Value};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequestKind {
    Subgoal,
    Synthesize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireSpec {
    pub examples: Vec<Example>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    pub kind: RequestKind,
    pub domain: Domain,
    pub spec: WireSpec,
    pub beam: usize,
    pub request_id: u64,
}

impl Request {
    pub fn to_spec(&self) -> Result<IoSpec> {
        IoSpec::new(self.domain, self.spec.examples.clone())
    }
}

/// Response payloads are kept loose so that one bad entry does not void the rest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub request_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgoals: Option<Vec<serde_json::Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub programs: Option<Vec<serde_json::Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A running model process. One request is in flight at a time.
pub struct Session {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    timeout: Duration,
}

impl Session {
    /// Start `command` (split like a shell would, without expansion).
    pub fn spawn(command: &str, timeout: Duration) -> Result<Session> {
        let argv = shlex::split(command)
            .filter(|a| !a.is_empty())
            .ok_or_else(|| SynthError::ProtocolError(format!("cannot split command line `{command}`")))?;
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| SynthError::ProtocolError(format!("cannot start `{}`: {e}", argv[0])))?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(Session { child, stdin, lines: rx, next_id: 1, timeout })
    }

    pub fn shared(self) -> SharedSession {
        Arc::new(Mutex::new(self))
    }

    pub fn request(&mut self, kind: RequestKind, spec: &IoSpec, beam: usize) -> Result<Response> {
        let id = self.next_id;
        self.next_id += 1;
        let req = Request {
            kind,
            domain: spec.domain,
            spec: WireSpec { examples: spec.examples.clone() },
            beam,
            request_id: id,
        };
        let mut line = serde_json::to_string(&req).expect("serializable request");
        line.push('\n');
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| SynthError::ProtocolError("session is closed".into()))?;
        stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.flush())
            .map_err(|e| SynthError::ProtocolError(format!("write failed: {e}")))?;
        loop {
            let line = match self.lines.recv_timeout(self.timeout) {
                Ok(Ok(line)) => line,
                Ok(Err(e)) => return Err(SynthError::ProtocolError(format!("read failed: {e}"))),
                Err(RecvTimeoutError::Timeout) => {
                    return Err(SynthError::BudgetExhausted(format!(
                        "no response to request {id} within {:?}",
                        self.timeout
                    )))
                }
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(SynthError::ProtocolError("model process closed its output".into()))
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let resp: Response = serde_json::from_str(&line)
                .map_err(|e| SynthError::ProtocolError(format!("malformed response: {e}")))?;
            if resp.request_id < id {
                // a late answer to a request that already timed out
                continue;
            }
            if resp.request_id != id {
                return Err(SynthError::ProtocolError(format!(
                    "response echoes request_id {} but {id} is in flight",
                    resp.request_id
                )));
            }
            if let Some(e) = resp.error {
                return Err(SynthError::ProtocolError(format!("model reported: {e}")));
            }
            return Ok(resp);
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        drop(self.stdin.take());
        // give the model a moment to exit on EOF before forcing it
        for _ in 0..50 {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            std::thread::sleep(Duration::from_millis(10));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub type SharedSession = Arc<Mutex<Session>>;

fn lock(s: &SharedSession) -> std::sync::MutexGuard<'_, Session> {
    s.lock().unwrap_or_else(|p| p.into_inner())
}

/// Statically check a list step's operand types against the bound variables.
fn well_typed(sub: &Subprogram, spec: &IoSpec) -> bool {
    match sub {
        Subprogram::Str(_) => true,
        Subprogram::List(stmt) => {
            let bound = list_dsl::bound_vars(spec);
            stmt.expr
                .operands()
                .iter()
                .all(|(v, ty)| bound.iter().any(|(b, t)| b == v && t == ty))
        }
    }
}

pub struct ExternalInductive {
    session: SharedSession,
}

pub fn external_inductive_adapter(session: SharedSession) -> ExternalInductive {
    ExternalInductive { session }
}

impl InductiveModel for ExternalInductive {
    fn propose(&mut self, spec: &IoSpec, beam: usize) -> Result<Vec<Candidate>> {
        let resp = lock(&self.session).request(RequestKind::Synthesize, spec, beam)?;
        let programs = resp
            .programs
            .ok_or_else(|| SynthError::ProtocolError("synthesize response lacks `programs`".into()))?;
        Ok(programs
            .iter()
            .filter_map(|p| p.as_str())
            .filter_map(|text| Subprogram::parse(text, spec).ok())
            .filter(|sub| well_typed(sub, spec))
            .take(beam)
            .enumerate()
            .map(|(rank, subprogram)| Candidate { subprogram, score: -(rank as f64) })
            .collect())
    }
}

pub struct ExternalTransductive {
    session: SharedSession,
}

pub fn external_transductive_adapter(session: SharedSession) -> ExternalTransductive {
    ExternalTransductive { session }
}

impl TransductiveModel for ExternalTransductive {
    fn predict_subgoals(&mut self, spec: &IoSpec, beam: usize) -> Result<Vec<SubgoalPrediction>> {
        let resp = lock(&self.session).request(RequestKind::Subgoal, spec, beam)?;
        let subgoals = resp
            .subgoals
            .ok_or_else(|| SynthError::ProtocolError("subgoal response lacks `subgoals`".into()))?;
        Ok(subgoals
            .into_iter()
            .filter_map(|entry| serde_json::from_value::<Vec<Value>>(entry).ok())
            .map(|outputs| SubgoalPrediction { outputs, score: 0.0 })
            .filter(|p| build_subtask(spec, p).is_ok())
            .take(beam)
            .enumerate()
            .map(|(rank, p)| SubgoalPrediction { score: -(rank as f64), ..p })
            .collect())
    }
}

/// Answer requests from `input` until EOF, one response line per request line.
pub fn serve(
    input: impl BufRead,
    mut output: impl Write,
    mut handle: impl FnMut(&Request) -> std::result::Result<Response, String>,
) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let resp = match serde_json::from_str::<Request>(&line) {
            Ok(req) => handle(&req).unwrap_or_else(|e| Response {
                request_id: req.request_id,
                error: Some(e),
                ..Default::default()
            }),
            Err(e) => Response {
                request_id: serde_json::from_str::<serde_json::Value>(&line)
                    .ok()
                    .and_then(|v| v.get("request_id").and_then(|id| id.as_u64()))
                    .unwrap_or(0),
                error: Some(format!("bad request: {e}")),
                ..Default::default()
            },
        };
        serde_json::to_writer(&mut output, &resp)?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}

/// A stand-in external model: ground-truth subgoals for known tasks and the
/// built-in enumerator for synthesis.
pub struct OracleStub {
    by_inputs: std::collections::HashMap<String, Vec<crate::benchgen::TaskRecord>>,
}

/// Inputs a task starts from, as a lookup key. List states are keyed by
/// their first `k` variables, `k` being the arity of the task.
fn input_key(examples: &[Example], k: usize) -> String {
    let heads: Vec<Vec<&Value>> = examples.iter().map(|e| e.inputs.values().take(k).collect()).collect();
    serde_json::to_string(&heads).expect("serializable values")
}

impl OracleStub {
    pub fn new(tasks: Vec<crate::benchgen::TaskRecord>) -> Self {
        let mut by_inputs: std::collections::HashMap<String, Vec<_>> = std::collections::HashMap::new();
        for t in tasks {
            let k = t.spec.examples[0].inputs.len();
            by_inputs.entry(format!("{k}:{}", input_key(&t.spec.examples, k))).or_default().push(t);
        }
        OracleStub { by_inputs }
    }

    fn subgoals(&self, spec: &IoSpec) -> Vec<Vec<Value>> {
        let width = spec.examples[0].inputs.len();
        for k in 1..=width {
            let Some(tasks) = self.by_inputs.get(&format!("{k}:{}", input_key(&spec.examples, k))) else {
                continue;
            };
            for task in tasks {
                if let Some(c) = crate::transductive::consumed_steps(spec, task) {
                    return crate::transductive::oracle_subgoals(spec, task, c)
                        .map(|p| vec![p.outputs])
                        .unwrap_or_default();
                }
            }
        }
        Vec::new()
    }

    pub fn handle(&self, req: &Request) -> std::result::Result<Response, String> {
        let spec = req.to_spec().map_err(|e| e.to_string())?;
        let mut resp = Response { request_id: req.request_id, ..Default::default() };
        match req.kind {
            RequestKind::Subgoal => {
                let goals = self.subgoals(&spec);
                resp.subgoals = Some(goals.into_iter().map(|g| serde_json::json!(g)).collect());
            }
            RequestKind::Synthesize => {
                let beam = crate::inductive::enumerate_step(&spec, req.beam).map_err(|e| e.to_string())?;
                resp.programs = Some(
                    beam.into_iter()
                        .map(|c| serde_json::Value::String(c.subprogram.to_string()))
                        .collect(),
                );
            }
        }
        Ok(resp)
    }
}
