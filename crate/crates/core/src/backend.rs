//! Satisfiability backends.
//!
//! The built-in backend lowers the model to CNF and runs the in-crate CDCL
//! solver. The pipe backend drives any external SMT-LIB2 solver process
//! (`z3 -in`, `cvc5 --incremental`, ...) through `(check-sat)` /
//! `(get-value ...)`; point `DPQA_SMT_SOLVER` at the binary or select it per
//! job.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::lower::LoweredModel;
use crate::model::Model;
use crate::sat::SatResult;
use crate::smtlib;

/// Environment variable naming the external solver binary.
pub const SOLVER_ENV: &str = "DPQA_SMT_SOLVER";

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("failed to launch solver process `{cmd}`: {err}")]
    Spawn { cmd: String, err: std::io::Error },
    #[error("solver process i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver replied `{0}` to (check-sat)")]
    BadVerdict(String),
    #[error("could not parse solver value response: {0}")]
    BadValues(String),
    #[error("solver process died before answering")]
    Died,
}

/// Raw verdict plus, on sat, values for every core integer and auxiliary
/// Boolean in model order.
#[derive(Debug, Clone)]
pub enum RawOutcome {
    Sat { ints: Vec<i64>, bools: Vec<bool> },
    Unsat,
    Unknown,
}

pub trait SolverBackend: Send + Sync {
    fn check(&self, m: &Model, timeout: Duration) -> Result<RawOutcome, BackendError>;
    fn name(&self) -> String;
}

/// Which backend a job uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendKind {
    Native,
    Pipe { cmd: String, args: Vec<String> },
}

impl BackendKind {
    /// Parses `native` or `pipe:<cmd> [args...]`; `pipe` alone reads
    /// `DPQA_SMT_SOLVER`.
    pub fn parse(text: &str) -> Result<BackendKind, String> {
        if text == "native" {
            return Ok(BackendKind::Native);
        }
        if let Some(rest) = text.strip_prefix("pipe") {
            let rest = rest.strip_prefix(':').unwrap_or(rest);
            let spec = if rest.is_empty() {
                std::env::var(SOLVER_ENV)
                    .map_err(|_| format!("backend `pipe` needs {SOLVER_ENV} set"))?
            } else {
                rest.to_string()
            };
            let mut parts = spec.split_whitespace().map(String::from);
            let cmd = parts.next().ok_or("empty solver command")?;
            return Ok(BackendKind::Pipe { cmd, args: parts.collect() });
        }
        Err(format!("unknown backend `{text}` (expected `native` or `pipe[:cmd]`)"))
    }

    pub fn instantiate(&self) -> Box<dyn SolverBackend> {
        match self {
            BackendKind::Native => Box::new(NativeBackend),
            BackendKind::Pipe { cmd, args } => {
                Box::new(PipeBackend { cmd: cmd.clone(), args: args.clone() })
            }
        }
    }
}

pub struct NativeBackend;

impl SolverBackend for NativeBackend {
    fn check(&self, m: &Model, timeout: Duration) -> Result<RawOutcome, BackendError> {
        let deadline = Instant::now() + timeout;
        let mut lowered = LoweredModel::build(m);
        Ok(match lowered.solve(Some(deadline)) {
            SatResult::Sat => {
                RawOutcome::Sat { ints: lowered.int_values(), bools: lowered.bool_values() }
            }
            SatResult::Unsat => RawOutcome::Unsat,
            SatResult::Unknown => RawOutcome::Unknown,
        })
    }

    fn name(&self) -> String {
        "native".into()
    }
}

pub struct PipeBackend {
    pub cmd: String,
    pub args: Vec<String>,
}

impl SolverBackend for PipeBackend {
    fn check(&self, m: &Model, timeout: Duration) -> Result<RawOutcome, BackendError> {
        let deadline = Instant::now() + timeout;
        let mut child = Command::new(&self.cmd)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|err| BackendError::Spawn { cmd: self.cmd.clone(), err })?;
        let result = self.converse(m, &mut child, deadline);
        let _ = child.kill();
        let _ = child.wait();
        result
    }

    fn name(&self) -> String {
        format!("pipe:{}", self.cmd)
    }
}

impl PipeBackend {
    fn converse(
        &self,
        m: &Model,
        child: &mut Child,
        deadline: Instant,
    ) -> Result<RawOutcome, BackendError> {
        let mut stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");

        // Reader thread: sends one line (or one balanced s-expression) per
        // request so the main thread can enforce the deadline.
        let (tx, rx) = mpsc::channel::<Result<String, std::io::Error>>();
        let (req_tx, req_rx) = mpsc::channel::<ReadMode>();
        std::thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            while let Ok(mode) = req_rx.recv() {
                let item = match mode {
                    ReadMode::Line => {
                        let mut line = String::new();
                        match reader.read_line(&mut line) {
                            Ok(0) => Err(std::io::Error::other("eof")),
                            Ok(_) => Ok(line.trim().to_string()),
                            Err(e) => Err(e),
                        }
                    }
                    ReadMode::SExpr => read_sexpr(&mut reader),
                };
                if tx.send(item).is_err() {
                    break;
                }
            }
        });

        let recv = |rx: &mpsc::Receiver<Result<String, std::io::Error>>| {
            let now = Instant::now();
            if now >= deadline {
                return Err(RecvOutcome::Timeout);
            }
            match rx.recv_timeout(deadline - now) {
                Ok(Ok(s)) => Ok(s),
                Ok(Err(_)) | Err(mpsc::RecvTimeoutError::Disconnected) => {
                    Err(RecvOutcome::Died)
                }
                Err(mpsc::RecvTimeoutError::Timeout) => Err(RecvOutcome::Timeout),
            }
        };

        stdin.write_all(smtlib::dump(m).as_bytes())?;
        stdin.flush()?;
        req_tx.send(ReadMode::Line).ok();
        let verdict = match recv(&rx) {
            Ok(v) => v,
            Err(RecvOutcome::Timeout) => return Ok(RawOutcome::Unknown),
            Err(RecvOutcome::Died) => return Err(BackendError::Died),
        };
        match verdict.as_str() {
            "unsat" => return Ok(RawOutcome::Unsat),
            "unknown" | "timeout" => return Ok(RawOutcome::Unknown),
            "sat" => {}
            other => return Err(BackendError::BadVerdict(other.to_string())),
        }

        // Query values in chunks to keep response lines bounded.
        let mut values: Vec<(String, String)> = Vec::new();
        let names: Vec<String> = m
            .ints
            .iter()
            .map(|v| v.name.clone())
            .chain(m.bools.iter().map(|b| b.name.clone()))
            .collect();
        for chunk in names.chunks(64) {
            writeln!(stdin, "(get-value ({}))", chunk.join(" "))?;
            stdin.flush()?;
            req_tx.send(ReadMode::SExpr).ok();
            let resp = match recv(&rx) {
                Ok(v) => v,
                Err(RecvOutcome::Timeout) => return Ok(RawOutcome::Unknown),
                Err(RecvOutcome::Died) => return Err(BackendError::Died),
            };
            values.extend(parse_value_pairs(&resp).map_err(BackendError::BadValues)?);
        }
        let _ = writeln!(stdin, "(exit)");

        let mut ints = Vec::with_capacity(m.ints.len());
        let mut bools = Vec::with_capacity(m.bools.len());
        for (i, name) in names.iter().enumerate() {
            let got = values
                .iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| BackendError::BadValues(format!("missing value for {name}")))?;
            if i < m.ints.len() {
                ints.push(parse_int(&got.1).map_err(BackendError::BadValues)?);
            } else {
                bools.push(got.1 == "true");
            }
        }
        Ok(RawOutcome::Sat { ints, bools })
    }
}

enum ReadMode {
    Line,
    SExpr,
}

enum RecvOutcome {
    Timeout,
    Died,
}

fn read_sexpr(reader: &mut impl BufRead) -> Result<String, std::io::Error> {
    let mut out = String::new();
    let mut depth = 0i64;
    let mut started = false;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            return Err(std::io::Error::other("eof"));
        }
        for ch in line.chars() {
            match ch {
                '(' => {
                    depth += 1;
                    started = true;
                }
                ')' => depth -= 1,
                _ => {}
            }
        }
        out.push_str(&line);
        if started && depth <= 0 {
            return Ok(out);
        }
    }
}

/// Parses `((name val) (name val) ...)`.
fn parse_value_pairs(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
                tokens.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i] == "(" && i + 1 < tokens.len() && tokens[i + 1] != "(" && tokens[i + 1] != ")"
        {
            let name = tokens[i + 1].clone();
            // Value: either a bare token or a (- n) group.
            let mut j = i + 2;
            let value = if j < tokens.len() && tokens[j] == "(" {
                let mut v = String::new();
                let mut depth = 0;
                while j < tokens.len() {
                    if tokens[j] == "(" {
                        depth += 1;
                    } else if tokens[j] == ")" {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    } else {
                        if !v.is_empty() {
                            v.push(' ');
                        }
                        v.push_str(&tokens[j]);
                    }
                    j += 1;
                }
                v
            } else {
                tokens.get(j).cloned().unwrap_or_default()
            };
            out.push((name, value));
            i = j + 1;
        } else {
            i += 1;
        }
    }
    if out.is_empty() {
        return Err(format!("no (name value) pairs in `{}`", text.trim()));
    }
    Ok(out)
}

fn parse_int(text: &str) -> Result<i64, String> {
    let t = text.trim();
    if let Some(rest) = t.strip_prefix("- ") {
        rest.trim().parse::<i64>().map(|v| -v).map_err(|e| e.to_string())
    } else {
        t.parse::<i64>().map_err(|e| e.to_string())
    }
}
