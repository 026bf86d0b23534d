//! Objective evaluated by an external command.
//!
//! Each evaluation spawns `sh -c <command>` once, writes one JSON request to
//! its stdin and expects one JSON response on stdout:
//!
//! ```text
//! request:  {"discrete": {"depth": 6, ...}, "continuous": {"lr": 0.05, ...}}
//! response: {"value": -0.1234}
//! ```

use std::io::{Read, Write};
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};
use wait_timeout::ChildExt;

use crate::error::EvalError;
use crate::space::MixedSpace;

use super::{check_arity, KnownOptimum, Objective};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExternalRequest {
    pub discrete: Map<String, Value>,
    pub continuous: Map<String, Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExternalResponse {
    pub value: f64,
}

pub struct ExternalObjective {
    name: String,
    command: String,
    space: MixedSpace,
    timeout: Duration,
    optimum: Option<KnownOptimum>,
    concurrency_safe: bool,
}

impl ExternalObjective {
    pub fn new(name: impl Into<String>, command: impl Into<String>, space: MixedSpace, timeout: Duration) -> Self {
        Self {
            name: name.into(),
            command: command.into(),
            space,
            timeout,
            optimum: None,
            concurrency_safe: false,
        }
    }

    pub fn with_optimum(mut self, optimum: Option<KnownOptimum>) -> Self {
        self.optimum = optimum;
        self
    }

    /// Declare that several evaluations may run at once.
    pub fn with_concurrency_safe(mut self, safe: bool) -> Self {
        self.concurrency_safe = safe;
        self
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn request(&self, discrete: &[f64], continuous: &[f64]) -> ExternalRequest {
        let to_map = |names: Vec<&str>, values: &[f64]| {
            names
                .into_iter()
                .zip(values)
                .map(|(n, &v)| (n.to_string(), json_number(v)))
                .collect::<Map<_, _>>()
        };
        ExternalRequest {
            discrete: to_map(self.space.discrete().iter().map(|v| v.name()).collect(), discrete),
            continuous: to_map(self.space.continuous().iter().map(|v| v.name()).collect(), continuous),
        }
    }

    fn spawn(&self) -> Result<Child, EvalError> {
        let mut cmd = Command::new("sh");
        cmd.arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped());
        #[cfg(unix)]
        {
            use std::os::unix::process::CommandExt;
            cmd.process_group(0);
        }
        cmd.spawn().map_err(|source| EvalError::Spawn {
            command: self.command.clone(),
            source,
        })
    }
}

/// Integral values go out as JSON integers so scripts can use them as counts.
fn json_number(v: f64) -> Value {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        Value::Number(Number::from(v as i64))
    } else {
        Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
    }
}

fn kill_tree(child: &mut Child) {
    #[cfg(unix)]
    {
        // the child leads its own process group; take down everything it spawned
        let pgid = child.id() as libc::pid_t;
        unsafe {
            libc::kill(-pgid, libc::SIGKILL);
        }
    }
    let _ = child.kill();
    let _ = child.wait();
}

fn drain<R: Read + Send + 'static>(pipe: Option<R>) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = String::new();
        if let Some(mut p) = pipe {
            let _ = p.read_to_string(&mut buf);
        }
        buf
    })
}

impl Objective for ExternalObjective {
    fn name(&self) -> &str {
        &self.name
    }

    fn space(&self) -> &MixedSpace {
        &self.space
    }

    fn evaluate(&self, discrete: &[f64], continuous: &[f64]) -> Result<f64, EvalError> {
        check_arity(&self.space, discrete, continuous)?;
        let payload = serde_json::to_vec(&self.request(discrete, continuous))
            .map_err(|e| EvalError::InvalidInput(e.to_string()))?;

        let mut child = self.spawn()?;
        let stdout = drain(child.stdout.take());
        let stderr = drain(child.stderr.take());
        if let Some(mut stdin) = child.stdin.take() {
            // a command that ignores its input may close the pipe early
            let _ = stdin.write_all(&payload);
        }

        let status = match child.wait_timeout(self.timeout) {
            Ok(Some(status)) => status,
            Ok(None) => {
                kill_tree(&mut child);
                let stderr = stderr.join().unwrap_or_default();
                let _ = stdout.join();
                return Err(EvalError::Timeout {
                    timeout: self.timeout,
                    stderr,
                });
            }
            Err(source) => {
                kill_tree(&mut child);
                return Err(EvalError::Spawn {
                    command: self.command.clone(),
                    source,
                });
            }
        };
        let out = stdout.join().unwrap_or_default();
        let err = stderr.join().unwrap_or_default();
        if !status.success() {
            return Err(EvalError::NonZeroExit {
                status: status.to_string(),
                stderr: err,
            });
        }
        let response: ExternalResponse =
            serde_json::from_str(out.trim()).map_err(|e| EvalError::MalformedOutput {
                reason: e.to_string(),
                stdout: out.clone(),
                stderr: err.clone(),
            })?;
        if !response.value.is_finite() {
            return Err(EvalError::NonFinite(response.value));
        }
        Ok(response.value)
    }

    fn known_optimum(&self) -> Option<&KnownOptimum> {
        self.optimum.as_ref()
    }

    fn concurrency_safe(&self) -> bool {
        self.concurrency_safe
    }
}
