//! Adapter for models served by an external process over a line protocol.
//!
//! Protocol, per batch: the parent writes a header line `"N P\n"` followed
//! by `N` lines of `P` comma-separated decimals, then flushes. The child
//! answers with exactly `N` lines, one decimal score each, flushing after
//! the batch. The child stays alive across batches; EOF on its stdin
//! signals shutdown. Text is ASCII decimal with `.` separator, so children
//! can be written in any language.
//!
//! Batches are serialized internally: the predictor may be shared across
//! threads, but only one exchange is in flight at a time.

use super::{check_shape, Matrix, Predictor};
use crate::error::{Error, Result};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

struct ChildIo {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
}

/// Predictor scoring rows through a persistent child process.
pub struct ExternalPredictor {
    feature_names: Vec<String>,
    command: Vec<String>,
    io: Mutex<ChildIo>,
}

/// Spawn `command` (argv form) as the scoring child.
pub fn external_predictor(
    command: &[String],
    feature_names: Vec<String>,
) -> Result<ExternalPredictor> {
    if command.is_empty() {
        return Err(Error::invalid("external predictor needs a command"));
    }
    if feature_names.is_empty() {
        return Err(Error::invalid("external predictor needs feature names"));
    }
    let mut child = Command::new(&command[0])
        .args(&command[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|source| Error::Io {
            path: command[0].clone(),
            source,
        })?;
    let stdin = child.stdin.take().expect("piped stdin");
    let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
    Ok(ExternalPredictor {
        feature_names,
        command: command.to_vec(),
        io: Mutex::new(ChildIo {
            child,
            stdin: Some(stdin),
            stdout,
        }),
    })
}

impl ExternalPredictor {
    fn exchange(&self, x: &Matrix) -> Result<Vec<f64>> {
        let mut io = self.io.lock().expect("external predictor poisoned");
        let describe = || format!("{:?}", self.command);

        {
            let stdin = io.stdin.as_mut().ok_or_else(|| {
                Error::Protocol(format!("child {} already shut down", describe()))
            })?;
            let mut request = String::new();
            request.push_str(&format!("{} {}\n", x.n_rows(), x.n_cols()));
            for row in x.rows() {
                let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
                request.push_str(&cells.join(","));
                request.push('\n');
            }
            stdin
                .write_all(request.as_bytes())
                .and_then(|_| stdin.flush())
                .map_err(|e| {
                    Error::Protocol(format!("writing batch to child {}: {e}", describe()))
                })?;
        }

        let mut scores = Vec::with_capacity(x.n_rows());
        for line_no in 0..x.n_rows() {
            let mut line = String::new();
            let read = io
                .stdout
                .read_line(&mut line)
                .map_err(|e| Error::Protocol(format!("reading from child {}: {e}", describe())))?;
            if read == 0 {
                let status = io
                    .child
                    .try_wait()
                    .ok()
                    .flatten()
                    .map(|s| format!(" (child exited: {s})"))
                    .unwrap_or_default();
                return Err(Error::Protocol(format!(
                    "short response from {}: expected {} lines, received {line_no}{status}",
                    describe(),
                    x.n_rows()
                )));
            }
            let trimmed = line.trim();
            let value: f64 = trimmed.parse().map_err(|_| {
                Error::Protocol(format!(
                    "non-numeric score on response line {}: {trimmed:?}",
                    line_no + 1
                ))
            })?;
            scores.push(value);
        }
        Ok(scores)
    }
}

impl Predictor for ExternalPredictor {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_shape(self, x)?;
        if x.n_rows() == 0 {
            return Ok(Vec::new());
        }
        self.exchange(x)
    }
}

impl Drop for ExternalPredictor {
    fn drop(&mut self) {
        if let Ok(mut io) = self.io.lock() {
            io.stdin.take(); // EOF signals shutdown
            let _ = io.child.wait();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Write a python child script to a temp file and return (file, argv).
    fn python_child(body: &str) -> (tempfile::NamedTempFile, Vec<String>) {
        let mut f = tempfile::NamedTempFile::with_suffix(".py").unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f.flush().unwrap();
        let argv = vec![
            "python3".to_string(),
            "-u".to_string(),
            f.path().display().to_string(),
        ];
        (f, argv)
    }

    const ECHO_FIRST_FEATURE: &str = r#"
import sys
while True:
    header = sys.stdin.readline()
    if not header.strip():
        break
    n, p = map(int, header.split())
    for _ in range(n):
        cells = sys.stdin.readline().split(',')
        print(cells[0].strip())
"#;

    #[test]
    fn echo_child_returns_first_feature() {
        let (_file, argv) = python_child(ECHO_FIRST_FEATURE);
        let pred = external_predictor(&argv, vec!["a".into(), "b".into()]).unwrap();
        let x = Matrix::from_rows(&[vec![1.5, 9.0], vec![-2.25, 3.0]]).unwrap();
        assert_eq!(pred.predict(&x).unwrap(), vec![1.5, -2.25]);
    }

    #[test]
    fn child_persists_across_batches() {
        // returns the 1-based batch number for every row, so a fresh child
        // per batch would be caught
        let body = r#"
import sys
batch = 0
while True:
    header = sys.stdin.readline()
    if not header.strip():
        break
    batch += 1
    n, p = map(int, header.split())
    for _ in range(n):
        sys.stdin.readline()
        print(batch)
"#;
        let (_file, argv) = python_child(body);
        let pred = external_predictor(&argv, vec!["a".into()]).unwrap();
        let x = Matrix::from_rows(&[vec![0.0], vec![0.0]]).unwrap();
        assert_eq!(pred.predict(&x).unwrap(), vec![1.0, 1.0]);
        assert_eq!(pred.predict(&x).unwrap(), vec![2.0, 2.0]);
    }

    #[test]
    fn early_exit_names_line_counts() {
        let body = r#"
import sys
header = sys.stdin.readline()
n, p = map(int, header.split())
sys.stdin.readline()
print(1.0)
"#;
        let (_file, argv) = python_child(body);
        let pred = external_predictor(&argv, vec!["a".into()]).unwrap();
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let err = pred.predict(&x).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("expected 3 lines"), "{msg}");
        assert!(msg.contains("received 1"), "{msg}");
    }

    #[test]
    fn malformed_response_names_offending_line() {
        let body = r#"
import sys
while True:
    header = sys.stdin.readline()
    if not header.strip():
        break
    n, p = map(int, header.split())
    for _ in range(n):
        sys.stdin.readline()
        print("banana")
"#;
        let (_file, argv) = python_child(body);
        let pred = external_predictor(&argv, vec!["a".into()]).unwrap();
        let x = Matrix::from_rows(&[vec![0.0]]).unwrap();
        let err = pred.predict(&x).unwrap_err();
        assert!(err.to_string().contains("banana"), "{err}");
    }

    #[test]
    fn spawn_failure_is_io_error() {
        let argv = vec!["/no/such/binary".to_string()];
        assert!(matches!(
            external_predictor(&argv, vec!["a".into()]),
            Err(Error::Io { .. })
        ));
    }
}
