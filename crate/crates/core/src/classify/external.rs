//! Client side of the external classifier protocol.
//!
//! The classifier runs as a child process speaking line-delimited JSON over
//! its standard input and output:
//!
//! ```text
//! -> {"id": "17", "url": "https://github.com/a/b", "context": "...", "section": "Methods"}
//! <- {"id": "17", "label": "methods", "confidence": 0.97}
//! ```
//!
//! Responses may arrive in any order. A response that is missing, malformed
//! or carries an unknown label is replaced by the lexicon classifier's answer
//! for that item.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::lexicon::classify_lexicon;
use crate::error::{Error, Result};
use crate::model::LinkClass;

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(60);

/// One mention to classify.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyItem {
    pub id: String,
    pub url: String,
    pub context: String,
    pub section: String,
    /// URL as written in `context`; used by the lexicon fallback.
    pub url_raw: String,
    /// Registrable domain; used by the lexicon fallback.
    pub domain: String,
}

#[derive(Debug, Serialize)]
struct Request<'a> {
    id: &'a str,
    url: &'a str,
    context: &'a str,
    section: &'a str,
}

#[derive(Debug, Deserialize)]
struct Response {
    id: String,
    label: String,
    confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemLabel {
    pub id: String,
    pub class: LinkClass,
    pub confidence: f64,
    /// True when the lexicon answered because the external response was unusable.
    pub fallback: bool,
}

enum Answer {
    Label(LinkClass, f64),
    Invalid,
}

/// A running classifier process.
pub struct ExternalSession {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    idle_timeout: Duration,
    /// Items answered by the lexicon fallback so far.
    pub fallbacks: usize,
}

impl ExternalSession {
    /// Starts the classifier. `command[0]` is the program, the rest its arguments.
    pub fn start(command: &[String], idle_timeout: Duration) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::External("empty classifier command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::External(format!("failed to start `{program}`: {e}")))?;
        let stdout = child.stdout.take().expect("stdout piped");
        let stdin = child.stdin.take();
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(ExternalSession {
            child,
            stdin,
            lines: rx,
            idle_timeout,
            fallbacks: 0,
        })
    }

    /// Classifies a batch; returns exactly one label per item, in input order.
    pub fn classify(&mut self, batch: &[ClassifyItem]) -> Vec<ItemLabel> {
        let mut answers: HashMap<&str, Option<Answer>> =
            batch.iter().map(|it| (it.id.as_str(), None)).collect();
        let mut pending = batch.len();

        let writer = self.stdin.take().map(|mut stdin| {
            let payload: Vec<u8> = batch
                .iter()
                .flat_map(|it| {
                    let req = Request {
                        id: &it.id,
                        url: &it.url,
                        context: &it.context,
                        section: &it.section,
                    };
                    let mut line = serde_json::to_vec(&req).expect("request serializes");
                    line.push(b'\n');
                    line
                })
                .collect();
            thread::spawn(move || {
                let ok = stdin.write_all(&payload).and_then(|_| stdin.flush()).is_ok();
                ok.then_some(stdin)
            })
        });

        let mut timed_out = false;
        while pending > 0 {
            match self.lines.recv_timeout(self.idle_timeout) {
                Ok(line) => {
                    let Ok(resp) = serde_json::from_str::<Response>(&line) else {
                        continue;
                    };
                    let Some(slot) = answers.get_mut(resp.id.as_str()) else {
                        continue;
                    };
                    if slot.is_some() {
                        continue;
                    }
                    let valid = resp.label.parse::<LinkClass>().ok().filter(|_| {
                        resp.confidence.is_finite() && (0.0..=1.0).contains(&resp.confidence)
                    });
                    // An unusable answer still settles the item: it falls back.
                    *slot = Some(match valid {
                        Some(class) => Answer::Label(class, resp.confidence),
                        None => Answer::Invalid,
                    });
                    pending -= 1;
                }
                Err(RecvTimeoutError::Timeout) => {
                    timed_out = true;
                    break;
                }
                Err(RecvTimeoutError::Disconnected) => break,
            }
        }

        if timed_out {
            let _ = self.child.kill();
        } else if let Some(handle) = writer {
            self.stdin = handle.join().ok().flatten();
        }

        batch
            .iter()
            .map(|it| match answers[it.id.as_str()] {
                Some(Answer::Label(class, confidence)) => ItemLabel {
                    id: it.id.clone(),
                    class,
                    confidence,
                    fallback: false,
                },
                _ => {
                    self.fallbacks += 1;
                    let (class, confidence) =
                        classify_lexicon(&it.context, Some(&it.url_raw), &it.domain);
                    ItemLabel {
                        id: it.id.clone(),
                        class,
                        confidence,
                        fallback: true,
                    }
                }
            })
            .collect()
    }
}

impl Drop for ExternalSession {
    fn drop(&mut self) {
        // Closing stdin asks a well-behaved classifier to exit.
        drop(self.stdin.take());
        for _ in 0..50 {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(10));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
