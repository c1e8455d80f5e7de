//! Client for adapter processes speaking wire protocol v1.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, warn};

use super::wire::{self, PngPayload, Request, Response, SupportPayload, PROTOCOL_VERSION};
use super::{FssBackend, SupportPair};
use crate::error::{Error, Result};
use crate::maskcore::BinaryMask;
use crate::raster::RgbImage;

pub const DEFAULT_DEADLINE: Duration = Duration::from_secs(120);
const SHUTDOWN_GRACE: Duration = Duration::from_secs(2);

struct Client {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    deadline: Duration,
    failed: bool,
}

/// Handle on an adapter child process. Requests are strictly serialized, one
/// outstanding at a time.
pub struct ExternalBackend {
    name: String,
    command: Vec<String>,
    client: Mutex<Client>,
}

impl ExternalBackend {
    pub fn spawn(argv: &[String]) -> Result<Self> {
        Self::spawn_with_deadline(argv, DEFAULT_DEADLINE)
    }

    /// Spawns the adapter and performs the hello handshake. `deadline` bounds
    /// every wait for a response line.
    pub fn spawn_with_deadline(argv: &[String], deadline: Duration) -> Result<Self> {
        let (program, args) = argv
            .split_first()
            .ok_or_else(|| Error::Config("external backend command is empty".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| Error::Spawn {
                command: argv.join(" "),
                source,
            })?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::Builder::new()
            .name("jfs-adapter-reader".into())
            .spawn(move || {
                for line in BufReader::new(stdout).lines() {
                    let stop = line.is_err();
                    if tx.send(line).is_err() || stop {
                        break;
                    }
                }
            })
            .map_err(|source| Error::Spawn {
                command: argv.join(" "),
                source,
            })?;

        let mut client = Client {
            child,
            stdin,
            lines: rx,
            next_id: 1,
            deadline,
            failed: false,
        };
        let name = client.handshake().inspect_err(|_| client.terminate())?;
        debug!("adapter `{name}` ready ({})", argv.join(" "));
        Ok(Self {
            name,
            command: argv.to_vec(),
            client: Mutex::new(client),
        })
    }

    pub fn command(&self) -> &[String] {
        &self.command
    }

    /// OS process id of the adapter.
    pub fn id(&self) -> u32 {
        self.lock().child.id()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Client> {
        self.client.lock().unwrap_or_else(|p| p.into_inner())
    }
}

impl Client {
    fn send(&mut self, req: &Request) -> Result<()> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| Error::Backend("adapter stdin already closed".into()))?;
        stdin
            .write_all(wire::to_line(req).as_bytes())
            .and_then(|_| stdin.flush())
            .map_err(|e| Error::Backend(format!("writing to adapter failed: {e}{}", self.exit_note())))
    }

    fn exit_note(&mut self) -> String {
        match self.child.try_wait() {
            Ok(Some(status)) => format!(" (adapter exited: {status})"),
            _ => String::new(),
        }
    }

    fn recv(&mut self) -> Result<Response> {
        let started = Instant::now();
        let line = match self.lines.recv_timeout(self.deadline) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(Error::Backend(format!("reading from adapter failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                return Err(Error::Backend(format!(
                    "no response from adapter within {:?}",
                    started.elapsed()
                )))
            }
            Err(RecvTimeoutError::Disconnected) => {
                // give the process a moment to be reaped so the status is reported
                let deadline = Instant::now() + Duration::from_millis(200);
                let mut note = self.exit_note();
                while note.is_empty() && Instant::now() < deadline {
                    thread::sleep(Duration::from_millis(10));
                    note = self.exit_note();
                }
                return Err(Error::Backend(format!("adapter closed its output{note}")));
            }
        };
        serde_json::from_str(&line).map_err(|e| {
            let shown: String = line.chars().take(120).collect();
            Error::Protocol(format!("malformed frame `{shown}`: {e}"))
        })
    }

    fn handshake(&mut self) -> Result<String> {
        self.send(&Request::Hello {
            version: PROTOCOL_VERSION,
        })
        .map_err(|e| Error::Protocol(format!("handshake failed: {e}")))?;
        match self.recv() {
            Ok(Response::Hello { version, name }) if version == PROTOCOL_VERSION => Ok(name),
            Ok(Response::Hello { version, .. }) => Err(Error::Protocol(format!(
                "adapter speaks protocol version {version}, expected {PROTOCOL_VERSION}"
            ))),
            Ok(other) => Err(Error::Protocol(format!("expected hello, got {other:?}"))),
            Err(Error::Protocol(msg)) => Err(Error::Protocol(msg)),
            Err(e) => Err(Error::Protocol(format!("handshake failed: {e}"))),
        }
    }

    fn predict(&mut self, query: &RgbImage, support: &[SupportPair<'_>]) -> Result<BinaryMask> {
        if self.failed {
            return Err(Error::Backend("adapter is unusable after an earlier failure".into()));
        }
        let id = self.next_id;
        self.next_id += 1;
        let req = Request::Predict {
            id,
            query: PngPayload::from_image(query),
            support: support
                .iter()
                .map(|p| SupportPayload {
                    image: PngPayload::from_image(p.image),
                    mask: PngPayload::from_mask(p.mask),
                })
                .collect(),
        };
        let result = self.send(&req).and_then(|_| self.recv());
        let response = match result {
            Ok(r) => r,
            Err(e) => {
                self.failed = true;
                self.terminate();
                return Err(e);
            }
        };
        match response {
            Response::Result { id: got, mask } if got == id => {
                let bytes = mask.bytes().inspect_err(|_| self.failed = true)?;
                crate::dataio::decode_mask_png(&bytes)
                    .map_err(|e| Error::ContractViolation(format!("result mask for request {id}: {e}")))
            }
            Response::Result { id: got, .. } => {
                self.failed = true;
                Err(Error::Protocol(format!("response id {got} does not match request {id}")))
            }
            Response::Error { id: Some(got), message } if got == id => Err(Error::Backend(message)),
            Response::Error { id: got, message } => {
                self.failed = true;
                Err(Error::Protocol(format!(
                    "error frame for id {got:?} while waiting for {id}: {message}"
                )))
            }
            Response::Hello { .. } => {
                self.failed = true;
                Err(Error::Protocol("unexpected hello during predict".into()))
            }
        }
    }

    fn terminate(&mut self) {
        if let Some(mut stdin) = self.stdin.take() {
            let _ = stdin.write_all(wire::to_line(&Request::Shutdown).as_bytes());
            let _ = stdin.flush();
        }
        let deadline = Instant::now() + SHUTDOWN_GRACE;
        loop {
            match self.child.try_wait() {
                Ok(Some(_)) => return,
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(10)),
                _ => break,
            }
        }
        warn!("adapter did not exit after shutdown; killing it");
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for ExternalBackend {
    fn drop(&mut self) {
        self.lock().terminate();
    }
}

impl FssBackend for ExternalBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn concurrency_safe(&self) -> bool {
        false
    }

    fn segment(&self, query: &RgbImage, support: &[SupportPair<'_>]) -> Result<BinaryMask> {
        self.lock().predict(query, support)
    }
}
