use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use tiny_http::{Header, Response, Server};

use super::HarnessError;
use crate::fragmenter::Manifest;
use crate::traversal::TURTLE_MEDIA_TYPE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServeOptions {
    /// Artificial latency added to every response.
    pub delay: Duration,
    pub workers: usize,
}

impl Default for ServeOptions {
    fn default() -> Self {
        ServeOptions {
            delay: Duration::ZERO,
            workers: 8,
        }
    }
}

#[derive(Default)]
struct Counters {
    total: usize,
    per_path: BTreeMap<String, usize>,
}

/// A running fragment server. Stops when dropped.
pub struct DocumentServer {
    addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    counters: Arc<Mutex<Counters>>,
    workers: Vec<JoinHandle<()>>,
}

/// Serve the documents listed in `dir`'s manifest at
/// `http://127.0.0.1:<port>/<file>`. Port 0 picks a free port.
pub fn serve(dir: &Path, port: u16, options: ServeOptions) -> Result<DocumentServer, HarnessError> {
    let manifest = Manifest::read(dir)?;
    let mut files: HashMap<String, Arc<Vec<u8>>> = HashMap::new();
    for entry in &manifest.entries {
        let path = dir.join(&entry.file);
        let bytes = fs::read(&path).map_err(|source| HarnessError::Io { path, source })?;
        files.insert(entry.file.clone(), Arc::new(bytes));
    }
    let files = Arc::new(files);

    let server = Server::http(("127.0.0.1", port)).map_err(|e| HarnessError::Bind {
        port,
        message: e.to_string(),
    })?;
    let addr = server
        .server_addr()
        .to_ip()
        .expect("TCP listener has an IP address");
    let server = Arc::new(server);
    let shutdown = Arc::new(AtomicBool::new(false));
    let counters = Arc::new(Mutex::new(Counters::default()));

    let workers = (0..options.workers.max(1))
        .map(|_| {
            let server = Arc::clone(&server);
            let shutdown = Arc::clone(&shutdown);
            let counters = Arc::clone(&counters);
            let files = Arc::clone(&files);
            let delay = options.delay;
            thread::spawn(move || {
                while !shutdown.load(Ordering::SeqCst) {
                    let request = match server.recv_timeout(Duration::from_millis(50)) {
                        Ok(Some(rq)) => rq,
                        Ok(None) => continue,
                        Err(_) => break,
                    };
                    let path = request
                        .url()
                        .split(['?', '#'])
                        .next()
                        .unwrap_or("")
                        .trim_start_matches('/')
                        .to_string();
                    {
                        let mut c = counters.lock().expect("counter lock");
                        c.total += 1;
                        *c.per_path.entry(path.clone()).or_default() += 1;
                    }
                    if !delay.is_zero() {
                        thread::sleep(delay);
                    }
                    let result = match files.get(&path) {
                        Some(bytes) => request.respond(
                            Response::from_data(bytes.as_slice()).with_header(
                                Header::from_bytes("Content-Type", TURTLE_MEDIA_TYPE)
                                    .expect("static header"),
                            ),
                        ),
                        None => request.respond(Response::empty(404)),
                    };
                    if let Err(e) = result {
                        log::debug!("response to /{path} failed: {e}");
                    }
                }
            })
        })
        .collect();

    Ok(DocumentServer {
        addr,
        shutdown,
        counters,
        workers,
    })
}

impl DocumentServer {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Base IRI ending in `/`.
    pub fn base_url(&self) -> String {
        format!("http://{}/", self.addr)
    }

    pub fn url_of(&self, file: &str) -> String {
        format!("{}{file}", self.base_url())
    }

    pub fn total_requests(&self) -> usize {
        self.counters.lock().expect("counter lock").total
    }

    pub fn requests_for(&self, file: &str) -> usize {
        self.counters
            .lock()
            .expect("counter lock")
            .per_path
            .get(file)
            .copied()
            .unwrap_or(0)
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

impl Drop for DocumentServer {
    fn drop(&mut self) {
        self.stop();
    }
}
