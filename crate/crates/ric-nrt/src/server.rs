//! TCP front-end: serves the E2-lite protocol on a local socket address.
//!
//! Each accepted connection becomes a node session inside the shared
//! [`Ric`]; a reader thread per connection feeds bytes in under the lock
//! (linearizable updates, ordered per-session handling), and a ticker
//! thread drives deadlines on wall-clock milliseconds.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use crate::registry::ConnId;
use crate::ric::Ric;
use crate::RicError;

pub struct RicServer {
    pub ric: Arc<Mutex<Ric>>,
    pub local_addr: SocketAddr,
    stop: Arc<AtomicBool>,
    threads: Vec<std::thread::JoinHandle<()>>,
}

type WriterMap = Arc<Mutex<HashMap<ConnId, TcpStream>>>;

impl RicServer {
    /// Binds and starts serving. `addr` may use port 0 to pick a free port;
    /// the bound address is reported in `local_addr`.
    pub fn start(addr: &str, ric: Arc<Mutex<Ric>>) -> Result<RicServer, RicError> {
        let listener =
            TcpListener::bind(addr).map_err(|e| RicError::Harness(format!("bind {addr}: {e}")))?;
        let local_addr = listener
            .local_addr()
            .map_err(|e| RicError::Harness(e.to_string()))?;
        listener
            .set_nonblocking(true)
            .map_err(|e| RicError::Harness(e.to_string()))?;
        let stop = Arc::new(AtomicBool::new(false));
        let writers: WriterMap = Arc::new(Mutex::new(HashMap::new()));
        let started = Instant::now();
        let mut threads = Vec::new();

        // Ticker: wall-clock time drives deadlines; outbox flushes to the
        // right writer.
        {
            let ric = Arc::clone(&ric);
            let stop = Arc::clone(&stop);
            let writers = Arc::clone(&writers);
            threads.push(std::thread::spawn(move || {
                while !stop.load(Ordering::Relaxed) {
                    std::thread::sleep(Duration::from_millis(10));
                    let now = started.elapsed().as_millis() as u64;
                    let out = {
                        let mut ric = ric.lock().unwrap();
                        ric.tick(now);
                        ric.drain_outbox()
                    };
                    flush(&writers, out);
                }
            }));
        }

        // Acceptor.
        {
            let ric = Arc::clone(&ric);
            let stop = Arc::clone(&stop);
            let writers = Arc::clone(&writers);
            threads.push(std::thread::spawn(move || {
                while !stop.load(Ordering::Relaxed) {
                    match listener.accept() {
                        Ok((stream, _)) => {
                            let conn = ric.lock().unwrap().node_connected();
                            if let Ok(w) = stream.try_clone() {
                                writers.lock().unwrap().insert(conn, w);
                            }
                            spawn_reader(
                                stream,
                                conn,
                                Arc::clone(&ric),
                                Arc::clone(&writers),
                                Arc::clone(&stop),
                                started,
                            );
                        }
                        Err(ref e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                            std::thread::sleep(Duration::from_millis(5));
                        }
                        Err(_) => break,
                    }
                }
            }));
        }

        Ok(RicServer {
            ric,
            local_addr,
            stop,
            threads,
        })
    }

    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::Relaxed);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

fn spawn_reader(
    mut stream: TcpStream,
    conn: ConnId,
    ric: Arc<Mutex<Ric>>,
    writers: WriterMap,
    stop: Arc<AtomicBool>,
    started: Instant,
) {
    std::thread::spawn(move || {
        let _ = stream.set_read_timeout(Some(Duration::from_millis(50)));
        let mut buf = [0u8; 16 * 1024];
        loop {
            if stop.load(Ordering::Relaxed) {
                break;
            }
            match stream.read(&mut buf) {
                Ok(0) => break,
                Ok(n) => {
                    let now = started.elapsed().as_millis() as u64;
                    let out = {
                        let mut ric = ric.lock().unwrap();
                        ric.node_bytes_in(now, conn, &buf[..n]);
                        ric.drain_outbox()
                    };
                    flush(&writers, out);
                }
                Err(ref e)
                    if e.kind() == std::io::ErrorKind::WouldBlock
                        || e.kind() == std::io::ErrorKind::TimedOut =>
                {
                    continue;
                }
                Err(_) => break,
            }
        }
        let out = {
            let mut ric = ric.lock().unwrap();
            ric.node_disconnected(conn);
            ric.drain_outbox()
        };
        flush(&writers, out);
        writers.lock().unwrap().remove(&conn);
    });
}

fn flush(writers: &WriterMap, out: Vec<(ConnId, Vec<u8>)>) {
    let mut writers = writers.lock().unwrap();
    for (conn, bytes) in out {
        if let Some(w) = writers.get_mut(&conn) {
            let _ = w.write_all(&bytes);
        }
    }
}
