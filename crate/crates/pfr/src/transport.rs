//! Moving frames between the user and the servers, plus the client-side
//! retrieval driver.
//!
//! Both transports carry the same frames: the in-memory loopback runs the
//! server's frame handler directly, the TCP transport sends one frame per
//! message over a connection per server.

use std::io::BufWriter;
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crate::database::{Database, DecodedStream};
use crate::error::{Error, Result};
use crate::projspace::ThetaIndex;
use crate::query::{Answer, PlanRng, Query};
use crate::scheme::{Plan, SchemeParams};
use crate::server::handle_frame;
use crate::wire::{self, MessageType};

pub trait Transport: Sync {
    fn servers(&self) -> usize;

    /// Sends one request frame to `server` (0-based) and returns its reply frame.
    fn exchange(&self, server: usize, frame: &[u8]) -> Result<Vec<u8>>;
}

/// Servers living in this process, each over its own replica handle.
pub struct InMemoryTransport {
    replicas: Vec<Option<Arc<Database>>>,
}

impl InMemoryTransport {
    pub fn replicated(db: Arc<Database>, servers: usize) -> Self {
        InMemoryTransport { replicas: vec![Some(db); servers] }
    }

    /// Makes a server unreachable.
    pub fn take_down(&mut self, server: usize) {
        self.replicas[server] = None;
    }
}

impl Transport for InMemoryTransport {
    fn servers(&self) -> usize {
        self.replicas.len()
    }

    fn exchange(&self, server: usize, frame: &[u8]) -> Result<Vec<u8>> {
        match self.replicas.get(server) {
            Some(Some(db)) => Ok(handle_frame(db, frame)),
            _ => Err(Error::Transport(format!("server {} is unreachable", server + 1))),
        }
    }
}

pub struct TcpTransport {
    endpoints: Vec<SocketAddr>,
    timeout: Duration,
}

impl TcpTransport {
    pub fn new(endpoints: Vec<SocketAddr>) -> Self {
        TcpTransport { endpoints, timeout: Duration::from_secs(30) }
    }

    /// Resolves `host:port` strings.
    pub fn resolve<S: AsRef<str>>(endpoints: &[S]) -> Result<Self> {
        let addrs = endpoints
            .iter()
            .map(|e| {
                e.as_ref()
                    .to_socket_addrs()
                    .map_err(|err| Error::Transport(format!("cannot resolve {}: {err}", e.as_ref())))?
                    .next()
                    .ok_or_else(|| Error::Transport(format!("no address for {}", e.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(addrs))
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

impl Transport for TcpTransport {
    fn servers(&self) -> usize {
        self.endpoints.len()
    }

    fn exchange(&self, server: usize, frame: &[u8]) -> Result<Vec<u8>> {
        let addr = self.endpoints[server];
        let transport_err = |e: std::io::Error| Error::Transport(format!("server {} ({addr}): {e}", server + 1));
        let mut stream = TcpStream::connect_timeout(&addr, self.timeout).map_err(transport_err)?;
        stream.set_read_timeout(Some(self.timeout)).map_err(transport_err)?;
        stream.set_write_timeout(Some(self.timeout)).map_err(transport_err)?;
        stream.set_nodelay(true).map_err(transport_err)?;
        wire::write_frame(&mut BufWriter::new(&mut stream), frame).map_err(transport_err)?;
        let reply = wire::read_frame(&mut stream).map_err(|e| match e {
            Error::Io(io) => transport_err(io),
            Error::Transport(msg) => Error::Transport(format!("server {} ({addr}): {msg}", server + 1)),
            other => other,
        })?;
        let _ = stream.shutdown(Shutdown::Both);
        Ok(reply)
    }
}

/// A TCP server answering queries over one immutable database.
pub struct TcpServer {
    local_addr: SocketAddr,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl TcpServer {
    /// Binds and starts accepting in a background thread; each connection
    /// gets its own thread and may carry any number of request frames.
    pub fn bind(db: Arc<Database>, addr: impl ToSocketAddrs) -> Result<Self> {
        let listener = TcpListener::bind(addr)?;
        let local_addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let handle = thread::spawn(move || {
            for conn in listener.incoming() {
                if flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = conn else { continue };
                let db = Arc::clone(&db);
                thread::spawn(move || serve_connection(&db, stream));
            }
        });
        Ok(TcpServer { local_addr, stop, handle: Some(handle) })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    /// Blocks until the accept loop ends.
    pub fn wait(mut self) {
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }

    pub fn shutdown(mut self) {
        self.stop_accepting();
    }

    fn stop_accepting(&mut self) {
        if let Some(h) = self.handle.take() {
            self.stop.store(true, Ordering::SeqCst);
            // wake the blocking accept
            let _ = TcpStream::connect(self.local_addr);
            let _ = h.join();
        }
    }
}

impl Drop for TcpServer {
    fn drop(&mut self) {
        self.stop_accepting();
    }
}

/// `n` TCP servers on 127.0.0.1 sharing one database, for tests and benches.
pub struct LoopbackCluster {
    servers: Vec<TcpServer>,
}

impl LoopbackCluster {
    pub fn start(db: Arc<Database>, n: usize) -> Result<Self> {
        let servers = (0..n).map(|_| TcpServer::bind(Arc::clone(&db), "127.0.0.1:0")).collect::<Result<_>>()?;
        Ok(LoopbackCluster { servers })
    }

    pub fn addrs(&self) -> Vec<SocketAddr> {
        self.servers.iter().map(TcpServer::local_addr).collect()
    }

    pub fn transport(&self) -> TcpTransport {
        TcpTransport::new(self.addrs())
    }
}

fn serve_connection(db: &Database, mut stream: TcpStream) {
    let _ = stream.set_nodelay(true);
    // ends on close, on a malformed frame header, or on a write failure
    while let Ok(frame) = wire::read_frame(&mut stream) {
        let reply = handle_frame(db, &frame);
        if wire::write_frame(&mut stream, &reply).is_err() {
            break;
        }
    }
}

/// One server's side of a retrieval.
#[derive(Clone, Debug)]
pub struct Exchange {
    pub query: Query,
    pub answer: Answer,
    pub upload_bytes: usize,
    pub download_bytes: usize,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct Transcript {
    pub exchanges: Vec<Exchange>,
    pub elapsed: Duration,
}

impl Transcript {
    /// Answer records received, the measured Q.
    pub fn answer_records(&self) -> usize {
        self.exchanges.iter().map(|e| e.answer.values.len()).sum()
    }

    /// Answer payload in field elements, Q * S.
    pub fn answer_elements(&self) -> usize {
        self.exchanges.iter().map(|e| e.answer.element_count()).sum()
    }

    pub fn upload_bytes(&self) -> usize {
        self.exchanges.iter().map(|e| e.upload_bytes).sum()
    }

    pub fn download_bytes(&self) -> usize {
        self.exchanges.iter().map(|e| e.download_bytes).sum()
    }

    /// Download bytes that are not answer elements.
    pub fn framing_bytes(&self) -> usize {
        self.download_bytes() - 2 * self.answer_elements()
    }
}

#[derive(Clone, Debug)]
pub struct Retrieval {
    pub stream: DecodedStream,
    pub transcript: Transcript,
    pub plan: Plan,
}

/// Plans, dispatches one query per server concurrently, waits for every
/// answer and decodes. Any failed server fails the whole retrieval.
pub fn retrieve(
    params: &SchemeParams,
    theta: ThetaIndex,
    transport: &dyn Transport,
    rng: &mut PlanRng,
) -> Result<Retrieval> {
    let servers = params.servers();
    if transport.servers() != servers {
        return Err(Error::InvalidParameter(format!(
            "scheme needs {servers} servers, transport has {}",
            transport.servers()
        )));
    }
    let started = Instant::now();
    let (queries, plan) = params.plan(theta, rng)?;
    let frames = queries.iter().map(wire::encode_query).collect::<Result<Vec<_>>>()?;
    let order = params.field().order();

    let results: Vec<Result<(Vec<u8>, Duration)>> = thread::scope(|scope| {
        let handles: Vec<_> = frames
            .iter()
            .enumerate()
            .map(|(server, frame)| {
                scope.spawn(move || {
                    let t = Instant::now();
                    transport.exchange(server, frame).map(|reply| (reply, t.elapsed()))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Internal("worker panicked".into()))))
            .collect()
    });

    let mut exchanges = Vec::with_capacity(servers);
    for (server, (result, (query, frame))) in results.into_iter().zip(queries.into_iter().zip(&frames)).enumerate() {
        let (reply, elapsed) = result?;
        let answer = match wire::decode_frame(&reply)? {
            (MessageType::Answer, payload) => wire::decode_answer_payload(payload, query.header.record_len, order)?,
            (MessageType::Error, payload) => {
                let e = wire::decode_error_payload(payload)?;
                return Err(Error::Remote { server: server + 1, code: e.code, message: e.message });
            }
            (MessageType::Query, _) => {
                return Err(Error::Transport(format!("server {} replied with a query frame", server + 1)))
            }
        };
        exchanges.push(Exchange { query, answer, upload_bytes: frame.len(), download_bytes: reply.len(), elapsed });
    }

    let answers: Vec<Answer> = exchanges.iter().map(|e| e.answer.clone()).collect();
    let stream = plan.decode(&answers)?;
    let transcript = Transcript { exchanges, elapsed: started.elapsed() };
    if transcript.answer_records() as u128 != params.downloads() {
        return Err(Error::Internal(format!(
            "downloaded {} records, scheme promises {}",
            transcript.answer_records(),
            params.downloads()
        )));
    }
    Ok(Retrieval { stream, transcript, plan })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn in_memory_binary_retrieval() {
        let params = SchemeParams::binary(2).unwrap();
        let db = Arc::new(Database::generate(&params.field(), 2, 8, 3, 5).unwrap());
        let transport = InMemoryTransport::replicated(Arc::clone(&db), 2);
        let r = retrieve(&params, ThetaIndex(2), &transport, &mut PlanRng::seeded(1)).unwrap();
        assert_eq!(r.stream, db.oracle(&r.plan.theta_vector()).unwrap());
        assert_eq!(r.transcript.answer_records(), 12);
        assert_eq!(r.transcript.answer_elements(), 36);
        assert_eq!(r.transcript.framing_bytes(), 2 * (5 + 4));
    }

    #[test]
    fn one_server_down_fails_retrieval() {
        let params = SchemeParams::general(3, 2, 3, 1).unwrap();
        let db = Arc::new(Database::generate(&params.field(), 2, 132, 1, 5).unwrap());
        let mut transport = InMemoryTransport::replicated(db, 3);
        transport.take_down(2);
        let err = retrieve(&params, ThetaIndex(1), &transport, &mut PlanRng::seeded(1)).unwrap_err();
        assert!(matches!(err, Error::Transport(_)));
    }

    #[test]
    fn shape_mismatch_surfaces_as_remote_error() {
        let params = SchemeParams::binary(2).unwrap();
        let db = Arc::new(Database::generate(&params.field(), 2, 9, 1, 5).unwrap());
        let transport = InMemoryTransport::replicated(db, 2);
        let err = retrieve(&params, ThetaIndex(1), &transport, &mut PlanRng::seeded(1)).unwrap_err();
        assert!(matches!(err, Error::Remote { code: wire::code::SHAPE_MISMATCH, .. }), "{err}");
    }

    #[test]
    fn tcp_loopback() {
        let params = SchemeParams::binary(2).unwrap();
        let db = Arc::new(Database::generate(&params.field(), 2, 8, 2, 6).unwrap());
        let cluster = LoopbackCluster::start(Arc::clone(&db), 2).unwrap();
        let r = retrieve(&params, ThetaIndex(3), &cluster.transport(), &mut PlanRng::seeded(2)).unwrap();
        assert_eq!(r.stream, db.oracle(&r.plan.theta_vector()).unwrap());
    }

    #[test]
    fn tcp_refused_connection() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let params = SchemeParams::binary(1).unwrap();
        let db = Arc::new(Database::generate(&params.field(), 1, 4, 1, 0).unwrap());
        let live = TcpServer::bind(db, "127.0.0.1:0").unwrap();
        let transport = TcpTransport::new(vec![live.local_addr(), addr]).with_timeout(Duration::from_secs(2));
        let err = retrieve(&params, ThetaIndex(1), &transport, &mut PlanRng::seeded(0)).unwrap_err();
        assert!(matches!(err, Error::Transport(_)));
    }
}
