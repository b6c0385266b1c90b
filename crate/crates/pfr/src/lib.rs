//! Private function retrieval.
//!
//! A user holds no data; `N` non-communicating servers each store the same
//! `K` files, split into `L` layers of `S` symbols over GF(q). The user
//! wants the linear combination `v^T W[t]` for every layer `t`, with `v`
//! one of the `(q^K-1)/(q-1)` projective directions, and no single server
//! may learn which one.
//!
//! - [`binary`]: the two-server GF(2) scheme.
//! - [`general`]: the `N`-server GF(q) scheme, `q >= N`.
//! - [`scheme`]: a common front over both.
//! - [`server`], [`wire`], [`transport`]: answering, framing, delivery.
//! - [`audit`]: structural and statistical privacy checks.
//! - [`rates`]: exact rates and baselines.

pub mod audit;
pub mod binary;
pub mod database;
pub mod error;
pub mod field;
pub mod general;
pub mod linalg;
pub mod projspace;
pub mod query;
pub mod rates;
pub mod scheme;
pub mod server;
pub mod transport;
pub mod wire;

pub use database::{Database, DecodedStream};
pub use error::{CodecError, Error, Result};
pub use field::{FieldElement, FieldSpec};
pub use projspace::{CoeffVector, ThetaIndex, TupleSpace, VectorSpace};
pub use query::{Answer, PlanRng, Query, Request, Term};
pub use scheme::{Plan, SchemeKind, SchemeParams};
pub use transport::{retrieve, InMemoryTransport, LoopbackCluster, Retrieval, TcpServer, TcpTransport, Transport};
