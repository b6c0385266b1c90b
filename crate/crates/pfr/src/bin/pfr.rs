use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pfr::audit::{audit_statistical, audit_theta_invariance};
use pfr::rates::{rows_to_csv, rows_to_json, RateReport};
use pfr::{
    retrieve, Database, Error, FieldSpec, InMemoryTransport, LoopbackCluster, PlanRng, Result, SchemeKind,
    SchemeParams, TcpServer, TcpTransport, ThetaIndex, Transport,
};

const AUDIT_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "pfr", version, about = "Private function retrieval over replicated servers")]
struct Cli {
    /// Seed for every random choice; omit for OS entropy.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
    Toml,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random database in PFRD format.
    GenDb {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer queries over TCP until killed.
    Serve {
        #[arg(long)]
        db: PathBuf,
        #[arg(long, default_value = "127.0.0.1:7070")]
        listen: String,
    },
    /// Retrieve one function privately.
    Retrieve {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 1)]
        theta: usize,
        /// Comma-separated host:port list, one per server.
        #[arg(long, value_delimiter = ',', conflicts_with = "simulate", required_unless_present = "simulate")]
        servers: Vec<String>,
        /// Run the servers in this process over a generated database.
        #[arg(long)]
        simulate: bool,
        /// Symbols per layer of the simulated database.
        #[arg(long, default_value_t = 4)]
        s: usize,
        /// Local copy of the database, to check the result against.
        #[arg(long)]
        db: Option<PathBuf>,
    },
    /// Check that no server's view depends on theta.
    Audit {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Also run a position-frequency test over this many random plans.
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        theta: usize,
    },
    /// Exact rates against capacity and baselines.
    Rates {
        #[arg(long, value_enum, default_value_t = SchemeKind::General)]
        scheme: SchemeKind,
        #[arg(long, default_value_t = 1)]
        k_min: usize,
        #[arg(long, default_value_t = 6)]
        k_max: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 6)]
        digits: usize,
    },
    /// Time end-to-end retrievals against loopback servers.
    Bench {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 1)]
        theta: usize,
        #[arg(long, default_value_t = 16)]
        s: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, value_enum, default_value_t = Link::Tcp)]
        link: Link,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Link {
    Tcp,
    Memory,
}

#[derive(Args)]
struct SchemeArgs {
    #[arg(long, value_enum, default_value_t = SchemeKind::Binary)]
    scheme: SchemeKind,
    /// Number of servers.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Number of files.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    p: u32,
    #[arg(long, default_value_t = 1)]
    m: u32,
}

impl SchemeArgs {
    fn params(&self) -> Result<SchemeParams> {
        scheme_params(self.scheme, self.n, self.k, self.p, self.m)
    }
}

fn scheme_params(kind: SchemeKind, n: usize, k: usize, p: u32, m: u32) -> Result<SchemeParams> {
    match kind {
        SchemeKind::Binary if n != 2 || p != 2 || m != 1 => {
            Err(Error::InvalidParameter("the binary scheme is fixed to N = 2 over GF(2)".into()))
        }
        SchemeKind::Binary => SchemeParams::binary(k),
        SchemeKind::General => SchemeParams::general(n, k, p, m),
    }
}

fn rng(seed: Option<u64>) -> PlanRng {
    seed.map_or_else(PlanRng::from_entropy, PlanRng::seeded)
}

/// Prints one record (text as `key: value` lines).
fn emit<T: Serialize>(format: Format, record: &T) -> Result<()> {
    emit_rows(format, std::slice::from_ref(record))
}

fn emit_rows<T: Serialize>(format: Format, rows: &[T]) -> Result<()> {
    let internal = |e: &dyn std::fmt::Display| Error::Internal(e.to_string());
    match format {
        Format::Json => {
            let out = if rows.len() == 1 {
                serde_json::to_string_pretty(&rows[0])
            } else {
                serde_json::to_string_pretty(rows)
            };
            println!("{}", out.map_err(|e| internal(&e))?);
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in rows {
                w.serialize(r).map_err(|e| internal(&e))?;
            }
            w.flush()?;
        }
        Format::Toml => {
            #[derive(Serialize)]
            struct Doc<'a, T> {
                rows: &'a [T],
            }
            print!("{}", toml::to_string(&Doc { rows }).map_err(|e| internal(&e))?);
        }
        Format::Text => {
            for r in rows {
                let value = serde_json::to_value(r).map_err(|e| internal(&e))?;
                if let serde_json::Value::Object(map) = value {
                    for (k, v) in map {
                        match v {
                            serde_json::Value::String(s) => println!("{k}: {s}"),
                            other => println!("{k}: {other}"),
                        }
                    }
                }
                if rows.len() > 1 {
                    println!();
                }
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct GenDbSummary {
    path: String,
    field_order: u32,
    files: usize,
    layers: usize,
    record_len: usize,
    bytes: usize,
    seed: u64,
}

#[derive(Serialize)]
struct RetrieveSummary {
    scheme: String,
    theta: usize,
    theta_vector: String,
    digest: String,
    layers: usize,
    downloads: usize,
    download_elements: usize,
    rate: String,
    upload_bytes: usize,
    download_bytes: usize,
    framing_bytes: usize,
    elapsed_ms: f64,
    /// Empty when no local copy was available to compare with.
    oracle_match: String,
}

#[derive(Serialize)]
struct BenchRow {
    rep: usize,
    scheme: String,
    link: &'static str,
    theta: usize,
    downloads: usize,
    download_elements: usize,
    upload_bytes: usize,
    download_bytes: usize,
    elapsed_ms: f64,
}

#[derive(Serialize)]
struct ServerRow {
    server: usize,
    requests: usize,
    layers_touched: usize,
    request_kinds: usize,
    zero_coefficient_terms: usize,
    invariant: bool,
}

fn run(cli: Cli) -> Result<u8> {
    let format = cli.format;
    match cli.command {
        Command::GenDb { p, m, k, l, s, out } => {
            let seed = cli.seed.unwrap_or_else(rand::random);
            let field = FieldSpec::new(p, m)?;
            let db = Database::generate(&field, k, l, s, seed)?;
            let bytes = db.to_bytes()?;
            std::fs::write(&out, &bytes)?;
            emit(
                format,
                &GenDbSummary {
                    path: out.display().to_string(),
                    field_order: field.order(),
                    files: k,
                    layers: l,
                    record_len: s,
                    bytes: bytes.len(),
                    seed,
                },
            )?;
        }
        Command::Serve { db, listen } => {
            let db = Arc::new(Database::load(&db)?);
            let server = TcpServer::bind(db, listen.as_str())
                .map_err(|e| Error::Transport(format!("cannot listen on {listen}: {e}")))?;
            eprintln!("listening on {}", server.local_addr());
            server.wait();
        }
        Command::Retrieve { scheme, theta, servers, simulate, s, db } => {
            let params = scheme.params()?;
            let mut rng = rng(cli.seed);
            let local = match (&db, simulate) {
                (Some(path), _) => Some(Arc::new(Database::load(path)?)),
                (None, true) => {
                    let layers = usize::try_from(params.layers())
                        .map_err(|_| Error::InvalidParameter("too many layers to simulate".into()))?;
                    let seed = cli.seed.unwrap_or_else(rand::random);
                    Some(Arc::new(Database::generate(&params.field(), params.files(), layers, s, seed)?))
                }
                (None, false) => None,
            };
            let transport: Box<dyn Transport> = if simulate {
                let db = local.clone().expect("simulated database");
                Box::new(InMemoryTransport::replicated(db, params.servers()))
            } else {
                Box::new(TcpTransport::resolve(&servers)?)
            };
            let r = retrieve(&params, ThetaIndex(theta), transport.as_ref(), &mut rng)?;
            let oracle_match = match &local {
                Some(db) => (db.oracle(&r.plan.theta_vector())? == r.stream).to_string(),
                None => String::new(),
            };
            let t = &r.transcript;
            emit(
                format,
                &RetrieveSummary {
                    scheme: params.to_string(),
                    theta,
                    theta_vector: r.plan.theta_vector().to_string(),
                    digest: r.stream.digest(),
                    layers: r.plan.layers(),
                    downloads: t.answer_records(),
                    download_elements: t.answer_elements(),
                    rate: RateReport::for_params(&params)?.row(6).rate,
                    upload_bytes: t.upload_bytes(),
                    download_bytes: t.download_bytes(),
                    framing_bytes: t.framing_bytes(),
                    elapsed_ms: t.elapsed.as_secs_f64() * 1e3,
                    oracle_match: oracle_match.clone(),
                },
            )?;
            if oracle_match == "false" {
                return Err(Error::Internal("decoded stream differs from the local database".into()));
            }
        }
        Command::Audit { scheme, trials, theta } => {
            let params = scheme.params()?;
            let seed = cli.seed.unwrap_or(0);
            let report = audit_theta_invariance(&params, seed)?;
            let stats =
                if trials > 0 { Some(audit_statistical(&params, ThetaIndex(theta), trials, seed)?) } else { None };
            match format {
                Format::Text => {
                    print!("{}", report.to_text());
                    if let Some(s) = &stats {
                        print!("{}", s.to_text());
                    }
                }
                Format::Toml => {
                    print!("{}", report.to_toml());
                    if let Some(s) = &stats {
                        println!("\n[statistical]");
                        print!("{}", s.to_toml());
                    }
                }
                Format::Json => {
                    let doc = serde_json::json!({ "structural": report, "statistical": stats });
                    println!("{}", serde_json::to_string_pretty(&doc).map_err(|e| Error::Internal(e.to_string()))?);
                }
                Format::Csv => {
                    let rows: Vec<ServerRow> = report
                        .server_summaries
                        .iter()
                        .map(|s| ServerRow {
                            server: s.server,
                            requests: s.requests,
                            layers_touched: s.layers_touched,
                            request_kinds: s.request_kinds,
                            zero_coefficient_terms: s.zero_coefficient_terms,
                            invariant: s.invariant,
                        })
                        .collect();
                    emit_rows(format, &rows)?;
                }
            }
            if !report.passed {
                return Ok(AUDIT_FAILED);
            }
        }
        Command::Rates { scheme, k_min, k_max, n, p, m, digits } => {
            if k_min == 0 || k_min > k_max {
                return Err(Error::InvalidParameter(format!("bad K range {k_min}..={k_max}")));
            }
            let rows = (k_min..=k_max)
                .map(|k| Ok(RateReport::for_params(&scheme_params(scheme, n, k, p, m)?)?.row(digits)))
                .collect::<Result<Vec<_>>>()?;
            match format {
                Format::Csv => print!("{}", rows_to_csv(&rows)?),
                Format::Json => println!("{}", rows_to_json(&rows)?),
                _ => emit_rows(format, &rows)?,
            }
        }
        Command::Bench { scheme, theta, s, reps, link } => {
            let params = scheme.params()?;
            let seed = cli.seed.unwrap_or_else(rand::random);
            let layers = usize::try_from(params.layers())
                .map_err(|_| Error::InvalidParameter("too many layers to bench".into()))?;
            let db = Arc::new(Database::generate(&params.field(), params.files(), layers, s, seed)?);
            let expected = db.oracle(&params.space().canonical(ThetaIndex(theta))?)?;
            let cluster;
            let transport: Box<dyn Transport> = match link {
                Link::Tcp => {
                    cluster = LoopbackCluster::start(Arc::clone(&db), params.servers())?;
                    Box::new(cluster.transport())
                }
                Link::Memory => Box::new(InMemoryTransport::replicated(Arc::clone(&db), params.servers())),
            };
            let mut rng = PlanRng::seeded(seed);
            let mut rows = Vec::with_capacity(reps);
            for rep in 0..reps {
                let started = Instant::now();
                let r = retrieve(&params, ThetaIndex(theta), transport.as_ref(), &mut rng)?;
                let elapsed = started.elapsed();
                if r.stream != expected {
                    return Err(Error::Internal(format!("repetition {rep} decoded the wrong stream")));
                }
                let t = &r.transcript;
                rows.push(BenchRow {
                    rep,
                    scheme: params.to_string(),
                    link: if link == Link::Tcp { "tcp" } else { "memory" },
                    theta,
                    downloads: t.answer_records(),
                    download_elements: t.answer_elements(),
                    upload_bytes: t.upload_bytes(),
                    download_bytes: t.download_bytes(),
                    elapsed_ms: elapsed.as_secs_f64() * 1e3,
                });
            }
            emit_rows(format, &rows)?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
