use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use adsk_api::config::{append_token, ApiConfig};
use adsk_api::AppState;
use adsk_core::corpus::{load_corpus, validate_corpus};
use adsk_core::{parse, Catalog, QueryError};
use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "adsk", version, about = "Desk-scale bibliographic search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a corpus, index it and write a snapshot.
    Build {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        readership: Option<PathBuf>,
        #[arg(long)]
        synonyms: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one query against a snapshot.
    Query {
        #[arg(long)]
        index: PathBuf,
        query: String,
        #[arg(long, default_value_t = 10)]
        rows: usize,
        #[arg(long, value_enum, default_value_t = Format::Lines)]
        format: Format,
    },
    /// Serve the HTTP API.
    Serve {
        /// Snapshot to serve; without it the corpus named in the config is indexed at startup.
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long, env = "ADSK_CONFIG")]
        config: PathBuf,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Add a new API token to a config file and print it.
    Token {
        #[arg(long, env = "ADSK_CONFIG")]
        config: PathBuf,
        #[arg(long = "new", value_name = "CLIENT_NAME")]
        client_name: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// Aligned columns with a header.
    Table,
    /// One `bibcode<TAB>score` line per hit.
    Lines,
    /// One JSON object per hit.
    Objects,
}

/// Failure with the exit code it maps to.
enum Failure {
    Env(anyhow::Error),
    Query { input: String, error: QueryError },
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Env(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build {
            records,
            readership,
            synonyms,
            out,
        } => {
            build(&records, readership.as_deref(), synonyms.as_deref(), &out).map_err(Failure::from)
        }
        Command::Query {
            index,
            query,
            rows,
            format,
        } => run_query(&index, &query, rows, format),
        Command::Serve {
            index,
            config,
            port,
            host,
        } => serve(index.as_deref(), &config, port, &host).map_err(Failure::from),
        Command::Token {
            config,
            client_name,
        } => token(&config, &client_name).map_err(Failure::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Env(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Query { input, error }) => {
            eprintln!("error: {error}");
            if let Some(pos) = error.position() {
                eprintln!("  {input}");
                eprintln!("  {}^", " ".repeat(pos));
            }
            ExitCode::from(2)
        }
    }
}

fn build(
    records: &Path,
    readership: Option<&Path>,
    synonyms: Option<&Path>,
    out: &Path,
) -> anyhow::Result<()> {
    let corpus = load_corpus(records, readership, synonyms)
        .with_context(|| format!("loading corpus from {}", records.display()))?;
    let report = validate_corpus(&corpus);
    if !report.dangling_references.is_empty() {
        eprintln!(
            "note: {} referenced bibcodes are not in the corpus",
            report.dangling_references.len()
        );
    }
    if !report.unknown_readership.is_empty() {
        eprintln!(
            "note: {} readership events name unknown bibcodes",
            report.unknown_readership.len()
        );
    }
    let n = corpus.len();
    let catalog = Catalog::build(corpus);
    catalog
        .save(out)
        .with_context(|| format!("writing snapshot {}", out.display()))?;
    println!("indexed {n} records");
    Ok(())
}

fn run_query(index: &Path, input: &str, rows: usize, format: Format) -> Result<(), Failure> {
    let catalog =
        Catalog::load(index).with_context(|| format!("loading snapshot {}", index.display()))?;
    let node = parse(input).map_err(|error| Failure::Query {
        input: input.to_string(),
        error,
    })?;
    let config = adsk_core::ExecConfig::default();
    let page = catalog
        .executor(&config)
        .execute(&node, rows, 0)
        .context("running query")?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let written: io::Result<()> = (|| {
        match format {
            Format::Lines => {
                for d in &page.docs {
                    writeln!(out, "{}\t{:.6}", d.bibcode, d.score)?;
                }
            }
            Format::Table => {
                let width = page
                    .docs
                    .iter()
                    .map(|d| d.bibcode.len())
                    .max()
                    .unwrap_or(0)
                    .max(7);
                writeln!(out, "{:>4}  {:<width$}  {:>10}", "rank", "bibcode", "score")?;
                for (i, d) in page.docs.iter().enumerate() {
                    writeln!(
                        out,
                        "{:>4}  {:<width$}  {:>10.4}",
                        i + 1,
                        d.bibcode,
                        d.score
                    )?;
                }
                writeln!(out, "{} of {} shown", page.docs.len(), page.num_found)?;
            }
            Format::Objects => {
                for d in &page.docs {
                    let line = serde_json::to_string(d).map_err(io::Error::other)?;
                    writeln!(out, "{line}")?;
                }
            }
        }
        Ok(())
    })();
    written.context("writing results")?;
    Ok(())
}

fn serve(
    index: Option<&Path>,
    config_path: &Path,
    port: Option<u16>,
    host: &str,
) -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_writer(io::stderr)
        .with_target(false)
        .init();
    let config = ApiConfig::load(config_path)?;
    let catalog = match index {
        Some(p) => Catalog::load(p).with_context(|| format!("loading snapshot {}", p.display()))?,
        None => config.build_catalog()?,
    };
    if config.tokens.is_empty() {
        eprintln!("note: no tokens configured; every request will be refused (see `adsk token`)");
    }
    let state = Arc::new(AppState::new(catalog, &config)?);
    let port = port.unwrap_or(config.port);
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .with_context(|| format!("bad listen address {host}:{port}"))?;
    let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("cannot bind {addr}"))?;
        eprintln!("listening on {}", listener.local_addr()?);
        adsk_api::serve(listener, state).await?;
        bail!("server stopped")
    })
}

fn token(config: &Path, client_name: &str) -> anyhow::Result<()> {
    let token = append_token(config, client_name)?;
    println!("{token}");
    Ok(())
}
