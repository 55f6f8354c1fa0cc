use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::Parser;
use de_core::model::{parse_demands, parse_topology, Topology, TrafficMatrix};
use de_service::{router, AppState, DecisionLog, ServiceConfig, ServiceOptions};
use tracing_subscriber::EnvFilter;

/// Demand-engineering placement service.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// TOML config file; `DE_*` environment variables override it.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Validate the config and inputs, then exit.
    #[arg(long)]
    check: bool,
}

fn load_inputs(cfg: &ServiceConfig) -> Result<(Arc<Topology>, TrafficMatrix)> {
    let path = cfg
        .topology
        .as_ref()
        .context("no topology configured (set `topology` or DE_TOPOLOGY)")?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let topo = parse_topology(&text).with_context(|| format!("parsing {}", path.display()))?;
    let matrix = match &cfg.demands {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_demands(&text, &topo).with_context(|| format!("parsing {}", p.display()))?
        }
        None => TrafficMatrix::new(),
    };
    Ok((Arc::new(topo), matrix))
}

async fn run(args: Args) -> Result<()> {
    let cfg = ServiceConfig::load(args.config.as_deref(), |k| std::env::var(k).ok())?;
    let (topo, matrix) = load_inputs(&cfg)?;
    for w in topo.warnings() {
        tracing::warn!("{w}");
    }
    let log = cfg
        .decision_log
        .as_deref()
        .map(DecisionLog::open)
        .transpose()?;
    if args.check {
        println!(
            "ok: {} nodes, {} circuits, {} demands, {} logged decisions",
            topo.node_count(),
            topo.circuit_count(),
            matrix.len(),
            log.as_ref().map_or(0, |(_, r)| r.len())
        );
        return Ok(());
    }

    let state = AppState::new(ServiceOptions {
        strict_json: cfg.strict_json,
        lock_timeout: cfg.lock_timeout(),
        wcpu_reading: cfg.wcpu_reading,
        state_spec: cfg.state_spec()?,
    });
    state.load(topo, matrix, log).await?;
    let listener = tokio::net::TcpListener::bind(cfg.listen)
        .await
        .with_context(|| format!("binding {}", cfg.listen))?;
    tracing::info!(addr = %cfg.listen, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Args::parse()).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
