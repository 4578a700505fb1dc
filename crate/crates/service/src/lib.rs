//! HTTP API over the analyses, with one revisable problem per session.

mod http;
mod session;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use http::{router, ApiError};
pub use session::{
    ComparisonEdit, Revision, RevisionSummary, Session, SessionSnapshot, SessionStore, SessionSummary,
};

#[derive(Debug, Clone, Default)]
pub struct ServeOptions {
    pub port: u16,
    /// Sessions are restored from this file at start-up and written back on shutdown.
    pub snapshot: Option<PathBuf>,
}

fn load(path: &Path) -> std::io::Result<SessionStore> {
    if !path.exists() {
        return Ok(SessionStore::new());
    }
    let text = std::fs::read_to_string(path)?;
    let snaps: Vec<SessionSnapshot> = serde_json::from_str(&text).map_err(std::io::Error::other)?;
    SessionStore::restore(snaps).map_err(std::io::Error::other)
}

fn save(path: &Path, store: &SessionStore) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(&store.snapshot()).map_err(std::io::Error::other)?;
    std::fs::write(path, text)
}

/// Serves on an already bound listener until ctrl-c.
pub async fn serve(listener: tokio::net::TcpListener, options: ServeOptions) -> std::io::Result<()> {
    let store = Arc::new(match &options.snapshot {
        Some(p) => load(p)?,
        None => SessionStore::new(),
    });
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(store.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    if let Some(p) = &options.snapshot {
        save(p, &store)?;
    }
    Ok(())
}

/// Blocking entry point used by the command-line tool.
pub fn run(options: ServeOptions) -> std::io::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let addr = SocketAddr::from(([127, 0, 0, 1], options.port));
        let listener = tokio::net::TcpListener::bind(addr).await?;
        serve(listener, options).await
    })
}
