//! HTTP service around the `embias` engine.
//!
//! Spaces live in an in-memory registry. Bundled spaces come from the data
//! directory and are read on first use; uploads and debiasing results expire
//! after a TTL. Engine calls run on a bounded pool of blocking workers.

mod config;
mod error;
mod jobs;
mod openapi;
mod registry;
mod routes;

use std::sync::Arc;

use embias::metrics::SimilarityDataset;
use embias::DataDir;
use tokio::net::TcpListener;
use tokio::sync::Semaphore;

pub use config::Config;
pub use error::ApiError;
pub use jobs::{JobKind, JobRecord, JobState};
pub use registry::{builtin_id, Origin, SpaceHandle};

pub struct AppState {
    pub config: Config,
    registry: registry::Registry,
    jobs: jobs::JobStore,
    pool: Semaphore,
    sq_datasets: Vec<SimilarityDataset>,
}

impl AppState {
    /// Scans the data directory and sets up empty registries.
    pub fn new(config: Config) -> embias::Result<Self> {
        let data = DataDir::new(&config.data_dir);
        let registry = registry::Registry::new(data.spaces()?, config.ttl, config.memory_cap);
        if config.preload {
            registry.preload().map_err(|e| embias::Error::Format(e.message))?;
        }
        Ok(Self {
            registry,
            jobs: jobs::JobStore::default(),
            pool: Semaphore::new(config.workers.max(1)),
            sq_datasets: data.similarity_datasets()?,
            config,
        })
    }
}

pub fn app(state: Arc<AppState>) -> axum::Router {
    routes::router(state)
}

/// Serves until the listener fails or the task is dropped.
pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, app(state)).await
}
