use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use embias::catalog::DATA_DIR_ENV;

#[derive(Debug, Clone)]
pub struct Config {
    pub bind: IpAddr,
    pub port: u16,
    /// Largest accepted upload request body, in bytes.
    pub upload_cap: usize,
    /// Lifetime of uploaded and derived spaces.
    pub ttl: Duration,
    /// Combined in-memory size allowed for uploaded and derived spaces.
    pub memory_cap: usize,
    /// Maximum number of concurrent compute tasks.
    pub workers: usize,
    pub data_dir: PathBuf,
    /// Load every bundled space at startup instead of on first use.
    pub preload: bool,
    /// Debias requests on spaces with more rows than this run as jobs.
    pub async_rows: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: 8080,
            upload_cap: 256 * 1024 * 1024,
            ttl: Duration::from_secs(3600),
            memory_cap: 2 * 1024 * 1024 * 1024,
            workers: std::thread::available_parallelism().map_or(4, |n| n.get()),
            data_dir: PathBuf::from("data"),
            preload: false,
            async_rows: 50_000,
        }
    }
}

fn env_parse<T: FromStr>(key: &str) -> Result<Option<T>, String> {
    match std::env::var(key) {
        Ok(v) => v.parse().map(Some).map_err(|_| format!("{key}: cannot parse {v:?}")),
        Err(_) => Ok(None),
    }
}

impl Config {
    /// Defaults overridden by `EMBIAS_*` environment variables.
    pub fn from_env() -> Result<Self, String> {
        let mut c = Config::default();
        if let Some(v) = env_parse("EMBIAS_BIND")? {
            c.bind = v;
        }
        if let Some(v) = env_parse("EMBIAS_PORT")? {
            c.port = v;
        }
        if let Some(v) = env_parse("EMBIAS_UPLOAD_CAP")? {
            c.upload_cap = v;
        }
        if let Some(v) = env_parse("EMBIAS_TTL_SECS")? {
            c.ttl = Duration::from_secs(v);
        }
        if let Some(v) = env_parse("EMBIAS_MEMORY_CAP")? {
            c.memory_cap = v;
        }
        if let Some(v) = env_parse::<usize>("EMBIAS_WORKERS")? {
            c.workers = v.max(1);
        }
        if let Some(v) = env_parse(DATA_DIR_ENV)? {
            c.data_dir = v;
        }
        if let Some(v) = env_parse("EMBIAS_PRELOAD")? {
            c.preload = v;
        }
        Ok(c)
    }

    pub fn addr(&self) -> SocketAddr {
        SocketAddr::new(self.bind, self.port)
    }
}
