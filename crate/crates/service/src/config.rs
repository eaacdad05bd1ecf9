use std::net::SocketAddr;
use std::path::PathBuf;

use crate::error::ServiceError;

pub const ADDR_ENV: &str = "CITYKPI_ADDR";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    /// CSV or canonical JSON loaded at startup.
    pub dataset_path: Option<PathBuf>,
    pub models_dir: PathBuf,
    pub default_seed: u64,
    pub default_test_fraction: f64,
    /// `None` allows any origin.
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            dataset_path: None,
            models_dir: PathBuf::from("models"),
            default_seed: 0,
            default_test_fraction: 0.3,
            cors_origin: None,
        }
    }
}

impl ServiceConfig {
    /// Applies `CITYKPI_ADDR` when it is set.
    pub fn with_env(mut self) -> Result<Self, ServiceError> {
        if let Ok(addr) = std::env::var(ADDR_ENV) {
            self.addr = parse_addr(&addr)?;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        if self.addr.port() == 0 {
            return Err(ServiceError::Config("port must be in 1-65535".into()));
        }
        if !(self.default_test_fraction > 0.0 && self.default_test_fraction < 1.0) {
            return Err(ServiceError::Config("default test fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

pub fn parse_addr(text: &str) -> Result<SocketAddr, ServiceError> {
    text.parse().map_err(|_| ServiceError::Config(format!("invalid listen address {text:?}")))
}
