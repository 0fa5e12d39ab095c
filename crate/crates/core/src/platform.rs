use std::fmt;
use std::num::NonZeroU32;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PlatformSource {
    Detected,
    Overridden,
}

/// Processor facts the transformer and the runtime base their decisions on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PlatformInfo {
    cores: NonZeroU32,
    source: PlatformSource,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("core count must be at least 1")]
pub struct ZeroCores;

impl PlatformInfo {
    /// Logical processors visible to this process. Hyper-threads count.
    pub fn detect() -> Self {
        let cores = match std::thread::available_parallelism() {
            Ok(n) => NonZeroU32::new(u32::try_from(n.get()).unwrap_or(u32::MAX)).unwrap_or(NonZeroU32::MIN),
            Err(e) => {
                log::warn!("processor count unavailable ({e}); assuming 1 core");
                NonZeroU32::MIN
            }
        };
        Self { cores, source: PlatformSource::Detected }
    }

    pub fn overridden(cores: u32) -> Result<Self, ZeroCores> {
        let cores = NonZeroU32::new(cores).ok_or(ZeroCores)?;
        Ok(Self { cores, source: PlatformSource::Overridden })
    }

    /// The override when one is given, detection otherwise.
    pub fn resolve(cores_override: Option<u32>) -> Result<Self, ZeroCores> {
        match cores_override {
            Some(n) => Self::overridden(n),
            None => Ok(Self::detect()),
        }
    }

    pub fn cores(&self) -> u32 {
        self.cores.get()
    }

    pub fn source(&self) -> PlatformSource {
        self.source
    }
}

impl fmt::Display for PlatformInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let how = match self.source {
            PlatformSource::Detected => "detected",
            PlatformSource::Overridden => "override",
        };
        write!(f, "{} cores ({how})", self.cores)
    }
}
