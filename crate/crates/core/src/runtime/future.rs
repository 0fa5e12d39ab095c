//! Single-assignment result cells with blocking reads.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex, OnceLock};
use std::time::Duration;

use super::trap::Trap;
use super::value::Value;

/// How long a blocked `touch` sleeps before re-checking that somebody can
/// still fill the future.
const LIVENESS_POLL: Duration = Duration::from_millis(100);

struct Cell {
    slot: OnceLock<Result<Value, Trap>>,
    lock: Mutex<()>,
    filled: Condvar,
    /// Live worker count of the pool that owns the producing task.
    producers: Option<Arc<AtomicUsize>>,
}

/// Handle to a future. Clones share the same cell.
///
/// The cell goes from empty to filled exactly once. Reading a filled cell
/// never blocks and always yields the same value.
#[derive(Clone)]
pub struct FutureRef(Arc<Cell>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("future is already filled")]
pub struct AlreadyFilled;

impl FutureRef {
    pub fn empty() -> Self {
        Self::with_producers(None)
    }

    pub(crate) fn with_producers(producers: Option<Arc<AtomicUsize>>) -> Self {
        Self(Arc::new(Cell { slot: OnceLock::new(), lock: Mutex::new(()), filled: Condvar::new(), producers }))
    }

    pub fn filled(value: Value) -> Self {
        let f = Self::empty();
        let _ = f.0.slot.set(Ok(value));
        f
    }

    pub fn fill(&self, result: Result<Value, Trap>) -> Result<(), AlreadyFilled> {
        self.0.slot.set(result).map_err(|_| AlreadyFilled)?;
        // Taking the lock orders this notify after any waiter's last check.
        drop(self.0.lock.lock().unwrap_or_else(|e| e.into_inner()));
        self.0.filled.notify_all();
        Ok(())
    }

    pub fn is_filled(&self) -> bool {
        self.0.slot.get().is_some()
    }

    /// Non-blocking read.
    pub fn try_get(&self) -> Option<Result<Value, Trap>> {
        self.0.slot.get().cloned()
    }

    /// Blocks until the future is filled and returns its content. A trap in
    /// the producing task comes back as [`Trap::TaskTrapped`].
    pub fn touch(&self) -> Result<Value, Trap> {
        if let Some(r) = self.0.slot.get() {
            return r.clone();
        }
        let mut guard = self.0.lock.lock().unwrap_or_else(|e| e.into_inner());
        loop {
            if let Some(r) = self.0.slot.get() {
                return r.clone();
            }
            let (g, timeout) = self.0.filled.wait_timeout(guard, LIVENESS_POLL).unwrap_or_else(|e| e.into_inner());
            guard = g;
            if timeout.timed_out() && self.0.slot.get().is_none() {
                if let Some(live) = &self.0.producers {
                    if live.load(Ordering::Acquire) == 0 {
                        return Err(Trap::DeadlockDetected);
                    }
                }
            }
        }
    }

    pub fn ptr_eq(&self, other: &FutureRef) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl fmt::Debug for FutureRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.slot.get() {
            Some(r) => f.debug_tuple("Filled").field(r).finish(),
            None => f.write_str("Empty"),
        }
    }
}
