//! One FIFO worker pool per annotated method.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crossbeam_channel::{unbounded, Sender};

use super::future::FutureRef;
use super::interp::{execute, Env, Linked, SpawnOutcome};
use super::trap::Trap;
use super::value::Value;
use crate::il::{GlobalId, MethodId};

pub(crate) struct Task {
    pub method: MethodId,
    pub args: Vec<Value>,
    pub future: FutureRef,
    pub enqueued: Instant,
}

/// Counters shared between a pool's workers and the runtime.
#[derive(Default)]
pub(crate) struct PoolCounters {
    /// Workers currently inside a task.
    pub running: AtomicUsize,
    pub peak: AtomicUsize,
    /// Workers that have not exited yet.
    pub live: Arc<AtomicUsize>,
    pub spawned: AtomicU64,
    pub task_times: Mutex<Vec<Duration>>,
    pub queue_waits: Mutex<Vec<Duration>>,
    pub cancelled: AtomicBool,
}

/// Workers are started on the first spawn and stopped by [`WorkerPool::shutdown`].
pub(crate) struct WorkerPool {
    name: String,
    workers: usize,
    linked: Arc<Linked>,
    sender: Option<Sender<Task>>,
    handles: Vec<JoinHandle<()>>,
    pub counters: Arc<PoolCounters>,
}

impl WorkerPool {
    pub fn new(name: String, workers: usize, linked: Arc<Linked>) -> Self {
        Self { name, workers, linked, sender: None, handles: Vec::new(), counters: Arc::default() }
    }

    /// Enqueues a task and returns its (empty) future right away.
    pub fn spawn(&mut self, method: MethodId, args: Vec<Value>) -> Result<FutureRef, Trap> {
        if self.sender.is_none() {
            self.start()?;
        }
        let future = FutureRef::with_producers(Some(self.counters.live.clone()));
        let task = Task { method, args, future: future.clone(), enqueued: Instant::now() };
        self.sender.as_ref().expect("started").send(task).map_err(|_| Trap::PoolShutdown)?;
        self.counters.spawned.fetch_add(1, Ordering::Relaxed);
        Ok(future)
    }

    fn start(&mut self) -> Result<(), Trap> {
        let (tx, rx) = unbounded::<Task>();
        for i in 0..self.workers {
            let rx = rx.clone();
            let linked = self.linked.clone();
            let counters = self.counters.clone();
            counters.live.fetch_add(1, Ordering::AcqRel);
            let handle = thread::Builder::new().name(format!("pal-{}-{i}", self.name)).spawn(move || {
                while let Ok(task) = rx.recv() {
                    run_task(&linked, &counters, task);
                }
                counters.live.fetch_sub(1, Ordering::AcqRel);
            });
            match handle {
                Ok(h) => self.handles.push(h),
                Err(e) => {
                    self.counters.live.fetch_sub(1, Ordering::AcqRel);
                    log::error!("could not start worker thread: {e}");
                    if self.handles.is_empty() {
                        return Err(Trap::PoolShutdown);
                    }
                    break;
                }
            }
        }
        self.sender = Some(tx);
        Ok(())
    }

    /// Closes the queue and waits for the workers. With `cancel`, tasks
    /// still queued are failed with [`Trap::PoolShutdown`] instead of run.
    pub fn shutdown(&mut self, cancel: bool) {
        if cancel {
            self.counters.cancelled.store(true, Ordering::Release);
        }
        self.sender = None;
        for h in self.handles.drain(..) {
            let _ = h.join();
        }
    }
}

impl Drop for WorkerPool {
    fn drop(&mut self) {
        self.shutdown(true);
    }
}

fn run_task(linked: &Linked, counters: &PoolCounters, task: Task) {
    if counters.cancelled.load(Ordering::Acquire) {
        let _ = task.future.fill(Err(Trap::PoolShutdown));
        return;
    }
    let waited = task.enqueued.elapsed();
    let now = counters.running.fetch_add(1, Ordering::AcqRel) + 1;
    counters.peak.fetch_max(now, Ordering::AcqRel);
    let started = Instant::now();

    let result = execute(linked, &mut TaskEnv, task.method, task.args)
        .map_err(|info| Trap::TaskTrapped(Box::new(info)))
        .and_then(|v| match v {
            // Same shape as the inline path, which never nests futures.
            Value::Future(f) => f.touch(),
            v => Ok(v),
        });

    let elapsed = started.elapsed();
    counters.running.fetch_sub(1, Ordering::AcqRel);
    lock(&counters.task_times).push(elapsed);
    lock(&counters.queue_waits).push(waited);
    let _ = task.future.fill(result);
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

/// Environment of code running inside a task: no globals, no spawning.
struct TaskEnv;

impl Env for TaskEnv {
    const IS_TASK: bool = true;

    fn get_static(&mut self, _: GlobalId) -> Result<Value, Trap> {
        Err(Trap::GlobalAccessInTask)
    }

    fn put_static(&mut self, _: GlobalId, _: Value) -> Result<(), Trap> {
        Err(Trap::GlobalAccessInTask)
    }

    fn spawn(&mut self, _: MethodId, _: Vec<Value>) -> Result<SpawnOutcome, Trap> {
        Err(Trap::SpawnInTask)
    }

    fn touch(&mut self, future: &FutureRef) -> Result<Value, Trap> {
        future.touch()
    }
}
