//! Execution of IL programs.
//!
//! The main thread of control interprets the entry method. Each annotated
//! method owns a FIFO pool of `min(par_degree, cores)` workers that execute
//! its `SPAWN`ed tasks; the caller gets a [`FutureRef`] back immediately and
//! only blocks when it `TOUCH`es a future whose task has not finished.

mod future;
mod interp;
mod ops;
mod pool;
mod stats;
mod trap;
mod value;

use std::path::PathBuf;
use std::sync::atomic::Ordering;
use std::time::{Duration, Instant};

pub use future::{AlreadyFilled, FutureRef};
pub use stats::{ExecutionStats, MethodStats};
pub use trap::{Trap, TrapInfo};
pub use value::{ArrayRef, Value};

use crate::diag::{has_errors, Diagnostic};
use crate::il::{validate_program, GlobalId, MethodId, Program};
use crate::platform::{PlatformInfo, ZeroCores};
use crate::transform::{decide_mode, ExecutionMode};
use interp::{execute, Env, Linked, SpawnOutcome};
use pool::WorkerPool;

/// Options of a single run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuntimeConfig {
    /// Replaces the detected processor count.
    pub cores_override: Option<u32>,
    /// Execute the program as written, without the load-time rewrite.
    pub no_transform: bool,
    /// Where a front end should write the stats JSON; unused by [`run`].
    pub stats_path: Option<PathBuf>,
}

impl RuntimeConfig {
    pub fn with_cores(cores: u32) -> Self {
        Self { cores_override: Some(cores), ..Self::default() }
    }

    pub fn platform(&self) -> Result<PlatformInfo, ZeroCores> {
        PlatformInfo::resolve(self.cores_override)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Result of the entry method (`Void` after `HALT`).
    pub value: Value,
    /// Final content of every global slot, in declaration order.
    pub globals: Vec<(String, Value)>,
    pub stats: ExecutionStats,
}

impl RunOutcome {
    /// Bitwise comparison of result and globals.
    pub fn same_result(&self, other: &RunOutcome) -> bool {
        self.value.bit_eq(&other.value)
            && self.globals.len() == other.globals.len()
            && self.globals.iter().zip(&other.globals).all(|((a, x), (b, y))| a == b && x.bit_eq(y))
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum RunError {
    #[error("program is not valid ({} diagnostics)", .0.len())]
    Invalid(Vec<Diagnostic>),
    #[error("trap in {0}")]
    Trap(TrapInfo),
    #[error(transparent)]
    Platform(#[from] ZeroCores),
}

/// Runs `program` as given (transformed or not) on the platform described
/// by `config`. Worker counts are derived from the annotations and the
/// platform at start-up.
pub fn run(program: &Program, config: &RuntimeConfig) -> Result<RunOutcome, RunError> {
    run_on(program, config.platform()?)
}

pub fn run_on(program: &Program, platform: PlatformInfo) -> Result<RunOutcome, RunError> {
    let diags = validate_program(program);
    if has_errors(&diags) {
        return Err(RunError::Invalid(diags));
    }
    let entry = program.entry_id().expect("validated entry");
    let linked = Linked::new(program.clone());

    let modes: Vec<Option<ExecutionMode>> =
        program.methods.iter().map(|m| m.annotation.map(|a| decide_mode(a, platform))).collect();
    let pools = modes
        .iter()
        .enumerate()
        .map(|(i, mode)| match mode {
            Some(ExecutionMode::Threaded { workers }) => {
                Some(WorkerPool::new(program.methods[i].name.clone(), *workers as usize, linked.clone()))
            }
            _ => None,
        })
        .collect();

    let mut env = MainEnv {
        globals: program.globals.iter().map(|g| Value::default_for(&g.kind)).collect(),
        pools,
        inline_calls: vec![0; program.methods.len()],
        touch_block_time: Duration::ZERO,
        touch_times: Vec::new(),
    };

    let started = Instant::now();
    let result = execute(&linked, &mut env, entry, Vec::new());
    for p in env.pools.iter_mut().flatten() {
        p.shutdown(result.is_err());
    }
    let wall_time = started.elapsed();

    let value = result.map_err(RunError::Trap)?;
    let stats = collect_stats(program, &modes, &env, wall_time);
    let globals = program.globals.iter().map(|g| g.name.clone()).zip(env.globals).collect();
    Ok(RunOutcome { value, globals, stats })
}

fn collect_stats(
    program: &Program,
    modes: &[Option<ExecutionMode>],
    env: &MainEnv,
    wall_time: Duration,
) -> ExecutionStats {
    let mut stats = ExecutionStats {
        wall_time,
        touch_block_time: env.touch_block_time,
        touch_times: env.touch_times.clone(),
        ..ExecutionStats::default()
    };
    for (i, mode) in modes.iter().enumerate() {
        let Some(mode) = *mode else { continue };
        let mut m = MethodStats {
            mode,
            workers: mode.workers(),
            tasks_spawned: 0,
            inline_calls: env.inline_calls[i],
            peak_concurrency: 0,
            task_times: Vec::new(),
            queue_waits: Vec::new(),
        };
        if let Some(pool) = &env.pools[i] {
            let c = &pool.counters;
            m.tasks_spawned = c.spawned.load(Ordering::Acquire);
            m.peak_concurrency = c.peak.load(Ordering::Acquire);
            m.task_times = c.task_times.lock().map(|v| v.clone()).unwrap_or_default();
            m.queue_waits = c.queue_waits.lock().map(|v| v.clone()).unwrap_or_default();
        }
        stats.tasks_spawned += m.tasks_spawned;
        stats.peak_concurrency = stats.peak_concurrency.max(m.peak_concurrency);
        stats.per_method.insert(program.methods[i].name.clone(), m);
    }
    stats
}

struct MainEnv {
    globals: Vec<Value>,
    pools: Vec<Option<WorkerPool>>,
    inline_calls: Vec<u64>,
    touch_block_time: Duration,
    touch_times: Vec<Duration>,
}

impl Env for MainEnv {
    const IS_TASK: bool = false;

    fn get_static(&mut self, id: GlobalId) -> Result<Value, Trap> {
        Ok(self.globals[id.0 as usize].clone())
    }

    fn put_static(&mut self, id: GlobalId, value: Value) -> Result<(), Trap> {
        self.globals[id.0 as usize] = value;
        Ok(())
    }

    fn spawn(&mut self, method: MethodId, args: Vec<Value>) -> Result<SpawnOutcome, Trap> {
        match &mut self.pools[method.0 as usize] {
            Some(pool) => pool.spawn(method, args).map(SpawnOutcome::Spawned),
            None => Ok(SpawnOutcome::Inline(args)),
        }
    }

    fn touch(&mut self, future: &FutureRef) -> Result<Value, Trap> {
        let started = Instant::now();
        let was_filled = future.is_filled();
        let result = future.touch();
        let took = started.elapsed();
        if !was_filled {
            self.touch_block_time += took;
        }
        self.touch_times.push(took);
        result
    }

    fn parallel_call(&mut self, method: MethodId) {
        self.inline_calls[method.0 as usize] += 1;
    }
}
