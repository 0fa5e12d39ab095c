use std::collections::BTreeMap;
use std::time::Duration;

use serde::Serialize;

use crate::transform::ExecutionMode;

#[derive(Debug, Clone, PartialEq)]
pub struct MethodStats {
    pub mode: ExecutionMode,
    /// Pool size, `min(par_degree, cores)` (1 when inline).
    pub workers: u32,
    pub tasks_spawned: u64,
    /// Synchronous entries: `CALL`s, and `SPAWN`s that ran inline.
    pub inline_calls: u64,
    pub peak_concurrency: usize,
    pub task_times: Vec<Duration>,
    /// Time each task sat in the queue before a worker picked it up.
    pub queue_waits: Vec<Duration>,
}

impl MethodStats {
    pub fn mean_task_time(&self) -> Duration {
        if self.task_times.is_empty() {
            Duration::ZERO
        } else {
            self.task_times.iter().sum::<Duration>() / self.task_times.len() as u32
        }
    }

    pub fn max_task_time(&self) -> Duration {
        self.task_times.iter().copied().max().unwrap_or_default()
    }

    /// Every execution of the method, however it was dispatched.
    pub fn invocations(&self) -> u64 {
        self.tasks_spawned + self.inline_calls
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExecutionStats {
    pub wall_time: Duration,
    pub tasks_spawned: u64,
    /// Largest number of tasks of a single method running at once.
    pub peak_concurrency: usize,
    /// Keyed by annotated method name.
    pub per_method: BTreeMap<String, MethodStats>,
    /// Time the main thread spent blocked in `TOUCH` on unfilled futures.
    pub touch_block_time: Duration,
    /// Duration of every `TOUCH` the main thread executed, in order.
    pub touch_times: Vec<Duration>,
}

#[derive(Debug, Serialize)]
struct StatsJson<'a> {
    wall_ms: f64,
    tasks_spawned: u64,
    peak_concurrency: usize,
    touch_block_ms: f64,
    per_method: BTreeMap<&'a str, MethodJson>,
}

#[derive(Debug, Serialize)]
struct MethodJson {
    tasks: u64,
    mean_ms: f64,
    max_ms: f64,
}

pub(crate) fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

impl ExecutionStats {
    /// The stats file layout: `wall_ms`, `tasks_spawned`,
    /// `peak_concurrency`, `touch_block_ms`, and `per_method`.
    pub fn to_json(&self) -> serde_json::Value {
        let doc = StatsJson {
            wall_ms: ms(self.wall_time),
            tasks_spawned: self.tasks_spawned,
            peak_concurrency: self.peak_concurrency,
            touch_block_ms: ms(self.touch_block_time),
            per_method: self
                .per_method
                .iter()
                .map(|(name, m)| {
                    (
                        name.as_str(),
                        MethodJson {
                            tasks: m.tasks_spawned,
                            mean_ms: ms(m.mean_task_time()),
                            max_ms: ms(m.max_task_time()),
                        },
                    )
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("stats serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_fields_are_exact() {
        let mut stats = ExecutionStats { tasks_spawned: 2, peak_concurrency: 2, ..Default::default() };
        stats.per_method.insert(
            "f".into(),
            MethodStats {
                mode: ExecutionMode::Threaded { workers: 2 },
                workers: 2,
                tasks_spawned: 2,
                inline_calls: 0,
                peak_concurrency: 2,
                task_times: vec![Duration::from_millis(2), Duration::from_millis(4)],
                queue_waits: vec![],
            },
        );
        let json = stats.to_json();
        let mut keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["peak_concurrency", "per_method", "tasks_spawned", "touch_block_ms", "wall_ms"]);
        let f = &json["per_method"]["f"];
        let mut keys: Vec<&str> = f.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["max_ms", "mean_ms", "tasks"]);
        assert_eq!(f["tasks"], 2);
        assert!((f["mean_ms"].as_f64().unwrap() - 3.0).abs() < 1e-9);
        assert!((f["max_ms"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    }
}
