use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::dataset::RecordValues;
use crate::fsutil::write_atomic;
use crate::transfer::InferenceEngine;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub wall_seconds: f64,
    pub records_per_second: f64,
    pub thread_count: usize,
    pub record_count: usize,
}

pub const BENCHMARK_LOG_HEADER: &str = "model,domain,threads,wall_seconds,records_per_second";

/// Times one full scoring pass (preprocessing and network) on its own pool of
/// `threads` workers (`0` = all cores), after one untimed warm-up pass.
/// Returns the timing and the scores of the timed pass.
pub fn benchmark<R: RecordValues + Sync>(
    engine: &InferenceEngine,
    rows: &[R],
    threads: usize,
) -> Result<(BenchmarkResult, Vec<f32>), EvalError> {
    if rows.is_empty() {
        return Err(EvalError::Empty);
    }
    let thread_count = if threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        threads
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count)
        .build()
        .map_err(|e| EvalError::Io(std::io::Error::other(e)))?;
    let (wall, scores) = pool.install(|| -> Result<_, EvalError> {
        engine.infer_threads(rows, 0)?;
        let start = Instant::now();
        let scores = engine.infer_threads(rows, 0)?;
        Ok((start.elapsed().as_secs_f64(), scores))
    })?;
    // Sub-nanosecond runs would otherwise divide by zero.
    let wall_seconds = wall.max(1e-9);
    let result = BenchmarkResult {
        wall_seconds,
        records_per_second: rows.len() as f64 / wall_seconds,
        thread_count,
        record_count: rows.len(),
    };
    Ok((result, scores))
}

/// Appends one row to a CSV log, creating it with a header if needed.
pub fn append_benchmark_log(path: &Path, model: &str, domain: &str, r: &BenchmarkResult) -> Result<(), EvalError> {
    let mut text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => format!("{BENCHMARK_LOG_HEADER}\n"),
        Err(e) => return Err(e.into()),
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        model,
        domain,
        &r.thread_count.to_string(),
        &r.wall_seconds.to_string(),
        &r.records_per_second.to_string(),
    ])
    .and_then(|_| wtr.flush().map_err(csv::Error::from))
    .map_err(|e| EvalError::Io(std::io::Error::other(e)))?;
    text.push_str(&String::from_utf8(wtr.into_inner().expect("in-memory writer")).expect("utf-8 fields"));
    write_atomic(path, text.as_bytes())?;
    Ok(())
}
