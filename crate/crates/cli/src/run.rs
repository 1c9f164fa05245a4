use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::Duration;

use serde_json::json;

use privpost::diagnostics::summarize;
use privpost::engine::DrawsMatrix;
use privpost::{sample_private_posterior_with, RunOptions, SamplerOutput};

use crate::config::{Problem, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{summary_table, write_acceptance, write_draws, write_json, write_summary};

#[derive(Clone, Copy, Debug, Default)]
pub struct RunFlags {
    pub threads: Option<usize>,
    pub progress: bool,
}

/// Validates, samples and writes every output file. Returns the aligned
/// summary table.
pub fn run(config: &RunConfig, flags: RunFlags) -> CliResult<String> {
    if flags.threads == Some(0) {
        return Err(CliError::config("--threads", "must be at least 1"));
    }
    let problem = config.resolve()?;
    let output = sample(&problem, flags)?;
    let draws = if output.draws.varnames() == problem.varnames.as_slice() {
        output.draws
    } else {
        let d = &output.draws;
        DrawsMatrix::new(d.nchains(), d.ndraws(), problem.varnames.clone(), d.as_slice().to_vec())
            .map_err(|e| CliError::Runtime(e.to_string()))?
    };
    let summary = summarize(&draws).map_err(|e| CliError::Runtime(format!("summary: {e}")))?;

    let [draws_path, acceptance_path, summary_path, manifest_path] = config.output.paths();
    std::fs::create_dir_all(&config.output.dir).map_err(|e| CliError::io(&config.output.dir, e))?;
    let manifest = json!({
        "privpost_version": env!("CARGO_PKG_VERSION"),
        "config": config.resolved(&problem),
        "derived": problem.derived,
        "outputs": {
            "draws": draws_path,
            "acceptance": acceptance_path,
            "summary": summary_path,
        },
    });
    write_acceptance(&acceptance_path, &output.acceptance)?;
    write_summary(&summary_path, &summary)?;
    write_json(&manifest_path, &manifest)?;
    // draws go last so a failed run never leaves a draws file behind
    if let Err(e) = write_draws(&draws_path, &draws, problem.sampler.warmup) {
        let _ = std::fs::remove_file(&draws_path);
        return Err(e);
    }
    Ok(summary_table(&summary))
}

fn sample(problem: &Problem, flags: RunFlags) -> CliResult<SamplerOutput> {
    let config = &problem.sampler;
    let counters: Arc<Vec<AtomicUsize>> = Arc::new((0..config.chains).map(|_| AtomicUsize::new(0)).collect());
    let hook_counters = Arc::clone(&counters);
    let hook = move |chain: usize, iter: usize| hook_counters[chain].store(iter, Ordering::Relaxed);
    let options = RunOptions {
        threads: flags.threads,
        progress: flags.progress.then_some(&hook as &(dyn Fn(usize, usize) + Send + Sync)),
        progress_every: 10,
        ..Default::default()
    };

    let (stop, stopped) = mpsc::channel::<()>();
    let reporter = flags.progress.then(|| {
        let counters = Arc::clone(&counters);
        let niter = config.niter;
        thread::spawn(move || {
            while let Err(mpsc::RecvTimeoutError::Timeout) = stopped.recv_timeout(Duration::from_secs(1)) {
                let parts: Vec<String> = counters
                    .iter()
                    .enumerate()
                    .map(|(c, n)| format!("chain {} {}/{niter}", c + 1, n.load(Ordering::Relaxed)))
                    .collect();
                eprintln!("progress: {}", parts.join(", "));
            }
        })
    });
    let result = sample_private_posterior_with(problem.model.as_ref(), &problem.sdp, config, &options);
    drop(stop);
    if let Some(handle) = reporter {
        let _ = handle.join();
    }
    result.map_err(|e| CliError::from_core("sampler", e))
}
