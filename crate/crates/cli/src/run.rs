use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Backend, HarnessError, SuiteConfig};
use crate::report::{Failure, TrialRecord, TrialReport};
use crate::trials::{self, Trial};

/// Worker count from `POSLAB_THREADS` (`None` when unset or empty).
pub fn thread_cap() -> Result<Option<usize>, HarnessError> {
    match std::env::var("POSLAB_THREADS") {
        Ok(s) if !s.trim().is_empty() => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(HarnessError::Usage(format!("POSLAB_THREADS={s:?} is not a positive integer"))),
        },
        _ => Ok(None),
    }
}

pub fn run_suite(config: &SuiteConfig) -> Result<TrialReport, HarnessError> {
    config.validate()?;
    let started = Instant::now();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| HarnessError::Usage(format!("thread pool: {e}")))?;
    let f = trials::dispatch(config.suite);
    let outcomes: Vec<_> = pool.install(|| {
        (0..config.samples)
            .into_par_iter()
            .map(|index| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(index as u64);
                let mut t = Trial::new(&config.spec, config.tol, config.backend == Backend::Exact, index, rng);
                let r = f(&mut t);
                (index, r, t.into_inputs())
            })
            .collect()
    });

    let mut records = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (index, r, input) in outcomes {
        let fail = |message: String| Failure { index, seed: config.seed, stream: index as u64, message, input: input.clone() };
        match r {
            Ok(c) => {
                let margin = c.margin.is_finite().then_some(c.margin);
                if !c.pass {
                    failures.push(fail(c.note.clone()));
                }
                records.push(TrialRecord { index, pass: c.pass, margin, note: c.note });
            }
            Err(poslab_core::Error::Capability(m)) => return Err(HarnessError::Capability(m)),
            Err(e) => {
                failures.push(fail(e.to_string()));
                records.push(TrialRecord { index, pass: false, margin: None, note: e.to_string() });
            }
        }
    }
    let margins = records.iter().filter_map(|r| r.margin);
    let min_margin = margins.clone().reduce(f64::min);
    let max_margin = margins.reduce(f64::max);
    Ok(TrialReport {
        suite: config.suite,
        group: config.spec.clone(),
        backend: config.backend,
        seed: config.seed,
        tol: config.tol,
        trials: config.samples,
        passes: records.iter().filter(|r| r.pass).count(),
        failures,
        min_margin,
        max_margin,
        records,
        wall_time: started.elapsed(),
    })
}
