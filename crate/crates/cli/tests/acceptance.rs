//! Acceptance run: one line per criterion, nonzero exit if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use poslab::{run_suite, Backend, Suite, SuiteConfig, TrialReport};
use poslab_core::replab::{collar_residual, hitchin_rep, hyperbolic_baseline};
use poslab_core::{GroupSpec, HyperbolicPair, WeightForm};

const TOL: f64 = 1e-10;

fn spec(s: &str) -> GroupSpec {
    s.parse().expect("group")
}

fn run(suite: Suite, group: &str, samples: usize, seed: u64, backend: Backend) -> TrialReport {
    let cfg = SuiteConfig::new(suite, spec(group), samples, seed).with_tol(TOL).with_backend(backend);
    run_suite(&cfg).unwrap_or_else(|e| panic!("{suite} on {group}: {e}"))
}

struct Outcome {
    pass: bool,
    detail: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, detail: Vec::new() }
    }

    fn report(&mut self, r: &TrialReport, want: usize) {
        let ok = r.passes == want && r.trials == want;
        self.pass &= ok;
        let mut s = format!("{} {} {}/{}", r.suite, r.group, r.passes, r.trials);
        if let Some(f) = r.failures.first() {
            s.push_str(&format!(" (first failure: trial {}: {})", f.index, f.message));
        }
        self.detail.push(s);
    }

    fn check(&mut self, ok: bool, what: String) {
        self.pass &= ok;
        self.detail.push(what);
    }
}

fn timed(f: impl FnOnce(&mut Outcome)) -> (Outcome, Duration) {
    let mut o = Outcome::new();
    let t = Instant::now();
    f(&mut o);
    (o, t.elapsed())
}

/// `2 / lambda^2` from the characteristic polynomial of a trace-3 element.
fn closed_form_tr3() -> f64 {
    let tr = 3.0f64;
    let lam = (tr + (tr * tr - 4.0).sqrt()) / 2.0;
    1.0 / (lam * lam) + 1.0 / (lam * lam)
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut lines = Vec::new();

    let (mut o, t) = timed(|o| {
        for g in ["SL3", "SL4", "SL5", "Sp4", "SO(3,4)"] {
            o.report(&run(Suite::Cocycle, g, 1000, 101, Backend::Float), 1000);
        }
    });
    o.check(t < Duration::from_secs(30), format!("runtime {:.1}s < 30s", t.as_secs_f64()));
    lines.push((1, "cocycle identities", o, t));

    lines.push({
        let (o, t) = timed(|o| o.report(&run(Suite::Tensor, "SL3", 500, 102, Backend::Float), 500));
        (2, "tensor identity", o, t)
    });

    lines.push({
        let (o, t) = timed(|o| {
            for g in ["SL3", "SL4", "SL5", "Sp4", "SO(3,4)"] {
                o.report(&run(Suite::PeriodCharacter, g, 200, 103, Backend::Float), 200);
            }
        });
        (3, "period and character", o, t)
    });

    lines.push({
        let (o, t) = timed(|o| {
            for g in ["SL3", "SL4", "Sp4"] {
                o.report(&run(Suite::TheoremA, g, 1000, 104, Backend::Float), 1000);
            }
            o.report(&run(Suite::TheoremA, "SO(3,4)", 500, 104, Backend::Float), 500);
        });
        (4, "positive quadruples have cross-ratio > 1", o, t)
    });

    lines.push({
        let (o, t) = timed(|o| {
            for g in ["SL3", "SL4", "Sp4", "SO(3,4)"] {
                o.report(&run(Suite::PhotonPower, g, 200, 105, Backend::Float), 200);
                o.report(&run(Suite::PhotonFiber, g, 200, 105, Backend::Float), 200);
            }
        });
        (5, "photon power law and fibres", o, t)
    });

    lines.push({
        let (o, t) = timed(|o| {
            o.report(&run(Suite::Bracket, "SO(3,4)", 1000, 106, Backend::Float), 1000);
            for g in ["SL3", "SL4"] {
                o.report(&run(Suite::Bracket, g, 200, 106, Backend::Exact), 200);
            }
        });
        (6, "bracket positivity", o, t)
    });

    lines.push({
        let (o, t) = timed(|o| {
            for g in ["SL3", "SL4"] {
                o.report(&run(Suite::Supmin, g, 200, 107, Backend::Float), 200);
            }
        });
        (7, "sup-min bound", o, t)
    });

    lines.push({
        let (o, t) = timed(|o| {
            for g in ["SL3", "SL4", "Sp4"] {
                o.report(&run(Suite::Collar, g, 500, 108, Backend::Float), 500);
                o.report(&run(Suite::BaselineHyperbolic, g, 500, 108, Backend::Float), 500);
            }
            o.report(&run(Suite::Collar, "SL2", 500, 108, Backend::Float), 500);
            let pair = HyperbolicPair::fricke(3.0, 3.0, 3.0).expect("tr 3 pair");
            let rep = hitchin_rep(&pair, 2).expect("lift");
            let got = collar_residual(&rep, "a", "b", 1, &WeightForm::fundamental(1), TOL).expect("residual");
            let want = closed_form_tr3();
            o.check((got - want).abs() < 1e-6, format!("tr 3 residual {got:.7} vs closed form {want:.7}"));
            let base = hyperbolic_baseline(&pair).expect("baseline");
            o.check(base > 1.0, format!("tr 3 sinh product {base:.4}"));
        });
        (8, "collar inequality", o, t)
    });

    lines.push({
        let (o, t) = timed(|o| {
            for g in ["SL3", "SL4", "Sp4"] {
                o.report(&run(Suite::CheckerVsSampler, g, 100, 109, Backend::Float), 100);
            }
        });
        (9, "checker and sampler agree", o, t)
    });

    let (mut o, t) = timed(|o| {
        for g in ["SL3", "SL4", "Sp4"] {
            o.report(&run(Suite::ExactParity, g, 100, 110, Backend::Float), 100);
        }
    });
    let total = started.elapsed();
    o.check(total < Duration::from_secs(300), format!("all criteria in {:.1}s < 300s", total.as_secs_f64()));
    lines.push((10, "exact and float verdicts agree", o, t));

    let mut all = true;
    for (id, name, o, t) in &lines {
        all &= o.pass;
        println!("criterion {id:>2} {} {name} [{:.1}s]: {}", if o.pass { "PASS" } else { "FAIL" }, t.as_secs_f64(), o.detail.join("; "));
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
