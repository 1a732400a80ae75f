use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use poslab::{canonical_json, emit_report, run_suite, write_json, Backend, Format, HarnessError, Suite, SuiteConfig};
use poslab_core::crossratio::{form_cr, rebase, weight_cr};
use poslab_core::flags::normalized_pairing;
use poslab_core::positivity::{quadruple_certificate, sample_loxodromic_instance, sample_positive_tuple};
use poslab_core::replab::{
    collar_terms, hitchin_rep, hyperbolic_baseline, maximal_rep, principal_rep, sample_hyperbolic_pair, sextuple, Rep,
};
use poslab_core::{Flag, GroupSpec, Quadruple, Rational, Scalar, WeightForm};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "poslab", version, about = "Theta-positivity computations and seeded verification suites")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one verification suite and write a report.
    Run {
        #[arg(long)]
        suite: Suite,
        #[arg(long)]
        group: GroupSpec,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value = "float")]
        backend: Backend,
        /// Report path; JSON goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// `json` or `csv`; inferred from the extension of `--out` by default.
        #[arg(long)]
        format: Option<Format>,
    },
    /// Sample a positive tuple, a Fuchsian pair, a lifted representation or a loxodromic
    /// instance, as JSON.
    Sample {
        #[arg(long)]
        group: Option<GroupSpec>,
        #[arg(long, value_enum, default_value_t = Kind::Tuple)]
        kind: Kind,
        /// Tuple length.
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trace range `lo,hi` for Fuchsian pairs.
        #[arg(long, default_value = "2.85,5")]
        traces: String,
        #[arg(long, value_enum)]
        embedding: Option<Embedding>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate cross-ratios of a quadruple `{"x","y","X","Y"}` read from a JSON file.
    Crossratio {
        input: PathBuf,
        /// Extra weight forms such as `1:2,2:1`.
        #[arg(long)]
        eta: Vec<String>,
        #[arg(long, default_value = "float")]
        backend: Backend,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Collar inequality terms for a representation (from a file, or sampled).
    Collar {
        #[arg(long, conflicts_with = "group")]
        input: Option<PathBuf>,
        #[arg(long)]
        group: Option<GroupSpec>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        embedding: Option<Embedding>,
        #[arg(long, default_value = "a")]
        a: String,
        #[arg(long, default_value = "b")]
        b: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Tuple,
    Pair,
    Rep,
    Instance,
}

#[derive(Clone, Copy, ValueEnum)]
enum Embedding {
    Principal,
    Diagonal,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Run { suite, group, samples, seed, tol, backend, out, format } => {
            cmd_run(SuiteConfig { suite, spec: group, samples, seed, tol, backend, out }, format)
        }
        Cmd::Sample { group, kind, k, seed, traces, embedding, out } => {
            cmd_sample(group, kind, k, seed, &traces, embedding, out.as_deref())
        }
        Cmd::Crossratio { input, eta, backend, seed, out } => cmd_crossratio(&input, &eta, backend, seed, out.as_deref()),
        Cmd::Collar { input, group, seed, embedding, a, b, tol, out } => {
            cmd_collar(input.as_deref(), group, seed, embedding, &a, &b, tol, out.as_deref())
        }
    };
    match r {
        Ok(ok) => ExitCode::from(if ok { 0 } else { 1 }),
        Err(e) => {
            eprintln!("poslab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn usage(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Usage(e.to_string())
}

fn emit(v: &Value, out: Option<&Path>) -> Result<(), HarnessError> {
    let s = canonical_json(v);
    match out {
        Some(p) => fs::write(p, s).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", p.display())))?,
        None => io::stdout().write_all(s.as_bytes())?,
    }
    Ok(())
}

fn cmd_run(config: SuiteConfig, format: Option<Format>) -> Result<bool, HarnessError> {
    let report = run_suite(&config)?;
    match &config.out {
        Some(p) => emit_report(&report, format.unwrap_or_else(|| Format::from_path(p)), p)?,
        None => match format.unwrap_or(Format::Json) {
            Format::Json => write_json(&report, io::stdout().lock())?,
            Format::Csv => poslab::write_csv(&report, io::stdout().lock())?,
        },
    }
    eprintln!("{}", report.summary());
    for f in report.failures.iter().take(5) {
        eprintln!("  trial {} (seed {}, stream {}): {}", f.index, f.seed, f.stream, f.message);
    }
    Ok(report.all_passed())
}

fn lift_pair(pair: &poslab_core::HyperbolicPair, spec: &GroupSpec, embedding: Option<Embedding>) -> Result<Rep, HarnessError> {
    use poslab_core::Group;
    let rep = match (spec.group(), embedding) {
        (Group::Sp { n }, Some(Embedding::Diagonal) | None) => maximal_rep(pair, n)?,
        (_, Some(Embedding::Diagonal)) => return Err(usage("diagonal embedding exists only for Sp")),
        (Group::SL { n }, _) => hitchin_rep(pair, n)?,
        _ => principal_rep(pair, spec)?,
    };
    Ok(rep)
}

fn parse_range(s: &str) -> Result<(f64, f64), HarnessError> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| usage(format!("trace range {s:?} is not lo,hi")))?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|_| usage(format!("bad trace bound {x:?}")));
    Ok((p(lo)?, p(hi)?))
}

fn cmd_sample(
    group: Option<GroupSpec>,
    kind: Kind,
    k: usize,
    seed: u64,
    traces: &str,
    embedding: Option<Embedding>,
    out: Option<&Path>,
) -> Result<bool, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let need = || group.clone().ok_or_else(|| usage("--group is required for this kind"));
    let v = match kind {
        Kind::Tuple => {
            let spec = need()?;
            let flags = sample_positive_tuple(&spec, k, &mut rng)?;
            json!({"group": spec, "flags": flags.iter().map(Flag::to_json).collect::<Vec<_>>()})
        }
        Kind::Pair => sample_hyperbolic_pair(&mut rng, parse_range(traces)?)?.to_json(),
        Kind::Rep => {
            let spec = need()?;
            let pair = sample_hyperbolic_pair(&mut rng, parse_range(traces)?)?;
            lift_pair(&pair, &spec, embedding)?.to_json()
        }
        Kind::Instance => {
            let spec = need()?;
            let inst = sample_loxodromic_instance(&spec, &mut rng)?;
            json!({"group": spec, "g": inst.g.to_json(), "cartan": inst.cartan, "x": inst.x.to_json()})
        }
    };
    emit(&v, out)?;
    Ok(true)
}

fn read_json(p: &Path) -> Result<Value, HarnessError> {
    let s = fs::read_to_string(p).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", p.display())))?;
    serde_json::from_str(&s).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn cmd_crossratio(input: &Path, etas: &[String], backend: Backend, seed: u64, out: Option<&Path>) -> Result<bool, HarnessError> {
    let v = read_json(input)?;
    let forms = etas.iter().map(|s| WeightForm::parse(s).map_err(usage)).collect::<Result<Vec<_>, _>>()?;
    let q = Quadruple::<f64>::from_json(&v).map_err(usage)?;
    let spec = q.spec().clone();
    let mut values = serde_json::Map::new();
    match backend {
        Backend::Float => {
            for &t in spec.theta() {
                values.insert(t.to_string(), json!(weight_cr(t, &q)?));
            }
        }
        Backend::Exact => {
            let qr = Quadruple::<Rational>::from_json(&v).map_err(usage)?;
            for &t in spec.theta() {
                let b = weight_cr(t, &qr)?;
                values.insert(t.to_string(), json!({"exact": b.to_json(), "float": b.to_f64()}));
            }
        }
    }
    let mut forms_out = Vec::new();
    for f in &forms {
        forms_out.push(json!({"eta": f, "value": form_cr(f, &q)?}));
    }
    // value stability under change of basis within each flag
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rq = Quadruple::new(rebase(&q.x, &mut rng)?, rebase(&q.y, &mut rng)?, rebase(&q.opp_x, &mut rng)?, rebase(&q.opp_y, &mut rng)?)?;
    let mut rebase_residual = 0.0f64;
    let mut min_pairing = f64::INFINITY;
    for &t in spec.theta() {
        let (a, b) = (weight_cr(t, &q)?, weight_cr(t, &rq)?);
        rebase_residual = rebase_residual.max((b / a - 1.0).abs());
        for (u, w) in [(&q.x, &q.opp_x), (&q.y, &q.opp_y), (&q.y, &q.opp_x), (&q.x, &q.opp_y)] {
            min_pairing = min_pairing.min(normalized_pairing(t, u, w)?.abs());
        }
    }
    let positive = if spec.family() == poslab_core::Family::SO {
        Value::Null
    } else {
        json!(quadruple_certificate(&q.x, &q.y, &q.opp_x, &q.opp_y, 1e-10).map(|c| c.accepted).ok())
    };
    let report = json!({
        "group": spec,
        "values": values,
        "forms": forms_out,
        "rebase_residual": rebase_residual,
        "min_normalized_pairing": min_pairing,
        "cyclically_positive": positive,
    });
    emit(&report, out)?;
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn cmd_collar(
    input: Option<&Path>,
    group: Option<GroupSpec>,
    seed: u64,
    embedding: Option<Embedding>,
    a: &str,
    b: &str,
    tol: f64,
    out: Option<&Path>,
) -> Result<bool, HarnessError> {
    let (rep, baseline) = match (input, group) {
        (Some(p), _) => (Rep::from_json(&read_json(p)?).map_err(usage)?, None),
        (None, Some(spec)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pair = sample_hyperbolic_pair(&mut rng, (2.85, 5.0))?;
            (lift_pair(&pair, &spec, embedding)?, Some(hyperbolic_baseline(&pair)?))
        }
        (None, None) => return Err(usage("collar needs --input or --group")),
    };
    let spec = rep.spec.clone();
    let sx = sextuple(&rep, a, b, tol)?;
    let mut rows = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    if sx.verdict.holds() {
        for &t in spec.theta() {
            let mut forms = vec![WeightForm::fundamental(t), WeightForm::new([(t, 2.0)])?];
            for &s in spec.theta().iter().filter(|&&s| s != t) {
                forms.push(WeightForm::new([(t, 1.0), (s, 1.0)])?);
            }
            for eta in forms {
                let c = collar_terms(&rep, a, b, t, &eta, tol)?;
                worst = worst.max(c.residual());
                rows.push(json!({
                    "theta": t,
                    "eta": eta,
                    "period_term": c.period_term,
                    "character_term": c.character_term,
                    "residual": c.residual(),
                }));
            }
        }
    }
    let ok = sx.verdict.holds() && worst < 1.0;
    let report = json!({
        "group": spec,
        "words": [a, b],
        "source": rep.source,
        "sextuple": sx.verdict,
        "residuals": rows,
        "max_residual": worst.is_finite().then_some(worst),
        "hyperbolic_baseline": baseline,
        "holds": ok,
    });
    emit(&report, out)?;
    Ok(ok)
}
