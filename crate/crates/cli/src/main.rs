use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use heightcount::asymptotics::{
    compare, describe, fit_asymptotic, predict_with, Engine, EnumerationTask, PredictOptions, Tolerances, VarietySpec,
    DEFAULT_TRUNCATION_PRIME, FIT_SCHEMA, PREDICTION_SCHEMA,
};
use heightcount::densities::AsymptoticPrediction;
use heightcount::enumeration::{geometric_schedule, CountCurve, CountSample};
use heightcount::lattice::rational::{format_rational, parse_rational};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "heightcount",
    version,
    about = "Rational points of bounded height: predictions and counts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the invariant table of a variety.
    Describe {
        #[arg(long)]
        variety: String,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION_PRIME)]
        truncation: u64,
    },
    /// Assemble alpha, beta, gamma, delta, tau and c as JSON.
    Predict {
        #[arg(long)]
        variety: String,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION_PRIME)]
        truncation: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count points of height <= B along a schedule; CSV "B,count".
    Enumerate {
        #[arg(long)]
        variety: String,
        /// "10,100,1000" or "geom:LO:HI:COUNT"
        #[arg(long)]
        bounds: String,
        #[arg(long)]
        engine: Option<String>,
        #[arg(long)]
        threads: Option<usize>,
        /// Numerator/denominator bound for the torus-grid engine.
        #[arg(long = "box")]
        grid_box: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact Euler factors for p <= P; CSV "p,numerator,denominator".
    EulerProduct {
        #[arg(long)]
        variety: String,
        #[arg(long, default_value_t = 100)]
        truncation: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Least-squares fit of a counts CSV.
    Fit {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        fix_a: Option<f64>,
        #[arg(long)]
        fix_b: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a prediction JSON with a counts CSV.
    Compare {
        #[arg(long)]
        prediction: PathBuf,
        #[arg(long)]
        counts: PathBuf,
        #[arg(long, default_value_t = Tolerances::default().exponent)]
        exponent_tol: f64,
        #[arg(long, default_value_t = Tolerances::default().log_power)]
        log_power_tol: f64,
        #[arg(long, default_value_t = Tolerances::default().constant_slack)]
        slack: f64,
        /// Report JSON destination; the table goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_variety(arg: &str) -> Result<VarietySpec> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return Ok(VarietySpec::builtin(name)?);
    }
    let text = std::fs::read_to_string(arg).with_context(|| format!("reading variety spec {arg}"))?;
    serde_json::from_str(&text).with_context(|| format!("parsing variety spec {arg}"))
}

fn parse_bounds(s: &str) -> Result<Vec<u64>> {
    if let Some(rest) = s.strip_prefix("geom:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            bail!("geometric schedule must look like geom:LO:HI:COUNT");
        };
        return Ok(geometric_schedule(lo.parse()?, hi.parse()?, n.parse()?));
    }
    s.split(',')
        .map(|x| x.trim().parse::<u64>().with_context(|| format!("bad bound {x:?}")))
        .collect()
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn read_counts(path: &Path) -> Result<CountCurve> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["B", "count"] {
        bail!("{}: expected header B,count", path.display());
    }
    let mut samples = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let bound = parse_rational(&rec[0]).with_context(|| format!("bad bound {:?}", &rec[0]))?;
        let count = rec[1]
            .trim()
            .parse()
            .with_context(|| format!("bad count {:?}", &rec[1]))?;
        samples.push(CountSample { bound, count });
    }
    let id = path
        .file_stem()
        .map_or("counts".into(), |s| s.to_string_lossy().into_owned());
    Ok(CountCurve::new(id, samples)?)
}

fn read_prediction(path: &Path) -> Result<AsymptoticPrediction> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    match v.get("schema").and_then(|s| s.as_str()) {
        Some(PREDICTION_SCHEMA) => {}
        other => bail!(
            "{}: expected schema {PREDICTION_SCHEMA}, found {other:?}",
            path.display()
        ),
    }
    Ok(serde_json::from_value(v["prediction"].clone())?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Describe { variety, truncation } => {
            let spec = load_variety(&variety)?;
            let rows = describe(
                &spec,
                PredictOptions {
                    truncation_prime: truncation,
                },
            )?;
            let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
            for (k, v) in rows {
                println!("{k:<width$}  {v}");
            }
        }
        Command::Predict {
            variety,
            truncation,
            out,
        } => {
            let spec = load_variety(&variety)?;
            let p = predict_with(
                &spec,
                PredictOptions {
                    truncation_prime: truncation,
                },
            )?;
            write_json(
                out.as_deref(),
                &json!({ "schema": PREDICTION_SCHEMA, "variety": spec.label(), "prediction": p }),
            )?;
        }
        Command::Enumerate {
            variety,
            bounds,
            engine,
            threads,
            grid_box,
            out,
        } => {
            if let Some(t) = threads {
                rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
            }
            let spec = load_variety(&variety)?;
            let engine = engine.map(|e| e.parse::<Engine>()).transpose()?;
            let task = EnumerationTask::new(spec, parse_bounds(&bounds)?, engine, grid_box)?;
            let curve = task.run()?;
            let mut w = csv::Writer::from_writer(output(out.as_deref())?);
            w.write_record(["B", "count"])?;
            for s in &curve.samples {
                w.write_record([format_rational(&s.bound), s.count.to_string()])?;
                w.flush()?;
            }
        }
        Command::EulerProduct {
            variety,
            truncation,
            out,
        } => {
            let spec = load_variety(&variety)?;
            let p = predict_with(
                &spec,
                PredictOptions {
                    truncation_prime: truncation,
                },
            )?;
            let mut w = csv::Writer::from_writer(output(out.as_deref())?);
            w.write_record(["p", "numerator", "denominator"])?;
            for f in &p.tau_finite.factor_table {
                w.write_record([
                    f.p.to_string(),
                    f.value.numer().to_string(),
                    f.value.denom().to_string(),
                ])?;
            }
            w.flush()?;
        }
        Command::Fit {
            counts,
            fix_a,
            fix_b,
            out,
        } => {
            let curve = read_counts(&counts)?;
            let fit = fit_asymptotic(&curve, fix_a, fix_b)?;
            write_json(
                out.as_deref(),
                &json!({ "schema": FIT_SCHEMA, "model_id": curve.model_id, "fit": fit, "c": fit.c() }),
            )?;
        }
        Command::Compare {
            prediction,
            counts,
            exponent_tol,
            log_power_tol,
            slack,
            out,
        } => {
            let p = read_prediction(&prediction)?;
            let curve = read_counts(&counts)?;
            let tol = Tolerances {
                exponent: exponent_tol,
                log_power: log_power_tol,
                constant_slack: slack,
            };
            let report = compare(&p, &curve, tol);
            let value = serde_json::to_value(&report)?;
            match out {
                Some(path) => {
                    write_json(Some(&path), &value)?;
                    print!("{}", report.table());
                }
                None => {
                    write_json(None, &value)?;
                    eprint!("{}", report.table());
                }
            }
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
