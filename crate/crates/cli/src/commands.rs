use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use trigsos::bench::run_bench;
use trigsos::cert::{certificate_build, certificate_verify, form_from_squares, sampled_norm_sq, Certificate, CertificateCheck};
use trigsos::extensions::{interval_certify, project_sos, sosopt_feasible, IntervalSpec, LinearCoeffMap};
use trigsos::instance::{gen_instance, InstanceSpec};
use trigsos::poly::{BinaryForm, FormPair, TrigPoly};
use trigsos::solver::{decompose, SolveTrace, SolverConfig};

use crate::{Command, Format, SolveArgs, Status};

/// Thread count for the rayon pool.
pub const THREADS_ENV: &str = "TRIGSOS_THREADS";

pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().with_context(|| format!("{THREADS_ENV}={v} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

/// A bare polynomial or the output of `gen`.
#[derive(Deserialize)]
#[serde(untagged)]
enum PolyInput {
    Wrapped { poly: TrigPoly },
    Bare(TrigPoly),
}

#[derive(Serialize)]
struct GenOutput {
    degree: usize,
    seed: u64,
    min_offset: f64,
    min_offset_is_default: bool,
    poly: TrigPoly,
}

#[derive(Deserialize)]
struct IntervalInput {
    p: Vec<f64>,
    spec: IntervalSpec,
}

#[derive(Deserialize)]
struct CertInput {
    u: FormPair,
    squares: Vec<BinaryForm>,
    #[serde(default = "default_eta")]
    eta: f64,
    #[serde(default)]
    certificate: Option<Certificate>,
}

fn default_eta() -> f64 {
    10.0
}

#[derive(Serialize)]
struct CertOutput {
    certificate: Certificate,
    check: CertificateCheck,
    tol: f64,
    passed: bool,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_out(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn write_json<T: Serialize>(out: Option<&PathBuf>, value: &T) -> Result<()> {
    write_out(out, &serde_json::to_string_pretty(value)?)
}

fn write_trace(args: &SolveArgs, trace: &SolveTrace) -> Result<()> {
    if let Some(path) = &args.trace {
        fs::write(path, trace.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn config(args: &SolveArgs) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    if let Some(r) = args.rank {
        cfg.rank = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(m) = args.max_iters {
        cfg.max_iters = m;
    }
    cfg
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Ok
    } else {
        Status::AboveTol
    }
}

pub fn run(cmd: Command) -> Result<Status> {
    match cmd {
        Command::Gen { degree, seed, min_offset, out } => {
            let spec = InstanceSpec { degree, seed, min_offset };
            let poly = gen_instance(&spec)?;
            let std = TrigPoly::new(0.0, poly.cos_coeffs().to_vec(), poly.sin_coeffs().to_vec())?.norm_sq().sqrt();
            let output = GenOutput {
                degree,
                seed,
                min_offset: min_offset.unwrap_or(0.1 * std),
                min_offset_is_default: min_offset.is_none(),
                poly,
            };
            write_json(out.as_ref(), &output)?;
            Ok(Status::Ok)
        }
        Command::Decompose { input, degree, tol, solve } => {
            let p = match (input, degree) {
                (Some(path), _) => match read_json::<PolyInput>(&path)? {
                    PolyInput::Wrapped { poly } | PolyInput::Bare(poly) => poly,
                },
                (None, Some(n)) => gen_instance(&InstanceSpec::new(n, solve.seed.unwrap_or(0)))?,
                (None, None) => bail!("either an input file or --degree is required"),
            };
            let d = decompose(&p, &config(&solve))?;
            write_trace(&solve, &d.trace)?;
            write_json(solve.out.as_ref(), &d)?;
            Ok(status(d.rel_residual <= tol))
        }
        Command::Project { input, tol, solve } => {
            let p = match read_json::<PolyInput>(&input)? {
                PolyInput::Wrapped { poly } | PolyInput::Bare(poly) => poly,
            };
            let out = project_sos(&p, &config(&solve))?;
            write_trace(&solve, &out.trace)?;
            write_json(solve.out.as_ref(), &out)?;
            Ok(status(out.residual <= tol * p.norm_sq().max(f64::MIN_POSITIVE)))
        }
        Command::CertifyInterval { input, tol, solve } => {
            let inp: IntervalInput = read_json(&input)?;
            let out = interval_certify(&inp.p, &inp.spec, &config(&solve), tol)?;
            write_trace(&solve, &out.trace)?;
            write_json(solve.out.as_ref(), &out)?;
            Ok(status(out.success))
        }
        Command::Sosopt { input, tol, solve } => {
            let map: LinearCoeffMap = read_json(&input)?;
            let out = sosopt_feasible(&map, &config(&solve))?;
            write_trace(&solve, &out.trace)?;
            write_json(solve.out.as_ref(), &out)?;
            let b_sq: f64 = map.b.iter().map(|v| v * v).sum();
            Ok(status(out.residual <= tol * b_sq.max(1.0)))
        }
        Command::CheckCert { input, tol, out } => {
            let inp: CertInput = read_json(&input)?;
            let p = form_from_squares(&inp.squares)?;
            let certificate = match inp.certificate {
                Some(c) => c,
                None => certificate_build(&inp.u, &inp.squares, inp.eta)?,
            };
            let check = certificate_verify(&certificate, &inp.u, &p)?;
            let passed = check.identity_residual <= tol * (1.0 + sampled_norm_sq(&p));
            write_json(out.as_ref(), &CertOutput { certificate, check, tol, passed })?;
            Ok(status(passed))
        }
        Command::Bench { degree, rank, runs, seed, max_iters, format, out } => {
            if runs == 0 {
                bail!("--runs must be at least 1");
            }
            let mut cfg = SolverConfig::default();
            if let Some(m) = max_iters {
                cfg.max_iters = m;
            }
            let report = run_bench(&degree, &rank, runs, seed, &cfg);
            match format {
                Format::Json => write_json(out.as_ref(), &report)?,
                Format::Csv => {
                    write_out(out.as_ref(), &report.rows_csv())?;
                    if let Some(path) = &out {
                        let agg = path.with_extension("summary.csv");
                        fs::write(&agg, report.aggregates_csv()).with_context(|| format!("writing {}", agg.display()))?;
                    } else {
                        println!("{}", report.aggregates_csv());
                    }
                }
            }
            Ok(Status::Ok)
        }
    }
}
