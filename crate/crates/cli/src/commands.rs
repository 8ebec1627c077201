use std::f64::consts::TAU;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use hopf_nfde::amplitude::predict_at;
use hopf_nfde::classify::{
    classify_section, line_t_scan, observed_period, params_at, Protocol, Tolerances,
};
use hopf_nfde::hopf_hopf::{k_grid, scan_hopf_curves};
use hopf_nfde::normalform::region_of;
use hopf_nfde::sim::{self, divergence_exponent, poincare, DelayScheme, Direction, Formulation};
use hopf_nfde::Error;
use serde_json::json;

use crate::config::ConfigFile;
use crate::format::{g17, CsvWriter};
use crate::report::{analyze, AnalyzeReport};
use crate::{Cli, Command, ModelArgs, OutputFormat, PointArgs, RunArgs};

const DEFAULT_EPSILON: f64 = 0.1;
const DEFAULT_MU: f64 = 0.5;
const DEFAULT_K_RANGE: &str = "3:6:0.01";
const DEFAULT_BRACKET: &str = "4.5:5.2";
const DEFAULT_IOTAS: &str = "2.0,2.4,2.5,2.6";

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match &cli.command {
        Command::HopfCurves {
            model,
            k_range,
            j_max,
        } => hopf_curves(&cli, &cfg, model, k_range.clone(), *j_max),
        Command::Analyze { model, point } => {
            let report = resolve_report(&cfg, model, point, None)?;
            let text = serde_json::to_string_pretty(&report)?;
            emit(cli.out.as_deref(), |w| writeln!(w, "{text}"))
        }
        Command::Simulate {
            alpha1,
            alpha2,
            report,
            stride,
            model,
            point,
            run,
        } => {
            let alpha = [
                cfg.resolve(*alpha1, "alpha1", 0.0)?,
                cfg.resolve(*alpha2, "alpha2", 0.0)?,
            ];
            let stride = cfg.resolve(*stride, "stride", 1usize)?;
            if stride == 0 {
                bail!("stride must be positive");
            }
            let report = resolve_report(&cfg, model, point, report.as_deref())?;
            let protocol = resolve_protocol(&cfg, run, Protocol::POINT)?;
            let dir = cli
                .out
                .as_deref()
                .ok_or_else(|| anyhow!("simulate needs --out DIR"))?;
            simulate(dir, &report, alpha, &protocol, stride)
        }
        Command::LineT {
            iota,
            model,
            point,
            run,
        } => {
            let raw = match iota {
                Some(s) => s.clone(),
                None => cfg.resolve(None, "iota", DEFAULT_IOTAS.to_string())?,
            };
            let iotas = parse_list(&raw)?;
            let report = resolve_report(&cfg, model, point, None)?;
            let protocol = resolve_protocol(&cfg, run, Protocol::LINE_T)?;
            line_t(&cli, &report, &iotas, &protocol)
        }
    }
}

fn emit<F>(out: Option<&Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => {
            let mut w = BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            );
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| anyhow!("{what}: cannot parse '{s}' as a number"))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_f64(p, "iota"))
        .collect()
}

fn parse_colon<const N: usize>(s: &str, what: &str) -> Result<[f64; N]> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != N {
        bail!("{what}: expected {N} colon-separated numbers, got '{s}'");
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = parse_f64(p, what)?;
    }
    Ok(out)
}

fn resolve_model(cfg: &ConfigFile, m: &ModelArgs) -> Result<(f64, f64)> {
    Ok((
        cfg.resolve(m.epsilon, "epsilon", DEFAULT_EPSILON)?,
        cfg.resolve(m.mu, "mu", DEFAULT_MU)?,
    ))
}

/// Loads a cached report, or locates the Hopf-Hopf point afresh.
fn resolve_report(
    cfg: &ConfigFile,
    model: &ModelArgs,
    point: &PointArgs,
    cached: Option<&Path>,
) -> Result<AnalyzeReport> {
    if let Some(path) = cached {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading report {}", path.display()))?;
        let report: AnalyzeReport = serde_json::from_str(&text)
            .with_context(|| format!("parsing report {}", path.display()))?;
        for (given, stored, name) in [
            (model.epsilon, report.epsilon, "epsilon"),
            (model.mu, report.mu, "mu"),
        ] {
            if given.is_some_and(|g| g != stored) {
                bail!("{name} differs from the value stored in the report");
            }
        }
        return Ok(report);
    }
    let (epsilon, mu) = resolve_model(cfg, model)?;
    let j_plus = cfg.resolve(point.j_plus, "j_plus", 1u32)?;
    let j_minus = cfg.resolve(point.j_minus, "j_minus", 1u32)?;
    let bracket = match &point.bracket {
        Some(b) => b.clone(),
        None => cfg.resolve(None, "bracket", DEFAULT_BRACKET.to_string())?,
    };
    let [lo, hi] = parse_colon::<2>(&bracket, "bracket")?;
    Ok(analyze(epsilon, mu, j_plus, j_minus, (lo, hi))?)
}

fn resolve_protocol(cfg: &ConfigFile, r: &RunArgs, base: Protocol) -> Result<Protocol> {
    let formulation = match &r.formulation {
        Some(f) => f.clone(),
        None => cfg.resolve(None, "formulation", "theta".to_string())?,
    };
    let scheme = match &r.delay_scheme {
        Some(f) => f.clone(),
        None => cfg.resolve(None, "delay_scheme", "hermite".to_string())?,
    };
    Ok(Protocol {
        x0: cfg.resolve(r.x0, "x0", base.x0)?,
        y0: cfg.resolve(r.y0, "y0", base.y0)?,
        steps_per_delay: cfg.resolve(r.h_div, "h_div", base.steps_per_delay)?,
        t_end: cfg.resolve(r.t_end, "t_end", base.t_end)?,
        transient: cfg.resolve(r.transient, "transient", base.transient)?,
        formulation: formulation
            .parse::<Formulation>()
            .map_err(|e| anyhow!("formulation: {e}"))?,
        scheme: scheme
            .parse::<DelayScheme>()
            .map_err(|e| anyhow!("delay scheme: {e}"))?,
        ..base
    })
}

fn hopf_curves(
    cli: &Cli,
    cfg: &ConfigFile,
    model: &ModelArgs,
    k_range: Option<String>,
    j_max: Option<u32>,
) -> Result<()> {
    let (epsilon, mu) = resolve_model(cfg, model)?;
    let range = match k_range {
        Some(r) => r,
        None => cfg.resolve(None, "k_range", DEFAULT_K_RANGE.to_string())?,
    };
    let [lo, hi, step] = parse_colon::<3>(&range, "k-range")?;
    if !(step > 0.0) {
        bail!("k-range: step must be positive");
    }
    let j_max = cfg.resolve(j_max, "j_max", 3u32)?;
    let table = scan_hopf_curves(epsilon, mu, &k_grid(lo, hi, step), j_max);
    match cli.format {
        OutputFormat::Json => {
            let text = serde_json::to_string_pretty(&table)?;
            emit(cli.out.as_deref(), |w| writeln!(w, "{text}"))
        }
        OutputFormat::Csv => emit(cli.out.as_deref(), |w| {
            let mut csv = CsvWriter::new(w, &["branch_sign", "j", "k", "tau", "omega"])?;
            for r in &table.rows {
                csv.row(&[
                    r.sign.as_str().to_string(),
                    r.j.to_string(),
                    g17(r.k),
                    g17(r.tau),
                    g17(r.omega),
                ])?;
            }
            csv.finish().map(|_| ())
        }),
    }
}

fn simulate(
    dir: &Path,
    report: &AnalyzeReport,
    alpha: [f64; 2],
    protocol: &Protocol,
    stride: usize,
) -> Result<()> {
    let hh = report.hopf_hopf();
    let params = params_at(&hh, report.epsilon, report.mu, alpha)?;
    let cfg = protocol.config(params);
    let traj = sim::simulate(&cfg)?;
    let section = poincare(&traj, Direction::Both, protocol.transient);
    let classification = match classify_section(&section, &Tolerances::default(), || {
        divergence_exponent(
            &cfg,
            protocol.delta0,
            protocol.renorm_t,
            protocol.n_renorm(),
        )
    }) {
        Ok(c) => Some(c),
        Err(Error::InsufficientData(_)) => None,
        Err(e) => return Err(e.into()),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let path = dir.join("trajectory.csv");
    let mut csv = CsvWriter::new(create(&path)?, &["t", "x", "y", "theta", "y_delayed"])?;
    for i in (0..traj.len()).step_by(stride) {
        csv.row(&[
            g17(traj.time(i)),
            g17(traj.x[i]),
            g17(traj.y[i]),
            g17(traj.theta[i]),
            g17(traj.y_delayed[i]),
        ])?;
    }
    csv.finish()?;

    let path = dir.join("section.csv");
    let mut csv = CsvWriter::new(create(&path)?, &["t", "x", "y_delayed", "direction"])?;
    for c in &section.crossings {
        csv.row(&[
            g17(c.t),
            g17(c.x),
            g17(c.y_delayed),
            if c.upward { "up" } else { "down" }.to_string(),
        ])?;
    }
    csv.finish()?;

    let (region, prediction) = match (report.lines(), alpha == [0.0, 0.0]) {
        (Some(lines), false) => match region_of(alpha[0], alpha[1], &lines) {
            Ok(region) => {
                let p = predict_at(&report.unfolding(), region, alpha)?;
                (Some(region.to_string()), Some(p))
            }
            Err(_) => (None, None),
        },
        _ => (None, None),
    };
    let expected_period = prediction
        .as_ref()
        .and_then(|p| p.periodic_mode())
        .map(|m| TAU / if m == 1 { report.omega1 } else { report.omega2 });
    let summary = json!({
        "label": classification.map_or("insufficient_data", |c| c.class.as_str()),
        "stats": classification.map(|c| c.stats),
        "crossings": section.len(),
        "alpha": alpha,
        "k": params.k,
        "tau": params.tau,
        "h": cfg.h(),
        "formulation": protocol.formulation,
        "delay_scheme": protocol.scheme,
        "observed_period": observed_period(&section),
        "max_abs_x": traj.max_abs_x(),
        "region": region,
        "predicted_attractor": prediction.as_ref().map(|p| p.attractor.as_str()),
        "predicted_mode": prediction.as_ref().and_then(|p| p.periodic_mode()),
        "expected_period": expected_period,
    });
    let path = dir.join("classification.json");
    let mut w = create(&path)?;
    writeln!(w, "{}", serde_json::to_string_pretty(&summary)?)?;
    w.flush()?;
    Ok(())
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn line_t(cli: &Cli, report: &AnalyzeReport, iotas: &[f64], protocol: &Protocol) -> Result<()> {
    let rows = line_t_scan(
        &report.hopf_hopf(),
        report.epsilon,
        report.mu,
        iotas,
        protocol,
        &Tolerances::default(),
    )?;
    match cli.format {
        OutputFormat::Json => {
            let text = serde_json::to_string_pretty(&rows)?;
            emit(cli.out.as_deref(), |w| writeln!(w, "{text}"))
        }
        OutputFormat::Csv => emit(cli.out.as_deref(), |w| {
            let mut csv = CsvWriter::new(
                w,
                &[
                    "iota",
                    "k",
                    "tau",
                    "label",
                    "divergence_exponent",
                    "max_abs_x",
                ],
            )?;
            let opt = |v: Option<f64>| v.map(g17).unwrap_or_default();
            for r in &rows {
                csv.row(&[
                    g17(r.iota),
                    g17(r.k),
                    g17(r.tau),
                    r.class.map_or("skipped", |c| c.as_str()).to_string(),
                    opt(r.divergence),
                    opt(r.max_abs_x),
                ])?;
            }
            csv.finish().map(|_| ())
        }),
    }
}
