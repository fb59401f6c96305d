use std::fs;
use std::path::Path;

use clap::Parser;
use peakon_core::evolve::{
    self, mollified_peakon_initial, run_with, CamassaHolmField, GchField, NovikovField, ShapeReference, SolverConfig,
    Trajectory, VectorField,
};
use peakon_core::green::{self, assembly};
use peakon_core::model::{self, make_peakon, AmplitudeSolution, Branch, Domain, ModelParams};
use peakon_core::residual::{self, CertifyOptions, Verdict};
use peakon_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::manifest::{canonical_json, RunManifest};
use crate::{
    CertifyArgs, Cli, CliError, Command, ConvolveArgs, EvolveArgs, Identity, PeakonArgs, ReplayArgs, SweepArgs,
};

/// Within this distance of a kink the convolution table skips the sample.
const KINK_SKIP: f64 = 1e-3;
const CONVOLVE_QUAD_TOL: f64 = 1e-12;
const REDUCTION_TOL: f64 = 1e-12;
const SWEEP_RANGE: f64 = 3.0;

pub fn dispatch(cli: &Cli, arguments: Vec<String>) -> Result<(), CliError> {
    let out = cli.out_dir.as_path();
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    match &cli.command {
        Command::Peakon(a) => peakon(a, out, arguments),
        Command::Certify(a) => certify(a, out, arguments),
        Command::Convolve(a) => convolve(a, out, arguments),
        Command::Evolve(a) => evolve_cmd(a, out, arguments),
        Command::Sweep(a) => sweep(a, out, arguments),
        Command::Replay(a) => replay(a, out),
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<String, CliError> {
    let text = canonical_json(value);
    fs::write(path, format!("{text}\n")).map_err(|e| CliError::io(path, e))?;
    Ok(text)
}

#[derive(Serialize)]
struct AmplitudeReport {
    domain: Domain,
    branch: Branch,
    params: ModelParams,
    roots: Vec<f64>,
    discriminant: f64,
    exists: bool,
    amplitude: Option<f64>,
    reason: Option<String>,
}

fn peakon(args: &PeakonArgs, out: &Path, arguments: Vec<String>) -> Result<(), CliError> {
    let params = args.params.params()?;
    let domain: Domain = args.domain.into();
    let branch: Branch = args.branch.into();
    if args.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let manifest = RunManifest::new("peakon", Some(params), None, None, arguments);
    let sol = match domain {
        Domain::Line => model::line_amplitudes(&params),
        Domain::Circle => model::periodic_amplitudes(&params),
    }?;
    let amplitude = sol.branch(branch);
    let reason = (!sol.exists).then(|| format!("discriminant {}", sol.discriminant));
    let report = AmplitudeReport {
        domain,
        branch,
        params,
        roots: sol.roots.clone(),
        discriminant: sol.discriminant,
        exists: sol.exists,
        amplitude,
        reason,
    };
    println!("{}", write_json(&out.join("amplitude.json"), &report)?);
    let mut outputs = vec!["amplitude.json".to_string()];

    let Some(a) = amplitude else {
        manifest.finish(out, &outputs)?;
        return Err(Error::NoRealAmplitude { discriminant: sol.discriminant }.into());
    };
    let prof = model::TravelingProfile::new(domain, a, params.c);
    let n = args.samples;
    let xs: Vec<f64> = match domain {
        Domain::Line => (0..n).map(|i| -10.0 + 20.0 * i as f64 / (n - 1) as f64).collect(),
        Domain::Circle => (0..n).map(|i| i as f64 / n as f64).collect(),
    };
    write_csv(
        &out.join("profile.csv"),
        &["x", "u"],
        xs.iter().map(|&x| vec![num(x), num(prof.shape(x))]),
    )?;
    outputs.push("profile.csv".into());
    manifest.finish(out, &outputs)
}

fn certify(args: &CertifyArgs, out: &Path, arguments: Vec<String>) -> Result<(), CliError> {
    let params = args.params.params()?;
    let manifest = RunManifest::new("certify", Some(params), None, None, arguments);
    let exact = make_peakon(&params, args.domain.into(), args.branch.into())?;
    let candidate = exact.with_amplitude(exact.amplitude * (1.0 + args.perturb));
    let options = CertifyOptions {
        tolerance: args.tolerance,
        horizon: args.horizon,
        ..CertifyOptions::default()
    };
    let report = residual::certify(&candidate, &params, &options)?;
    println!("{}", write_json(&out.join("report.json"), &report)?);
    manifest.finish(out, &["report.json".to_string()])?;

    let expected = if args.perturb == 0.0 { Verdict::Certified } else { Verdict::Rejected };
    if report.verdict != expected {
        return Err(CliError::Mismatch(format!(
            "verdict {:?} with perturb {}, expected {:?}",
            report.verdict, args.perturb, expected
        )));
    }
    Ok(())
}

impl Identity {
    fn name(self) -> &'static str {
        match self {
            Identity::LineCubic => "line_cubic",
            Identity::LineQuadratic => "line_quadratic",
            Identity::CircleCubic => "circle_cubic",
            Identity::CircleSh2 => "circle_sh2",
            Identity::CircleQuadratic => "circle_quadratic",
        }
    }

    fn domain(self) -> Domain {
        match self {
            Identity::LineCubic | Identity::LineQuadratic => Domain::Line,
            _ => Domain::Circle,
        }
    }

    fn closed_form(self, a: f64, k: f64, s: f64) -> Result<f64, Error> {
        match self {
            Identity::LineCubic => Ok(green::closedform_line_cubic(a, k, s)),
            Identity::LineQuadratic => Ok(green::closedform_line_quadratic(a, k, s)),
            Identity::CircleCubic => {
                if s == s.floor() {
                    return Err(Error::AtKink(s));
                }
                Ok(green::closedform_circle_cubic(a, k, s))
            }
            Identity::CircleSh2 => green::closedform_circle_sh2(s),
            Identity::CircleQuadratic => green::closedform_circle_quadratic(a, k, s),
        }
    }

    fn quadrature(self, a: f64, k: f64, s: f64) -> Result<f64, Error> {
        let tol = CONVOLVE_QUAD_TOL;
        match self {
            Identity::LineCubic => assembly::line_cubic(a, k, s, tol),
            Identity::LineQuadratic => assembly::line_quadratic(a, k, s, tol),
            Identity::CircleCubic => assembly::circle_cubic(a, k, s, tol),
            Identity::CircleSh2 => assembly::circle_sh2(s, tol),
            Identity::CircleQuadratic => assembly::circle_quadratic(a, k, s, tol),
        }
    }
}

fn near_kink(domain: Domain, s: f64) -> bool {
    match domain {
        Domain::Line => s.abs() < KINK_SKIP,
        Domain::Circle => (s - s.round()).abs() < KINK_SKIP,
    }
}

fn convolve(args: &ConvolveArgs, out: &Path, arguments: Vec<String>) -> Result<(), CliError> {
    let id = args.identity;
    let domain = id.domain();
    let manifest = RunManifest::new("convolve", None, None, None, arguments);
    let points: Vec<f64> = match &args.points {
        Some(p) => p.clone(),
        None => {
            if args.samples < 2 {
                return Err(CliError::Usage("--samples must be at least 2".into()));
            }
            let n = args.samples;
            let (lo, hi) = match domain {
                Domain::Line => (-5.0, 5.0),
                Domain::Circle => (0.0, 1.0),
            };
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .filter(|&s| !near_kink(domain, s))
                .collect()
        }
    };
    let rows: Vec<(f64, f64, f64)> = points
        .par_iter()
        .map(|&s| Ok((s, id.closed_form(args.amplitude, args.coeff, s)?, id.quadrature(args.amplitude, args.coeff, s)?)))
        .collect::<Result<_, Error>>()?;

    let name = format!("convolve_{}.csv", id.name());
    write_csv(
        &out.join(&name),
        &["s", "closed_form", "quadrature", "abs_diff"],
        rows.iter().map(|&(s, cf, q)| vec![num(s), num(cf), num(q), num((cf - q).abs())]),
    )?;
    manifest.finish(out, &[name])?;

    let worst = rows.iter().copied().fold(None::<(f64, f64)>, |w, (s, cf, q)| {
        let d = (cf - q).abs();
        match w {
            Some((_, wd)) if wd >= d => w,
            _ => Some((s, d)),
        }
    });
    match worst {
        Some((s, d)) if !(d <= args.tolerance) => Err(CliError::Mismatch(format!(
            "{}: max abs_diff {d:e} at s = {s} exceeds {:e}",
            id.name(),
            args.tolerance
        ))),
        Some((s, d)) => {
            println!("{}: {} points, max abs_diff {d:e} at s = {s}", id.name(), rows.len());
            Ok(())
        }
        None => {
            println!("{}: no points", id.name());
            Ok(())
        }
    }
}

fn max_snapshot_diff(a: &Trajectory, b: &Trajectory) -> Option<f64> {
    if a.snapshots.len() != b.snapshots.len() {
        return None;
    }
    Some(a.snapshots.iter().zip(&b.snapshots).fold(0.0f64, |m, (x, y)| {
        x.u.iter().zip(&y.u).fold(m, |m, (p, q)| m.max((p - q).abs()))
    }))
}

fn evolve_cmd(args: &EvolveArgs, out: &Path, arguments: Vec<String>) -> Result<(), CliError> {
    let params = args.params.params()?;
    let config = SolverConfig {
        n: args.n,
        dt: args.dt,
        t_end: args.t_end,
        dealias: !args.no_dealias,
        filter_strength: args.filter_strength,
        cfl_safety: args.cfl_safety,
        record_every: args.record_every,
    };
    let grid = config.validate()?;
    if args.check_reduction && params.k1 != 0.0 && params.k2 != 0.0 {
        return Err(CliError::Usage("--check-reduction needs k1 = 0 or k2 = 0".into()));
    }
    let manifest = RunManifest::new("evolve", Some(params), Some(config), None, arguments);
    let branch: Branch = args.branch.into();
    let profile = make_peakon(&params, Domain::Circle, branch)?;
    let cert = residual::certify(&profile, &params, &CertifyOptions::default())?;
    if cert.verdict != Verdict::Certified {
        return Err(CliError::Mismatch(format!("initial peakon not certified: {cert:?}")));
    }
    let initial = mollified_peakon_initial(&params, grid, branch, config.filter_strength)?;
    let reference = ShapeReference::Profile(profile);
    let field = GchField::new(params, grid, config.dealias);
    let tr = run_with(&config, &field, &initial, &reference)?;

    let xs = grid.points();
    write_csv(
        &out.join("snapshots.csv"),
        &["t", "x", "u"],
        tr.snapshots
            .iter()
            .flat_map(|s| xs.iter().zip(&s.u).map(move |(&x, &u)| vec![num(s.time), num(x), num(u)])),
    )?;
    write_csv(
        &out.join("diagnostics.csv"),
        &["t", "h1_energy", "max_u", "peak_position", "shape_error", "mass_m"],
        tr.records.iter().map(|r| {
            vec![
                num(r.time),
                num(r.h1_energy),
                num(r.max_u),
                num(r.peak_position),
                num(r.shape_error),
                num(r.mass_m),
            ]
        }),
    )?;
    manifest.finish(out, &["snapshots.csv".to_string(), "diagnostics.csv".to_string()])?;

    let last = tr.records.last().expect("run records the initial state");
    println!("final_time {}", num(last.time));
    println!("shape_error {}", num(last.shape_error));
    println!("h1_relative_drift {}", num(tr.h1_relative_drift()));
    if let Ok(est) = evolve::peak_speed_estimate(&tr.records) {
        if !est.flat {
            println!("peak_speed {}", num(est.speed));
        }
    }

    if args.check_reduction {
        let reduced: Box<dyn VectorField> = if params.k1 == 0.0 {
            Box::new(CamassaHolmField::new(params.k2, grid, config.dealias))
        } else {
            Box::new(NovikovField::new(params.k1, grid, config.dealias))
        };
        let other = run_with(&config, reduced.as_ref(), &initial, &reference)?;
        match max_snapshot_diff(&tr, &other) {
            Some(d) if d <= REDUCTION_TOL => println!("reduction_max_diff {}", num(d)),
            Some(d) => return Err(CliError::Mismatch(format!("reduced field differs by {d:e}"))),
            None => return Err(CliError::Mismatch("reduced run has a different snapshot count".into())),
        }
    }
    Ok(())
}

fn existence(p: &ModelParams) -> (f64, f64, usize, usize) {
    let count = |s: Result<AmplitudeSolution, Error>| s.map(|s| s.roots.len()).unwrap_or(0);
    (
        p.line_discriminant(),
        p.periodic_discriminant(),
        count(model::line_amplitudes(p)),
        count(model::periodic_amplitudes(p)),
    )
}

fn sweep(args: &SweepArgs, out: &Path, arguments: Vec<String>) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for &k1 in &args.k1 {
        for &k2 in &args.k2 {
            for &c in &args.c {
                rows.push(ModelParams::new(k1, k2, c)?);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for _ in 0..args.random {
        let mut draw = || rng.gen_range(-SWEEP_RANGE..SWEEP_RANGE);
        rows.push(ModelParams::new(draw(), draw(), draw())?);
    }
    if rows.is_empty() {
        return Err(CliError::Usage("sweep needs --k1/--k2/--c lists or --random".into()));
    }
    let manifest = RunManifest::new("sweep", None, None, Some(args.seed), arguments);
    // par_iter().map().collect() keeps input order
    let table: Vec<_> = rows.par_iter().map(|p| (*p, existence(p))).collect();
    write_csv(
        &out.join("sweep.csv"),
        &["k1", "k2", "c", "disc_line", "disc_circle", "n_roots_line", "n_roots_circle"],
        table.iter().map(|(p, (dl, dc, nl, nc))| {
            vec![num(p.k1), num(p.k2), num(p.c), num(*dl), num(*dc), nl.to_string(), nc.to_string()]
        }),
    )?;
    manifest.finish(out, &["sweep.csv".to_string()])?;
    println!("sweep: {} rows", table.len());
    Ok(())
}

fn replay(args: &ReplayArgs, out: &Path) -> Result<(), CliError> {
    let recorded = RunManifest::load(&args.manifest)?;
    if recorded.command == "replay" {
        return Err(CliError::Usage("cannot replay a replay".into()));
    }
    if recorded.tool_version != env!("CARGO_PKG_VERSION") {
        eprintln!(
            "warning: manifest written by version {}, replaying with {}",
            recorded.tool_version,
            env!("CARGO_PKG_VERSION")
        );
    }
    let mut argv = vec!["peakon-lab".to_string(), "--out-dir".to_string(), out.display().to_string()];
    argv.extend(recorded.arguments.iter().cloned());
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Usage(format!("recorded arguments: {e}")))?;
    let outcome = dispatch(&cli, recorded.arguments.clone());

    let fresh = RunManifest::load(&out.join(crate::manifest::MANIFEST_FILE))?;
    let mut differing = Vec::new();
    for (name, hash) in &recorded.output_sha256 {
        if fresh.output_sha256.get(name) != Some(hash) {
            differing.push(name.clone());
        }
    }
    if fresh.input_hash != recorded.input_hash {
        differing.push("input_hash".into());
    }
    if !differing.is_empty() {
        return Err(CliError::Mismatch(format!("replay differs: {}", differing.join(", "))));
    }
    println!("replay: {} outputs identical", recorded.output_sha256.len());
    outcome
}
