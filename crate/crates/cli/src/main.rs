//! `catspec`: experiment runners over the cat-state spectroscopy library.
//!
//! Subcommands mirror the analysis artifacts: fringe scans, line-profile
//! spectra, sensitivity tables, heating diagnostics, oracle cross-checks and
//! pulse-sequence validation. All stochastic runs require an explicit
//! `--seed` and are bytewise reproducible.

mod config;
mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use catspec::fitting::{fit_gaussian, fit_sinusoid, WeightedSeries};
use catspec::fock;
use catspec::lineprofile::{self, DriveParams};
use catspec::montecarlo::{self, RngStream, WalkProfile, WalkShape};
use catspec::sequence;
use catspec::signal;
use catspec::statistics;

use config::RunConfig;

#[derive(Parser)]
#[command(name = "catspec", version, about = "Cat-state spectroscopy simulator")]
struct Cli {
    /// Configuration file (key = value with [section] headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// RNG seed; required for any stochastic run.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Shots per sampled point (0 = analytic only where supported).
    #[arg(long, global = true)]
    shots: Option<usize>,

    /// Output directory for CSV/SVG artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Also emit SVG plots next to the CSV files.
    #[arg(long, global = true)]
    plot: bool,

    /// Run the command's consistency checks; exit nonzero on failure.
    #[arg(long, global = true)]
    check: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interference fringes versus the scatter phase.
    Fringe {
        /// Number of scatter-phase points over one fringe.
        #[arg(long, default_value_t = 32)]
        points: usize,
    },
    /// Line-profile scan at the three drive powers, with Gaussian fits.
    Spectrum,
    /// Signal/noise/sensitivity table for the five detection methods.
    Sensitivity {
        /// Recompute from the published (A, B, N) inputs instead of
        /// simulating.
        #[arg(long)]
        from_paper: bool,
    },
    /// Heating random-walk variance against the closed-form laws.
    Heating {
        #[arg(long, default_value_t = 10_000)]
        walks: usize,
    },
    /// Exact Fock-space protocol against the analytic signal model.
    Oracle {
        #[arg(long, default_value_t = 64)]
        dim: usize,
    },
    /// Parse, validate and schedule a pulse-sequence file.
    Sequence {
        path: PathBuf,
        /// Number of sweep delays across one motional period.
        #[arg(long, default_value_t = 16)]
        sweep: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: &Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output dir {}", cli.out.display()))?;
    match cli.command {
        Command::Fringe { points } => cmd_fringe(cli, &config, points),
        Command::Spectrum => cmd_spectrum(cli, &config),
        Command::Sensitivity { from_paper } => cmd_sensitivity(cli, &config, from_paper),
        Command::Heating { walks } => cmd_heating(cli, &config, walks),
        Command::Oracle { dim } => cmd_oracle(cli, &config, dim),
        Command::Sequence { ref path, sweep } => cmd_sequence(cli, path, sweep),
    }
}

fn require_seed(cli: &Cli) -> Result<u64> {
    cli.seed
        .ok_or_else(|| anyhow::anyhow!("this run is stochastic; pass --seed"))
}

fn write_artifact(cli: &Cli, name: &str, contents: &str) -> Result<PathBuf> {
    let path = cli.out.join(name);
    std::fs::write(&path, contents)
        .with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn phi_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| 2.0 * std::f64::consts::PI * i as f64 / points as f64)
        .collect()
}

fn cmd_fringe(cli: &Cli, config: &RunConfig, points: usize) -> Result<()> {
    if points < 4 {
        bail!("fringe needs at least 4 points");
    }
    let params = &config.protocol;
    let shots = cli.shots.unwrap_or(4200);
    let grid = phi_grid(points);

    let mut csv = String::from("phi_sc,sz,sy,sz_err,sy_err,analytic_sz,analytic_sy\n");
    let mut sampled: Vec<(f64, f64, f64, f64, f64)> = Vec::new();
    let mut rng = if shots > 0 { Some(RngStream::new(require_seed(cli)?, 0).rng()) } else { None };
    for &phi in &grid {
        let a = signal::expectation(params, phi, true);
        if let Some(rng) = rng.as_mut() {
            let est = montecarlo::simulate_protocol(params, phi, shots, 1.0, rng)
                .map_err(anyhow::Error::from)?;
            sampled.push((phi, est.sz, est.sy, est.sz_err, est.sy_err));
            writeln!(
                csv,
                "{phi:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9}",
                est.sz, est.sy, est.sz_err, est.sy_err, a.sz, a.sy
            )?;
        } else {
            writeln!(csv, "{phi:.9},,,,,{:.9},{:.9}", a.sz, a.sy)?;
        }
    }
    write_artifact(cli, "fringe.csv", &csv)?;

    // Fit both fringes; the sigma_z fringe runs at twice the frequency.
    let analytic_sy: Vec<f64> = grid.iter().map(|&p| signal::expectation(params, p, true).sy).collect();
    let analytic_sz: Vec<f64> = grid.iter().map(|&p| signal::expectation(params, p, true).sz).collect();
    let two_pi = 2.0 * std::f64::consts::PI;
    let fy = fit_sinusoid(&WeightedSeries::unweighted(grid.clone(), analytic_sy)?, two_pi)?;
    let fz = fit_sinusoid(&WeightedSeries::unweighted(grid.clone(), analytic_sz)?, two_pi / 2.0)?;
    println!(
        "fit sigma_y: amplitude {:.4} period {:.6}; fit sigma_z: amplitude {:.4} period {:.6}; period ratio {:.6}",
        fy.amplitude, fy.period, fz.amplitude, fz.period, fz.period / fy.period
    );

    if cli.plot {
        let analytic: Vec<(f64, f64)> = grid
            .iter()
            .map(|&p| (p, signal::expectation(params, p, true).sy))
            .collect();
        let pts: Vec<(f64, f64)> = sampled.iter().map(|&(p, _, sy, _, _)| (p, sy)).collect();
        let svg = svg::line_plot("sigma_y fringe", "phi_sc [rad]", "<sigma_y>", &analytic, &pts);
        write_artifact(cli, "fringe.svg", &svg)?;
    }
    if cli.check {
        let ratio = fz.period / fy.period;
        if (ratio - 0.5).abs() > 0.02 {
            bail!("check failed: sigma_z/sigma_y period ratio {ratio}");
        }
        println!("check: period ratio {ratio:.4} ~ 0.5");
    }
    Ok(())
}

fn cmd_spectrum(cli: &Cli, config: &RunConfig) -> Result<()> {
    let grid = lineprofile::default_scan_grid::<f64>();
    let mut csv = String::from("power,delta_hz,a_y\n");
    let mut fits = String::from("power,center_mhz,fwhm_mhz,amplitude,offset\n");
    let mut widths = Vec::new();
    let mut curves = Vec::new();
    for power in DriveParams::<f64>::scan_powers() {
        let mut drive = config.drive;
        drive.power = power;
        let scan = lineprofile::spectrum_scan(&config.spectral, &drive, &config.protocol, &grid)
            .map_err(anyhow::Error::from)?;
        for &(d, a) in &scan {
            writeln!(csv, "{power},{d:.3},{a:.9}")?;
        }
        let x: Vec<f64> = scan.iter().map(|&(d, _)| d / 1e6).collect();
        let y: Vec<f64> = scan.iter().map(|&(_, a)| a).collect();
        let fit = fit_gaussian(&WeightedSeries::unweighted(x, y)?)?;
        writeln!(
            fits,
            "{power},{:.4},{:.4},{:.6},{:.6}",
            fit.center,
            fit.fwhm(),
            fit.amplitude,
            fit.offset
        )?;
        println!("power {power}: fitted FWHM {:.2} MHz", fit.fwhm());
        widths.push(fit.fwhm());
        curves.push(scan);
    }
    write_artifact(cli, "spectrum.csv", &csv)?;
    write_artifact(cli, "spectrum_fits.csv", &fits)?;
    if cli.plot {
        let line: Vec<(f64, f64)> = curves[1].iter().map(|&(d, a)| (d / 1e6, a)).collect();
        let svg = svg::line_plot("line profile", "detuning [MHz]", "A_y", &line, &[]);
        write_artifact(cli, "spectrum.svg", &svg)?;
    }
    if cli.check {
        if !(widths[0] < widths[1] && widths[1] < widths[2]) {
            bail!("check failed: widths not increasing with power: {widths:?}");
        }
        println!("check: power broadening ordering holds");
    }
    Ok(())
}

fn cmd_sensitivity(cli: &Cli, config: &RunConfig, from_paper: bool) -> Result<()> {
    let reports = if from_paper {
        statistics::published_reports().map_err(anyhow::Error::from)?
    } else {
        let mut rng = RngStream::new(require_seed(cli)?, 0).rng();
        statistics::compare_methods(&config.methods, &mut rng).map_err(anyhow::Error::from)?
    };
    let csv = statistics::reports_to_csv(&reports);
    print!("{csv}");
    let name = if from_paper { "sensitivity_published.csv" } else { "sensitivity.csv" };
    write_artifact(cli, name, &csv)?;
    if cli.check {
        let beta: Vec<f64> = reports.iter().map(|r| r.beta).collect();
        let ordered = beta[0] < beta[1].min(beta[4])
            && beta[1].max(beta[4]) < beta[2]
            && beta[2] < beta[3];
        if !ordered {
            bail!("check failed: sensitivity ordering violated: {beta:?}");
        }
        println!("check: method ordering holds, cat advantage {:.1}x", beta[3] / beta[0]);
    }
    Ok(())
}

fn cmd_heating(cli: &Cli, config: &RunConfig, walks: usize) -> Result<()> {
    let p = &config.protocol;
    let rate = p.heating_rate;
    let mut csv = String::from("shape,mc_variance,mc_se,analytic_variance\n");
    let mut rng = RngStream::new(require_seed(cli)?, 0).rng();
    let mut ok = true;
    for (label, shape, tau_wait) in [
        ("triangle", WalkShape::Triangle, 0.0),
        ("trapezoid", WalkShape::Trapezoid, p.tau_wait),
    ] {
        let profile = WalkProfile::<f64>::new(shape, p.tau_cat, tau_wait, p.n_cat(), 1000)
            .map_err(anyhow::Error::from)?;
        let (var, se) = montecarlo::heating_walk_variance(&profile, rate, walks, &mut rng)
            .map_err(anyhow::Error::from)?;
        let analytic = profile.analytic_variance(rate);
        writeln!(csv, "{label},{var:.9e},{se:.9e},{analytic:.9e}")?;
        println!("{label}: MC variance {var:.4e} vs analytic {analytic:.4e} (se {se:.1e})");
        if (var - analytic).abs() > 3.0 * se + 1e-12 {
            ok = false;
        }
    }
    write_artifact(cli, "heating.csv", &csv)?;
    if cli.check {
        if !ok {
            bail!("check failed: walk variance disagrees with the closed form");
        }
        println!("check: walk variances within 3 SE of the closed forms");
    }
    Ok(())
}

fn cmd_oracle(cli: &Cli, config: &RunConfig, dim: usize) -> Result<()> {
    let mut params = config.protocol;
    params.heating_rate = 0.0;
    let grid = phi_grid(16);
    let mut oracle =
        fock::CatProtocolOracle::new(params.alpha, dim).map_err(anyhow::Error::from)?;
    let mut csv = String::from("phi_sc,exact_sz,exact_sy,analytic_sz,analytic_sy\n");
    let mut worst: f64 = 0.0;
    for &phi in &grid {
        let exact =
            fock::emission_averaged_exact(&mut oracle, params.eta_abs, params.eta_em, phi, 41)
                .map_err(anyhow::Error::from)?;
        let analytic = signal::expectation(&params, phi, true);
        worst = worst
            .max((exact.sz - analytic.sz).abs())
            .max((exact.sy - analytic.sy).abs());
        writeln!(
            csv,
            "{phi:.9},{:.12},{:.12},{:.12},{:.12}",
            exact.sz, exact.sy, analytic.sz, analytic.sy
        )?;
    }
    write_artifact(cli, "oracle.csv", &csv)?;
    println!("max |exact - analytic| = {worst:.3e}");
    if cli.check {
        if worst >= 1e-6 {
            bail!("check failed: oracle deviation {worst:.3e} >= 1e-6");
        }
        println!("check: oracle within 1e-6 of the analytic model");
    }
    Ok(())
}

fn cmd_sequence(cli: &Cli, path: &Path, sweep: usize) -> Result<()> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let program = sequence::parse(&text).map_err(anyhow::Error::from)?;
    let diags = sequence::validate(&program);
    for d in &diags {
        let sev = match d.severity {
            sequence::Severity::Warning => "warning",
            sequence::Severity::Error => "error",
        };
        match d.step_index {
            Some(i) => println!("{sev}: step {}: {}", i + 1, d.message),
            None => println!("{sev}: {}", d.message),
        }
    }
    if sequence::has_errors(&diags) {
        bail!("sequence has validation errors");
    }
    println!(
        "{} steps, mode frequency {} Hz, {} diagnostics",
        program.steps.len(),
        program.mode_frequency,
        diags.len()
    );

    let period = 1.0 / program.mode_frequency;
    let delays: Vec<f64> = (0..sweep.max(1))
        .map(|i| i as f64 * period / sweep.max(1) as f64)
        .collect();
    let timelines = sequence::schedule(&program, &delays).map_err(anyhow::Error::from)?;
    let csv = sequence::timeline_to_csv(&timelines[0]);
    write_artifact(cli, "timeline.csv", &csv)?;
    println!(
        "scheduled {} sweep points, total duration {:.6} ms, phi_sc span {:.4} rad",
        timelines.len(),
        timelines[0].total_duration * 1e3,
        timelines.last().unwrap().phi_sc
    );
    Ok(())
}
