mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use leo_doppler::coverage::CoverageMode;
use leo_doppler::doppler::{doppler_oracle_finite_difference, make_context};
use leo_doppler::geometry::{distance_cdf, distance_support};
use leo_doppler::montecarlo::{estimate_coverage_curve, validate, McConfig, McMode, XminModel};
use leo_doppler::ofdm::sinr;
use leo_doppler::scenario::{db_to_linear, load_scenario_file, BandLabel, ScenarioConfig};
use leo_doppler::sweep::{figure_preset, run_sweep, FigureName, SweepMode, SweepSpec, SweepVariable};
use leo_doppler::{Error, Result};

use output::{emit, render_table, Format, Frame};

const DEFAULT_TAU_GRID: &str = "-10:30:1";

#[derive(Parser)]
#[command(
    name = "leo-doppler",
    version,
    about = "Residual Doppler, ICI and coverage probability for LEO satellite beams"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Scenario TOML file.
    #[arg(long, global = true, conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in scenario (S or Ka).
    #[arg(long, global = true)]
    preset: Option<BandLabel>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Monte-Carlo terminals per scenario point.
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: u64,
    /// Worker threads for Monte-Carlo; 0 picks automatically.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic coverage over a threshold grid.
    Coverage {
        /// Thresholds in dB: a comma list or start:stop:step.
        #[arg(long = "tau-db", default_value = DEFAULT_TAU_GRID, allow_hyphen_values = true)]
        tau_db: String,
        #[arg(long, value_delimiter = ',', default_value = "ideal,residual,uncompensated,exact")]
        modes: Vec<CoverageMode>,
    },
    /// Doppler, residual offset and SINR along the terminal distance.
    Doppler {
        /// Terminal-to-subpoint distances in km; defaults to a grid over the cell.
        #[arg(long = "x-km", allow_hyphen_values = true)]
        x_km: Option<String>,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Add the spherical-orbit finite-difference reference.
        #[arg(long)]
        oracle: bool,
    },
    /// Distribution of the terminal-to-subpoint distance.
    Cdf {
        #[arg(long = "x-km", allow_hyphen_values = true)]
        x_km: Option<String>,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Monte-Carlo coverage estimate.
    Mc {
        #[arg(long = "tau-db", default_value = "0", allow_hyphen_values = true)]
        tau_db: String,
        #[arg(long, default_value = "residual")]
        mode: McMode,
        /// Use each terminal's own closest approach instead of the cell center's.
        #[arg(long)]
        per_terminal_xmin: bool,
    },
    /// Analytic against Monte-Carlo for every mode; exits 1 on failure.
    Validate {
        #[arg(long = "tau-db", default_value = DEFAULT_TAU_GRID, allow_hyphen_values = true)]
        tau_db: String,
    },
    /// Coverage while one scenario parameter varies.
    Sweep {
        #[arg(long)]
        variable: SweepVariable,
        /// Values in SI units: a comma list or start:stop:step.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Outer axis as `variable=values`.
        #[arg(long)]
        outer: Option<String>,
        /// Fixed override as `variable=value`; repeatable.
        #[arg(long = "set")]
        set: Vec<String>,
        #[arg(long = "tau-db", default_value = DEFAULT_TAU_GRID, allow_hyphen_values = true)]
        tau_db: String,
        #[arg(long, value_delimiter = ',', default_value = "ideal,residual,uncompensated")]
        modes: Vec<SweepMode>,
    },
    /// Data for one of the figure presets.
    Figure {
        name: FigureName,
        /// Drop Monte-Carlo columns.
        #[arg(long)]
        no_mc: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Parses `a,b,c` or `start:stop:step` (inclusive).
fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Usage(format!("`{s}` is not a number in grid `{text}`")))
    };
    let values: Vec<f64> = if let [a, b, step] = text.split(':').collect::<Vec<_>>()[..] {
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if step.is_nan() || step <= 0.0 || b < a {
            return Err(Error::Usage(format!(
                "grid `{text}` needs start <= stop and a positive step"
            )));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| a + i as f64 * step).collect()
    } else {
        text.split(',').map(num).collect::<Result<_>>()?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Usage(format!("grid `{text}` must hold finite values")));
    }
    Ok(values)
}

fn parse_assignment(text: &str) -> Result<(SweepVariable, Vec<f64>)> {
    let (name, values) = text
        .split_once('=')
        .ok_or_else(|| Error::Usage(format!("expected `variable=value`, got `{text}`")))?;
    Ok((name.trim().parse()?, parse_grid(values)?))
}

impl Global {
    fn scenarios(&self) -> Result<Option<Vec<ScenarioConfig>>> {
        Ok(match (&self.scenario, self.preset) {
            (Some(path), _) => Some(vec![load_scenario_file(path)?]),
            (None, Some(band)) => Some(vec![ScenarioConfig::preset(band)?]),
            (None, None) => None,
        })
    }

    fn scenario(&self) -> Result<ScenarioConfig> {
        match self.scenarios()? {
            Some(mut v) => Ok(v.remove(0)),
            None => ScenarioConfig::preset(BandLabel::S),
        }
    }

    fn mc(&self, mode: McMode) -> McConfig {
        McConfig {
            worker_hint: self.workers,
            ..McConfig::new(self.samples, self.seed, mode)
        }
    }
}

fn distances(x_km: &Option<String>, points: usize, sc: &ScenarioConfig) -> Result<Vec<f64>> {
    if let Some(text) = x_km {
        return Ok(parse_grid(text)?.into_iter().map(|x| x * 1e3).collect());
    }
    if points < 2 {
        return Err(Error::Usage("--points must be at least 2".into()));
    }
    let (lo, hi) = distance_support(sc.cell().cell_radius_m, sc.cell().center_offset_m);
    Ok((0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let g = &cli.global;
    let out = g.out.as_deref();
    match &cli.command {
        Command::Coverage { tau_db, modes } => {
            let spec = SweepSpec {
                values: parse_grid(tau_db)?,
                ..SweepSpec::over_tau(modes.iter().map(|&m| SweepMode::Analytic(m)).collect())
            };
            let table = run_sweep(&spec, &[g.scenario()?], None)?;
            emit(&render_table(&table, g.format)?, out)?;
        }
        Command::Doppler { x_km, points, oracle } => {
            let sc = g.scenario()?;
            let ctx = make_context(&sc);
            let mut header = vec![
                "scenario",
                "x_t_m",
                "doppler_hz",
                "residual_hz",
                "sinr_ideal",
                "sinr_residual",
                "sinr_uncompensated",
            ];
            if *oracle {
                header.push("doppler_oracle_hz");
            }
            let mut frame = Frame::new(header);
            for x in distances(x_km, *points, &sc)? {
                let d = ctx.evaluate(x);
                let mut row = vec![
                    sc.band().to_string(),
                    x.to_string(),
                    d.magnitude_hz.to_string(),
                    d.residual_hz.to_string(),
                    sinr(x, 0.0, &sc).sinr_linear.to_string(),
                    sinr(x, d.residual_hz, &sc).sinr_linear.to_string(),
                    sinr(x, d.magnitude_hz, &sc).sinr_linear.to_string(),
                ];
                if *oracle {
                    let x_min = ctx.min_center_orbit_distance_m;
                    let v = if x >= x_min {
                        doppler_oracle_finite_difference(x, x_min, sc.orbit().altitude_m, &sc, 1e-3)?.to_string()
                    } else {
                        String::new()
                    };
                    row.push(v);
                }
                frame.push(row);
            }
            emit(&frame.render(g.format), out)?;
        }
        Command::Cdf { x_km, points } => {
            let sc = g.scenario()?;
            let cell = sc.cell();
            let mut frame = Frame::new(["scenario", "x_m", "cdf"]);
            for x in distances(x_km, *points, &sc)? {
                let f = distance_cdf(x, cell.cell_radius_m, cell.center_offset_m);
                frame.push(vec![sc.band().to_string(), x.to_string(), f.to_string()]);
            }
            emit(&frame.render(g.format), out)?;
        }
        Command::Mc {
            tau_db,
            mode,
            per_terminal_xmin,
        } => {
            let sc = g.scenario()?;
            let taus_db = parse_grid(tau_db)?;
            let mut cfg = g.mc(*mode);
            if *per_terminal_xmin {
                cfg.xmin_model = XminModel::PerTerminal;
            }
            let taus: Vec<f64> = taus_db.iter().map(|&d| db_to_linear(d)).collect();
            let estimates = estimate_coverage_curve(&taus, &sc, &cfg)?;
            let mut frame = Frame::new([
                "scenario",
                "tau_db",
                "mode",
                "p_mc",
                "standard_error",
                "passes",
                "samples",
                "seed",
            ]);
            for (db, e) in taus_db.iter().zip(estimates) {
                frame.push(vec![
                    sc.band().to_string(),
                    db.to_string(),
                    e.mode.to_string(),
                    e.probability.to_string(),
                    e.standard_error.to_string(),
                    e.passes.to_string(),
                    e.samples.to_string(),
                    e.seed.to_string(),
                ]);
            }
            emit(&frame.render(g.format), out)?;
        }
        Command::Validate { tau_db } => {
            let sc = g.scenario()?;
            let report = validate(&sc, &parse_grid(tau_db)?, &g.mc(McMode::Residual))?;
            let body = match g.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    report.write_csv(&mut buf)?;
                    String::from_utf8(buf).expect("csv output is UTF-8")
                }
                Format::Text => {
                    let mut frame = Frame::new(["tau_db", "mode", "p_analytic", "p_mc", "z_score", "within_3se"]);
                    for r in &report.rows {
                        frame.push(vec![
                            r.tau_db.to_string(),
                            r.mode.to_string(),
                            format!("{:.6}", r.analytic),
                            format!("{:.6}", r.monte_carlo),
                            format!("{:.2}", r.z_score),
                            r.within.to_string(),
                        ]);
                    }
                    frame.render(Format::Text)
                }
            };
            emit(&body, out)?;
            eprintln!("{}", report.summary());
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Sweep {
            variable,
            values,
            outer,
            set,
            tau_db,
            modes,
        } => {
            let mut fixed = Vec::new();
            for s in set {
                let (var, v) = parse_assignment(s)?;
                let [value] = v[..] else {
                    return Err(Error::Usage(format!("--set `{s}` takes a single value")));
                };
                fixed.push((var, value));
            }
            let spec = SweepSpec {
                variable: *variable,
                values: parse_grid(values)?,
                outer: outer.as_deref().map(parse_assignment).transpose()?,
                fixed_overrides: fixed,
                tau_grid_db: parse_grid(tau_db)?,
                modes: modes.clone(),
            };
            let mc = g.mc(McMode::Residual);
            let table = run_sweep(&spec, &[g.scenario()?], Some(&mc))?;
            emit(&render_table(&table, g.format)?, out)?;
        }
        Command::Figure { name, no_mc } => {
            let mut figure = figure_preset(*name);
            if *no_mc {
                figure = figure.without_mc();
            }
            let scenarios = match g.scenarios()? {
                Some(s) => s,
                None => figure
                    .bands
                    .iter()
                    .map(|&b| ScenarioConfig::preset(b))
                    .collect::<Result<Vec<_>>>()?,
            };
            let mc = g.mc(McMode::Residual);
            let table = run_sweep(&figure.sweep, &scenarios, Some(&mc))?;
            emit(&render_table(&table, g.format)?, out)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
