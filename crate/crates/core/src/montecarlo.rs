//! Mode-matched Monte-Carlo coverage estimation.
//!
//! Terminal `k` is drawn from ChaCha8 (rand_chacha 0.9) keyed by the seed,
//! starting at word position `4k`; each draw consumes two `f64` (four 32-bit
//! words). A sample is therefore a pure function of `(seed, k)` and the
//! estimate does not depend on how samples are split across workers. Pass
//! counts are reduced as integers.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coverage::{coverage_exact_numeric, coverage_ideal, coverage_residual, coverage_uncompensated};
use crate::doppler::{make_context, DopplerContext};
use crate::error::{Error, Result};
use crate::geometry::{sample_terminal, TerminalSample};
use crate::ofdm::{sinc, sinr_from_gain};
use crate::scenario::{db_to_linear, ScenarioConfig};

/// 32-bit words consumed per terminal draw.
pub const WORDS_PER_SAMPLE: u128 = 4;
const CHUNK_SAMPLES: u64 = 1 << 14;
/// Comparisons that may exceed 3 SE in a validation run, as a fraction.
pub const FAILURE_ALLOWANCE: f64 = 0.01;
pub const Z_CRITERION: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum McMode {
    Ideal,
    Residual,
    Uncompensated,
}

impl McMode {
    pub const ALL: [McMode; 3] = [McMode::Ideal, McMode::Residual, McMode::Uncompensated];

    pub fn as_str(self) -> &'static str {
        match self {
            McMode::Ideal => "ideal",
            McMode::Residual => "residual",
            McMode::Uncompensated => "uncompensated",
        }
    }
}

impl fmt::Display for McMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for McMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        McMode::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
            Error::Usage(format!(
                "unknown Monte-Carlo mode `{s}` (expected one of: ideal, residual, uncompensated)"
            ))
        })
    }
}

/// Closest-approach distance used in each terminal's Doppler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XminModel {
    /// Every terminal uses the cell-center value `X̂_min`, as the closed form does.
    #[default]
    CellCenter,
    /// Each terminal uses its own distance to the ground track. Sensitivity
    /// studies only; the closed form does not model this.
    PerTerminal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub mode: McMode,
    /// Worker threads; 0 uses the global rayon pool.
    pub worker_hint: usize,
    pub xmin_model: XminModel,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64, mode: McMode) -> Self {
        McConfig {
            samples,
            seed,
            mode,
            worker_hint: 0,
            xmin_model: XminModel::CellCenter,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::validation("samples", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub tau_linear: f64,
    pub probability: f64,
    pub standard_error: f64,
    pub passes: u64,
    pub samples: u64,
    pub seed: u64,
    pub mode: McMode,
}

impl McEstimate {
    fn from_count(tau_linear: f64, passes: u64, cfg: &McConfig, mode: McMode) -> Self {
        let n = cfg.samples as f64;
        let p = passes as f64 / n;
        McEstimate {
            tau_linear,
            probability: p,
            standard_error: binomial_standard_error(p, cfg.samples),
            passes,
            samples: cfg.samples,
            seed: cfg.seed,
            mode,
        }
    }
}

pub fn binomial_standard_error(p: f64, samples: u64) -> f64 {
    (p * (1.0 - p) / samples as f64).max(0.0).sqrt()
}

/// Generator positioned at terminal `k` of stream `seed`.
pub fn terminal_stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(WORDS_PER_SAMPLE * u128::from(k));
    rng
}

/// Distance from a terminal to the ground track, taken as the line at
/// distance `X̂_min` from the cell center through the subpoint. When the
/// subpoint is nearer than `X̂_min` the track is placed perpendicular to the
/// center-to-subpoint direction. The terminal's azimuth is measured from
/// that direction.
pub fn track_distance(sample: &TerminalSample, center_offset_m: f64, min_center_orbit_distance_m: f64) -> f64 {
    let tx = sample.radial_m * sample.azimuth_rad.cos();
    let ty = sample.radial_m * sample.azimuth_rad.sin();
    if center_offset_m <= min_center_orbit_distance_m {
        return (min_center_orbit_distance_m - tx).abs();
    }
    let sin_b = min_center_orbit_distance_m / center_offset_m;
    let cos_b = (1.0 - sin_b * sin_b).sqrt();
    ((tx - center_offset_m) * sin_b - ty * cos_b).abs()
}

/// Residual offset of `sample` under `mode`.
pub fn sample_offset(sample: &TerminalSample, context: &DopplerContext, mode: McMode, xmin_model: XminModel) -> f64 {
    let x = sample.horizontal_distance_m;
    let chi = || match xmin_model {
        XminModel::CellCenter => context.magnitude(x),
        XminModel::PerTerminal => context.magnitude_with_min(
            x,
            track_distance(sample, context.center_offset_m, context.min_center_orbit_distance_m),
        ),
    };
    match mode {
        McMode::Ideal => 0.0,
        McMode::Residual => chi() - context.common_doppler_hz,
        McMode::Uncompensated => chi(),
    }
}

fn check_taus(taus_linear: &[f64]) -> Result<()> {
    match taus_linear.iter().find(|t| !(**t > 0.0)) {
        Some(t) => Err(Error::validation(
            "tau",
            format!("thresholds must be positive, got {t}"),
        )),
        None => Ok(()),
    }
}

/// Pass counts `[mode][tau]` from a single sample set shared by all
/// thresholds and modes.
fn count_passes(taus_linear: &[f64], scenario: &ScenarioConfig, cfg: &McConfig, modes: &[McMode]) -> Vec<Vec<u64>> {
    let ctx = make_context(scenario);
    let radio = scenario.radio();
    let cell = scenario.cell();
    let h = scenario.orbit().altitude_m;
    let t = radio.symbol_duration_s;
    let nt = taus_linear.len();
    let chunks = cfg.samples.div_ceil(CHUNK_SAMPLES);

    let run_chunk = |c: u64| {
        let start = c * CHUNK_SAMPLES;
        let end = (start + CHUNK_SAMPLES).min(cfg.samples);
        let mut rng = terminal_stream(cfg.seed, start);
        let mut counts = vec![0u64; modes.len() * nt];
        for _ in start..end {
            let s = sample_terminal(&mut rng, cell.cell_radius_m, cell.center_offset_m);
            let x = s.horizontal_distance_m;
            let received = radio.aggregate_gain / (x * x + h * h);
            for (m, &mode) in modes.iter().enumerate() {
                let k = sinc(sample_offset(&s, &ctx, mode, cfg.xmin_model) * t);
                let value = sinr_from_gain(received, k * k, radio.noise_power_w);
                let row = &mut counts[m * nt..(m + 1) * nt];
                for (slot, &tau) in row.iter_mut().zip(taus_linear) {
                    *slot += u64::from(value > tau);
                }
            }
        }
        counts
    };
    let reduce = |mut a: Vec<u64>, b: Vec<u64>| {
        a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
        a
    };
    let zero = || vec![0u64; modes.len() * nt];
    let total = match cfg.worker_hint {
        0 => (0..chunks).into_par_iter().map(run_chunk).reduce(zero, reduce),
        w => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
            Ok(pool) => pool.install(|| (0..chunks).into_par_iter().map(run_chunk).reduce(zero, reduce)),
            Err(_) => (0..chunks).map(run_chunk).fold(zero(), reduce),
        },
    };
    total.chunks(nt.max(1)).take(modes.len()).map(<[u64]>::to_vec).collect()
}

/// Estimates `P(SINR > tau)` for `cfg.mode`.
pub fn estimate_coverage(tau_linear: f64, scenario: &ScenarioConfig, cfg: &McConfig) -> Result<McEstimate> {
    Ok(estimate_coverage_curve(&[tau_linear], scenario, cfg)?.remove(0))
}

/// One sample set of size `cfg.samples` evaluated against every threshold.
pub fn estimate_coverage_curve(
    taus_linear: &[f64],
    scenario: &ScenarioConfig,
    cfg: &McConfig,
) -> Result<Vec<McEstimate>> {
    Ok(estimate_coverage_modes(taus_linear, scenario, cfg, &[cfg.mode])?.remove(0))
}

/// Like [`estimate_coverage_curve`] for several modes on the same terminals;
/// `cfg.mode` is ignored. Returns `[mode][tau]`.
pub fn estimate_coverage_modes(
    taus_linear: &[f64],
    scenario: &ScenarioConfig,
    cfg: &McConfig,
    modes: &[McMode],
) -> Result<Vec<Vec<McEstimate>>> {
    cfg.validate()?;
    check_taus(taus_linear)?;
    let counts = count_passes(taus_linear, scenario, cfg, modes);
    Ok(modes
        .iter()
        .zip(counts)
        .map(|(&mode, row)| {
            row.into_iter()
                .zip(taus_linear)
                .map(|(passes, &tau)| McEstimate::from_count(tau, passes, cfg, mode))
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    pub tau_db: f64,
    /// Analytic quantity: ideal, residual, uncompensated, or exact.
    pub mode: &'static str,
    pub analytic: f64,
    pub monte_carlo: f64,
    pub standard_error: f64,
    pub z_score: f64,
    pub within: bool,
    /// `|coverage_residual - coverage_exact_numeric|` at this threshold.
    pub phi_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub scenario: String,
    pub samples: u64,
    pub seed: u64,
    pub rows: Vec<ValidationRow>,
    pub failures: usize,
    pub allowed_failures: usize,
    pub max_abs_gap: f64,
    pub max_phi_gap: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures <= self.allowed_failures
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "scenario",
            "tau_db",
            "mode",
            "p_analytic",
            "p_mc",
            "standard_error",
            "z_score",
            "within_3se",
            "phi_gap",
        ])?;
        for r in &self.rows {
            w.write_record([
                self.scenario.clone(),
                r.tau_db.to_string(),
                r.mode.to_string(),
                r.analytic.to_string(),
                r.monte_carlo.to_string(),
                r.standard_error.to_string(),
                r.z_score.to_string(),
                r.within.to_string(),
                r.phi_gap.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<csv output>".into(),
            source: e,
        })?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} comparisons, {} beyond {Z_CRITERION} SE (allowed {}), max |analytic - mc| = {:.3e}, max phi gap = {:.3e}: {}",
            self.scenario,
            self.rows.len(),
            self.failures,
            self.allowed_failures,
            self.max_abs_gap,
            self.max_phi_gap,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Compares every analytic mode with its mode-matched estimate on a shared
/// sample set. The exact-numeric value is checked against the residual
/// estimate. The test standard error is the larger of the estimate's and
/// the one implied by the analytic value, so saturated estimates (0 or 1)
/// are still checked against a nonzero spread. `cfg.mode` is ignored.
pub fn validate(scenario: &ScenarioConfig, tau_grid_db: &[f64], cfg: &McConfig) -> Result<ValidationReport> {
    if tau_grid_db.is_empty() {
        return Err(Error::validation("tau_grid", "must not be empty"));
    }
    let taus: Vec<f64> = tau_grid_db.iter().map(|&d| db_to_linear(d)).collect();
    let mc = estimate_coverage_modes(&taus, scenario, cfg, &McMode::ALL)?;
    let ctx = make_context(scenario);

    let mut rows = Vec::with_capacity(taus.len() * 4);
    for (i, (&db, &tau)) in tau_grid_db.iter().zip(&taus).enumerate() {
        let residual = coverage_residual(tau, scenario, &ctx);
        let exact = coverage_exact_numeric(tau, scenario, &ctx);
        let phi_gap = (residual - exact).abs();
        let entries = [
            ("ideal", coverage_ideal(tau, scenario), &mc[0][i]),
            ("residual", residual, &mc[1][i]),
            ("uncompensated", coverage_uncompensated(tau, scenario, &ctx), &mc[2][i]),
            ("exact", exact, &mc[1][i]),
        ];
        for (mode, analytic, est) in entries {
            let gap = analytic - est.probability;
            let se = est.standard_error.max(binomial_standard_error(analytic, cfg.samples));
            let z = if se > 0.0 {
                gap / se
            } else if gap == 0.0 {
                0.0
            } else {
                gap.signum() * f64::INFINITY
            };
            rows.push(ValidationRow {
                tau_db: db,
                mode,
                analytic,
                monte_carlo: est.probability,
                standard_error: est.standard_error,
                z_score: z,
                within: z.abs() <= Z_CRITERION,
                phi_gap,
            });
        }
    }
    let failures = rows.iter().filter(|r| !r.within).count();
    Ok(ValidationReport {
        scenario: scenario.band().to_string(),
        samples: cfg.samples,
        seed: cfg.seed,
        failures,
        allowed_failures: (FAILURE_ALLOWANCE * rows.len() as f64).floor() as usize,
        max_abs_gap: rows
            .iter()
            .map(|r| (r.analytic - r.monte_carlo).abs())
            .fold(0.0, f64::max),
        max_phi_gap: rows.iter().map(|r| r.phi_gap).fold(0.0, f64::max),
        rows,
    })
}
