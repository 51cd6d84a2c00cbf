//! Analytical downlink coverage probability `P(SINR > tau)`.
//!
//! Because the Doppler magnitude is monotone in `X_t` once `X_t >= X̂_min`,
//! the condition `|chi(X_t) - delta_t| < B` with
//! `B = sinc⁻¹(Phi) / T` maps to an interval `x_lo < X_t < x_hi`. Its
//! probability follows from the distance CDF. The closed form evaluates the
//! noise term at the zenith slant distance `H_S` (that is what makes `Phi`
//! independent of `X_t`); [`coverage_exact_numeric`] drops that
//! simplification and solves the per-terminal condition numerically.
//!
//! Bounds come from inverting `g(X) = (X² - X̂_min²) / ((r_o H_S)² + r_o X²)`,
//! which yields `X² = (Psi (r_o H_S)² + X̂_min²) / (1 - Psi r_o)` for both the
//! lower and the upper bound.

use std::fmt;
use std::str::FromStr;

use crate::doppler::{bound_from_psi, make_context, DopplerContext};
use crate::error::Error;
use crate::geometry::{distance_cdf, distance_support};
use crate::numeric::bisect;
use crate::ofdm::{sinc, sinc_inverse};
use crate::scenario::{linear_to_db, ScenarioConfig};

const EXACT_SUBDIVISIONS: usize = 64;
const EXACT_ROOT_TOLERANCE_M: f64 = 1e-9;
const MAX_SIDELOBE_BREAKPOINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoverageMode {
    /// Zero residual offset after compensation.
    Ideal,
    /// Common Doppler of the cell center removed.
    Residual,
    /// No Doppler compensation at all.
    Uncompensated,
    /// Residual-compensated, solved without the zenith noise simplification.
    Exact,
}

impl CoverageMode {
    pub const ALL: [CoverageMode; 4] = [
        CoverageMode::Ideal,
        CoverageMode::Residual,
        CoverageMode::Uncompensated,
        CoverageMode::Exact,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CoverageMode::Ideal => "ideal",
            CoverageMode::Residual => "residual",
            CoverageMode::Uncompensated => "uncompensated",
            CoverageMode::Exact => "exact",
        }
    }
}

impl fmt::Display for CoverageMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CoverageMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        CoverageMode::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
            Error::Usage(format!(
                "unknown coverage mode `{s}` (expected one of: ideal, residual, uncompensated, exact)"
            ))
        })
    }
}

/// Intermediate quantities of the closed form for one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageQuery {
    pub threshold_linear: f64,
    pub phi: f64,
    /// Lower Doppler constraint; 0 when it is vacuous.
    pub psi1: f64,
    pub psi2: f64,
    pub r_o: f64,
    pub mode: CoverageMode,
    /// Largest admissible residual offset `B`, in Hz.
    pub doppler_bound_hz: f64,
    pub lower_m: f64,
    pub upper_m: f64,
}

impl CoverageQuery {
    /// Builds the closed-form query. `mode` must be `Residual` or
    /// `Uncompensated`; the latter ignores the context's common Doppler.
    pub fn closed_form(
        tau_linear: f64,
        scenario: &ScenarioConfig,
        context: &DopplerContext,
        mode: CoverageMode,
    ) -> CoverageQuery {
        let common = match mode {
            CoverageMode::Residual => context.common_doppler_hz,
            CoverageMode::Uncompensated => 0.0,
            other => panic!("closed-form query is defined for residual/uncompensated, not {other}"),
        };
        let radio = scenario.radio();
        let h = scenario.orbit().altitude_m;
        let r_o = context.orbit_ratio;
        let noise_term = tau_linear * radio.noise_power_w * h * h / radio.aggregate_gain;
        let phi = ((tau_linear + noise_term) / (tau_linear + 1.0)).sqrt();

        let mut query = CoverageQuery {
            threshold_linear: tau_linear,
            phi,
            psi1: f64::NAN,
            psi2: f64::NAN,
            r_o,
            mode,
            doppler_bound_hz: 0.0,
            lower_m: f64::INFINITY,
            upper_m: f64::INFINITY,
        };
        // Unreachable even at zero offset.
        let Ok(x) = sinc_inverse(phi) else {
            return query;
        };
        let bound = x / radio.symbol_duration_s;
        query.doppler_bound_hz = bound;
        if bound == 0.0 {
            return query;
        }

        let rho = context.rho_hz;
        let x_min = context.min_center_orbit_distance_m;
        if common - bound < 0.0 {
            // chi >= 0 > delta - B: every terminal meets the lower constraint,
            // including those inside X̂_min where chi is clamped to zero.
            query.psi1 = 0.0;
            query.lower_m = 0.0;
        } else {
            let psi1 = ((common - bound) / rho).powi(2);
            query.psi1 = psi1;
            query.lower_m = bound_from_psi(psi1, r_o, h, x_min).unwrap_or(f64::INFINITY);
        }
        let psi2 = ((common + bound) / rho).powi(2);
        query.psi2 = psi2;
        query.upper_m = bound_from_psi(psi2, r_o, h, x_min).unwrap_or(f64::INFINITY);
        query
    }

    pub fn probability(&self, scenario: &ScenarioConfig) -> f64 {
        let cell = scenario.cell();
        let (lo, hi) = distance_support(cell.cell_radius_m, cell.center_offset_m);
        let a = self.lower_m.max(lo);
        let b = self.upper_m.min(hi);
        if !(b > a) {
            return 0.0;
        }
        let p = distance_cdf(b, cell.cell_radius_m, cell.center_offset_m)
            - distance_cdf(a, cell.cell_radius_m, cell.center_offset_m);
        p.clamp(0.0, 1.0)
    }
}

/// Coverage with the cell-center Doppler compensated.
pub fn coverage_residual(tau_linear: f64, scenario: &ScenarioConfig, context: &DopplerContext) -> f64 {
    CoverageQuery::closed_form(tau_linear, scenario, context, CoverageMode::Residual).probability(scenario)
}

/// Coverage without any Doppler compensation (`delta_t = 0`).
pub fn coverage_uncompensated(tau_linear: f64, scenario: &ScenarioConfig, context: &DopplerContext) -> f64 {
    CoverageQuery::closed_form(tau_linear, scenario, context, CoverageMode::Uncompensated).probability(scenario)
}

/// Coverage with no residual offset: `F(sqrt(A / (tau N_o) - H_S²))`.
pub fn coverage_ideal(tau_linear: f64, scenario: &ScenarioConfig) -> f64 {
    let radio = scenario.radio();
    let cell = scenario.cell();
    let h = scenario.orbit().altitude_m;
    let reach = radio.aggregate_gain / (tau_linear * radio.noise_power_w) - h * h;
    if !(reach > 0.0) {
        return 0.0;
    }
    distance_cdf(reach.sqrt(), cell.cell_radius_m, cell.center_offset_m)
}

/// Residual-compensated coverage from the exact per-terminal condition
///
/// ```text
/// sinc²(|Δδ(X)| T) > (tau + tau N_o (X² + H_S²) / A) / (tau + 1)
/// ```
///
/// The support of `X_t` is split at the points where `|Δδ| T` changes
/// monotonicity or crosses an integer, and where the noise term alone
/// exceeds the threshold. Each piece is scanned and sign changes are
/// refined by bisection to 1e-9 m. Pass `context.uncompensated()` for the
/// uncompensated variant.
pub fn coverage_exact_numeric(tau_linear: f64, scenario: &ScenarioConfig, context: &DopplerContext) -> f64 {
    let radio = scenario.radio();
    let cell = scenario.cell();
    let h = scenario.orbit().altitude_m;
    let t = radio.symbol_duration_s;
    let a = radio.aggregate_gain;
    let n = radio.noise_power_w;
    let (lo, hi) = distance_support(cell.cell_radius_m, cell.center_offset_m);

    let margin = |x: f64| {
        let s = sinc(context.residual(x).abs() * t);
        (tau_linear + 1.0) * s * s - tau_linear - tau_linear * n * (x * x + h * h) / a
    };

    let mut breaks = vec![lo, hi, context.min_center_orbit_distance_m];
    let common = context.common_doppler_hz;
    if common > 0.0 {
        breaks.extend(context.distance_for_magnitude(common));
    }
    let step = 1.0 / t;
    let asymptote = context.asymptote_hz();
    for k in 1..=MAX_SIDELOBE_BREAKPOINTS {
        let above = common + k as f64 * step;
        let below = common - k as f64 * step;
        if above >= asymptote && below < 0.0 {
            break;
        }
        if above < asymptote {
            breaks.extend(context.distance_for_magnitude(above));
        }
        if below >= 0.0 {
            breaks.extend(context.distance_for_magnitude(below));
        }
    }
    if n > 0.0 {
        let reach = a / (tau_linear * n) - h * h;
        if reach > 0.0 {
            breaks.push(reach.sqrt());
        }
    }
    breaks.retain(|x| x.is_finite() && *x >= lo && *x <= hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut nodes = Vec::with_capacity(breaks.len() * EXACT_SUBDIVISIONS);
    for pair in breaks.windows(2) {
        let (x0, x1) = (pair[0], pair[1]);
        for i in 0..EXACT_SUBDIVISIONS {
            nodes.push(x0 + (x1 - x0) * i as f64 / EXACT_SUBDIVISIONS as f64);
        }
    }
    nodes.push(hi);

    let mut bounds = vec![lo];
    let mut prev = (nodes[0], margin(nodes[0]) > 0.0);
    for &x in &nodes[1..] {
        let inside = margin(x) > 0.0;
        if inside != prev.1 {
            let root = bisect(&margin, prev.0, x, EXACT_ROOT_TOLERANCE_M, 200).unwrap_or(0.5 * (prev.0 + x));
            bounds.push(root);
        }
        prev = (x, inside);
    }
    bounds.push(hi);

    let cdf = |x: f64| distance_cdf(x, cell.cell_radius_m, cell.center_offset_m);
    let mut p = 0.0;
    for pair in bounds.windows(2) {
        let (x0, x1) = (pair[0], pair[1]);
        if x1 > x0 && margin(0.5 * (x0 + x1)) > 0.0 {
            p += cdf(x1) - cdf(x0);
        }
    }
    p.clamp(0.0, 1.0)
}

pub fn coverage(tau_linear: f64, scenario: &ScenarioConfig, context: &DopplerContext, mode: CoverageMode) -> f64 {
    match mode {
        CoverageMode::Ideal => coverage_ideal(tau_linear, scenario),
        CoverageMode::Residual => coverage_residual(tau_linear, scenario, context),
        CoverageMode::Uncompensated => coverage_uncompensated(tau_linear, scenario, context),
        CoverageMode::Exact => coverage_exact_numeric(tau_linear, scenario, context),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCurve {
    pub thresholds_db: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub mode: CoverageMode,
    pub scenario_label: String,
}

pub fn coverage_curve(thresholds_db: &[f64], scenario: &ScenarioConfig, mode: CoverageMode) -> CoverageCurve {
    let ctx = make_context(scenario);
    CoverageCurve {
        thresholds_db: thresholds_db.to_vec(),
        probabilities: thresholds_db
            .iter()
            .map(|&db| coverage(crate::scenario::db_to_linear(db), scenario, &ctx, mode))
            .collect(),
        mode,
        scenario_label: scenario.band().to_string(),
    }
}

/// Threshold at which the zenith terminal's SNR equals `tau`, in dB.
pub fn zenith_snr_db(scenario: &ScenarioConfig) -> f64 {
    let radio = scenario.radio();
    let h = scenario.orbit().altitude_m;
    linear_to_db(radio.aggregate_gain / (h * h * radio.noise_power_w))
}
