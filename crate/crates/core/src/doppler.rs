//! Doppler kinematics of a LEO pass under the flat-Earth approximation.
//!
//! The magnitude seen by a terminal at horizontal distance `X_t` from the
//! subpoint, whose closest approach to the ground track is `X_min`, is
//!
//! ```text
//! chi(X_t) = rho * sqrt((X_t² - X_min²) / ((r_e H / (r_e + H))² + (r_e / (r_e + H)) X_t²))
//! rho      = f_o r_e omega_F / c,    omega_F = omega_s - omega_E cos(i)
//! ```
//!
//! The transmitter removes the common component `delta_t = chi(X̂_t)` seen at
//! the cell center; what is left on each terminal is the residual
//! `chi(X_t) - delta_t`. Per-terminal `X_min` is replaced by the cell's
//! `X̂_min` throughout.

use crate::error::{Error, Result};
use crate::scenario::{PhysicalConstants, ScenarioConfig};

/// Mean motion of a circular orbit, `sqrt(mu / (r_e + H)³)`.
pub fn satellite_angular_rate(altitude_m: f64, constants: &PhysicalConstants) -> f64 {
    let r = constants.earth_radius_m + altitude_m;
    (constants.earth_mu_m3ps2 / (r * r * r)).sqrt()
}

/// Satellite rate relative to the rotating Earth, `omega_s - omega_E cos(i)`.
pub fn effective_angular_rate(omega_s: f64, inclination_rad: f64, constants: &PhysicalConstants) -> f64 {
    omega_s - constants.earth_angular_rate_radps * inclination_rad.cos()
}

/// `f_o r_e omega_F / c`, the Doppler scale in Hz.
pub fn doppler_scale(carrier_hz: f64, omega_f: f64, constants: &PhysicalConstants) -> f64 {
    carrier_hz * constants.earth_radius_m * omega_f / constants.light_speed_mps
}

/// Flat-Earth Doppler magnitude. A negative radicand (terminal nearer the
/// track than `x_min_m`) is clamped to zero.
pub fn doppler_magnitude(x_t_m: f64, x_min_m: f64, altitude_m: f64, rho_hz: f64, constants: &PhysicalConstants) -> f64 {
    let r_o = constants.earth_radius_m / (constants.earth_radius_m + altitude_m);
    magnitude_with_ratio(x_t_m, x_min_m, altitude_m, rho_hz, r_o)
}

fn magnitude_with_ratio(x_t: f64, x_min: f64, altitude: f64, rho: f64, r_o: f64) -> f64 {
    let num = x_t * x_t - x_min * x_min;
    if num <= 0.0 {
        return 0.0;
    }
    let h = r_o * altitude;
    rho * (num / (h * h + r_o * x_t * x_t)).sqrt()
}

/// Kinematic constants for one satellite position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerContext {
    pub omega_s_radps: f64,
    pub omega_f_radps: f64,
    pub rho_hz: f64,
    pub min_center_orbit_distance_m: f64,
    pub center_offset_m: f64,
    /// Doppler at the cell center, removed by the transmitter.
    pub common_doppler_hz: f64,
    pub altitude_m: f64,
    /// `r_e / (r_e + H_S)`.
    pub orbit_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerResult {
    pub magnitude_hz: f64,
    pub residual_hz: f64,
}

pub fn make_context(scenario: &ScenarioConfig) -> DopplerContext {
    let constants = scenario.constants();
    let orbit = scenario.orbit();
    let cell = scenario.cell();
    let omega_s = satellite_angular_rate(orbit.altitude_m, constants);
    let omega_f = effective_angular_rate(omega_s, orbit.inclination_rad, constants);
    let rho = doppler_scale(scenario.radio().carrier_hz, omega_f, constants);
    let mut ctx = DopplerContext {
        omega_s_radps: omega_s,
        omega_f_radps: omega_f,
        rho_hz: rho,
        min_center_orbit_distance_m: cell.min_center_orbit_distance_m,
        center_offset_m: cell.center_offset_m,
        common_doppler_hz: 0.0,
        altitude_m: orbit.altitude_m,
        orbit_ratio: scenario.orbit_ratio(),
    };
    ctx.common_doppler_hz = ctx.magnitude(cell.center_offset_m);
    ctx
}

pub fn residual_doppler(context: &DopplerContext, x_t_m: f64) -> f64 {
    context.residual(x_t_m)
}

impl DopplerContext {
    /// `chi(x_t, X̂_min)`.
    pub fn magnitude(&self, x_t_m: f64) -> f64 {
        magnitude_with_ratio(
            x_t_m,
            self.min_center_orbit_distance_m,
            self.altitude_m,
            self.rho_hz,
            self.orbit_ratio,
        )
    }

    /// `chi(x_t, x_min)` for a terminal-specific closest approach.
    pub fn magnitude_with_min(&self, x_t_m: f64, x_min_m: f64) -> f64 {
        magnitude_with_ratio(x_t_m, x_min_m, self.altitude_m, self.rho_hz, self.orbit_ratio)
    }

    pub fn residual(&self, x_t_m: f64) -> f64 {
        self.magnitude(x_t_m) - self.common_doppler_hz
    }

    pub fn evaluate(&self, x_t_m: f64) -> DopplerResult {
        let magnitude_hz = self.magnitude(x_t_m);
        DopplerResult {
            magnitude_hz,
            residual_hz: magnitude_hz - self.common_doppler_hz,
        }
    }

    /// Same geometry with no common compensation applied.
    pub fn uncompensated(&self) -> DopplerContext {
        DopplerContext {
            common_doppler_hz: 0.0,
            ..*self
        }
    }

    /// Horizontal asymptote of `chi`, `rho / sqrt(r_o)`.
    pub fn asymptote_hz(&self) -> f64 {
        self.rho_hz / self.orbit_ratio.sqrt()
    }

    /// Smallest `x_t >= X̂_min` with `chi(x_t) = doppler_hz`, or `None` when
    /// the value is at or above the asymptote.
    pub fn distance_for_magnitude(&self, doppler_hz: f64) -> Option<f64> {
        if doppler_hz <= 0.0 {
            return Some(self.min_center_orbit_distance_m);
        }
        let psi = (doppler_hz / self.rho_hz).powi(2);
        bound_from_psi(psi, self.orbit_ratio, self.altitude_m, self.min_center_orbit_distance_m)
    }
}

/// Inverts `(X² - X_min²) / ((r_o H)² + r_o X²) = psi` for `X`.
pub(crate) fn bound_from_psi(psi: f64, r_o: f64, altitude_m: f64, x_min_m: f64) -> Option<f64> {
    let denom = 1.0 - psi * r_o;
    if !(denom > 0.0) {
        return None;
    }
    let h = r_o * altitude_m;
    Some(((psi * h * h + x_min_m * x_min_m) / denom).sqrt())
}

/// Range-rate Doppler from a spherical circular-orbit model, used to check
/// the flat-Earth formula.
///
/// The satellite moves on a great circle of radius `r_e + H` at the relative
/// rate `omega_F`. The terminal sits on the Earth's surface at cross-track arc
/// `x_min_m`, and the along-track phase is chosen so that the arc to the
/// subpoint is `x_t_m`. Returns `(f_o / c) |dD/dt|` by central differences
/// with step `dt_s`.
pub fn doppler_oracle_finite_difference(
    x_t_m: f64,
    x_min_m: f64,
    altitude_m: f64,
    scenario: &ScenarioConfig,
    dt_s: f64,
) -> Result<f64> {
    if !(x_min_m >= 0.0 && x_t_m >= x_min_m) {
        return Err(Error::domain(
            "doppler_oracle_finite_difference",
            format!("need 0 <= x_min <= x_t, got x_t = {x_t_m}, x_min = {x_min_m}"),
        ));
    }
    if !(dt_s > 0.0) {
        return Err(Error::domain("doppler_oracle_finite_difference", "dt must be positive"));
    }
    let constants = scenario.constants();
    let r_e = constants.earth_radius_m;
    let r_s = r_e + altitude_m;
    let omega_s = satellite_angular_rate(altitude_m, constants);
    let omega_f = effective_angular_rate(omega_s, scenario.orbit().inclination_rad, constants);

    let cross = x_min_m / r_e;
    let phase0 = ((x_t_m / r_e).cos() / cross.cos()).clamp(-1.0, 1.0).acos();
    let terminal = [r_e * cross.cos(), 0.0, r_e * cross.sin()];
    let range = |phase: f64| {
        let sat = [r_s * phase.cos(), r_s * phase.sin(), 0.0];
        let d: Vec<f64> = sat.iter().zip(&terminal).map(|(s, t)| s - t).collect();
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    };
    let rate = (range(phase0 + omega_f * dt_s) - range(phase0 - omega_f * dt_s)) / (2.0 * dt_s);
    Ok(scenario.radio().carrier_hz / constants.light_speed_mps * rate.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{load_scenario, BandLabel};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn s_band() -> ScenarioConfig {
        ScenarioConfig::preset(BandLabel::S).unwrap()
    }

    const XMIN_600: f64 = 52_493.198_115_554_4;

    #[test]
    fn angular_rates() {
        let c = PhysicalConstants::default();
        assert!(rel(satellite_angular_rate(600e3, &c), 1.084_741_520_136_686e-3) < 1e-12);
        assert!(rel(satellite_angular_rate(1200e3, &c), 9.583_828_170_175_941e-4) < 1e-12);
        let scaled = PhysicalConstants {
            earth_mu_m3ps2: 4.0 * c.earth_mu_m3ps2,
            ..c
        };
        let ratio = satellite_angular_rate(600e3, &scaled) / satellite_angular_rate(600e3, &c);
        assert!((ratio - 2.0).abs() < 1e-14);
    }

    #[test]
    fn effective_rates() {
        let c = PhysicalConstants::default();
        let ws = satellite_angular_rate(600e3, &c);
        assert!((effective_angular_rate(ws, 90f64.to_radians(), &c) - ws).abs() < 1e-18);
        let wf = effective_angular_rate(ws, 53f64.to_radians(), &c);
        assert!(rel(wf, 1.040_856_471_144_827e-3) < 1e-12, "{wf}");
        let still = PhysicalConstants {
            earth_angular_rate_radps: 0.0,
            ..c
        };
        assert_eq!(effective_angular_rate(ws, 0.3, &still), ws);
    }

    #[test]
    fn scale_values() {
        let ctx = make_context(&s_band());
        assert!(rel(ctx.rho_hz, 44_239.248_858_379_83) < 1e-12, "{}", ctx.rho_hz);
        let ka = make_context(&ScenarioConfig::preset(BandLabel::Ka).unwrap());
        assert!(rel(ka.rho_hz, 10.0 * ctx.rho_hz) < 1e-14);
        let c = PhysicalConstants::default();
        assert_eq!(doppler_scale(0.0, ctx.omega_f_radps, &c), 0.0);
    }

    #[test]
    fn magnitude_values() {
        let ctx = make_context(&s_band());
        let c = PhysicalConstants::default();
        assert_eq!(doppler_magnitude(XMIN_600, XMIN_600, 600e3, ctx.rho_hz, &c), 0.0);
        let chi = doppler_magnitude(200e3, 52.49e3, 600e3, ctx.rho_hz, &c);
        assert!(rel(chi, 14_701.532_111_534_62) < 1e-11, "{chi}");
        assert!(rel(ctx.magnitude(200e3), 14_701.465_846_888_22) < 1e-11);
        let far = ctx.magnitude(1e12);
        assert!(rel(far, 46_275.538_713_846_66) < 1e-9, "{far}");
        assert!(rel(ctx.asymptote_hz(), 46_275.538_713_846_66) < 1e-12);
    }

    #[test]
    fn monotone_and_bounded() {
        let ctx = make_context(&s_band());
        let mut prev = 0.0;
        for i in 0..1000 {
            let x = XMIN_600 + i as f64 * 5e3;
            let chi = ctx.magnitude(x);
            assert!(chi >= prev);
            assert!(chi <= ctx.asymptote_hz());
            prev = chi;
        }
    }

    #[test]
    fn common_doppler() {
        let s = s_band();
        assert_eq!(make_context(&s).common_doppler_hz, 0.0);
        let at_min = load_scenario(&format!(
            "preset = \"S\"\n[cell]\ncenter_offset_km = {}\n",
            XMIN_600 / 1e3
        ))
        .unwrap();
        assert!(make_context(&at_min).common_doppler_hz.abs() < 1e-3);
        let at300 = load_scenario("preset = \"S\"\n[cell]\ncenter_offset_km = 300\n").unwrap();
        let ctx = make_context(&at300);
        assert!(rel(ctx.common_doppler_hz, 21_115.720_411_739_53) < 1e-11);
        assert_eq!(ctx.common_doppler_hz, ctx.magnitude(300e3));
    }

    #[test]
    fn residual_values() {
        let at300 = load_scenario("preset = \"S\"\n[cell]\ncenter_offset_km = 300\n").unwrap();
        let ctx = make_context(&at300);
        assert_eq!(residual_doppler(&ctx, 300e3), 0.0);
        assert!(ctx.residual(350e3) > 0.0);
        let r = ctx.residual(250e3);
        assert!(rel(r, -3_038.718_697_765_32) < 1e-9, "{r}");
        let u = ctx.uncompensated();
        assert_eq!(u.residual(250e3), ctx.magnitude(250e3));
    }

    #[test]
    fn inverse_magnitude() {
        let ctx = make_context(&s_band());
        for x in [60e3, 100e3, 300e3, 1500e3] {
            let back = ctx.distance_for_magnitude(ctx.magnitude(x)).unwrap();
            assert!(rel(back, x) < 1e-9);
        }
        assert!(ctx.distance_for_magnitude(ctx.asymptote_hz()).is_none());
    }

    #[test]
    fn oracle_zero_at_closest_approach() {
        let s = s_band();
        let v = doppler_oracle_finite_difference(XMIN_600, XMIN_600, 600e3, &s, 1e-3).unwrap();
        assert!(v < 1.0, "{v}");
    }

    #[test]
    fn oracle_agrees_at_200_km() {
        let s = s_band();
        let ctx = make_context(&s);
        let oracle = doppler_oracle_finite_difference(200e3, 52.49e3, 600e3, &s, 1e-3).unwrap();
        let chi = doppler_magnitude(200e3, 52.49e3, 600e3, ctx.rho_hz, s.constants());
        assert!(rel(chi, oracle) < 0.05, "{chi} vs {oracle}");
    }

    #[test]
    fn oracle_step_convergence() {
        let s = s_band();
        let a = doppler_oracle_finite_difference(200e3, 52.49e3, 600e3, &s, 1e-3).unwrap();
        let b = doppler_oracle_finite_difference(200e3, 52.49e3, 600e3, &s, 5e-4).unwrap();
        assert!(rel(a, b) < 1e-4);
    }

    #[test]
    fn oracle_rejects_inside_closest_approach() {
        let s = s_band();
        assert!(doppler_oracle_finite_difference(10e3, 52e3, 600e3, &s, 1e-3).is_err());
    }
}
