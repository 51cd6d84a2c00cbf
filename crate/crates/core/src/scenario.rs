//! Scenario configuration.
//!
//! A scenario is described by a TOML document whose keys carry their unit
//! (`altitude_km`, `carrier_ghz`, `rain_gain_db`, ...). Documents may start
//! from one of the built-in band presets (`preset = "S"` or `preset = "Ka"`)
//! and override any subset of keys. [`ScenarioConfig::from_inputs`] turns the
//! resolved document into SI quantities (m, s, Hz, W, rad, linear gains); no
//! other module sees dB or degrees.
//!
//! Preset files live in `crates/core/presets/` and are compiled in. Setting
//! the [`PRESET_DIR_ENV`] environment variable makes the loader read
//! `<dir>/S.toml` and `<dir>/Ka.toml` instead.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boltzmann constant, J/K.
pub const BOLTZMANN_J_PER_K: f64 = 1.380649e-23;

/// Reference temperature used to turn a noise figure into a noise temperature.
pub const REFERENCE_TEMPERATURE_K: f64 = 290.0;

/// Environment variable naming a directory that replaces the built-in presets.
pub const PRESET_DIR_ENV: &str = "LEO_DOPPLER_PRESET_DIR";

const BUILTIN_S: &str = include_str!("../presets/S.toml");
const BUILTIN_KA: &str = include_str!("../presets/Ka.toml");

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConstants {
    pub earth_radius_m: f64,
    pub light_speed_mps: f64,
    pub earth_mu_m3ps2: f64,
    pub earth_angular_rate_radps: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            earth_radius_m: 6.371e6,
            light_speed_mps: 2.997_924_58e8,
            earth_mu_m3ps2: 3.986_004_418e14,
            earth_angular_rate_radps: 7.292_115_9e-5,
        }
    }
}

impl PhysicalConstants {
    fn validate(&self) -> Result<()> {
        positive("constants.earth_radius_m", self.earth_radius_m)?;
        positive("constants.light_speed_mps", self.light_speed_mps)?;
        positive("constants.earth_mu_m3ps2", self.earth_mu_m3ps2)?;
        positive("constants.earth_angular_rate_radps", self.earth_angular_rate_radps)
    }
}

/// Which parameter set a scenario was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum BandLabel {
    S,
    Ka,
    #[default]
    #[serde(rename = "custom")]
    Custom,
}

impl BandLabel {
    pub const PRESETS: [BandLabel; 2] = [BandLabel::S, BandLabel::Ka];

    pub fn as_str(self) -> &'static str {
        match self {
            BandLabel::S => "S",
            BandLabel::Ka => "Ka",
            BandLabel::Custom => "custom",
        }
    }

    fn builtin_text(self) -> Option<&'static str> {
        match self {
            BandLabel::S => Some(BUILTIN_S),
            BandLabel::Ka => Some(BUILTIN_KA),
            BandLabel::Custom => None,
        }
    }
}

impl fmt::Display for BandLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BandLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s" => Ok(BandLabel::S),
            "ka" => Ok(BandLabel::Ka),
            "custom" => Ok(BandLabel::Custom),
            _ => Err(Error::Usage(format!(
                "unknown band `{s}` (expected one of: S, Ka, custom)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitInputs {
    pub altitude_km: f64,
    pub inclination_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellInputs {
    pub hpbw_deg: f64,
    pub center_offset_km: f64,
    pub max_elevation_deg: f64,
    pub min_elevation_deg: f64,
    /// Overrides the beamwidth-derived cell radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_radius_km: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioInputs {
    pub carrier_ghz: f64,
    pub subcarrier_spacing_khz: f64,
    pub bandwidth_mhz: f64,
    pub eirp_density_dbw_per_mhz: f64,
    pub sat_max_gain_dbi: f64,
    pub terminal_gain_dbi: f64,
    pub rain_gain_db: f64,
    pub antenna_temperature_k: f64,
    pub noise_figure_db: f64,
    /// Overrides the thermal noise power `k_B * T_sys * BW`. `-inf` gives a
    /// noise-free link.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_power_dbw: Option<f64>,
}

/// A fully resolved scenario document, in document units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioInputs {
    #[serde(default)]
    pub band: BandLabel,
    pub orbit: OrbitInputs,
    pub cell: CellInputs,
    pub radio: RadioInputs,
    #[serde(default)]
    pub constants: PhysicalConstants,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitParams {
    pub altitude_m: f64,
    pub inclination_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub hpbw_rad: f64,
    pub cell_radius_m: f64,
    /// Horizontal distance from the cell center to the satellite subpoint.
    pub center_offset_m: f64,
    /// Horizontal distance from the cell center to the orbit's ground track.
    pub min_center_orbit_distance_m: f64,
    pub max_elevation_rad: f64,
    pub min_elevation_rad: f64,
}

/// Radio parameters in SI units with linear gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    pub carrier_hz: f64,
    pub wavelength_m: f64,
    pub subcarrier_spacing_hz: f64,
    pub symbol_duration_s: f64,
    pub bandwidth_hz: f64,
    pub eirp_density_w_per_mhz: f64,
    pub sat_max_gain: f64,
    pub terminal_gain: f64,
    pub rain_gain: f64,
    pub system_noise_temperature_k: f64,
    pub tx_power_w: f64,
    pub noise_power_w: f64,
    /// `P_tx * l * G_R * G_max * (lambda / 4 pi)^2`, in W m^2.
    pub aggregate_gain: f64,
}

/// A validated scenario with every derived quantity populated.
///
/// Values are immutable; use [`ScenarioConfig::with_inputs`] to derive a
/// modified scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    inputs: ScenarioInputs,
    constants: PhysicalConstants,
    orbit: OrbitParams,
    cell: CellGeometry,
    radio: RadioParams,
}

impl ScenarioConfig {
    pub fn from_inputs(inputs: ScenarioInputs) -> Result<Self> {
        let constants = inputs.constants;
        constants.validate()?;

        let orbit_in = &inputs.orbit;
        positive("orbit.altitude_km", orbit_in.altitude_km)?;
        if !(0.0..=180.0).contains(&orbit_in.inclination_deg) {
            return Err(Error::validation(
                "orbit.inclination_deg",
                format!("must lie in [0, 180], got {}", orbit_in.inclination_deg),
            ));
        }
        let orbit = OrbitParams {
            altitude_m: orbit_in.altitude_km * 1e3,
            inclination_rad: orbit_in.inclination_deg.to_radians(),
        };

        let cell_in = &inputs.cell;
        if !(cell_in.hpbw_deg > 0.0 && cell_in.hpbw_deg < 180.0) {
            return Err(Error::validation(
                "cell.hpbw_deg",
                format!("must lie in (0, 180), got {}", cell_in.hpbw_deg),
            ));
        }
        non_negative("cell.center_offset_km", cell_in.center_offset_km)?;
        let (min_el, max_el) = (cell_in.min_elevation_deg, cell_in.max_elevation_deg);
        if !(min_el > 0.0 && min_el < max_el) {
            return Err(Error::validation(
                "cell.min_elevation_deg",
                format!("must satisfy 0 < min_elevation_deg < max_elevation_deg, got {min_el}"),
            ));
        }
        if max_el > 90.0 {
            return Err(Error::validation(
                "cell.max_elevation_deg",
                format!("must not exceed 90, got {max_el}"),
            ));
        }
        let hpbw_rad = cell_in.hpbw_deg.to_radians();
        let cell_radius_m = match cell_in.cell_radius_km {
            Some(km) => {
                positive("cell.cell_radius_km", km)?;
                km * 1e3
            }
            None => cell_radius(orbit.altitude_m, hpbw_rad)?,
        };
        let max_elevation_rad = max_el.to_radians();
        let cell = CellGeometry {
            hpbw_rad,
            cell_radius_m,
            center_offset_m: cell_in.center_offset_km * 1e3,
            min_center_orbit_distance_m: min_center_orbit_distance(orbit.altitude_m, max_elevation_rad)?,
            max_elevation_rad,
            min_elevation_rad: min_el.to_radians(),
        };

        let radio = derive_link_budget(&inputs)?;

        Ok(ScenarioConfig {
            inputs,
            constants,
            orbit,
            cell,
            radio,
        })
    }

    /// Built-in (or [`PRESET_DIR_ENV`]-overridden) preset for a band.
    pub fn preset(band: BandLabel) -> Result<Self> {
        let name = band.as_str();
        load_scenario(&format!("preset = \"{name}\"\n"))
    }

    /// Copy of this scenario with `edit` applied to its document and every
    /// derived field recomputed.
    pub fn with_inputs(&self, edit: impl FnOnce(&mut ScenarioInputs)) -> Result<Self> {
        let mut inputs = self.inputs.clone();
        edit(&mut inputs);
        ScenarioConfig::from_inputs(inputs)
    }

    pub fn inputs(&self) -> &ScenarioInputs {
        &self.inputs
    }

    pub fn band(&self) -> BandLabel {
        self.inputs.band
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn orbit(&self) -> &OrbitParams {
        &self.orbit
    }

    pub fn cell(&self) -> &CellGeometry {
        &self.cell
    }

    pub fn radio(&self) -> &RadioParams {
        &self.radio
    }

    /// `r_e / (r_e + H_S)`.
    pub fn orbit_ratio(&self) -> f64 {
        let r_e = self.constants.earth_radius_m;
        r_e / (r_e + self.orbit.altitude_m)
    }

    /// Serializes the resolved document. Reloading it with [`load_scenario`]
    /// yields an identical scenario.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.inputs).expect("scenario inputs are always representable in TOML")
    }
}

/// Cell radius from the satellite's half-power beamwidth, `H_S tan(psi / 2)`.
pub fn cell_radius(altitude_m: f64, hpbw_rad: f64) -> Result<f64> {
    if !(altitude_m > 0.0) {
        return Err(Error::domain(
            "cell_radius",
            format!("altitude must be positive, got {altitude_m}"),
        ));
    }
    if !(hpbw_rad > 0.0 && hpbw_rad < PI) {
        return Err(Error::domain(
            "cell_radius",
            format!("beamwidth must lie in (0, pi) rad, got {hpbw_rad}"),
        ));
    }
    Ok(altitude_m * (hpbw_rad / 2.0).tan())
}

/// Distance from the cell center to the ground track implied by the maximum
/// elevation angle, `H_S / tan(alpha_max)`.
pub fn min_center_orbit_distance(altitude_m: f64, max_elevation_rad: f64) -> Result<f64> {
    if !(max_elevation_rad > 0.0 && max_elevation_rad <= FRAC_PI_2 + 1e-15) {
        return Err(Error::domain(
            "min_center_orbit_distance",
            format!("maximum elevation must lie in (0, pi/2] rad, got {max_elevation_rad}"),
        ));
    }
    if (max_elevation_rad - FRAC_PI_2).abs() <= 1e-15 {
        return Ok(0.0);
    }
    Ok(altitude_m / max_elevation_rad.tan())
}

/// Converts the document's radio section into SI quantities.
///
/// The transmit power is recovered from the EIRP density as
/// `P_tx[dBW] = EIRP[dBW/MHz] + 10 log10(BW[MHz]) - G_max[dBi]`.
pub fn derive_link_budget(inputs: &ScenarioInputs) -> Result<RadioParams> {
    let r = &inputs.radio;
    positive("radio.carrier_ghz", r.carrier_ghz)?;
    positive("radio.subcarrier_spacing_khz", r.subcarrier_spacing_khz)?;
    positive("radio.bandwidth_mhz", r.bandwidth_mhz)?;
    finite("radio.eirp_density_dbw_per_mhz", r.eirp_density_dbw_per_mhz)?;
    finite("radio.sat_max_gain_dbi", r.sat_max_gain_dbi)?;
    finite("radio.terminal_gain_dbi", r.terminal_gain_dbi)?;
    finite("radio.rain_gain_db", r.rain_gain_db)?;
    non_negative("radio.antenna_temperature_k", r.antenna_temperature_k)?;
    non_negative("radio.noise_figure_db", r.noise_figure_db)?;

    let carrier_hz = r.carrier_ghz * 1e9;
    let wavelength_m = inputs.constants.light_speed_mps / carrier_hz;
    let subcarrier_spacing_hz = r.subcarrier_spacing_khz * 1e3;
    let bandwidth_hz = r.bandwidth_mhz * 1e6;

    let tx_power_dbw = r.eirp_density_dbw_per_mhz + 10.0 * r.bandwidth_mhz.log10() - r.sat_max_gain_dbi;
    let tx_power_w = db_to_linear(tx_power_dbw);
    let sat_max_gain = db_to_linear(r.sat_max_gain_dbi);
    let terminal_gain = db_to_linear(r.terminal_gain_dbi);
    let rain_gain = db_to_linear(r.rain_gain_db);
    let free_space = wavelength_m / (4.0 * PI);
    let aggregate_gain = tx_power_w * rain_gain * terminal_gain * sat_max_gain * free_space * free_space;

    let system_noise_temperature_k =
        r.antenna_temperature_k + REFERENCE_TEMPERATURE_K * (db_to_linear(r.noise_figure_db) - 1.0);
    let noise_power_w = match r.noise_power_dbw {
        Some(dbw) if dbw.is_nan() || dbw == f64::INFINITY => {
            return Err(Error::validation("radio.noise_power_dbw", "must be finite or -inf"));
        }
        Some(dbw) => db_to_linear(dbw),
        None => BOLTZMANN_J_PER_K * system_noise_temperature_k * bandwidth_hz,
    };

    Ok(RadioParams {
        carrier_hz,
        wavelength_m,
        subcarrier_spacing_hz,
        symbol_duration_s: 1.0 / subcarrier_spacing_hz,
        bandwidth_hz,
        eirp_density_w_per_mhz: db_to_linear(r.eirp_density_dbw_per_mhz),
        sat_max_gain,
        terminal_gain,
        rain_gain,
        system_noise_temperature_k,
        tx_power_w,
        noise_power_w,
        aggregate_gain,
    })
}

/// Parses a scenario document, applying a preset first when the document
/// names one, and derives the full configuration.
pub fn load_scenario(text: &str) -> Result<ScenarioConfig> {
    let mut table: toml::Table = text.parse().map_err(|e| parse_error(text, &e))?;
    let inputs: ScenarioInputs = match table.remove("preset") {
        None => toml::from_str(text).map_err(|e| parse_error(text, &e))?,
        Some(toml::Value::String(name)) => {
            let band: BandLabel = name.parse()?;
            let preset_text = preset_text(band)?;
            let mut merged: toml::Table = preset_text.parse().map_err(|e| parse_error(&preset_text, &e))?;
            merge_tables(&mut merged, table);
            toml::Value::Table(merged)
                .try_into()
                .map_err(|e: toml::de::Error| Error::validation("scenario", e.message().trim().to_string()))?
        }
        Some(other) => {
            return Err(Error::validation(
                "preset",
                format!("expected a string, got {}", other.type_str()),
            ))
        }
    };
    ScenarioConfig::from_inputs(inputs)
}

pub fn load_scenario_file(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_scenario(&text)
}

/// Text of a preset document, honoring [`PRESET_DIR_ENV`].
pub fn preset_text(band: BandLabel) -> Result<String> {
    let Some(builtin) = band.builtin_text() else {
        return Err(Error::Usage("`custom` is not a preset (expected S or Ka)".into()));
    };
    match std::env::var_os(PRESET_DIR_ENV) {
        Some(dir) if !dir.is_empty() => {
            let path = PathBuf::from(dir).join(format!("{}.toml", band.as_str()));
            std::fs::read_to_string(&path).map_err(|source| Error::Io { path, source })
        }
        _ => Ok(builtin.to_string()),
    }
}

fn merge_tables(base: &mut toml::Table, overrides: toml::Table) {
    for (key, value) in overrides {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(dst)), toml::Value::Table(src)) => merge_tables(dst, src),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

fn parse_error(text: &str, err: &toml::de::Error) -> Error {
    let (line, column) = match err.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
            (line, column)
        }
        None => (0, 0),
    };
    Error::Parse {
        line,
        column,
        message: err.message().trim().to_string(),
    }
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("must be positive and finite, got {value}"),
        ))
    }
}

fn non_negative(field: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("must be non-negative and finite, got {value}"),
        ))
    }
}

fn finite(field: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite, got {value}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn s_preset_values() {
        let s = ScenarioConfig::preset(BandLabel::S).unwrap();
        assert_eq!(s.band(), BandLabel::S);
        assert_eq!(s.radio().carrier_hz, 2e9);
        assert_eq!(s.inputs().radio.sat_max_gain_dbi, 24.0);
        assert_eq!(s.inputs().cell.hpbw_deg, 8.832);
        assert_eq!(s.radio().bandwidth_hz, 30e6);
        assert_eq!(s.inputs().radio.eirp_density_dbw_per_mhz, 28.0);
        assert_eq!(s.inputs().radio.terminal_gain_dbi, -5.5);
        assert_eq!(s.radio().subcarrier_spacing_hz, 15e3);
        assert_eq!(s.cell().center_offset_m, 0.0);
    }

    #[test]
    fn ka_preset_values() {
        let ka = ScenarioConfig::preset(BandLabel::Ka).unwrap();
        assert_eq!(ka.radio().carrier_hz, 20e9);
        assert_eq!(ka.inputs().radio.sat_max_gain_dbi, 30.5);
        assert_eq!(ka.inputs().cell.hpbw_deg, 4.4127);
        assert_eq!(ka.inputs().radio.terminal_gain_dbi, 39.7);
        assert_eq!(ka.radio().bandwidth_hz, 400e6);
        assert_eq!(ka.inputs().radio.eirp_density_dbw_per_mhz, -4.0);
        assert_eq!(ka.radio().subcarrier_spacing_hz, 120e3);
    }

    #[test]
    fn shared_orbit_parameters() {
        for band in BandLabel::PRESETS {
            let sc = ScenarioConfig::preset(band).unwrap();
            assert_eq!(sc.orbit().altitude_m, 600e3);
            assert_eq!(sc.inputs().orbit.inclination_deg, 53.0);
            assert_eq!(sc.inputs().cell.max_elevation_deg, 85.0);
            assert_eq!(sc.inputs().radio.rain_gain_db, -3.125);
        }
    }

    #[test]
    fn altitude_override_rederives() {
        let sc = load_scenario("preset = \"S\"\n[orbit]\naltitude_km = 1200\n").unwrap();
        assert_eq!(sc.orbit().altitude_m, 1.2e6);
        assert_eq!(sc.inputs().orbit.inclination_deg, 53.0);
        assert!(rel(sc.cell().cell_radius_m, 2.0 * 46_336.031_140_001_61) < 1e-12);
        assert!(rel(sc.cell().min_center_orbit_distance_m, 104_986.396_231_108_8) < 1e-12);
    }

    #[test]
    fn cell_radius_values() {
        let s = cell_radius(600e3, 8.832f64.to_radians()).unwrap();
        assert!(rel(s, 46_336.031_140_001_61) < 1e-12, "{s}");
        let ka = cell_radius(600e3, 4.4127f64.to_radians()).unwrap();
        assert!(rel(ka, 23_116.270_454_246_82) < 1e-12, "{ka}");
        assert!(cell_radius(600e3, 1e-12).unwrap() < 1e-6);
        assert!(matches!(cell_radius(600e3, PI), Err(Error::Domain { .. })));
        assert!(matches!(cell_radius(600e3, 4.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn eq1_consistency_for_presets() {
        for band in BandLabel::PRESETS {
            let sc = ScenarioConfig::preset(band).unwrap();
            let expected = sc.orbit().altitude_m * (sc.cell().hpbw_rad / 2.0).tan();
            assert!(rel(sc.cell().cell_radius_m, expected) < 1e-9);
        }
    }

    #[test]
    fn min_center_orbit_distance_values() {
        let d = min_center_orbit_distance(600e3, 85f64.to_radians()).unwrap();
        assert!(rel(d, 52_493.198_115_554_4) < 1e-12, "{d}");
        assert_eq!(min_center_orbit_distance(600e3, 90f64.to_radians()).unwrap(), 0.0);
        let d = min_center_orbit_distance(1200e3, 85f64.to_radians()).unwrap();
        assert!(rel(d, 104_986.396_231_108_8) < 1e-12);
        assert!(min_center_orbit_distance(600e3, 0.0).is_err());
        assert!(min_center_orbit_distance(600e3, -0.1).is_err());
    }

    #[test]
    fn transmit_power_from_eirp_density() {
        let s = ScenarioConfig::preset(BandLabel::S).unwrap();
        let dbw = linear_to_db(s.radio().tx_power_w);
        assert!((dbw - 18.771_212_547_196_62).abs() < 1e-9, "{dbw}");
        let ka = ScenarioConfig::preset(BandLabel::Ka).unwrap();
        let dbw = linear_to_db(ka.radio().tx_power_w);
        assert!((dbw - (-8.479_400_086_720_376)).abs() < 1e-9, "{dbw}");
    }

    #[test]
    fn aggregate_gain_and_noise() {
        let s = ScenarioConfig::preset(BandLabel::S).unwrap();
        assert!(rel(s.radio().aggregate_gain, 0.369_643_387_189_269_8) < 1e-12);
        assert!(rel(s.radio().noise_power_w, 6.020_083_780_406_26e-13) < 1e-12);
        assert!(rel(s.radio().wavelength_m, 0.149_896_229) < 1e-12);
        assert!(rel(s.radio().symbol_duration_s, 1.0 / 15e3) < 1e-15);
    }

    #[test]
    fn unity_gains_leave_free_space_factor() {
        let sc =
            load_scenario("preset = \"S\"\n[radio]\nterminal_gain_dbi = 0\nsat_max_gain_dbi = 0\nrain_gain_db = 0\n")
                .unwrap();
        let r = sc.radio();
        let fs = r.wavelength_m / (4.0 * PI);
        assert!(rel(r.aggregate_gain, r.tx_power_w * fs * fs) < 1e-14);
    }

    #[test]
    fn nonpositive_bandwidth_is_rejected() {
        let err = load_scenario("preset = \"S\"\n[radio]\nbandwidth_mhz = 0\n").unwrap_err();
        match err {
            Error::Validation { field, .. } => assert_eq!(field, "radio.bandwidth_mhz"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validation_names_field() {
        let err = load_scenario("preset = \"Ka\"\n[cell]\nmin_elevation_deg = 90\n").unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "cell.min_elevation_deg"));
        let err = load_scenario("preset = \"Ka\"\n[orbit]\naltitude_km = -1\n").unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "orbit.altitude_km"));
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = load_scenario("preset = \"S\"\n[orbit]\naltitude_km = = 3\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_an_error() {
        assert!(load_scenario("preset = \"S\"\n[orbit]\naltitud_km = 3\n").is_err());
        let full = ScenarioConfig::preset(BandLabel::S).unwrap().to_toml();
        let err = load_scenario(&format!("{full}\n[extra]\nx = 1\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err:?}");
    }

    #[test]
    fn unknown_preset_is_an_error() {
        assert!(load_scenario("preset = \"X\"\n").is_err());
        assert!(load_scenario("preset = 3\n").is_err());
    }

    #[test]
    fn round_trip_and_idempotence() {
        for band in BandLabel::PRESETS {
            let sc = ScenarioConfig::preset(band).unwrap();
            let again = load_scenario(&sc.to_toml()).unwrap();
            assert_eq!(sc, again);
            let rederived = ScenarioConfig::from_inputs(sc.inputs().clone()).unwrap();
            assert_eq!(sc, rederived);
        }
    }

    #[test]
    fn noise_free_override() {
        let sc = load_scenario("preset = \"S\"\n[radio]\nnoise_power_dbw = -inf\n").unwrap();
        assert_eq!(sc.radio().noise_power_w, 0.0);
        let again = load_scenario(&sc.to_toml()).unwrap();
        assert_eq!(sc, again);
    }
}
