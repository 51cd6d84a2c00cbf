//! Shared fixtures for the benchmarks.

use leo_doppler::scenario::{BandLabel, ScenarioConfig};

/// Preset with the subpoint moved `offset_km` from the cell center.
pub fn offset_preset(band: BandLabel, offset_km: f64) -> ScenarioConfig {
    ScenarioConfig::preset(band)
        .and_then(|s| s.with_inputs(|i| i.cell.center_offset_km = offset_km))
        .expect("built-in presets are valid")
}

pub fn tau_grid_linear() -> Vec<f64> {
    leo_doppler::sweep::default_tau_grid()
        .into_iter()
        .map(leo_doppler::db_to_linear)
        .collect()
}
