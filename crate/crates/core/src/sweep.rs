//! Parameter sweeps and figure-data presets.
//!
//! A sweep evaluates coverage over a tau grid for every value of one swept
//! scenario parameter (optionally nested inside an outer parameter). Each
//! value re-derives the scenario, so the cell radius follows the HPBW and the
//! common Doppler follows the subpoint offset.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::coverage::{coverage, CoverageMode};
use crate::doppler::make_context;
use crate::error::{Error, Result};
use crate::montecarlo::{estimate_coverage_modes, McConfig, McMode};
use crate::scenario::{db_to_linear, BandLabel, ScenarioConfig, ScenarioInputs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    TauDb,
    SubcarrierSpacingHz,
    HpbwRad,
    AltitudeM,
    CenterOffsetM,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 5] = [
        SweepVariable::TauDb,
        SweepVariable::SubcarrierSpacingHz,
        SweepVariable::HpbwRad,
        SweepVariable::AltitudeM,
        SweepVariable::CenterOffsetM,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::TauDb => "tau_db",
            SweepVariable::SubcarrierSpacingHz => "subcarrier_spacing_hz",
            SweepVariable::HpbwRad => "hpbw_rad",
            SweepVariable::AltitudeM => "altitude_m",
            SweepVariable::CenterOffsetM => "center_offset_m",
        }
    }

    /// Writes `value` (SI units) into the scenario document. Fails for
    /// `tau_db`, which is not a scenario parameter.
    pub fn apply(self, inputs: &mut ScenarioInputs, value: f64) -> Result<()> {
        match self {
            SweepVariable::TauDb => return Err(Error::Usage("tau_db is a threshold, not a scenario parameter".into())),
            SweepVariable::SubcarrierSpacingHz => inputs.radio.subcarrier_spacing_khz = value / 1e3,
            SweepVariable::HpbwRad => {
                inputs.cell.hpbw_deg = value.to_degrees();
                inputs.cell.cell_radius_km = None;
            }
            SweepVariable::AltitudeM => {
                inputs.orbit.altitude_km = value / 1e3;
                inputs.cell.cell_radius_km = None;
            }
            SweepVariable::CenterOffsetM => inputs.cell.center_offset_km = value / 1e3,
        }
        Ok(())
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepVariable::ALL.into_iter().find(|v| v.as_str() == s).ok_or_else(|| {
            let names: Vec<_> = SweepVariable::ALL.iter().map(|v| v.as_str()).collect();
            Error::Usage(format!(
                "unknown sweep variable `{s}` (expected one of: {})",
                names.join(", ")
            ))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepMode {
    Analytic(CoverageMode),
    /// Mode-matched Monte-Carlo for ideal, residual and uncompensated.
    MonteCarlo,
}

impl SweepMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepMode::Analytic(m) => m.as_str(),
            SweepMode::MonteCarlo => "mc",
        }
    }
}

impl fmt::Display for SweepMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "mc" {
            return Ok(SweepMode::MonteCarlo);
        }
        s.parse::<CoverageMode>().map(SweepMode::Analytic).map_err(|_| {
            Error::Usage(format!(
                "unknown mode `{s}` (expected one of: ideal, residual, uncompensated, exact, mc)"
            ))
        })
    }
}

/// Threshold grid shared by all figure presets: -10 to 30 dB in 1 dB steps.
pub fn default_tau_grid() -> Vec<f64> {
    (-10..=30).map(f64::from).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    /// Optional outer axis, iterated before `variable`.
    pub outer: Option<(SweepVariable, Vec<f64>)>,
    /// Applied to every point before the swept values.
    pub fixed_overrides: Vec<(SweepVariable, f64)>,
    /// Thresholds per point; ignored when `variable` is `tau_db`.
    pub tau_grid_db: Vec<f64>,
    pub modes: Vec<SweepMode>,
}

impl SweepSpec {
    pub fn over_tau(modes: Vec<SweepMode>) -> Self {
        SweepSpec {
            variable: SweepVariable::TauDb,
            values: default_tau_grid(),
            outer: None,
            fixed_overrides: Vec::new(),
            tau_grid_db: default_tau_grid(),
            modes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::validation("values", "sweep needs at least one value"));
        }
        if self.modes.is_empty() {
            return Err(Error::validation("modes", "sweep needs at least one mode"));
        }
        if self.variable != SweepVariable::TauDb && self.tau_grid_db.is_empty() {
            return Err(Error::validation("tau_grid_db", "must not be empty"));
        }
        if let Some((outer, values)) = &self.outer {
            if *outer == SweepVariable::TauDb || *outer == self.variable {
                return Err(Error::Usage(format!(
                    "outer variable `{outer}` must differ from tau_db and the swept variable"
                )));
            }
            if values.is_empty() {
                return Err(Error::validation("outer", "outer axis needs at least one value"));
            }
        }
        if let Some((v, _)) = self.fixed_overrides.iter().find(|(v, _)| *v == SweepVariable::TauDb) {
            return Err(Error::Usage(format!("`{v}` cannot be a fixed override")));
        }
        if self.values.iter().chain(&self.tau_grid_db).any(|v| !v.is_finite()) {
            return Err(Error::validation("values", "must be finite"));
        }
        Ok(())
    }

    fn taus_db(&self) -> &[f64] {
        if self.variable == SweepVariable::TauDb {
            &self.values
        } else {
            &self.tau_grid_db
        }
    }

    fn value_columns(&self) -> Vec<&'static str> {
        let mut cols = Vec::new();
        if let Some((outer, _)) = &self.outer {
            cols.push(outer.as_str());
        }
        if self.variable != SweepVariable::TauDb {
            cols.push(self.variable.as_str());
        }
        cols
    }

    fn mode_columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self
            .modes
            .iter()
            .filter_map(|m| match m {
                SweepMode::Analytic(c) => Some(format!("p_{c}")),
                SweepMode::MonteCarlo => None,
            })
            .collect();
        if self.modes.contains(&SweepMode::MonteCarlo) {
            cols.extend(McMode::ALL.iter().map(|m| format!("p_mc_{m}")));
        }
        cols
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureName {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2d,
}

impl FigureName {
    pub const ALL: [FigureName; 4] = [
        FigureName::Fig2a,
        FigureName::Fig2b,
        FigureName::Fig2c,
        FigureName::Fig2d,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureName::Fig2a => "fig2a",
            FigureName::Fig2b => "fig2b",
            FigureName::Fig2c => "fig2c",
            FigureName::Fig2d => "fig2d",
        }
    }
}

impl fmt::Display for FigureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureName::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| {
            Error::Usage(format!(
                "unknown figure `{s}` (expected one of: fig2a, fig2b, fig2c, fig2d)"
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub name: FigureName,
    pub bands: Vec<BandLabel>,
    pub sweep: SweepSpec,
}

impl FigureSpec {
    /// The same figure with the Monte-Carlo columns dropped.
    pub fn without_mc(&self) -> FigureSpec {
        let mut f = self.clone();
        f.sweep.modes.retain(|m| *m != SweepMode::MonteCarlo);
        f
    }
}

/// Subpoint offset used by figure presets so the cell sees in-cell Doppler.
pub const FIGURE_CENTER_OFFSET_M: f64 = 100e3;

pub fn figure_preset(name: FigureName) -> FigureSpec {
    use CoverageMode::{Ideal, Residual, Uncompensated};
    let analytic = vec![
        SweepMode::Analytic(Ideal),
        SweepMode::Analytic(Residual),
        SweepMode::Analytic(Uncompensated),
    ];
    let offset = vec![(SweepVariable::CenterOffsetM, FIGURE_CENTER_OFFSET_M)];
    let base = |variable, values: Vec<f64>| SweepSpec {
        variable,
        values,
        outer: None,
        fixed_overrides: offset.clone(),
        tau_grid_db: default_tau_grid(),
        modes: analytic.clone(),
    };
    match name {
        FigureName::Fig2a => {
            let mut sweep = base(SweepVariable::TauDb, default_tau_grid());
            sweep.modes.push(SweepMode::MonteCarlo);
            FigureSpec {
                name,
                bands: BandLabel::PRESETS.to_vec(),
                sweep,
            }
        }
        FigureName::Fig2b => FigureSpec {
            name,
            bands: vec![BandLabel::S],
            sweep: base(SweepVariable::SubcarrierSpacingHz, vec![15e3, 30e3, 60e3, 120e3]),
        },
        FigureName::Fig2c => FigureSpec {
            name,
            bands: BandLabel::PRESETS.to_vec(),
            sweep: base(
                SweepVariable::HpbwRad,
                [4.4127f64, 6.0, 8.832, 12.0].iter().map(|d| d.to_radians()).collect(),
            ),
        },
        FigureName::Fig2d => {
            let mut sweep = base(
                SweepVariable::CenterOffsetM,
                vec![105e3, 150e3, 200e3, 300e3, 400e3, 500e3],
            );
            sweep.fixed_overrides.clear();
            sweep.outer = Some((SweepVariable::AltitudeM, vec![600e3, 1200e3]));
            FigureSpec {
                name,
                bands: vec![BandLabel::Ka],
                sweep,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: String,
    /// Outer then swept value, matching [`Table::value_columns`].
    pub parameters: Vec<f64>,
    pub tau_db: f64,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub value_columns: Vec<&'static str>,
    pub mode_columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl Table {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["scenario".to_string()];
        h.extend(self.value_columns.iter().map(|c| c.to_string()));
        h.push("tau_db".into());
        h.extend(self.mode_columns.iter().cloned());
        h
    }

    /// Index of a probability column such as `p_residual`.
    pub fn mode_index(&self, column: &str) -> Option<usize> {
        self.mode_columns.iter().position(|c| c == column)
    }

    pub fn append(&mut self, other: Table) -> Result<()> {
        if self.value_columns != other.value_columns || self.mode_columns != other.mode_columns {
            return Err(Error::Usage("cannot append tables with different columns".into()));
        }
        self.rows.extend(other.rows);
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for r in &self.rows {
            let mut rec = vec![r.scenario.clone()];
            rec.extend(r.parameters.iter().map(f64::to_string));
            rec.push(r.tau_db.to_string());
            rec.extend(r.probabilities.iter().map(f64::to_string));
            w.write_record(rec)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<csv output>".into(),
            source: e,
        })?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let header = self.header();
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut v = vec![r.scenario.clone()];
                v.extend(r.parameters.iter().map(|x| format!("{x}")));
                v.push(format!("{}", r.tau_db));
                v.extend(r.probabilities.iter().map(|p| format!("{p:.6}")));
                v
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|i| {
                body.iter()
                    .map(|r| r[i].len())
                    .chain([header[i].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut out = line(&header);
        out.push('\n');
        for r in &body {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

/// Runs `spec` for each base scenario in order. `mc` is required when the
/// spec requests `mc`.
pub fn run_sweep(spec: &SweepSpec, scenarios: &[ScenarioConfig], mc: Option<&McConfig>) -> Result<Table> {
    spec.validate()?;
    let wants_mc = spec.modes.contains(&SweepMode::MonteCarlo);
    if wants_mc && mc.is_none() {
        return Err(Error::Usage("mode `mc` needs a Monte-Carlo configuration".into()));
    }

    let mut points = Vec::new();
    for base in scenarios {
        let mut fixed = base.inputs().clone();
        for &(var, value) in &spec.fixed_overrides {
            var.apply(&mut fixed, value)?;
        }
        let outer: Vec<Option<(SweepVariable, f64)>> = match &spec.outer {
            Some((var, values)) => values.iter().map(|&v| Some((*var, v))).collect(),
            None => vec![None],
        };
        let inner: Vec<Option<f64>> = if spec.variable == SweepVariable::TauDb {
            vec![None]
        } else {
            spec.values.iter().map(|&v| Some(v)).collect()
        };
        for o in &outer {
            for i in &inner {
                let mut inputs = fixed.clone();
                let mut params = Vec::new();
                if let Some((var, v)) = o {
                    var.apply(&mut inputs, *v)?;
                    params.push(*v);
                }
                if let Some(v) = i {
                    spec.variable.apply(&mut inputs, *v)?;
                    params.push(*v);
                }
                points.push((ScenarioConfig::from_inputs(inputs)?, params));
            }
        }
    }

    let taus_db = spec.taus_db();
    let taus: Vec<f64> = taus_db.iter().map(|&d| db_to_linear(d)).collect();
    let evaluated: Vec<Result<Vec<SweepRow>>> = points
        .par_iter()
        .map(|(sc, params)| {
            let ctx = make_context(sc);
            let mc_rows = match (wants_mc, mc) {
                (true, Some(cfg)) => Some(estimate_coverage_modes(&taus, sc, cfg, &McMode::ALL)?),
                _ => None,
            };
            Ok(taus
                .iter()
                .enumerate()
                .map(|(j, &tau)| {
                    let mut probabilities: Vec<f64> = spec
                        .modes
                        .iter()
                        .filter_map(|m| match m {
                            SweepMode::Analytic(c) => Some(coverage(tau, sc, &ctx, *c)),
                            SweepMode::MonteCarlo => None,
                        })
                        .collect();
                    if let Some(rows) = &mc_rows {
                        probabilities.extend(rows.iter().map(|r| r[j].probability));
                    }
                    SweepRow {
                        scenario: sc.band().to_string(),
                        parameters: params.clone(),
                        tau_db: taus_db[j],
                        probabilities,
                    }
                })
                .collect())
        })
        .collect();

    let mut rows = Vec::with_capacity(points.len() * taus.len());
    for r in evaluated {
        rows.extend(r?);
    }
    Ok(Table {
        value_columns: spec.value_columns(),
        mode_columns: spec.mode_columns(),
        rows,
    })
}

/// Runs a figure preset over its built-in bands.
pub fn run_figure(figure: &FigureSpec, mc: Option<&McConfig>) -> Result<Table> {
    let scenarios = figure
        .bands
        .iter()
        .map(|&b| ScenarioConfig::preset(b))
        .collect::<Result<Vec<_>>>()?;
    run_sweep(&figure.sweep, &scenarios, mc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn presets(bands: &[BandLabel]) -> Vec<ScenarioConfig> {
        bands.iter().map(|&b| ScenarioConfig::preset(b).unwrap()).collect()
    }

    #[test]
    fn names_round_trip() {
        for v in SweepVariable::ALL {
            assert_eq!(v.as_str().parse::<SweepVariable>().unwrap(), v);
        }
        for f in FigureName::ALL {
            assert_eq!(f.as_str().parse::<FigureName>().unwrap(), f);
        }
        assert_eq!("mc".parse::<SweepMode>().unwrap(), SweepMode::MonteCarlo);
        assert!(matches!("bogus".parse::<SweepVariable>(), Err(Error::Usage(_))));
        let err = "fig3".parse::<FigureName>().unwrap_err().to_string();
        assert!(err.contains("fig2a") && err.contains("fig2d"), "{err}");
    }

    #[test]
    fn tau_sweep_layout() {
        let spec = SweepSpec::over_tau(vec![
            SweepMode::Analytic(CoverageMode::Ideal),
            SweepMode::Analytic(CoverageMode::Exact),
        ]);
        let t = run_sweep(&spec, &presets(&[BandLabel::S]), None).unwrap();
        assert_eq!(t.header(), ["scenario", "tau_db", "p_ideal", "p_exact"]);
        assert_eq!(t.rows.len(), 41);
        assert!(t.rows.iter().all(|r| r.parameters.is_empty()));
    }

    #[test]
    fn mc_requires_config() {
        let spec = SweepSpec::over_tau(vec![SweepMode::MonteCarlo]);
        assert!(matches!(
            run_sweep(&spec, &presets(&[BandLabel::S]), None),
            Err(Error::Usage(_))
        ));
        let cfg = McConfig::new(1000, 1, McMode::Residual);
        let t = run_sweep(&spec, &presets(&[BandLabel::S]), Some(&cfg)).unwrap();
        assert_eq!(t.mode_columns, ["p_mc_ideal", "p_mc_residual", "p_mc_uncompensated"]);
    }

    #[test]
    fn nested_sweep_order() {
        let fig = figure_preset(FigureName::Fig2d);
        let t = run_figure(&fig, None).unwrap();
        assert_eq!(t.value_columns, ["altitude_m", "center_offset_m"]);
        assert_eq!(t.rows.len(), 2 * 6 * 41);
        assert_eq!(t.rows[0].parameters, [600e3, 105e3]);
        assert_eq!(t.rows.last().unwrap().parameters, [1200e3, 500e3]);
    }

    #[test]
    fn hpbw_rederives_radius() {
        let fig = figure_preset(FigureName::Fig2c);
        let mut inputs = ScenarioConfig::preset(BandLabel::S).unwrap().inputs().clone();
        SweepVariable::HpbwRad.apply(&mut inputs, 12f64.to_radians()).unwrap();
        let sc = ScenarioConfig::from_inputs(inputs).unwrap();
        assert!((sc.cell().cell_radius_m - 600e3 * 6f64.to_radians().tan()).abs() < 1e-6);
        assert_eq!(fig.sweep.values.len(), 4);
    }

    #[test]
    fn invalid_specs() {
        let mut spec = SweepSpec::over_tau(vec![SweepMode::Analytic(CoverageMode::Ideal)]);
        spec.values.clear();
        assert!(spec.validate().is_err());
        let mut spec = SweepSpec::over_tau(vec![]);
        assert!(spec.validate().is_err());
        spec.modes.push(SweepMode::MonteCarlo);
        spec.fixed_overrides.push((SweepVariable::TauDb, 1.0));
        assert!(spec.validate().is_err());
        let mut spec = figure_preset(FigureName::Fig2b).sweep;
        spec.fixed_overrides.push((SweepVariable::AltitudeM, -5.0));
        assert!(matches!(
            run_sweep(&spec, &presets(&[BandLabel::S]), None),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn text_and_csv_render() {
        let t = run_figure(&figure_preset(FigureName::Fig2b), None).unwrap();
        let csv = t.to_csv_string().unwrap();
        assert!(csv.starts_with("scenario,subcarrier_spacing_hz,tau_db,p_ideal,p_residual,p_uncompensated\n"));
        assert!(csv.contains("\nS,15000,-10,"));
        assert_eq!(t.to_text().lines().count(), t.rows.len() + 1);
    }
}
