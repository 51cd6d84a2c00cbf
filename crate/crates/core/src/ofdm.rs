//! OFDM impairment model for a residual frequency offset.
//!
//! With infinitely many subcarriers, a frequency offset `f` over a symbol of
//! duration `T` keeps a fraction `sinc²(f T)` of the link gain `|eta|²` on the
//! wanted subcarrier and leaks the rest as inter-carrier interference. The
//! normalized `sinc(x) = sin(pi x) / (pi x)` is used, so orthogonality is
//! completely lost at an offset of one subcarrier spacing. The expressions
//! describe the center subcarrier, which suffers the most ICI; they are used
//! as a worst case for every subcarrier. The infinite-subcarrier form is a
//! good approximation from roughly 60 subcarriers up.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::bisect;
use crate::scenario::{RadioParams, ScenarioConfig};

const SINC_INVERSE_MAX_ITER: usize = 200;
const SINC_INVERSE_BRACKET: f64 = 1e-14;

/// Useful and interfering power per unit transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub attenuation_amplitude: f64,
    pub useful_power_w: f64,
    pub ici_power_w: f64,
    pub noise_power_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrSample {
    pub sinr_linear: f64,
    pub x_t_m: f64,
    pub residual_hz: f64,
}

pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let px = PI * x;
    px.sin() / px
}

/// Inverse of `sinc` on its principal branch `[0, 1]`, where it falls
/// strictly from 1 to 0.
pub fn sinc_inverse(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::domain(
            "sinc_inverse",
            format!("argument must lie in [0, 1], got {y}"),
        ));
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    if y == 0.0 {
        return Ok(1.0);
    }
    let root = bisect(|x| sinc(x) - y, 0.0, 1.0, SINC_INVERSE_BRACKET, SINC_INVERSE_MAX_ITER)
        .expect("sinc - y changes sign on [0, 1] for y in (0, 1)");
    Ok(root)
}

/// Amplitude link attenuation `sqrt(l G_R G_max) lambda / (4 pi D_t)`.
pub fn link_attenuation(x_t_m: f64, radio: &RadioParams, altitude_m: f64) -> f64 {
    let gains = (radio.rain_gain * radio.terminal_gain * radio.sat_max_gain).sqrt();
    gains * radio.wavelength_m / (4.0 * PI * x_t_m.hypot(altitude_m))
}

/// Splits `|eta|²` into the useful and ICI parts for a residual offset.
pub fn power_split(residual_hz: f64, symbol_duration_s: f64, eta: f64) -> (f64, f64) {
    let gain = eta * eta;
    let s = sinc(residual_hz * symbol_duration_s);
    let kept = s * s;
    (gain * kept, gain * (1.0 - kept))
}

pub fn link_budget(x_t_m: f64, residual_hz: f64, scenario: &ScenarioConfig) -> LinkBudget {
    let radio = scenario.radio();
    let eta = link_attenuation(x_t_m, radio, scenario.orbit().altitude_m);
    let (useful, ici) = power_split(residual_hz, radio.symbol_duration_s, eta);
    LinkBudget {
        attenuation_amplitude: eta,
        useful_power_w: useful,
        ici_power_w: ici,
        noise_power_w: radio.noise_power_w,
    }
}

/// SINR of a terminal at horizontal distance `x_t_m` with residual offset
/// `residual_hz`:
///
/// ```text
/// SINR = A sinc²(f T) / D² / (A (1 - sinc²(f T)) / D² + N_o)
/// ```
pub fn sinr(x_t_m: f64, residual_hz: f64, scenario: &ScenarioConfig) -> SinrSample {
    sinr_with_channel_gain(x_t_m, residual_hz, scenario, 1.0)
}

/// [`sinr`] with an extra power gain on the satellite link. `1.0` is the pure
/// line-of-sight channel; a fading model would draw this per terminal.
pub fn sinr_with_channel_gain(
    x_t_m: f64,
    residual_hz: f64,
    scenario: &ScenarioConfig,
    channel_gain: f64,
) -> SinrSample {
    let radio = scenario.radio();
    let h = scenario.orbit().altitude_m;
    let received = channel_gain * radio.aggregate_gain / (x_t_m * x_t_m + h * h);
    let s = sinc(residual_hz * radio.symbol_duration_s);
    let kept = s * s;
    SinrSample {
        sinr_linear: sinr_from_gain(received, kept, radio.noise_power_w),
        x_t_m,
        residual_hz,
    }
}

#[inline]
pub(crate) fn sinr_from_gain(received: f64, kept: f64, noise: f64) -> f64 {
    let useful = received * kept;
    let denom = received * (1.0 - kept) + noise;
    if useful == 0.0 {
        0.0
    } else {
        useful / denom
    }
}

/// `P_tx Omega / (P_tx I + N_o)` from an explicit power split.
pub fn sinr_from_link_budget(tx_power_w: f64, budget: &LinkBudget) -> f64 {
    let useful = tx_power_w * budget.useful_power_w;
    if useful == 0.0 {
        return 0.0;
    }
    useful / (tx_power_w * budget.ici_power_w + budget.noise_power_w)
}
