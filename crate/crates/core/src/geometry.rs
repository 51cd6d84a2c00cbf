//! Disc-cell geometry.
//!
//! Terminals are uniform over a disc of radius `R_c` centered at `C`. The
//! satellite subpoint `P_t` lies at horizontal distance `X̂_t` from `C`. The
//! quantity that drives both path loss and Doppler is the horizontal
//! distance `X_t` between a terminal and `P_t`.

use std::f64::consts::PI;

use rand::Rng;

const ACOS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalSample {
    /// Distance from the cell center.
    pub radial_m: f64,
    /// Azimuth around the cell center, measured from the direction of the subpoint.
    pub azimuth_rad: f64,
    /// Distance to the satellite subpoint.
    pub horizontal_distance_m: f64,
}

/// Half-angles of the lens formed by the cell disc and the disc of radius
/// `x` around the subpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfAngles {
    /// Half-angle seen from the subpoint.
    pub theta_star_rad: f64,
    /// Half-angle seen from the cell center.
    pub phi_star_rad: f64,
}

pub fn cdf_angles(x_m: f64, cell_radius_m: f64, center_offset_m: f64) -> CdfAngles {
    let (x, r, d) = (x_m, cell_radius_m, center_offset_m);
    CdfAngles {
        theta_star_rad: clamped_acos((x * x + d * d - r * r) / (2.0 * d * x)),
        phi_star_rad: clamped_acos((r * r + d * d - x * x) / (2.0 * d * r)),
    }
}

fn clamped_acos(arg: f64) -> f64 {
    debug_assert!(
        arg.abs() <= 1.0 + ACOS_TOLERANCE || !arg.is_finite(),
        "acos argument drifted to {arg}"
    );
    arg.clamp(-1.0, 1.0).acos()
}

/// Range of `X_t` with nonzero density: `[max(0, X̂_t - R_c), X̂_t + R_c]`.
pub fn distance_support(cell_radius_m: f64, center_offset_m: f64) -> (f64, f64) {
    (
        (center_offset_m - cell_radius_m).max(0.0),
        center_offset_m + cell_radius_m,
    )
}

/// CDF of the terminal-to-subpoint distance for a terminal uniform on the cell.
///
/// Inside the cell's inner disc (`x <= R_c - X̂_t`) this is `x²/R_c²`; past it
/// the lens area between both discs is used. Values below the support are 0
/// and at or above `R_c + X̂_t` are 1.
pub fn distance_cdf(x_m: f64, cell_radius_m: f64, center_offset_m: f64) -> f64 {
    let (lo, hi) = distance_support(cell_radius_m, center_offset_m);
    if x_m.is_nan() {
        return f64::NAN;
    }
    if x_m >= hi {
        return 1.0;
    }
    if x_m <= lo {
        return 0.0;
    }
    let r = cell_radius_m;
    let inner = (x_m / r) * (x_m / r);
    if center_offset_m == 0.0 || x_m <= r - center_offset_m {
        return inner;
    }
    let CdfAngles {
        theta_star_rad: theta,
        phi_star_rad: phi,
    } = cdf_angles(x_m, r, center_offset_m);
    let lens = inner / PI * (theta - 0.5 * (2.0 * theta).sin()) + (phi - 0.5 * (2.0 * phi).sin()) / PI;
    lens.clamp(0.0, 1.0)
}

/// Draws a terminal uniformly over the cell: `radial = R_c sqrt(u)`,
/// `azimuth = 2 pi v`.
pub fn sample_terminal<R: Rng + ?Sized>(rng: &mut R, cell_radius_m: f64, center_offset_m: f64) -> TerminalSample {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let radial_m = cell_radius_m * u.sqrt();
    let azimuth_rad = 2.0 * PI * v;
    TerminalSample {
        radial_m,
        azimuth_rad,
        horizontal_distance_m: horizontal_distance(radial_m, azimuth_rad, center_offset_m),
    }
}

/// Law of cosines in the ground plane.
pub fn horizontal_distance(radial_m: f64, azimuth_rad: f64, center_offset_m: f64) -> f64 {
    if center_offset_m == 0.0 {
        return radial_m;
    }
    let sq =
        radial_m * radial_m + center_offset_m * center_offset_m - 2.0 * radial_m * center_offset_m * azimuth_rad.cos();
    sq.max(0.0).sqrt()
}

pub fn slant_distance(horizontal_m: f64, altitude_m: f64) -> f64 {
    horizontal_m.hypot(altitude_m)
}

/// True elevation of a satellite at `altitude_m` seen from a terminal whose
/// great-circle distance to the subpoint is `ground_range_m`.
pub fn spherical_elevation(ground_range_m: f64, altitude_m: f64, earth_radius_m: f64) -> f64 {
    let central = ground_range_m / earth_radius_m;
    let orbit = earth_radius_m + altitude_m;
    let slant = (orbit * orbit + earth_radius_m * earth_radius_m - 2.0 * orbit * earth_radius_m * central.cos()).sqrt();
    ((orbit * central.cos() - earth_radius_m) / slant).asin()
}
