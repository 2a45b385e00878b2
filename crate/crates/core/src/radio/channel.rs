//! Air-to-ground channel: sector antenna pattern, height-dependent LoS
//! probability and LoS/NLoS pathloss in the 3GPP urban-macro aerial family.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Cell;

/// Coefficients of the LoS probability model.
///
/// Below `aerial_min_height` the terrestrial form applies:
/// `P = 1` for `d <= d1`, else `d1/d + exp(-d/p1) (1 - d1/d)` with fixed
/// `d1`, `p1`. Between `aerial_min_height` and `always_los_height` the same
/// form is used with height-dependent
/// `d1 = max(d1_slope log10(h) + d1_offset, ground_d1)` and
/// `p1 = p1_slope log10(h) + p1_offset`. Above `always_los_height` the link
/// is always LoS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LosCoefficients {
    pub ground_d1: f64,
    pub ground_p1: f64,
    pub aerial_min_height: f64,
    pub always_los_height: f64,
    pub d1_slope: f64,
    pub d1_offset: f64,
    pub p1_slope: f64,
    pub p1_offset: f64,
}

impl Default for LosCoefficients {
    fn default() -> Self {
        LosCoefficients {
            ground_d1: 18.0,
            ground_p1: 63.0,
            aerial_min_height: 22.5,
            always_los_height: 100.0,
            d1_slope: 460.0,
            d1_offset: -700.0,
            p1_slope: 4300.0,
            p1_offset: -3800.0,
        }
    }
}

/// Pathloss coefficients (dB, distances in metres, frequency in GHz).
///
/// * LoS: `los_intercept + los_slope log10(d3d) + freq_slope log10(fc)`
/// * NLoS below `aerial_min_height`:
///   `ground_intercept + ground_slope log10(d3d) + freq_slope log10(fc) - ground_height_coef (h - 1.5)`
/// * NLoS above: `aerial_intercept + (aerial_slope - aerial_height_coef log10(h')) log10(d3d)
///   + 20 log10(40 pi fc / 3)` with `h' = min(h, aerial_max_height)`
///
/// NLoS loss is floored at the LoS loss of the same geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathlossCoefficients {
    pub los_intercept: f64,
    pub los_slope: f64,
    pub freq_slope: f64,
    pub ground_intercept: f64,
    pub ground_slope: f64,
    pub ground_height_coef: f64,
    pub aerial_intercept: f64,
    pub aerial_slope: f64,
    pub aerial_height_coef: f64,
    pub aerial_max_height: f64,
}

impl Default for PathlossCoefficients {
    fn default() -> Self {
        PathlossCoefficients {
            los_intercept: 28.0,
            los_slope: 22.0,
            freq_slope: 20.0,
            ground_intercept: 13.54,
            ground_slope: 39.08,
            ground_height_coef: 0.6,
            aerial_intercept: -17.5,
            aerial_slope: 46.0,
            aerial_height_coef: 7.0,
            aerial_max_height: 100.0,
        }
    }
}

/// Everything the channel model needs besides geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    /// Carrier frequency, Hz.
    pub carrier_freq: f64,
    /// Peak gain of one antenna element, dBi.
    pub element_gain: f64,
    /// Horizontal 3 dB beamwidth, degrees.
    pub horizontal_beamwidth: f64,
    /// Vertical 3 dB beamwidth, degrees.
    pub vertical_beamwidth: f64,
    /// Front-to-back ratio and overall attenuation floor, dB.
    pub max_attenuation: f64,
    /// Vertical side-lobe limit, dB.
    pub side_lobe_level: f64,
    /// Elements of the vertical array.
    pub array_elements: usize,
    /// Element spacing in wavelengths.
    pub element_spacing: f64,
    pub los: LosCoefficients,
    pub pathloss: PathlossCoefficients,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            carrier_freq: 1.8e9,
            element_gain: 0.0,
            horizontal_beamwidth: 65.0,
            vertical_beamwidth: 10.0,
            max_attenuation: 30.0,
            side_lobe_level: 30.0,
            array_elements: 8,
            element_spacing: 0.5,
            los: LosCoefficients::default(),
            pathloss: PathlossCoefficients::default(),
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_freq > 0.0) {
            return Err(Error::invalid("carrier frequency must be positive"));
        }
        if self.array_elements < 1 {
            return Err(Error::invalid("vertical array needs at least one element"));
        }
        if !(self.horizontal_beamwidth > 0.0 && self.vertical_beamwidth > 0.0) {
            return Err(Error::invalid("beamwidths must be positive"));
        }
        if !(self.max_attenuation >= 0.0 && self.side_lobe_level >= 0.0 && self.element_spacing > 0.0) {
            return Err(Error::invalid("attenuation limits and element spacing must be non-negative"));
        }
        Ok(())
    }

    /// Boresight gain of element plus array, dBi.
    pub fn peak_gain(&self) -> f64 {
        self.element_gain + 10.0 * (self.array_elements as f64).log10()
    }

    fn carrier_ghz(&self) -> f64 {
        self.carrier_freq / 1e9
    }
}

struct Geometry {
    d2d: f64,
    d3d: f64,
    /// Horizontal angle off boresight, degrees in [-180, 180].
    off_azimuth: f64,
    /// Elevation of the target seen from the antenna, degrees.
    elevation: f64,
}

fn geometry(cell: &Cell, target: [f64; 3]) -> Result<Geometry> {
    let dx = target[0] - cell.bs_position[0];
    let dy = target[1] - cell.bs_position[1];
    let dz = target[2] - cell.bs_position[2];
    let d2d = dx.hypot(dy);
    let d3d = d2d.hypot(dz);
    if d3d == 0.0 {
        return Err(Error::CoincidentPositions);
    }
    let bearing = dy.atan2(dx).to_degrees();
    let off_azimuth = (bearing - cell.azimuth + 540.0).rem_euclid(360.0) - 180.0;
    let elevation = dz.atan2(d2d).to_degrees();
    Ok(Geometry { d2d, d3d, off_azimuth, elevation })
}

/// Normalised power array factor of a uniform vertical array steered to
/// `steer` degrees elevation; equals the element count on the steering
/// direction.
fn array_factor(elevation: f64, steer: f64, params: &ChannelParams) -> f64 {
    let n = params.array_elements as f64;
    let psi = 2.0 * PI * params.element_spacing * (elevation.to_radians().sin() - steer.to_radians().sin());
    let den = (psi / 2.0).sin();
    if den.abs() < 1e-12 {
        return n;
    }
    let num = (n * psi / 2.0).sin();
    num * num / (n * den * den)
}

/// Antenna gain (dBi) of `cell` towards `target`.
pub fn antenna_gain(cell: &Cell, target: [f64; 3], params: &ChannelParams) -> Result<f64> {
    let g = geometry(cell, target)?;
    Ok(gain_from_angles(g.off_azimuth, g.elevation, cell.downtilt, params))
}

/// Gain for a target `off_azimuth` degrees off boresight at `elevation`
/// degrees, for a sector tilted `downtilt` degrees below the horizon.
pub fn gain_from_angles(off_azimuth: f64, elevation: f64, downtilt: f64, params: &ChannelParams) -> f64 {
    let boresight = -downtilt;
    let a_h = (12.0 * (off_azimuth / params.horizontal_beamwidth).powi(2)).min(params.max_attenuation);
    let a_v = (12.0 * ((elevation - boresight) / params.vertical_beamwidth).powi(2)).min(params.side_lobe_level);
    let element = params.element_gain - (a_h + a_v).min(params.max_attenuation);
    let array = 10.0 * array_factor(elevation, boresight, params).log10();
    (element + array).max(params.peak_gain() - params.max_attenuation)
}

/// LoS probability at horizontal distance `d2d` for a UAV at `uav_height`.
pub fn los_probability(d2d: f64, uav_height: f64, params: &ChannelParams) -> f64 {
    let c = &params.los;
    if uav_height > c.always_los_height {
        return 1.0;
    }
    let (d1, p1) = if uav_height <= c.aerial_min_height {
        (c.ground_d1, c.ground_p1)
    } else {
        let lh = uav_height.log10();
        ((c.d1_slope * lh + c.d1_offset).max(c.ground_d1), c.p1_slope * lh + c.p1_offset)
    };
    if d2d <= d1 {
        return 1.0;
    }
    let ratio = d1 / d2d;
    (ratio + (-d2d / p1).exp() * (1.0 - ratio)).clamp(0.0, 1.0)
}

/// LoS pathloss (dB) at 3D distance `d3d`.
pub fn los_pathloss(d3d: f64, params: &ChannelParams) -> f64 {
    let c = &params.pathloss;
    c.los_intercept + c.los_slope * d3d.log10() + c.freq_slope * params.carrier_ghz().log10()
}

/// NLoS pathloss (dB), never below the LoS value at the same geometry.
pub fn nlos_pathloss(d3d: f64, uav_height: f64, params: &ChannelParams) -> f64 {
    let c = &params.pathloss;
    let fc = params.carrier_ghz();
    let raw = if uav_height <= params.los.aerial_min_height {
        c.ground_intercept + c.ground_slope * d3d.log10() + c.freq_slope * fc.log10()
            - c.ground_height_coef * (uav_height - 1.5)
    } else {
        let h = uav_height.min(c.aerial_max_height);
        c.aerial_intercept
            + (c.aerial_slope - c.aerial_height_coef * h.log10()) * d3d.log10()
            + 20.0 * (40.0 * PI * fc / 3.0).log10()
    };
    raw.max(los_pathloss(d3d, params))
}

/// Expected pathloss (dB) from `cell` to `target`, blending LoS and NLoS by
/// the LoS probability.
pub fn mean_pathloss(cell: &Cell, target: [f64; 3], params: &ChannelParams) -> Result<f64> {
    let g = geometry(cell, target)?;
    let p = los_probability(g.d2d, target[2], params);
    let los = los_pathloss(g.d3d, params);
    let nlos = nlos_pathloss(g.d3d, target[2], params);
    Ok(p * los + (1.0 - p) * nlos)
}

/// RSRP in dBm from transmit power, gain and loss in dB.
pub fn compose_rsrp(tx_power: f64, gain: f64, loss: f64) -> f64 {
    tx_power + gain - loss
}

/// RSRP (dBm) of `cell` at `target`.
pub fn rsrp(cell: &Cell, target: [f64; 3], params: &ChannelParams) -> Result<f64> {
    Ok(compose_rsrp(cell.tx_power, antenna_gain(cell, target, params)?, mean_pathloss(cell, target, params)?))
}

/// Coverage test; the threshold itself counts as covered.
pub fn is_covered(rsrp: f64, threshold: f64) -> bool {
    rsrp >= threshold
}
