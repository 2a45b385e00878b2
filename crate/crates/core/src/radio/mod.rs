//! Received-power model and the ranked connectivity heatmap.

mod channel;
mod map;

pub use channel::{
    antenna_gain, compose_rsrp, gain_from_angles, is_covered, los_pathloss, los_probability, mean_pathloss,
    nlos_pathloss, rsrp, ChannelParams, LosCoefficients, PathlossCoefficients,
};
pub use map::{build_radio_map, Candidate, RadioMap};
