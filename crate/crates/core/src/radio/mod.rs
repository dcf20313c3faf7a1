//! Urban pathloss, SINR, rate selection and frame-error mapping.

mod link;
mod pathloss;
mod shadowing;

use thiserror::Error;

pub use link::{
    link_state, link_state_from_sinr, noise_floor_dbm, packet_error_prob, LinkState, McsTable,
};
pub use pathloss::{
    c_term_db, free_space_db, pathloss_los, pathloss_nlos, CModel, LosParams, NlosParams,
    PathlossBreakdown, PathlossModel, Regime, SPEED_OF_LIGHT,
};
pub use shadowing::Shadowing;

#[derive(Debug, Error, PartialEq)]
pub enum RadioError {
    #[error("invalid geometry: {what} = {value}")]
    Geometry { what: &'static str, value: f64 },
    #[error("invalid MCS table: {0}")]
    Table(String),
    #[error("payload must be at least one byte")]
    EmptyPayload,
}
