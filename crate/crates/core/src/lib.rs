pub mod apps;
pub mod config;
pub mod lte;
pub mod metrics;
pub mod mobility;
pub mod net;
pub mod radio;
pub mod sim;
pub mod stub;
pub mod sweep;
pub mod transport;
pub mod wifi;
pub mod world;
