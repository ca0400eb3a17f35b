//! Beacon generation, transmit queueing, CSMA/CA timing and the SINR
//! reception model. The event-driven glue lives in [`crate::engine`].

pub mod beacon;
pub mod channel;
pub mod mac;
pub mod queue;

pub use beacon::{Beacon, ReceptionRecord};
pub use channel::{path_loss_db, reception_outcome, Disposition, Interferer, LinkBudget};
pub use mac::{draw_backoff, first_generation_time, frame_airtime, next_generation_time};
pub use queue::BeaconQueue;
