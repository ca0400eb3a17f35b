use crate::time::SimTime;

/// Sender snapshot carried by a safety beacon, taken at generation time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Beacon {
    pub sender_id: u32,
    pub seq: u32,
    pub gen_time: SimTime,
    pub gen_pos_x: f64,
    pub gen_pos_y: f64,
    pub sender_speed: f64,
    pub size_bytes: u32,
}

/// One successful delivery of a beacon to a receiver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReceptionRecord {
    pub sender_id: u32,
    pub receiver_id: u32,
    pub seq: u32,
    pub gen_time: SimTime,
    pub rx_time: SimTime,
    pub gen_pos_x: f64,
    pub sender_speed: f64,
}

impl ReceptionRecord {
    pub fn new(beacon: &Beacon, receiver_id: u32, rx_time: SimTime) -> Self {
        ReceptionRecord {
            sender_id: beacon.sender_id,
            receiver_id,
            seq: beacon.seq,
            gen_time: beacon.gen_time,
            rx_time,
            gen_pos_x: beacon.gen_pos_x,
            sender_speed: beacon.sender_speed,
        }
    }

    pub fn delay_s(&self) -> f64 {
        (self.rx_time - self.gen_time).as_secs()
    }
}
