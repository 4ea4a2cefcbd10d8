//! Broadcast datagrams and the line-oriented log records.
//!
//! A heading report is one JSON object per datagram with exactly these keys,
//! in this order, and no whitespace:
//!
//! ```text
//! {"robot_id":<u32>,"heading_rad":<f64>,"stamp_us":<u64>}
//! ```
//!
//! `heading_rad` is the sender's absolute heading in radians (any real value;
//! receivers wrap it into `[0, 2π)`), written in shortest round-trip form.
//! `stamp_us` is the sender's clock at measurement time, in microseconds.
//!
//! Broadcast logs store one delivered datagram per line, prefixed by the
//! receive time: `{"rx_us":<u64>,"robot_id":..,"heading_rad":..,"stamp_us":..}`,
//! in delivery order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BroadcastPacket {
    pub robot_id: u32,
    pub heading_rad: f64,
    pub stamp_us: u64,
}

impl BroadcastPacket {
    pub fn encode(&self) -> String {
        serde_json::to_string(self).expect("packet serialisation is infallible")
    }

    pub fn decode(datagram: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(datagram.trim())
    }
}

/// A packet together with the receiver-side arrival time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BroadcastDelivery {
    pub rx_us: u64,
    pub robot_id: u32,
    pub heading_rad: f64,
    pub stamp_us: u64,
}

impl BroadcastDelivery {
    pub fn new(rx_us: u64, packet: BroadcastPacket) -> Self {
        BroadcastDelivery { rx_us, robot_id: packet.robot_id, heading_rad: packet.heading_rad, stamp_us: packet.stamp_us }
    }

    pub fn packet(&self) -> BroadcastPacket {
        BroadcastPacket { robot_id: self.robot_id, heading_rad: self.heading_rad, stamp_us: self.stamp_us }
    }
}
