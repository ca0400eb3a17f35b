use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::phy::ReceptionRecord;
use crate::time::SimTime;

/// Receptions of one directed sender → receiver pair in reception order.
#[derive(Clone, Debug, PartialEq)]
pub struct PairTrace {
    pub sender_id: u32,
    pub receiver_id: u32,
    pub receptions: Vec<ReceptionRecord>,
}

impl PairTrace {
    pub fn new(sender_id: u32, receiver_id: u32, mut receptions: Vec<ReceptionRecord>) -> Self {
        receptions.sort_by_key(|r| r.rx_time);
        PairTrace {
            sender_id,
            receiver_id,
            receptions,
        }
    }

    /// At least two receptions, so the observation interval is nondegenerate.
    pub fn is_communicating(&self) -> bool {
        self.receptions.len() >= 2 && self.t_end() > self.t_start()
    }

    pub fn t_start(&self) -> f64 {
        self.receptions.first().map_or(0.0, |r| r.rx_time.as_secs())
    }

    pub fn t_end(&self) -> f64 {
        self.receptions.last().map_or(0.0, |r| r.rx_time.as_secs())
    }

    pub(crate) fn require_communicating(&self) -> Result<()> {
        if self.is_communicating() {
            Ok(())
        } else {
            Err(Error::NotCommunicating)
        }
    }

    pub(crate) fn check_in_interval(&self, t: f64) -> Result<()> {
        self.require_communicating()?;
        if t < self.t_start() || t > self.t_end() {
            return Err(Error::OutsideInterval {
                requested_s: t,
                start_s: self.t_start(),
                end_s: self.t_end(),
            });
        }
        Ok(())
    }

    /// Freshest snapshot the receiver holds at time `t`: among receptions up
    /// to `t`, the one with the latest generation time. A late-arriving older
    /// beacon (possible under LCFS) does not replace newer knowledge.
    pub fn freshest_at(&self, t: f64) -> Option<&ReceptionRecord> {
        self.receptions
            .iter()
            .take_while(|r| r.rx_time.as_secs() <= t)
            .fold(None, |best: Option<&ReceptionRecord>, r| match best {
                Some(b) if b.gen_time >= r.gen_time => Some(b),
                _ => Some(r),
            })
    }
}

/// Groups a reception log into per-pair traces, keeping receptions at or
/// after `from`.
pub fn group_traces(receptions: &[ReceptionRecord], from: SimTime) -> BTreeMap<(u32, u32), PairTrace> {
    let mut grouped: BTreeMap<(u32, u32), Vec<ReceptionRecord>> = BTreeMap::new();
    for r in receptions.iter().filter(|r| r.rx_time >= from) {
        grouped.entry((r.sender_id, r.receiver_id)).or_default().push(*r);
    }
    grouped
        .into_iter()
        .map(|((s, r), recs)| ((s, r), PairTrace::new(s, r, recs)))
        .collect()
}
