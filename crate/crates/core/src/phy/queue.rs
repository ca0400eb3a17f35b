use std::collections::VecDeque;

use crate::config::QueueDiscipline;
use crate::phy::Beacon;

/// Beacons waiting for the MAC. The frame the MAC is currently contending
/// with or transmitting has already been dequeued and does not count
/// against `capacity`.
#[derive(Clone, Debug)]
pub struct BeaconQueue {
    discipline: QueueDiscipline,
    capacity: usize,
    // oldest at the front
    contents: VecDeque<Beacon>,
}

impl BeaconQueue {
    pub fn new(discipline: QueueDiscipline, capacity: usize) -> Self {
        assert!(capacity >= 1, "queue capacity must be at least 1");
        BeaconQueue {
            discipline,
            capacity,
            contents: VecDeque::with_capacity(capacity.min(128)),
        }
    }

    pub fn len(&self) -> usize {
        self.contents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contents.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn discipline(&self) -> QueueDiscipline {
        self.discipline
    }

    /// Admits `beacon`, returning whichever beacon was dropped to make room.
    /// FCFS tail-drops the arrival; LCFS evicts the oldest waiting beacon.
    pub fn enqueue(&mut self, beacon: Beacon) -> Option<Beacon> {
        if self.contents.len() < self.capacity {
            self.contents.push_back(beacon);
            return None;
        }
        match self.discipline {
            QueueDiscipline::Fcfs => Some(beacon),
            QueueDiscipline::Lcfs => {
                let evicted = self.contents.pop_front();
                self.contents.push_back(beacon);
                evicted
            }
        }
    }

    /// FCFS serves the oldest beacon, LCFS the newest.
    pub fn dequeue(&mut self) -> Option<Beacon> {
        match self.discipline {
            QueueDiscipline::Fcfs => self.contents.pop_front(),
            QueueDiscipline::Lcfs => self.contents.pop_back(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::SimTime;

    fn beacon(seq: u32) -> Beacon {
        Beacon {
            sender_id: 0,
            seq,
            gen_time: SimTime(seq as u64),
            gen_pos_x: 0.0,
            gen_pos_y: 0.0,
            sender_speed: 25.0,
            size_bytes: 320,
        }
    }

    #[test]
    fn fcfs_full_drops_arrival() {
        let mut q = BeaconQueue::new(QueueDiscipline::Fcfs, 1);
        assert_eq!(q.enqueue(beacon(5)), None);
        assert_eq!(q.enqueue(beacon(6)).map(|b| b.seq), Some(6));
        assert_eq!(q.dequeue().map(|b| b.seq), Some(5));
    }

    #[test]
    fn lcfs_full_evicts_oldest() {
        let mut q = BeaconQueue::new(QueueDiscipline::Lcfs, 1);
        q.enqueue(beacon(5));
        assert_eq!(q.enqueue(beacon(6)).map(|b| b.seq), Some(5));
        assert_eq!(q.dequeue().map(|b| b.seq), Some(6));
        assert!(q.is_empty());
    }

    #[test]
    fn below_capacity_admits() {
        let mut q = BeaconQueue::new(QueueDiscipline::Fcfs, 5);
        for s in 0..3 {
            q.enqueue(beacon(s));
        }
        assert_eq!(q.enqueue(beacon(3)), None);
        assert_eq!(q.len(), 4);
    }

    #[test]
    fn service_order() {
        let mut fcfs = BeaconQueue::new(QueueDiscipline::Fcfs, 10);
        let mut lcfs = BeaconQueue::new(QueueDiscipline::Lcfs, 10);
        for s in 0..4 {
            fcfs.enqueue(beacon(s));
            lcfs.enqueue(beacon(s));
        }
        let f: Vec<u32> = std::iter::from_fn(|| fcfs.dequeue()).map(|b| b.seq).collect();
        let l: Vec<u32> = std::iter::from_fn(|| lcfs.dequeue()).map(|b| b.seq).collect();
        assert_eq!(f, vec![0, 1, 2, 3]);
        assert_eq!(l, vec![3, 2, 1, 0]);
    }

    #[test]
    fn lcfs_keeps_the_newest_when_overloaded() {
        let mut q = BeaconQueue::new(QueueDiscipline::Lcfs, 3);
        for s in 0..10 {
            q.enqueue(beacon(s));
            assert!(q.len() <= 3);
        }
        assert_eq!(q.dequeue().map(|b| b.seq), Some(9));
        assert_eq!(q.dequeue().map(|b| b.seq), Some(8));
    }
}
