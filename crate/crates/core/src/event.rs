//! Deterministic future-event list.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::time::SimTime;

/// Event kinds, declared in tie-break priority order: at equal times a
/// transmission end is handled before anything else so that the medium is
/// released before new arrivals and access decisions are made.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    TxEnd,
    BeaconGeneration,
    TxAttempt,
    BackoffExpiry,
    SimEnd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Event {
    pub time: SimTime,
    pub kind: EventKind,
    /// Vehicle the event belongs to.
    pub subject: u32,
    /// Kind-specific: frame id for `TxEnd`, cancellation token for MAC timers.
    pub payload: u64,
}

impl Event {
    pub fn new(time: SimTime, kind: EventKind, subject: u32, payload: u64) -> Self {
        Event {
            time,
            kind,
            subject,
            payload,
        }
    }
}

#[derive(Debug)]
struct Entry {
    event: Event,
    seq: u64,
}

impl Entry {
    fn key(&self) -> (SimTime, EventKind, u32, u64) {
        (self.event.time, self.event.kind, self.event.subject, self.seq)
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.key().cmp(&self.key())
    }
}

/// Min-ordered event list keyed by (time, kind, subject, insertion sequence).
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Entry>,
    now: SimTime,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Time of the most recently popped event.
    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// # Panics
    ///
    /// Scheduling before the current time is a logic error in the caller and
    /// aborts the run.
    pub fn schedule(&mut self, event: Event) {
        assert!(
            event.time >= self.now,
            "event scheduled in the past: {:?} at {} while now = {}",
            event.kind,
            event.time,
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry { event, seq });
    }

    /// Next event in deterministic order, or `None` once the list is drained.
    pub fn pop(&mut self) -> Option<Event> {
        let entry = self.heap.pop()?;
        debug_assert!(entry.event.time >= self.now);
        self.now = entry.event.time;
        Some(entry.event)
    }
}
