use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::SimTime;

/// Handle for a scheduled event, usable for cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    /// Attempted to schedule before the current clock.
    InPast { at_secs_e9: i64, now_secs_e9: i64 },
}

impl std::fmt::Display for ScheduleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScheduleError::InPast { at_secs_e9, now_secs_e9 } => write!(
                f,
                "cannot schedule at {}ns: clock already at {}ns",
                at_secs_e9, now_secs_e9
            ),
        }
    }
}

impl std::error::Error for ScheduleError {}

struct Entry<E> {
    at: SimTime,
    seq: u64,
    id: u64,
    ev: E,
}

// Min-heap by (time, insertion sequence): ties dispatch in insertion order.
impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl<E> Eq for Entry<E> {}
impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<E> Ord for Entry<E> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .at
            .total_cmp(&self.at)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Event accounting exposed by the kernel.
///
/// `scheduled == dispatched + cancelled + pending` holds at every point in
/// time (the no-event-loss invariant).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KernelStats {
    pub scheduled: u64,
    pub dispatched: u64,
    pub cancelled: u64,
    pub pending: u64,
}

/// Deterministic event queue with a virtual clock.
///
/// Generic over the event payload so subsystems can define their own event
/// enums. Two events at equal time dispatch in insertion order.
pub struct Scheduler<E> {
    heap: BinaryHeap<Entry<E>>,
    cancelled: HashSet<u64>,
    next_seq: u64,
    now: SimTime,
    stats: KernelStats,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Scheduler::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Scheduler<E> {
        Scheduler {
            heap: BinaryHeap::new(),
            cancelled: HashSet::new(),
            next_seq: 0,
            now: SimTime::ZERO,
            stats: KernelStats::default(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn schedule(&mut self, at: SimTime, ev: E) -> Result<EventHandle, ScheduleError> {
        if at < self.now {
            return Err(ScheduleError::InPast {
                at_secs_e9: (at.secs() * 1e9) as i64,
                now_secs_e9: (self.now.secs() * 1e9) as i64,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry { at, seq, id: seq, ev });
        self.stats.scheduled += 1;
        self.stats.pending += 1;
        Ok(EventHandle(seq))
    }

    /// Cancel a pending event. Returns false if it already fired or was
    /// cancelled before.
    pub fn cancel(&mut self, h: EventHandle) -> bool {
        if h.0 >= self.next_seq || !self.cancelled.insert(h.0) {
            return false;
        }
        self.stats.cancelled += 1;
        self.stats.pending = self.stats.pending.saturating_sub(1);
        true
    }

    /// Pop the next event with `time <= t_end`, advancing the clock to its
    /// time. Returns `None` once no such event remains; the clock is then
    /// left for [`Scheduler::finish_at`] to advance.
    pub fn pop_due(&mut self, t_end: SimTime) -> Option<(SimTime, E)> {
        loop {
            let due = match self.heap.peek() {
                Some(e) if e.at <= t_end => true,
                _ => false,
            };
            if !due {
                return None;
            }
            let e = self.heap.pop().expect("peeked entry");
            if self.cancelled.remove(&e.id) {
                continue; // already counted as cancelled
            }
            debug_assert!(e.at >= self.now, "event queue went backwards");
            self.now = e.at;
            self.stats.dispatched += 1;
            self.stats.pending -= 1;
            return Some((e.at, e.ev));
        }
    }

    /// Advance the clock to `t_end` after draining due events.
    pub fn finish_at(&mut self, t_end: SimTime) {
        debug_assert!(t_end >= self.now);
        self.now = t_end;
    }

    pub fn stats(&self) -> KernelStats {
        self.stats
    }

    pub fn pending(&self) -> u64 {
        self.stats.pending
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispatches_in_time_then_insertion_order() {
        let mut s: Scheduler<&str> = Scheduler::new();
        s.schedule(SimTime::from_secs(1.0), "a").unwrap();
        s.schedule(SimTime::from_secs(0.5), "early").unwrap();
        s.schedule(SimTime::from_secs(1.0), "b").unwrap();
        let mut order = vec![];
        while let Some((_, e)) = s.pop_due(SimTime::from_secs(10.0)) {
            order.push(e);
        }
        assert_eq!(order, vec!["early", "a", "b"]);
    }

    #[test]
    fn event_at_current_clock_dispatches_first() {
        let mut s: Scheduler<u32> = Scheduler::new();
        s.schedule(SimTime::ZERO, 1).unwrap();
        let (t, e) = s.pop_due(SimTime::from_secs(1.0)).unwrap();
        assert_eq!((t.secs(), e), (0.0, 1));
    }

    #[test]
    fn rejects_scheduling_in_past() {
        let mut s: Scheduler<u32> = Scheduler::new();
        s.schedule(SimTime::from_secs(2.0), 1).unwrap();
        s.pop_due(SimTime::from_secs(5.0));
        assert_eq!(s.now().secs(), 2.0);
        assert!(s.schedule(SimTime::from_secs(1.0), 2).is_err());
    }

    #[test]
    fn cancelled_event_never_fires_and_counts_balance() {
        let mut s: Scheduler<u32> = Scheduler::new();
        let _a = s.schedule(SimTime::from_secs(1.0), 1).unwrap();
        let b = s.schedule(SimTime::from_secs(2.0), 2).unwrap();
        s.schedule(SimTime::from_secs(3.0), 3).unwrap();
        assert!(s.cancel(b));
        assert!(!s.cancel(b));
        let mut seen = vec![];
        while let Some((_, e)) = s.pop_due(SimTime::from_secs(2.5)) {
            seen.push(e);
        }
        s.finish_at(SimTime::from_secs(2.5));
        assert_eq!(seen, vec![1]);
        let st = s.stats();
        assert_eq!(st.scheduled, 3);
        assert_eq!(st.dispatched + st.cancelled + st.pending, st.scheduled);
        assert_eq!(st.pending, 1);
        assert_eq!(s.now().secs(), 2.5);
    }

    #[test]
    fn empty_queue_run_reaches_end_time() {
        let mut s: Scheduler<u32> = Scheduler::new();
        assert!(s.pop_due(SimTime::from_secs(10.0)).is_none());
        s.finish_at(SimTime::from_secs(10.0));
        assert_eq!(s.now().secs(), 10.0);
        assert_eq!(s.stats().dispatched, 0);
    }
}
