use std::fmt;
use std::ops::{Add, AddAssign, Sub};

/// Simulation time in seconds.
///
/// Stored as an `f64`; all MAC timings are expressed in seconds, so a 9 µs
/// slot is exactly representable to well below the required resolution.
/// Times are finite and non-negative by construction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct SimTime(f64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0.0);

    pub fn from_secs(s: f64) -> SimTime {
        debug_assert!(s.is_finite() && s >= 0.0, "invalid sim time {s}");
        SimTime(s)
    }

    pub fn secs(self) -> f64 {
        self.0
    }

    /// Total order for event queue use. Times are never NaN.
    pub fn total_cmp(&self, other: &SimTime) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add<f64> for SimTime {
    type Output = SimTime;
    fn add(self, dt: f64) -> SimTime {
        SimTime::from_secs(self.0 + dt)
    }
}

impl AddAssign<f64> for SimTime {
    fn add_assign(&mut self, dt: f64) {
        *self = *self + dt;
    }
}

impl Sub for SimTime {
    type Output = f64;
    fn sub(self, other: SimTime) -> f64 {
        self.0 - other.0
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
