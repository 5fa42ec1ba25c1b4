//! Integer picosecond time base.
//!
//! Every period, deadline, delay and transmission time in the crate is an
//! exact count of picoseconds. Conversions from seconds (or from a rate and a
//! size) round half-up exactly once; everything downstream is exact.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};

use serde::{Deserialize, Serialize};

pub const PS_PER_NS: u64 = 1_000;
pub const PS_PER_US: u64 = 1_000_000;
pub const PS_PER_MS: u64 = 1_000_000_000;
pub const PS_PER_SEC: u64 = 1_000_000_000_000;

/// A non-negative duration or instant in picoseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimePs(u64);

impl TimePs {
    pub const ZERO: TimePs = TimePs(0);
    pub const MAX: TimePs = TimePs(u64::MAX);

    pub const fn from_ps(ps: u64) -> Self {
        TimePs(ps)
    }

    pub const fn from_ns(ns: u64) -> Self {
        TimePs(ns * PS_PER_NS)
    }

    pub const fn from_us(us: u64) -> Self {
        TimePs(us * PS_PER_US)
    }

    pub const fn from_ms(ms: u64) -> Self {
        TimePs(ms * PS_PER_MS)
    }

    /// Rounds half-up to the nearest picosecond. Negative or non-finite
    /// input yields `None`.
    pub fn from_secs_f64(secs: f64) -> Option<Self> {
        if !secs.is_finite() || secs < 0.0 {
            return None;
        }
        let ps = (secs * PS_PER_SEC as f64 + 0.5).floor();
        if ps > u64::MAX as f64 {
            return None;
        }
        Some(TimePs(ps as u64))
    }

    /// `numer / denom` seconds, rounded half-up to a picosecond.
    pub fn from_ratio_secs(numer: u128, denom: u128) -> Option<Self> {
        if denom == 0 {
            return None;
        }
        let scaled = numer.checked_mul(PS_PER_SEC as u128)?;
        let ps = div_round_half_up(scaled, denom);
        u64::try_from(ps).ok().map(TimePs)
    }

    pub const fn as_ps(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / PS_PER_SEC as f64
    }

    pub fn as_us_f64(self) -> f64 {
        self.0 as f64 / PS_PER_US as f64
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_sub(self, rhs: TimePs) -> Option<TimePs> {
        self.0.checked_sub(rhs.0).map(TimePs)
    }

    pub fn saturating_sub(self, rhs: TimePs) -> TimePs {
        TimePs(self.0.saturating_sub(rhs.0))
    }

    pub fn checked_add(self, rhs: TimePs) -> Option<TimePs> {
        self.0.checked_add(rhs.0).map(TimePs)
    }
}

pub(crate) fn div_round_half_up(numer: u128, denom: u128) -> u128 {
    // floor(n/d + 1/2), written to avoid overflowing 2n
    let q = numer / denom;
    let r = numer % denom;
    if r >= denom - r {
        q + 1
    } else {
        q
    }
}

impl Add for TimePs {
    type Output = TimePs;
    fn add(self, rhs: TimePs) -> TimePs {
        TimePs(self.0 + rhs.0)
    }
}

impl AddAssign for TimePs {
    fn add_assign(&mut self, rhs: TimePs) {
        self.0 += rhs.0;
    }
}

impl Sub for TimePs {
    type Output = TimePs;
    fn sub(self, rhs: TimePs) -> TimePs {
        TimePs(self.0 - rhs.0)
    }
}

impl Mul<u64> for TimePs {
    type Output = TimePs;
    fn mul(self, rhs: u64) -> TimePs {
        TimePs(self.0 * rhs)
    }
}

impl Sum for TimePs {
    fn sum<I: Iterator<Item = TimePs>>(iter: I) -> TimePs {
        iter.fold(TimePs::ZERO, Add::add)
    }
}

impl From<TimePs> for u64 {
    fn from(t: TimePs) -> u64 {
        t.0
    }
}

impl fmt::Display for TimePs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ps", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_up_rounding() {
        assert_eq!(div_round_half_up(5, 2), 3);
        assert_eq!(div_round_half_up(7, 3), 2);
        assert_eq!(div_round_half_up(8, 3), 3);
        assert_eq!(div_round_half_up(3, 2), 2);
        assert_eq!(div_round_half_up(1, 4), 0);
        assert_eq!(div_round_half_up(2, 4), 1);
        assert_eq!(div_round_half_up(10, 5), 2);
    }

    #[test]
    fn seconds_conversion() {
        assert_eq!(TimePs::from_secs_f64(2.5e-12), Some(TimePs::from_ps(3)));
        assert_eq!(TimePs::from_secs_f64(1e-6), Some(TimePs::from_us(1)));
        assert_eq!(TimePs::from_secs_f64(-1.0), None);
        assert_eq!(TimePs::from_ratio_secs(8000, 1_500_000_000), Some(TimePs::from_ps(5_333_333)));
        assert_eq!(TimePs::from_ratio_secs(1, 0), None);
    }
}
