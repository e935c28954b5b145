//! Logarithmic and linear power quantities kept apart at the type level.
//!
//! A relative level ([`Db`]), an absolute level ([`Dbm`]) and a linear power
//! ([`Watts`]) cannot be mixed implicitly. The only arithmetic provided is the
//! physically meaningful kind: shifting an absolute level by a relative one,
//! or taking the gap between two absolute levels.

use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Relative level in decibels.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Db(pub f64);

/// Absolute power level in decibels referenced to one milliwatt.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Dbm(pub f64);

/// Linear power.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Watts(pub f64);

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Degrees(pub f64);

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Radians(pub f64);

impl Db {
    pub fn from_linear(ratio: f64) -> Self {
        Db(10.0 * ratio.log10())
    }

    pub fn to_linear(self) -> f64 {
        10f64.powf(self.0 / 10.0)
    }
}

impl Dbm {
    pub fn to_watts(self) -> Watts {
        Watts(10f64.powf((self.0 - 30.0) / 10.0))
    }

    /// Zero watts maps to negative infinity.
    pub fn from_watts(w: Watts) -> Self {
        Dbm(10.0 * w.0.log10() + 30.0)
    }
}

impl Watts {
    pub fn to_dbm(self) -> Dbm {
        Dbm::from_watts(self)
    }
}

impl Degrees {
    pub fn to_radians(self) -> Radians {
        Radians(self.0.to_radians())
    }
}

impl Radians {
    pub fn to_degrees(self) -> Degrees {
        Degrees(self.0.to_degrees())
    }
}

impl Add for Db {
    type Output = Db;
    fn add(self, rhs: Db) -> Db {
        Db(self.0 + rhs.0)
    }
}

impl Sub for Db {
    type Output = Db;
    fn sub(self, rhs: Db) -> Db {
        Db(self.0 - rhs.0)
    }
}

impl Neg for Db {
    type Output = Db;
    fn neg(self) -> Db {
        Db(-self.0)
    }
}

impl Add<Db> for Dbm {
    type Output = Dbm;
    fn add(self, rhs: Db) -> Dbm {
        Dbm(self.0 + rhs.0)
    }
}

impl Sub<Db> for Dbm {
    type Output = Dbm;
    fn sub(self, rhs: Db) -> Dbm {
        Dbm(self.0 - rhs.0)
    }
}

/// Gap between two absolute levels.
impl Sub for Dbm {
    type Output = Db;
    fn sub(self, rhs: Dbm) -> Db {
        Db(self.0 - rhs.0)
    }
}

impl Add for Watts {
    type Output = Watts;
    fn add(self, rhs: Watts) -> Watts {
        Watts(self.0 + rhs.0)
    }
}

impl fmt::Display for Db {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} dB", self.0)
    }
}

impl fmt::Display for Dbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} dBm", self.0)
    }
}

impl fmt::Display for Watts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} W", self.0)
    }
}
