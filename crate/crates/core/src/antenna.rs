//! Directional antenna with a Gaussian main lobe (quadratic in dB) and a
//! constant sidelobe floor.

use crate::error::{Error, Result};
use crate::units::{Db, Degrees};

/// Main-lobe width as a multiple of the half-power beamwidth.
pub const MAIN_LOBE_FACTOR: f64 = 2.6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaPattern {
    theta_3db: Degrees,
    g0: Db,
    g_sl: Db,
    theta_ml: Degrees,
}

impl AntennaPattern {
    pub fn new(theta_3db: Degrees) -> Result<Self> {
        let g0 = max_gain(theta_3db)?;
        let g_sl = sidelobe_gain(theta_3db)?;
        Ok(Self {
            theta_3db,
            g0,
            g_sl,
            theta_ml: Degrees(MAIN_LOBE_FACTOR * theta_3db.0),
        })
    }

    pub fn theta_3db(&self) -> Degrees {
        self.theta_3db
    }

    pub fn g0(&self) -> Db {
        self.g0
    }

    pub fn g_sl(&self) -> Db {
        self.g_sl
    }

    pub fn theta_ml(&self) -> Degrees {
        self.theta_ml
    }

    /// Main-lobe value at the lobe edge minus the sidelobe level. The model
    /// is discontinuous there; this is the size of the jump.
    pub fn lobe_edge_gap(&self) -> Db {
        Db(self.g0.0 - 3.01 * MAIN_LOBE_FACTOR.powi(2)) - self.g_sl
    }
}

/// Boresight gain for a half-power beamwidth in `(0°, 180°]`.
pub fn max_gain(theta_3db: Degrees) -> Result<Db> {
    if !(theta_3db.0 > 0.0 && theta_3db.0 <= 180.0) {
        return Err(Error::Domain {
            what: "theta_3db",
            value: theta_3db.0,
            expected: "0 < theta_3db <= 180 degrees",
        });
    }
    let half = (theta_3db.0 / 2.0).to_radians().sin();
    Ok(Db(10.0 * (1.6162 / half).powi(2).log10()))
}

/// Sidelobe level. The logarithm takes the beamwidth expressed in degrees.
pub fn sidelobe_gain(theta_3db: Degrees) -> Result<Db> {
    if !(theta_3db.0 > 0.0) {
        return Err(Error::Domain {
            what: "theta_3db",
            value: theta_3db.0,
            expected: "theta_3db > 0 degrees",
        });
    }
    Ok(Db(-0.4111 * theta_3db.0.ln() - 10.579))
}

/// Gain at off-boresight angle `theta` in `[0°, 180°]`. The lobe edge
/// `theta_ml / 2` belongs to the main-lobe branch.
pub fn gain_at(pattern: &AntennaPattern, theta: Degrees) -> Result<Db> {
    if !(0.0..=180.0).contains(&theta.0) {
        return Err(Error::Domain {
            what: "theta",
            value: theta.0,
            expected: "0 <= theta <= 180 degrees",
        });
    }
    if theta.0 <= pattern.theta_ml.0 / 2.0 {
        let x = 2.0 * theta.0 / pattern.theta_3db.0;
        Ok(Db(pattern.g0.0 - 3.01 * x * x))
    } else {
        Ok(pattern.g_sl)
    }
}
