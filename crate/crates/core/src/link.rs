//! Link budget, thermal noise, SNR and spectral rate.
//!
//! Two SNR readings are supported. [`SnrModel::PaperLiteral`] divides the
//! received level in dBm by the noise level in dBm, exactly as the closed-form
//! power allocation and its asymptotic analysis assume. [`SnrModel::Physical`]
//! is the conventional linear ratio. Every downstream quantity carries the
//! mode it was computed in.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::antenna::AntennaPattern;
use crate::error::{Error, Result};
use crate::units::{Db, Dbm};

/// Thermal noise density at room temperature, dBm/Hz.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum SnrModel {
    /// Ratio of dBm values.
    #[default]
    PaperLiteral,
    /// Linear power ratio.
    Physical,
}

impl SnrModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            SnrModel::PaperLiteral => "paper-literal",
            SnrModel::Physical => "physical",
        }
    }

    /// Energy unit that goes with the mode.
    pub fn energy_unit(&self) -> &'static str {
        match self {
            SnrModel::PaperLiteral => "dBm*s",
            SnrModel::Physical => "J",
        }
    }

    pub(crate) fn require(self, expected: SnrModel) -> Result<()> {
        if self == expected {
            Ok(())
        } else {
            Err(Error::ModeMismatch {
                expected,
                got: self,
            })
        }
    }
}

impl fmt::Display for SnrModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SnrModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "paper-literal" => Ok(SnrModel::PaperLiteral),
            "physical" => Ok(SnrModel::Physical),
            other => Err(Error::Config(format!(
                "unknown SNR mode '{other}' (expected paper-literal or physical)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pattern: AntennaPattern,
    shadowing: Db,
    path_loss_exp: f64,
    wavelength: f64,
    bandwidth: f64,
    noise_figure: Db,
}

impl LinkBudget {
    /// `wavelength` in meters, `bandwidth` in hertz.
    pub fn new(
        pattern: AntennaPattern,
        shadowing: Db,
        path_loss_exp: f64,
        wavelength: f64,
        bandwidth: f64,
        noise_figure: Db,
    ) -> Result<Self> {
        let check = |ok: bool, msg: String| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidBudget(msg))
            }
        };
        check(
            shadowing.0 >= 0.0,
            format!("shadowing margin must be >= 0 dB, got {}", shadowing.0),
        )?;
        check(
            path_loss_exp > 0.0 && path_loss_exp.is_finite(),
            format!("path-loss exponent must be positive, got {path_loss_exp}"),
        )?;
        check(
            wavelength > 0.0 && wavelength.is_finite(),
            format!("wavelength must be positive, got {wavelength}"),
        )?;
        check(
            bandwidth > 0.0 && bandwidth.is_finite(),
            format!("bandwidth must be positive, got {bandwidth}"),
        )?;
        check(
            noise_figure.0 >= 0.0,
            format!("noise figure must be >= 0 dB, got {}", noise_figure.0),
        )?;
        Ok(Self {
            pattern,
            shadowing,
            path_loss_exp,
            wavelength,
            bandwidth,
            noise_figure,
        })
    }

    pub fn pattern(&self) -> &AntennaPattern {
        &self.pattern
    }

    pub fn shadowing(&self) -> Db {
        self.shadowing
    }

    pub fn path_loss_exp(&self) -> f64 {
        self.path_loss_exp
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn noise_figure(&self) -> Db {
        self.noise_figure
    }

    /// `2·G0 − W`: both ends are approximated by the boresight gain.
    pub fn antenna_margin(&self) -> Db {
        Db(2.0 * self.pattern.g0().0) - self.shadowing
    }

    /// Distance-dependent propagation term `10·n·log10(λ / (4πd))`.
    pub fn propagation(&self, d: f64) -> Result<Db> {
        if !(d > 0.0) {
            return Err(Error::Domain {
                what: "distance",
                value: d,
                expected: "d > 0 m",
            });
        }
        Ok(Db(10.0
            * self.path_loss_exp
            * (self.wavelength / (4.0 * PI * d)).log10()))
    }

    /// Everything between the transmitter and the receiver input at distance `d`.
    pub fn path_gain(&self, d: f64) -> Result<Db> {
        Ok(self.antenna_margin() + self.propagation(d)?)
    }
}

pub fn noise_power_dbm(budget: &LinkBudget) -> Dbm {
    Dbm(THERMAL_NOISE_DBM_PER_HZ + 10.0 * budget.bandwidth.log10() + budget.noise_figure.0)
}

pub fn rx_power_dbm(budget: &LinkBudget, ptx: Dbm, d: f64) -> Result<Dbm> {
    Ok(ptx + budget.path_gain(d)?)
}

pub fn snr(budget: &LinkBudget, model: SnrModel, ptx: Dbm, d: f64) -> Result<f64> {
    let rx = rx_power_dbm(budget, ptx, d)?;
    let noise = noise_power_dbm(budget);
    match model {
        SnrModel::PaperLiteral => {
            if noise.0 == 0.0 {
                return Err(Error::Degenerate("noise power is exactly 0 dBm"));
            }
            Ok(rx.0 / noise.0)
        }
        SnrModel::Physical => Ok((rx - noise).to_linear()),
    }
}

/// Transmit level that makes the physical SNR at distance `d` equal `target`.
/// A zero target maps to negative infinity dBm (zero watts).
pub fn required_ptx_physical(budget: &LinkBudget, target: f64, d: f64) -> Result<Dbm> {
    if !(target >= 0.0) {
        return Err(Error::Domain {
            what: "SNR target",
            value: target,
            expected: "target >= 0",
        });
    }
    let rx = noise_power_dbm(budget) + Db::from_linear(target);
    Ok(rx - budget.path_gain(d)?)
}

/// Spectral rate `log2(1 + snr)`.
pub fn rate(snr_value: f64) -> Result<f64> {
    if !(snr_value > -1.0) {
        return Err(Error::Domain {
            what: "SNR",
            value: snr_value,
            expected: "snr > -1",
        });
    }
    Ok(snr_value.ln_1p() / std::f64::consts::LN_2)
}

/// `10·log10(2^r − 1)` without overflow for large `r`.
pub(crate) fn db_of_exp2_minus_one(r: f64) -> Db {
    if r > 60.0 {
        Db(10.0
            * (r * std::f64::consts::LOG10_2 + (-(-r).exp2()).ln_1p() / std::f64::consts::LN_10))
    } else {
        Db::from_linear((r * std::f64::consts::LN_2).exp_m1())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::units::Degrees;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    pub(crate) fn default_budget() -> LinkBudget {
        LinkBudget::new(
            AntennaPattern::new(Degrees(30.0)).unwrap(),
            Db(10.0),
            2.0,
            0.005,
            2.16e9,
            Db(6.0),
        )
        .unwrap()
    }

    fn budget_with(bandwidth: f64, nf: f64) -> LinkBudget {
        LinkBudget::new(
            AntennaPattern::new(Degrees(30.0)).unwrap(),
            Db(10.0),
            2.0,
            0.005,
            bandwidth,
            Db(nf),
        )
        .unwrap()
    }

    #[test]
    fn noise_examples() {
        assert_relative_eq!(noise_power_dbm(&default_budget()).0, -74.655, epsilon = 1e-3);
        assert_relative_eq!(noise_power_dbm(&budget_with(1.0, 0.0)).0, -174.0);
        assert_relative_eq!(
            noise_power_dbm(&budget_with(1e9, 6.0)).0,
            -78.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rx_power_examples() {
        let b = default_budget();
        assert_relative_eq!(
            rx_power_dbm(&b, Dbm(40.0), 42.242).unwrap().0,
            -38.699_731_763_794_61,
            epsilon = 1e-9
        );
        let unit = 0.005 / (4.0 * PI);
        assert_relative_eq!(
            rx_power_dbm(&b, Dbm(40.0), unit).unwrap().0,
            61.819_954_874_419_93,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            rx_power_dbm(&b, Dbm(40.0), unit).unwrap().0,
            40.0 + 2.0 * b.pattern().g0().0 - 10.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            rx_power_dbm(&b, Dbm(50.0), 20.0).unwrap().0,
            -22.205_442_232_581_24,
            epsilon = 1e-9
        );
        assert!(rx_power_dbm(&b, Dbm(40.0), 0.0).is_err());
    }

    #[test]
    fn snr_examples() {
        let b = default_budget();
        let lit = snr(&b, SnrModel::PaperLiteral, Dbm(40.0), 42.242).unwrap();
        assert_relative_eq!(lit, 0.518_377_764_651_324_5, epsilon = 1e-12);
        let phys = snr(&b, SnrModel::Physical, Dbm(40.0), 42.242).unwrap();
        assert_relative_eq!(phys, 3940.6972649710131, max_relative = 1e-10);
        // Pick a transmit level that lands exactly on the noise floor.
        let d = 30.0;
        let p = noise_power_dbm(&b) - b.path_gain(d).unwrap();
        assert_relative_eq!(
            snr(&b, SnrModel::Physical, p, d).unwrap(),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn paper_literal_rejects_zero_dbm_noise() {
        // -174 + 10·log10(B) + NF = 0 with NF = 4 dB and B = 1e17 Hz.
        let b = budget_with(1e17, 4.0);
        assert_eq!(noise_power_dbm(&b).0, 0.0);
        assert!(matches!(
            snr(&b, SnrModel::PaperLiteral, Dbm(40.0), 10.0),
            Err(Error::Degenerate(_))
        ));
        assert!(snr(&b, SnrModel::Physical, Dbm(40.0), 10.0).is_ok());
    }

    #[test]
    fn rate_examples() {
        assert_eq!(rate(0.0).unwrap(), 0.0);
        assert_relative_eq!(rate(1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(rate(0.5183).unwrap(), 0.6025, epsilon = 1e-4);
        assert!(rate(-1.0).is_err());
        assert!(rate(f64::NAN).is_err());
    }

    #[test]
    fn required_power_inverts_physical_snr() {
        let b = default_budget();
        for &target in &[1e-6, 0.3, 1.0, 3944.5, 1e9] {
            let p = required_ptx_physical(&b, target, 27.0).unwrap();
            assert_relative_eq!(
                snr(&b, SnrModel::Physical, p, 27.0).unwrap(),
                target,
                max_relative = 1e-12
            );
        }
        assert_eq!(
            required_ptx_physical(&b, 0.0, 27.0).unwrap().0,
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn exp2_minus_one_in_db() {
        for &r in &[1e-9, 0.5, 3.0, 59.0, 61.0, 500.0] {
            let expect = 10.0 * (r * std::f64::consts::LN_2).exp_m1().log10();
            assert_relative_eq!(db_of_exp2_minus_one(r).0, expect, max_relative = 1e-9);
        }
        assert!(db_of_exp2_minus_one(5000.0).0.is_finite());
    }

    #[test]
    fn mode_round_trips_through_str() {
        for m in [SnrModel::PaperLiteral, SnrModel::Physical] {
            assert_eq!(m.as_str().parse::<SnrModel>().unwrap(), m);
        }
        assert!("linear".parse::<SnrModel>().is_err());
    }

    proptest! {
        #[test]
        fn decade_path_loss(n_pl in 1.0f64..5.0, d in 1.0f64..1000.0, p in -20.0f64..60.0) {
            let b = LinkBudget::new(
                AntennaPattern::new(Degrees(30.0)).unwrap(), Db(10.0), n_pl, 0.005, 2.16e9, Db(6.0),
            ).unwrap();
            let near = rx_power_dbm(&b, Dbm(p), d).unwrap().0;
            let far = rx_power_dbm(&b, Dbm(p), 10.0 * d).unwrap().0;
            prop_assert!((near - far - 10.0 * n_pl).abs() < 1e-9);
        }

        #[test]
        fn physical_snr_monotone(
            theta in 5.0f64..60.0, w in 0.0f64..20.0, n_pl in 1.5f64..4.0,
            p in -10.0f64..60.0, dp in 0.01f64..10.0, d in 1.0f64..500.0, dd in 0.01f64..100.0,
        ) {
            let b = LinkBudget::new(
                AntennaPattern::new(Degrees(theta)).unwrap(), Db(w), n_pl, 0.005, 2.16e9, Db(6.0),
            ).unwrap();
            let base = snr(&b, SnrModel::Physical, Dbm(p), d).unwrap();
            prop_assert!(snr(&b, SnrModel::Physical, Dbm(p + dp), d).unwrap() > base);
            prop_assert!(snr(&b, SnrModel::Physical, Dbm(p), d + dd).unwrap() < base);
        }

        /// With a negative noise level, the dB-ratio SNR falls as transmit
        /// power rises while the received level is still negative.
        #[test]
        fn paper_literal_snr_decreases_in_power(p in -20.0f64..50.0, dp in 0.01f64..5.0, d in 10.0f64..500.0) {
            let b = default_budget();
            prop_assume!(rx_power_dbm(&b, Dbm(p + dp), d).unwrap().0 < 0.0);
            let lo = snr(&b, SnrModel::PaperLiteral, Dbm(p), d).unwrap();
            let hi = snr(&b, SnrModel::PaperLiteral, Dbm(p + dp), d).unwrap();
            prop_assert!(hi < lo);
        }

        #[test]
        fn rate_sign_follows_snr(s in -0.999f64..100.0) {
            prop_assert_eq!(rate(s).unwrap() >= 0.0, s >= 0.0);
        }
    }
}
