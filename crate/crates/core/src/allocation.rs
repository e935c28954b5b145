//! Per-segment transmit power allocation.
//!
//! The data constraint weights each segment's rate by its dwell time:
//! `Σ a_i·log2(1 + SNR_i(P_i)) ≥ D_fixed`. The closed form hands every segment
//! an equal share `D_fixed / N` of the requirement. The oracle solves the
//! convex physical-mode program exactly by water-filling, bisecting on the
//! water level.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::SegmentPlan;
use crate::link::{db_of_exp2_minus_one, noise_power_dbm, LinkBudget, SnrModel};
use crate::traffic::RequiredData;
use crate::units::{Dbm, Watts};

pub const ORACLE_MAX_ITERATIONS: usize = 200;
pub const ORACLE_REL_TOL: f64 = 1e-9;

/// Power control schemes, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Constant transmit power over the whole half-cell.
    Mctp,
    /// Closed-form allocation over all segments.
    Otpa,
    /// Constant power over the first quarter of the cell, closed form after.
    Mtpa,
    /// Closed-form allocation in the limit of infinitely many segments.
    OtpaInf,
    /// Water-filling optimum of the physical-mode program.
    Oracle,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Mctp,
        Scheme::Otpa,
        Scheme::Mtpa,
        Scheme::OtpaInf,
        Scheme::Oracle,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Mctp => "MCTP",
            Scheme::Otpa => "OTPA",
            Scheme::Mtpa => "MTPA",
            Scheme::OtpaInf => "OTPA_INF",
            Scheme::Oracle => "ORACLE",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.as_str() == key)
            .ok_or_else(|| Error::Config(format!("unknown scheme '{}'", s.trim())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    powers: Vec<Dbm>,
    scheme: Scheme,
    mode: SnrModel,
}

impl PowerAllocation {
    pub fn new(powers: Vec<Dbm>, scheme: Scheme, mode: SnrModel) -> Self {
        Self {
            powers,
            scheme,
            mode,
        }
    }

    pub fn powers(&self) -> &[Dbm] {
        &self.powers
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn mode(&self) -> SnrModel {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    /// Segments whose closed-form level came out negative. These are kept as
    /// computed; clamping would break the data identity.
    pub fn negative_powers(&self) -> usize {
        self.powers.iter().filter(|p| p.0 < 0.0).count()
    }
}

/// Coefficients of the dB-ratio program: `SNR_i = c_i + g·P_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub g: f64,
}

pub fn coefficients(
    plan: &SegmentPlan,
    budget: &LinkBudget,
    mode: SnrModel,
) -> Result<Coefficients> {
    mode.require(SnrModel::PaperLiteral)?;
    let noise = noise_power_dbm(budget).0;
    if noise == 0.0 {
        return Err(Error::Degenerate("noise power is exactly 0 dBm"));
    }
    let c = plan
        .midpoint_distances()
        .iter()
        .map(|&d| Ok(budget.path_gain(d)?.0 / noise))
        .collect::<Result<Vec<_>>>()?;
    Ok(Coefficients {
        a: plan.dwell_times().to_vec(),
        c,
        g: 1.0 / noise,
    })
}

/// Equal-share allocation: segment `i` must deliver `D_fixed / N`, i.e. run at
/// rate `r_i = D_fixed / (a_i·N)`.
pub fn allocate_closed_form(
    plan: &SegmentPlan,
    budget: &LinkBudget,
    required: &RequiredData,
) -> Result<PowerAllocation> {
    let n = plan.len() as f64;
    let d = required.value();
    let powers = match required.mode() {
        SnrModel::PaperLiteral => {
            let coef = coefficients(plan, budget, SnrModel::PaperLiteral)?;
            coef.a
                .iter()
                .zip(&coef.c)
                .map(|(&a, &c)| Dbm(((d / (a * n)).exp2() - 1.0 - c) / coef.g))
                .collect()
        }
        SnrModel::Physical => {
            let noise = noise_power_dbm(budget);
            plan.dwell_times()
                .iter()
                .zip(plan.midpoint_distances())
                .map(|(&a, &dist)| {
                    let r = d / (a * n);
                    if r == 0.0 {
                        return Ok(Dbm(f64::NEG_INFINITY));
                    }
                    Ok(noise + db_of_exp2_minus_one(r) - budget.path_gain(dist)?)
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(PowerAllocation::new(powers, Scheme::Otpa, required.mode()))
}

/// Minimum-energy allocation of the physical program
/// `min Σ a_i·p_i  s.t.  Σ a_i·log2(1 + h_i·p_i) ≥ D, p_i ≥ 0`.
///
/// Stationarity gives `p_i = max(L − 1/h_i, 0)` for a common water level `L`.
/// The delivered data is increasing in `L`, so `L` is found by bisection on
/// `log L`.
pub fn allocate_oracle(
    plan: &SegmentPlan,
    budget: &LinkBudget,
    required: &RequiredData,
) -> Result<PowerAllocation> {
    required.mode().require(SnrModel::Physical)?;
    let d = required.value();
    let noise = noise_power_dbm(budget);

    // SNR per watt at each midpoint.
    let noise_w = noise.to_watts().0;
    let gains = plan
        .midpoint_distances()
        .iter()
        .map(|&dist| Ok(budget.path_gain(dist)?.to_linear() / noise_w))
        .collect::<Result<Vec<f64>>>()?;
    let a = plan.dwell_times();

    if d == 0.0 {
        return Ok(PowerAllocation::new(
            vec![Dbm(f64::NEG_INFINITY); plan.len()],
            Scheme::Oracle,
            SnrModel::Physical,
        ));
    }

    let delivered = |log_level: f64| -> f64 {
        gains
            .iter()
            .zip(a)
            .map(|(&h, &ai)| ai * (log_level + h.ln()).max(0.0) / std::f64::consts::LN_2)
            .sum()
    };

    // Below the lowest floor nothing is delivered.
    let mut lo = gains.iter().map(|h| -h.ln()).fold(f64::INFINITY, f64::min);
    let mut hi = lo + 1.0;
    while delivered(hi) < d {
        hi = lo + 2.0 * (hi - lo);
        if !hi.is_finite() {
            return Err(Error::BisectionNonConvergence {
                iterations: 0,
                residual: f64::INFINITY,
            });
        }
    }

    let mut level = hi;
    let mut converged = false;
    for _ in 0..ORACLE_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if delivered(mid) < d {
            lo = mid;
        } else {
            hi = mid;
        }
        level = hi;
        if (delivered(hi) - d).abs() <= ORACLE_REL_TOL * d {
            converged = true;
            break;
        }
    }
    // The bracket fixes the active set; solve for its level exactly.
    let (weight, offset) = gains.iter().zip(a).fold((0.0, 0.0), |(w, o), (&h, &ai)| {
        if level + h.ln() > 0.0 {
            (w + ai, o + ai * h.ln())
        } else {
            (w, o)
        }
    });
    let exact = (d * std::f64::consts::LN_2 - offset) / weight;
    if (delivered(exact) - d).abs() <= (delivered(level) - d).abs() {
        level = exact;
    }
    let residual = (delivered(level) - d).abs() / d;
    if !converged && residual > ORACLE_REL_TOL {
        return Err(Error::BisectionNonConvergence {
            iterations: ORACLE_MAX_ITERATIONS,
            residual,
        });
    }

    let powers = gains
        .iter()
        .map(|&h| {
            let p = (level.exp() - 1.0 / h).max(0.0);
            Watts(p).to_dbm()
        })
        .collect();
    Ok(PowerAllocation::new(
        powers,
        Scheme::Oracle,
        SnrModel::Physical,
    ))
}

/// Half-cell energy of an allocation: dBm-seconds in the dB-ratio reading,
/// joules in the physical one.
pub fn energy_of(plan: &SegmentPlan, allocation: &PowerAllocation) -> Result<f64> {
    if plan.len() != allocation.len() {
        return Err(Error::LengthMismatch {
            expected: plan.len(),
            got: allocation.len(),
        });
    }
    let per_segment = |p: Dbm| match allocation.mode {
        SnrModel::PaperLiteral => p.0,
        SnrModel::Physical => p.to_watts().0,
    };
    Ok(plan
        .dwell_times()
        .iter()
        .zip(&allocation.powers)
        .map(|(&a, &p)| a * per_segment(p))
        .sum())
}

/// `Σ a_i·log2(1 + SNR_i)` at the allocation's powers, evaluated through the
/// coefficient form in the dB-ratio reading.
pub fn weighted_data(
    plan: &SegmentPlan,
    budget: &LinkBudget,
    allocation: &PowerAllocation,
) -> Result<f64> {
    match allocation.mode() {
        SnrModel::PaperLiteral => {
            let coef = coefficients(plan, budget, SnrModel::PaperLiteral)?;
            Ok(coef
                .a
                .iter()
                .zip(&coef.c)
                .zip(allocation.powers())
                .map(|((&a, &c), &p)| a * (c + coef.g * p.0).ln_1p() / std::f64::consts::LN_2)
                .sum())
        }
        SnrModel::Physical => crate::traffic::data_total_midpoint(plan, budget, allocation),
    }
}
