//! Delivered data over the half-cell.
//!
//! Data is the time integral of the spectral rate, in rate-seconds
//! (bit/s/Hz × s). Bandwidth is deliberately not folded in.

use crate::allocation::PowerAllocation;
use crate::error::{Error, Result};
use crate::geometry::{distance_at_time, NetworkGeometry, SegmentPlan};
use crate::link::{rate, snr, LinkBudget, SnrModel};
use crate::quadrature::{adaptive_simpson_try, DEFAULT_MAX_EVALS, DEFAULT_REL_TOL};
use crate::units::Dbm;

/// A data requirement tagged with the SNR mode it was measured in.
///
/// Allocations read the mode from here, so a requirement computed under one
/// SNR reading cannot be satisfied under the other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequiredData {
    value: f64,
    mode: SnrModel,
}

impl RequiredData {
    pub fn new(value: f64, mode: SnrModel) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::Domain {
                what: "required data",
                value,
                expected: "finite and >= 0",
            });
        }
        Ok(Self { value, mode })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn mode(&self) -> SnrModel {
        self.mode
    }
}

/// Data delivered by a constant reference power: the total (`d_fixed`) and
/// its exact per-segment split.
#[derive(Debug, Clone, PartialEq)]
pub struct DataBudget {
    pub d_fixed: RequiredData,
    pub per_segment: Vec<f64>,
}

impl DataBudget {
    pub fn for_constant_power(
        geometry: &NetworkGeometry,
        plan: &SegmentPlan,
        budget: &LinkBudget,
        model: SnrModel,
        ptx: Dbm,
    ) -> Result<Self> {
        let d_fixed = data_integral_constant_power(geometry, budget, model, ptx)?;
        let switches = plan.switch_times();
        let per_segment = switches
            .windows(2)
            .map(|w| integrate_rate(geometry, budget, model, ptx, w[0], w[1]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d_fixed: RequiredData::new(d_fixed, model)?,
            per_segment,
        })
    }
}

/// Midpoint-rule data of segment `i` (1-based) at constant power `ptx`.
pub fn data_segment_midpoint(
    plan: &SegmentPlan,
    budget: &LinkBudget,
    model: SnrModel,
    ptx: Dbm,
    i: usize,
) -> Result<f64> {
    if i == 0 || i > plan.len() {
        return Err(Error::Domain {
            what: "segment index",
            value: i as f64,
            expected: "1 <= i <= N",
        });
    }
    let d = plan.midpoint_distances()[i - 1];
    Ok(rate(snr(budget, model, ptx, d)?)? * plan.dwell_times()[i - 1])
}

/// Exact data over `[t_start, t_end]` at constant power along the nominal
/// trajectory of `geometry`.
pub(crate) fn integrate_rate(
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
    model: SnrModel,
    ptx: Dbm,
    t_start: f64,
    t_end: f64,
) -> Result<f64> {
    adaptive_simpson_try(
        |t| rate(snr(budget, model, ptx, distance_at_time(geometry, t))?),
        t_start,
        t_end,
        DEFAULT_REL_TOL,
        DEFAULT_MAX_EVALS,
    )
}

/// Data delivered over the whole half-cell at constant power: the `D_fixed`
/// every optimized scheme has to match.
pub fn data_integral_constant_power(
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
    model: SnrModel,
    ptx: Dbm,
) -> Result<f64> {
    integrate_rate(geometry, budget, model, ptx, 0.0, geometry.half_cell_time())
}

/// Midpoint-rule data summed over segments with per-segment powers.
pub fn data_total_midpoint(
    plan: &SegmentPlan,
    budget: &LinkBudget,
    allocation: &PowerAllocation,
) -> Result<f64> {
    if allocation.powers().len() != plan.len() {
        return Err(Error::LengthMismatch {
            expected: plan.len(),
            got: allocation.powers().len(),
        });
    }
    allocation
        .powers()
        .iter()
        .enumerate()
        .map(|(k, &p)| data_segment_midpoint(plan, budget, allocation.mode(), p, k + 1))
        .sum()
}
