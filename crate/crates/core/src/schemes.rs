//! The power control schemes evaluated at one operating point.
//!
//! All schemes at an operating point share one requirement: the data a
//! constant reference power delivers over the half-cell. Each scheme also
//! exposes its planned transmit schedule, which the Monte Carlo module replays
//! against a train that moves at a different speed than planned.

use crate::allocation::{
    allocate_closed_form, allocate_oracle, energy_of, PowerAllocation, Scheme,
};
use crate::error::Result;
use crate::geometry::{segment_plan, NetworkGeometry};
use crate::limits::{limit_energy_exact, LimitProfile};
use crate::link::{LinkBudget, SnrModel};
use crate::traffic::{
    data_integral_constant_power, data_total_midpoint, integrate_rate, RequiredData,
};
use crate::units::Dbm;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub dl: f64,
    pub v: f64,
    pub p_ref: Dbm,
    pub n_segments: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeResult {
    pub scheme: Scheme,
    pub mode: SnrModel,
    /// dBm-seconds in the dB-ratio reading, joules in the physical one.
    pub energy: f64,
    /// Rate-seconds.
    pub data: f64,
    pub energy_efficiency: f64,
    pub operating_point: OperatingPoint,
    /// Negative closed-form power levels left unclamped.
    pub warnings: usize,
}

impl SchemeResult {
    pub fn new(
        scheme: Scheme,
        mode: SnrModel,
        energy: f64,
        data: f64,
        operating_point: OperatingPoint,
        warnings: usize,
    ) -> Self {
        Self {
            scheme,
            mode,
            energy,
            data,
            energy_efficiency: efficiency(data, energy),
            operating_point,
            warnings,
        }
    }
}

/// `data / energy`, with `0/0` reported as zero.
pub fn efficiency(data: f64, energy: f64) -> f64 {
    if energy == 0.0 && data == 0.0 {
        0.0
    } else {
        data / energy
    }
}

/// Transmit level over one interval of the planned schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum PowerProfile {
    Constant(Dbm),
    /// Continuous profile of the infinitely fine allocation, as a function of
    /// the planned track position.
    Limit(LimitProfile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub start: f64,
    pub end: f64,
    pub power: PowerProfile,
}

/// A scheme's result together with the schedule that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedScheme {
    pub result: SchemeResult,
    pub schedule: Vec<Phase>,
}

/// Everything shared by the schemes at one operating point.
#[derive(Debug, Clone)]
pub struct OperatingContext {
    pub geometry: NetworkGeometry,
    pub budget: LinkBudget,
    pub mode: SnrModel,
    pub p_ref: Dbm,
    pub d_fixed: RequiredData,
}

impl OperatingContext {
    pub fn new(
        geometry: NetworkGeometry,
        budget: LinkBudget,
        mode: SnrModel,
        p_ref: Dbm,
    ) -> Result<Self> {
        let d_fixed = RequiredData::new(
            data_integral_constant_power(&geometry, &budget, mode, p_ref)?,
            mode,
        )?;
        Ok(Self {
            geometry,
            budget,
            mode,
            p_ref,
            d_fixed,
        })
    }

    pub fn operating_point(&self) -> OperatingPoint {
        OperatingPoint {
            dl: self.geometry.dl(),
            v: self.geometry.v(),
            p_ref: self.p_ref,
            n_segments: self.geometry.n_segments(),
        }
    }

    fn constant_energy(&self, p: Dbm, duration: f64) -> f64 {
        match self.mode {
            SnrModel::PaperLiteral => p.0 * duration,
            SnrModel::Physical => p.to_watts().0 * duration,
        }
    }

    fn segment_phases<'a>(
        offset: f64,
        switches: &'a [f64],
        alloc: &'a PowerAllocation,
    ) -> impl Iterator<Item = Phase> + 'a {
        switches
            .windows(2)
            .zip(alloc.powers())
            .map(move |(w, &p)| Phase {
                start: offset + w[0],
                end: offset + w[1],
                power: PowerProfile::Constant(p),
            })
    }

    pub fn plan(&self, scheme: Scheme) -> Result<PlannedScheme> {
        match scheme {
            Scheme::Mctp => self.plan_mctp(),
            Scheme::Otpa => self.plan_allocated(Scheme::Otpa),
            Scheme::Oracle => self.plan_allocated(Scheme::Oracle),
            Scheme::Mtpa => self.plan_mtpa(),
            Scheme::OtpaInf => self.plan_otpa_inf(),
        }
    }

    pub fn evaluate(&self, scheme: Scheme) -> Result<SchemeResult> {
        self.plan(scheme).map(|p| p.result)
    }

    fn plan_mctp(&self) -> Result<PlannedScheme> {
        let duration = self.geometry.half_cell_time();
        let result = SchemeResult::new(
            Scheme::Mctp,
            self.mode,
            self.constant_energy(self.p_ref, duration),
            self.d_fixed.value(),
            self.operating_point(),
            0,
        );
        Ok(PlannedScheme {
            result,
            schedule: vec![Phase {
                start: 0.0,
                end: duration,
                power: PowerProfile::Constant(self.p_ref),
            }],
        })
    }

    fn plan_allocated(&self, scheme: Scheme) -> Result<PlannedScheme> {
        let plan = segment_plan(&self.geometry)?;
        let alloc = match scheme {
            Scheme::Oracle => allocate_oracle(&plan, &self.budget, &self.d_fixed)?,
            _ => allocate_closed_form(&plan, &self.budget, &self.d_fixed)?,
        };
        let result = SchemeResult::new(
            scheme,
            self.mode,
            energy_of(&plan, &alloc)?,
            data_total_midpoint(&plan, &self.budget, &alloc)?,
            self.operating_point(),
            alloc.negative_powers(),
        );
        let schedule = Self::segment_phases(0.0, &plan.switch_times(), &alloc).collect();
        Ok(PlannedScheme { result, schedule })
    }

    /// Constant power over track `[0, dl/4]`, then the closed form over
    /// `[dl/4, dl/2]` for whatever the first quarter left undelivered. The
    /// second stretch is itself a half-cell of a cell with spacing `dl/2`.
    fn plan_mtpa(&self) -> Result<PlannedScheme> {
        let boundary = self.geometry.half_cell_time() / 2.0;
        let first = integrate_rate(
            &self.geometry,
            &self.budget,
            self.mode,
            self.p_ref,
            0.0,
            boundary,
        )?;
        let residual = RequiredData::new((self.d_fixed.value() - first).max(0.0), self.mode)?;

        let inner = self.geometry.with_dl(self.geometry.dl() / 2.0)?;
        let plan = segment_plan(&inner)?;
        let alloc = allocate_closed_form(&plan, &self.budget, &residual)?;

        let energy = self.constant_energy(self.p_ref, boundary) + energy_of(&plan, &alloc)?;
        let data = first + data_total_midpoint(&plan, &self.budget, &alloc)?;
        let result = SchemeResult::new(
            Scheme::Mtpa,
            self.mode,
            energy,
            data,
            self.operating_point(),
            alloc.negative_powers(),
        );

        let mut schedule = vec![Phase {
            start: 0.0,
            end: boundary,
            power: PowerProfile::Constant(self.p_ref),
        }];
        schedule.extend(Self::segment_phases(boundary, &plan.switch_times(), &alloc));
        Ok(PlannedScheme { result, schedule })
    }

    fn plan_otpa_inf(&self) -> Result<PlannedScheme> {
        let energy = limit_energy_exact(&self.geometry, &self.budget, &self.d_fixed)?;
        let profile = LimitProfile::new(&self.geometry, &self.budget, &self.d_fixed)?;
        let result = SchemeResult::new(
            Scheme::OtpaInf,
            self.mode,
            energy,
            self.d_fixed.value(),
            self.operating_point(),
            0,
        );
        Ok(PlannedScheme {
            result,
            schedule: vec![Phase {
                start: 0.0,
                end: self.geometry.half_cell_time(),
                power: PowerProfile::Limit(profile),
            }],
        })
    }
}

pub fn scheme_mctp(
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
    mode: SnrModel,
    p_const: Dbm,
) -> Result<SchemeResult> {
    OperatingContext::new(*geometry, *budget, mode, p_const)?.evaluate(Scheme::Mctp)
}

pub fn scheme_otpa(
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
    mode: SnrModel,
    p_ref: Dbm,
) -> Result<SchemeResult> {
    OperatingContext::new(*geometry, *budget, mode, p_ref)?.evaluate(Scheme::Otpa)
}

pub fn scheme_mtpa(
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
    mode: SnrModel,
    p_const: Dbm,
) -> Result<SchemeResult> {
    OperatingContext::new(*geometry, *budget, mode, p_const)?.evaluate(Scheme::Mtpa)
}

pub fn scheme_otpa_inf(
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
    mode: SnrModel,
    p_ref: Dbm,
) -> Result<SchemeResult> {
    OperatingContext::new(*geometry, *budget, mode, p_ref)?.evaluate(Scheme::OtpaInf)
}

pub fn scheme_oracle(
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
    mode: SnrModel,
    p_ref: Dbm,
) -> Result<SchemeResult> {
    OperatingContext::new(*geometry, *budget, mode, p_ref)?.evaluate(Scheme::Oracle)
}
