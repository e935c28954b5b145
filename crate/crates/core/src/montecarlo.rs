//! Schemes under Gaussian velocity-estimation error.
//!
//! Each trial draws one speed estimate `v̂ = v + e`, `e ~ N(0, σ_v²)`, at the
//! cell edge. The system plans everything with `v̂`: the D_fixed requirement,
//! the segment dwell schedule, the allocation. The train then moves at the
//! true speed. Energy follows the planned schedule. Delivered data is the
//! planned data plus the exact change caused by running the planned schedule
//! along the true trajectory:
//!
//! ```text
//! realized = planned + Σ_phases ∫ [ R(P(t), d(v·t)) − R(P(t), d(v̂·t)) ] dt
//! ```
//!
//! Both integrals use adaptive quadrature, so the correction is free of any
//! midpoint approximation, and it vanishes identically when `v̂ = v`.
//!
//! Draws come from a counter-based stream keyed by `(seed, trial)`: results
//! do not depend on thread count or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::allocation::Scheme;
use crate::error::{Error, Result};
use crate::geometry::NetworkGeometry;
use crate::link::{rate, snr, LinkBudget, SnrModel};
use crate::quadrature::{adaptive_simpson_try, DEFAULT_MAX_EVALS, DEFAULT_REL_TOL};
use crate::schemes::{efficiency, OperatingContext, Phase, PowerProfile, SchemeResult};
use crate::units::Dbm;

pub const MAX_RESAMPLES: usize = 64;

/// z-value of a two-sided 95% normal interval.
const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityErrorModel {
    sigma_v: f64,
    seed: u64,
    trials: usize,
}

impl VelocityErrorModel {
    pub fn new(sigma_v: f64, seed: u64, trials: usize) -> Result<Self> {
        if !(sigma_v >= 0.0 && sigma_v.is_finite()) {
            return Err(Error::Domain {
                what: "sigma_v",
                value: sigma_v,
                expected: "finite and >= 0",
            });
        }
        if trials == 0 {
            return Err(Error::Domain {
                what: "trials",
                value: 0.0,
                expected: "at least 1",
            });
        }
        Ok(Self {
            sigma_v,
            seed,
            trials,
        })
    }

    pub fn sigma_v(&self) -> f64 {
        self.sigma_v
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trials(&self) -> usize {
        self.trials
    }
}

/// Which schemes to run and the reference power that fixes D_fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub schemes: Vec<Scheme>,
    pub p_ref: Dbm,
}

pub fn sample_velocity(model: &VelocityErrorModel, v_true: f64, trial: u64) -> Result<f64> {
    if !(v_true > 0.0) {
        return Err(Error::Domain {
            what: "v_true",
            value: v_true,
            expected: "v > 0",
        });
    }
    if model.sigma_v == 0.0 {
        return Ok(v_true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    rng.set_stream(trial);
    for _ in 0..MAX_RESAMPLES {
        let z: f64 = StandardNormal.sample(&mut rng);
        let v_hat = v_true + model.sigma_v * z;
        if v_hat > 0.0 {
            return Ok(v_hat);
        }
    }
    Err(Error::ResampleExhausted {
        attempts: MAX_RESAMPLES,
        sigma_v: model.sigma_v,
        v: v_true,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial_index: u64,
    pub v_hat: f64,
    /// One entry per configured scheme, in configuration order.
    pub results: Vec<(Scheme, Result<SchemeResult>)>,
}

/// Plans every scheme with `v_hat` and replays the plan along the true
/// trajectory of `geometry`.
pub fn trial_evaluate(
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
    mode: SnrModel,
    config: &SchemeConfig,
    v_hat: f64,
) -> Result<TrialResult> {
    let planned_geometry = geometry.with_velocity(v_hat)?;
    let ctx = OperatingContext::new(planned_geometry, *budget, mode, config.p_ref)?;
    let results = config
        .schemes
        .iter()
        .map(|&scheme| {
            let outcome = ctx.plan(scheme).and_then(|planned| {
                let mut result = planned.result;
                let delta = misalignment_data(geometry, v_hat, budget, mode, &planned.schedule)?;
                result.data += delta;
                result.energy_efficiency = efficiency(result.data, result.energy);
                Ok(result)
            });
            (scheme, outcome)
        })
        .collect();
    Ok(TrialResult {
        trial_index: 0,
        v_hat,
        results,
    })
}

/// Data gained (or lost) by running a schedule planned for `v_hat` on a train
/// that actually moves at `geometry.v()`.
pub fn misalignment_data(
    geometry: &NetworkGeometry,
    v_hat: f64,
    budget: &LinkBudget,
    mode: SnrModel,
    schedule: &[Phase],
) -> Result<f64> {
    let v_true = geometry.v();
    if v_hat == v_true {
        return Ok(0.0);
    }
    let mut delta = 0.0;
    for phase in schedule {
        let along = |v: f64| {
            adaptive_simpson_try(
                |t| {
                    let power = match &phase.power {
                        PowerProfile::Constant(p) => *p,
                        PowerProfile::Limit(profile) => profile.power_at(v_hat * t)?,
                    };
                    rate(snr(
                        budget,
                        mode,
                        power,
                        geometry.distance_at_position(v * t),
                    )?)
                },
                phase.start,
                phase.end,
                DEFAULT_REL_TOL,
                DEFAULT_MAX_EVALS,
            )
        };
        delta += along(v_true)? - along(v_hat)?;
    }
    Ok(delta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
}

impl Stats {
    /// Sample statistics with the `n − 1` denominator; a single sample has
    /// zero spread. NaN everywhere for an empty sample.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                ci95_lo: f64::NAN,
                ci95_hi: f64::NAN,
            };
        }
        // The correction pass makes the mean of identical samples exact.
        let rough = pairwise_sum(xs) / n as f64;
        let residuals: Vec<f64> = xs.iter().map(|x| x - rough).collect();
        let mean = rough + pairwise_sum(&residuals) / n as f64;
        let std = if n > 1 {
            let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            (pairwise_sum(&sq) / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let half = Z95 * std / (n as f64).sqrt();
        Self {
            mean,
            std,
            ci95_lo: mean - half,
            ci95_hi: mean + half,
        }
    }
}

/// Pairwise summation in fixed index order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let (l, r) = xs.split_at(xs.len() / 2);
        pairwise_sum(l) + pairwise_sum(r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeAggregate {
    pub scheme: Scheme,
    pub successes: usize,
    pub failures: usize,
    /// Message of the first failed trial, if any.
    pub first_error: Option<String>,
    pub energy: Stats,
    pub data: Stats,
    pub energy_efficiency: Stats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSummary {
    pub model: VelocityErrorModel,
    pub aggregates: Vec<SchemeAggregate>,
}

/// Runs all trials (in parallel on the current rayon pool) and aggregates
/// per scheme in trial order.
pub fn run_montecarlo(
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
    mode: SnrModel,
    model: &VelocityErrorModel,
    config: &SchemeConfig,
) -> MonteCarloSummary {
    let trials: Vec<Result<TrialResult>> = (0..model.trials as u64)
        .into_par_iter()
        .map(|k| {
            let v_hat = sample_velocity(model, geometry.v(), k)?;
            let mut trial = trial_evaluate(geometry, budget, mode, config, v_hat)?;
            trial.trial_index = k;
            Ok(trial)
        })
        .collect();

    let aggregates = config
        .schemes
        .iter()
        .enumerate()
        .map(|(slot, &scheme)| {
            let mut ok: Vec<&SchemeResult> = Vec::with_capacity(trials.len());
            let mut failures = 0;
            let mut first_error = None;
            for trial in &trials {
                let outcome = match trial {
                    Ok(t) => t.results[slot].1.as_ref().map_err(|e| e.to_string()),
                    Err(e) => Err(e.to_string()),
                };
                match outcome {
                    Ok(r) => ok.push(r),
                    Err(msg) => {
                        failures += 1;
                        first_error.get_or_insert(msg);
                    }
                }
            }
            let column = |f: fn(&SchemeResult) -> f64| {
                Stats::from_samples(&ok.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            SchemeAggregate {
                scheme,
                successes: ok.len(),
                failures,
                first_error,
                energy: column(|r| r.energy),
                data: column(|r| r.data),
                energy_efficiency: column(|r| r.energy_efficiency),
            }
        })
        .collect();

    MonteCarloSummary {
        model: *model,
        aggregates,
    }
}
