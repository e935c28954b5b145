//! Energy of the closed-form allocation as the number of segments grows.
//!
//! With `φ_i = tan((N+1−i)θ) − tan((N−i)θ)` the finite-`N` energy splits into
//! three sums:
//!
//! ```text
//! E(N) = d0/v · [ S_exp/g − S_floor + S_dist ]
//! S_exp   = Σ φ_i · 2^(Q / (φ_i·N))
//! S_floor = Σ φ_i · (1/g + M + 10·n·log10(λ/4π))
//! S_dist  = Σ φ_i · 5·n·log10(d_mid,i²)
//! ```
//!
//! Each sum is a Riemann sum in `u = tan(x)` over `[0, H]`, with
//! `φ_i·N → K·(1 + u²)`. Two limits are provided:
//!
//! * [`limit_energy`]: the textbook closed form, which takes
//!   `S_exp → H + K·(2^(Q/K) − 1)` and `S_dist → H·10·n·log10(d0)`.
//! * [`limit_energy_exact`]: the actual limit of the Riemann sums,
//!   `S_exp → ∫ 2^(Q/(K(1+u²))) du` and `S_dist → 5·n·∫ log10(d0²(1+u²)) du`.
//!
//! The two agree only as `Q → 0` and `H → 0`. The finite sums converge to the
//! exact form; the closed form is kept for comparison, together with the
//! variant whose first term lacks the logarithm.
//!
//! Everything here is defined in the dB-ratio SNR reading only.

use std::f64::consts::{LN_10, PI};

use crate::error::Result;
use crate::geometry::{beam_angle, NetworkGeometry};
use crate::link::{noise_power_dbm, LinkBudget, SnrModel};
use crate::quadrature::{adaptive_simpson, DEFAULT_MAX_EVALS};
use crate::traffic::RequiredData;
use crate::units::{Db, Dbm};

const LIMIT_REL_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitConstants {
    /// `dl / (2·d0)`.
    pub h: f64,
    /// `arctan(h)`, radians.
    pub k: f64,
    /// `v·D_fixed / d0`.
    pub q: f64,
    /// `2·G0 − W`.
    pub m: Db,
    /// `1 / noise_dBm`.
    pub g: f64,
}

pub fn limit_constants(
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
    d_fixed: &RequiredData,
) -> Result<LimitConstants> {
    d_fixed.mode().require(SnrModel::PaperLiteral)?;
    let h = geometry.dl() / (2.0 * geometry.d0());
    let noise = noise_power_dbm(budget).0;
    if noise == 0.0 {
        return Err(crate::error::Error::Degenerate(
            "noise power is exactly 0 dBm",
        ));
    }
    Ok(LimitConstants {
        h,
        k: h.atan(),
        q: geometry.v() * d_fixed.value() / geometry.d0(),
        m: budget.antenna_margin(),
        g: 1.0 / noise,
    })
}

/// The three sums of the finite-`N` energy (or their limits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub exponential: f64,
    pub floor: f64,
    pub distance: f64,
}

impl EnergyParts {
    pub fn energy(&self, geometry: &NetworkGeometry, g: f64) -> f64 {
        geometry.d0() / geometry.v() * (self.exponential / g - self.floor + self.distance)
    }
}

fn floor_coefficient(c: &LimitConstants, budget: &LinkBudget) -> f64 {
    1.0 / c.g + c.m.0 + 10.0 * budget.path_loss_exp() * (budget.wavelength() / (4.0 * PI)).log10()
}

/// Per-beam angular weights `φ_i`.
pub fn beam_weights(geometry: &NetworkGeometry) -> Vec<f64> {
    let n = geometry.n_segments();
    let theta = beam_angle(geometry).0;
    (1..=n)
        .map(|i| ((n + 1 - i) as f64 * theta).tan() - ((n - i) as f64 * theta).tan())
        .collect()
}

/// The three sums at the geometry's `N`.
pub fn finite_energy_parts(
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
    d_fixed: &RequiredData,
) -> Result<EnergyParts> {
    let c = limit_constants(geometry, budget, d_fixed)?;
    let n = geometry.n_segments() as f64;
    let d0 = geometry.d0();
    let half = geometry.half_length();
    let five_n = 5.0 * budget.path_loss_exp();
    let floor = floor_coefficient(&c, budget);

    let mut parts = EnergyParts {
        exponential: 0.0,
        floor: 0.0,
        distance: 0.0,
    };
    let mut covered = 0.0;
    for phi in beam_weights(geometry) {
        let width = d0 * phi;
        let along = half - covered - width / 2.0;
        covered += width;
        parts.exponential += phi * (c.q / (phi * n)).exp2();
        parts.floor += phi * floor;
        parts.distance += phi * five_n * (along * along + d0 * d0).log10();
    }
    Ok(parts)
}

/// Closed-form allocation energy at the geometry's `N`, evaluated through the
/// three-sum decomposition.
pub fn finite_energy_sum(
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
    d_fixed: &RequiredData,
) -> Result<f64> {
    let c = limit_constants(geometry, budget, d_fixed)?;
    Ok(finite_energy_parts(geometry, budget, d_fixed)?.energy(geometry, c.g))
}

/// Limits of the three sums as the textbook closed form states them.
pub fn closed_form_parts(
    c: &LimitConstants,
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
) -> EnergyParts {
    EnergyParts {
        exponential: c.h + c.k * ((c.q / c.k).exp2() - 1.0),
        floor: c.h * floor_coefficient(c, budget),
        distance: c.h * 10.0 * budget.path_loss_exp() * geometry.d0().log10(),
    }
}

/// Exact limits of the three sums.
pub fn exact_parts(
    c: &LimitConstants,
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
) -> Result<EnergyParts> {
    let exponential = if c.q == 0.0 {
        c.h
    } else {
        let qk = c.q / c.k;
        adaptive_simpson(
            |u| (qk / (1.0 + u * u)).exp2(),
            0.0,
            c.h,
            LIMIT_REL_TOL,
            DEFAULT_MAX_EVALS,
        )?
    };
    // ∫_0^H ln(1 + u²) du = H·ln(1 + H²) − 2H + 2·arctan(H)
    let log_term = (c.h * (c.h * c.h).ln_1p() - 2.0 * c.h + 2.0 * c.k) / LN_10;
    let distance = 5.0 * budget.path_loss_exp() * (2.0 * c.h * geometry.d0().log10() + log_term);
    Ok(EnergyParts {
        exponential,
        floor: c.h * floor_coefficient(c, budget),
        distance,
    })
}

/// Closed-form energy limit: the sum of the textbook limits of the three parts,
/// `d0/v · [H·(10·n·log10(4π·d0/λ) − M) + (K/g)·(2^(Q/K) − 1)]`.
pub fn limit_energy(
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
    d_fixed: &RequiredData,
) -> Result<f64> {
    let c = limit_constants(geometry, budget, d_fixed)?;
    let n = budget.path_loss_exp();
    let spread = 10.0 * n * (4.0 * PI * geometry.d0() / budget.wavelength()).log10() - c.m.0;
    Ok(geometry.d0() / geometry.v() * (c.h * spread + c.k / c.g * ((c.q / c.k).exp2() - 1.0)))
}

/// The closed form with the logarithm missing from its first term. Kept only
/// to show how far off that variant is.
pub fn limit_energy_as_printed(
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
    d_fixed: &RequiredData,
) -> Result<f64> {
    let c = limit_constants(geometry, budget, d_fixed)?;
    let n = budget.path_loss_exp();
    let spread = 10.0 * n * (4.0 * PI * geometry.d0() / budget.wavelength()) - c.m.0;
    Ok(geometry.d0() / geometry.v() * (c.h * spread + c.k / c.g * ((c.q / c.k).exp2() - 1.0)))
}

/// The value the finite-`N` energy actually converges to.
pub fn limit_energy_exact(
    geometry: &NetworkGeometry,
    budget: &LinkBudget,
    d_fixed: &RequiredData,
) -> Result<f64> {
    let c = limit_constants(geometry, budget, d_fixed)?;
    Ok(exact_parts(&c, geometry, budget)?.energy(geometry, c.g))
}

/// Transmit level of the infinitely fine allocation at a track position.
///
/// Segment widths shrink like `d0·θ·(1 + u²)` where `u` is the offset from
/// broadside in units of `d0`, so the equal-share rate becomes
/// `(Q/K) / (1 + u²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitProfile {
    budget: LinkBudget,
    d0: f64,
    half_length: f64,
    rate_scale: f64,
    g: f64,
    noise: Dbm,
}

impl LimitProfile {
    pub fn new(
        geometry: &NetworkGeometry,
        budget: &LinkBudget,
        d_fixed: &RequiredData,
    ) -> Result<Self> {
        let c = limit_constants(geometry, budget, d_fixed)?;
        Ok(Self {
            budget: *budget,
            d0: geometry.d0(),
            half_length: geometry.half_length(),
            rate_scale: c.q / c.k,
            g: c.g,
            noise: noise_power_dbm(budget),
        })
    }

    /// Planned spectral rate at track position `x`.
    pub fn planned_rate(&self, x: f64) -> f64 {
        let u = (self.half_length - x) / self.d0;
        self.rate_scale / (1.0 + u * u)
    }

    pub fn power_at(&self, x: f64) -> Result<Dbm> {
        let d = self.d0.hypot(self.half_length - x);
        let c = self.budget.path_gain(d)?.0 / self.noise.0;
        let target = self.planned_rate(x).exp2() - 1.0;
        Ok(Dbm((target - c) / self.g))
    }
}
