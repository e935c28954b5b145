//! Rail/BS geometry and the segment decomposition of one half-cell.
//!
//! The BS sits `d0` meters from the track. Only the half-cell between the
//! cell edge (track coordinate 0) and the broadside point (track coordinate
//! `dl/2`) is modeled; the other half mirrors it. The half-cell is split into
//! `N` beams of equal angular width. Segment 1 is at the cell edge and is the
//! widest; the train visits the segments in index order.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::units::Radians;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkGeometry {
    d0: f64,
    dl: f64,
    n_segments: usize,
    v: f64,
}

impl NetworkGeometry {
    /// `d0`, `dl` in meters, `v` in meters per second.
    pub fn new(d0: f64, dl: f64, n_segments: usize, v: f64) -> Result<Self> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidGeometry(format!(
                    "{name} must be positive and finite, got {x}"
                )))
            }
        };
        positive("d0", d0)?;
        positive("dl", dl)?;
        positive("v", v)?;
        if n_segments == 0 {
            return Err(Error::InvalidGeometry(
                "n_segments must be at least 1".into(),
            ));
        }
        Ok(Self {
            d0,
            dl,
            n_segments,
            v,
        })
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn dl(&self) -> f64 {
        self.dl
    }

    pub fn n_segments(&self) -> usize {
        self.n_segments
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn half_length(&self) -> f64 {
        self.dl / 2.0
    }

    /// Time to traverse the half-cell.
    pub fn half_cell_time(&self) -> f64 {
        self.dl / (2.0 * self.v)
    }

    pub fn with_velocity(&self, v: f64) -> Result<Self> {
        Self::new(self.d0, self.dl, self.n_segments, v)
    }

    pub fn with_segments(&self, n_segments: usize) -> Result<Self> {
        Self::new(self.d0, self.dl, n_segments, self.v)
    }

    pub fn with_dl(&self, dl: f64) -> Result<Self> {
        Self::new(self.d0, dl, self.n_segments, self.v)
    }

    /// BS-to-train distance for a train at track coordinate `x`.
    pub fn distance_at_position(&self, x: f64) -> f64 {
        self.d0.hypot(self.half_length() - x)
    }
}

/// Angular width of one beam: the half-cell angle split evenly over `N` beams.
pub fn beam_angle(geometry: &NetworkGeometry) -> Radians {
    Radians((geometry.dl / (2.0 * geometry.d0)).atan() / geometry.n_segments as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentPlan {
    widths: Vec<f64>,
    midpoint_distances: Vec<f64>,
    dwell_times: Vec<f64>,
    beam_angle: Radians,
}

impl SegmentPlan {
    /// Builds the plan for an explicit beam angle.
    ///
    /// `N·θ` must stay below a right angle; otherwise the outermost beam would
    /// never intersect the track.
    pub fn with_angle(geometry: &NetworkGeometry, theta: Radians) -> Result<Self> {
        let n = geometry.n_segments;
        let span = n as f64 * theta.0;
        if !(theta.0 > 0.0 && span < FRAC_PI_2) {
            return Err(Error::InvalidGeometry(format!(
                "N*theta = {span} rad must lie in (0, pi/2)"
            )));
        }

        let widths: Vec<f64> = (1..=n)
            .map(|i| {
                let outer = ((n + 1 - i) as f64 * theta.0).tan();
                let inner = ((n - i) as f64 * theta.0).tan();
                geometry.d0 * (outer - inner)
            })
            .collect();

        let half = geometry.half_length();
        let mut covered = 0.0;
        let midpoint_distances = widths
            .iter()
            .map(|&w| {
                let along = half - covered - w / 2.0;
                covered += w;
                along.hypot(geometry.d0)
            })
            .collect();

        let dwell_times = widths.iter().map(|&w| w / geometry.v).collect();

        Ok(Self {
            widths,
            midpoint_distances,
            dwell_times,
            beam_angle: theta,
        })
    }

    /// Plan with arbitrary per-segment widths and midpoint distances.
    ///
    /// Used for synthetic studies. Only positivity and matching lengths are
    /// checked; the ordering invariants of a geometric plan need not hold.
    pub fn custom(widths: Vec<f64>, midpoint_distances: Vec<f64>, v: f64) -> Result<Self> {
        if widths.is_empty() {
            return Err(Error::InvalidGeometry(
                "a plan needs at least one segment".into(),
            ));
        }
        if widths.len() != midpoint_distances.len() {
            return Err(Error::LengthMismatch {
                expected: widths.len(),
                got: midpoint_distances.len(),
            });
        }
        if !(v > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "v must be positive, got {v}"
            )));
        }
        if widths
            .iter()
            .chain(&midpoint_distances)
            .any(|&x| !(x > 0.0 && x.is_finite()))
        {
            return Err(Error::InvalidGeometry(
                "widths and midpoint distances must be positive".into(),
            ));
        }
        let dwell_times = widths.iter().map(|&w| w / v).collect();
        Ok(Self {
            widths,
            midpoint_distances,
            dwell_times,
            beam_angle: Radians(f64::NAN),
        })
    }

    pub fn len(&self) -> usize {
        self.widths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.widths.is_empty()
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn midpoint_distances(&self) -> &[f64] {
        &self.midpoint_distances
    }

    pub fn dwell_times(&self) -> &[f64] {
        &self.dwell_times
    }

    /// NaN for plans built with [`SegmentPlan::custom`].
    pub fn beam_angle(&self) -> Radians {
        self.beam_angle
    }

    /// Planned beam-switch instants `0 = t_0 < t_1 < ... < t_N`.
    pub fn switch_times(&self) -> Vec<f64> {
        let mut t = Vec::with_capacity(self.len() + 1);
        let mut acc = 0.0;
        t.push(acc);
        for &a in &self.dwell_times {
            acc += a;
            t.push(acc);
        }
        t
    }
}

pub fn segment_plan(geometry: &NetworkGeometry) -> Result<SegmentPlan> {
    SegmentPlan::with_angle(geometry, beam_angle(geometry))
}

/// Linear position prediction from the last feedback `(x0, t0)`.
pub fn position_at(v: f64, t: f64, x0: f64, t0: f64) -> f64 {
    v * (t - t0) + x0
}

/// BS-to-train distance `t` seconds after the train enters the half-cell at
/// the cell edge.
pub fn distance_at_time(geometry: &NetworkGeometry, t: f64) -> f64 {
    geometry.distance_at_position(position_at(geometry.v, t, 0.0, 0.0))
}
