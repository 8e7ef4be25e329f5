//! Piecewise power ramps, one list of contiguous segments per beam.

use serde::{Deserialize, Serialize};

use super::EvapError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Hold,
    Linear,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    /// s
    pub t_start: f64,
    /// s
    pub t_end: f64,
    pub kind: Interpolation,
    /// W
    pub p_start: f64,
    /// W; equals `p_start` for a hold.
    pub p_end: f64,
}

impl Segment {
    pub fn new(t_start: f64, t_end: f64, kind: Interpolation, p_start: f64, p_end: f64) -> Self {
        Self { t_start, t_end, kind, p_start, p_end }
    }

    pub fn hold(t_start: f64, t_end: f64, power: f64) -> Self {
        Self::new(t_start, t_end, Interpolation::Hold, power, power)
    }

    /// Power at `t`, clamped to the segment.
    pub fn power_at(&self, t: f64) -> f64 {
        let f = ((t - self.t_start) / (self.t_end - self.t_start)).clamp(0.0, 1.0);
        match self.kind {
            Interpolation::Hold => self.p_start,
            Interpolation::Linear => self.p_start + (self.p_end - self.p_start) * f,
            Interpolation::Exponential => self.p_start * (self.p_end / self.p_start).powf(f),
        }
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(format!("segment [{}, {}] must have t_end > t_start", self.t_start, self.t_end));
        }
        if !(self.p_start >= 0.0 && self.p_end >= 0.0 && self.p_start.is_finite() && self.p_end.is_finite()) {
            return Err("powers must be finite and non-negative".into());
        }
        match self.kind {
            Interpolation::Hold if self.p_end != self.p_start => Err("hold segment needs p_end = p_start".into()),
            Interpolation::Exponential if !(self.p_start > 0.0 && self.p_end > 0.0) => {
                Err("exponential segment needs positive end powers".into())
            }
            _ => Ok(()),
        }
    }
}

/// Adjacent segments may meet with this much slack, s.
const JOIN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSchedule {
    pub segments: Vec<Segment>,
}

impl BeamSchedule {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self { segments }
    }

    pub fn start(&self) -> f64 {
        self.segments.first().map_or(0.0, |s| s.t_start)
    }

    pub fn end(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t_end)
    }

    /// Power at `t`; the last segment wins at a shared boundary.
    pub fn power_at(&self, t: f64) -> f64 {
        let i = self.segments.partition_point(|s| s.t_start <= t).saturating_sub(1);
        self.segments[i].power_at(t)
    }
}

/// Powers of every beam over a common time span.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSchedule {
    pub beams: Vec<BeamSchedule>,
}

impl PowerSchedule {
    pub fn new(beams: Vec<BeamSchedule>) -> Self {
        Self { beams }
    }

    /// Constant powers over [0, duration].
    pub fn hold(powers: &[f64], duration: f64) -> Self {
        Self::new(powers.iter().map(|&p| BeamSchedule::new(vec![Segment::hold(0.0, duration, p)])).collect())
    }

    pub fn validate(&self, n_beams: usize) -> Result<(), EvapError> {
        let bad = |m: String| Err(EvapError::Schedule(m));
        if self.beams.len() != n_beams {
            return bad(format!("schedule has {} beams, trap has {n_beams}", self.beams.len()));
        }
        for (b, beam) in self.beams.iter().enumerate() {
            if beam.segments.is_empty() {
                return bad(format!("beam {b} has no segments"));
            }
            for (i, seg) in beam.segments.iter().enumerate() {
                seg.validate().or_else(|m| bad(format!("beam {b} segment {i}: {m}")))?;
            }
            for (i, pair) in beam.segments.windows(2).enumerate() {
                if (pair[1].t_start - pair[0].t_end).abs() > JOIN_SLACK {
                    return bad(format!(
                        "beam {b}: segment {} ends at {} but segment {} starts at {}",
                        i,
                        pair[0].t_end,
                        i + 1,
                        pair[1].t_start
                    ));
                }
            }
        }
        let (t0, t1) = (self.beams[0].start(), self.beams[0].end());
        if self.beams.iter().any(|b| (b.start() - t0).abs() > JOIN_SLACK || (b.end() - t1).abs() > JOIN_SLACK) {
            return bad("all beams must cover the same time span".into());
        }
        Ok(())
    }

    pub fn start(&self) -> f64 {
        self.beams.first().map_or(0.0, BeamSchedule::start)
    }

    pub fn end(&self) -> f64 {
        self.beams.first().map_or(0.0, BeamSchedule::end)
    }

    pub fn powers_at(&self, t: f64) -> Vec<f64> {
        self.beams.iter().map(|b| b.power_at(t)).collect()
    }

    /// Every segment boundary, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut times: Vec<f64> =
            self.beams.iter().flat_map(|b| b.segments.iter().flat_map(|s| [s.t_start, s.t_end])).collect();
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() <= JOIN_SLACK);
        times
    }

    /// Sorted union of the breakpoints and a uniform grid no coarser than `spacing`.
    pub fn grid(&self, spacing: f64) -> Vec<f64> {
        let mut times = Vec::new();
        let marks = self.breakpoints();
        for pair in marks.windows(2) {
            let n = ((pair[1] - pair[0]) / spacing).ceil().max(1.0) as usize;
            times.extend((0..n).map(|i| pair[0] + (pair[1] - pair[0]) * i as f64 / n as f64));
        }
        times.push(*marks.last().unwrap_or(&0.0));
        times
    }
}
