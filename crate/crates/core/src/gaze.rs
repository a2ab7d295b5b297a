//! Gaze samples, dispersion-threshold fixation detection and scan-paths.
//!
//! A fixation is a maximal run of consecutive valid samples whose bounding
//! box dispersion `(max x - min x) + (max y - min y)` stays within the
//! threshold and whose duration reaches the minimum. Windows are grown
//! greedily left to right and never share samples. Invalid (tracking loss)
//! samples terminate any open window.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point, Screen};

pub const DEFAULT_DISPERSION_PX: f64 = 40.0;
pub const DEFAULT_MIN_FIXATION_MS: u64 = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GazeError {
    #[error("non-monotonic timestamp: {t_ms} ms after {last_ms} ms")]
    NonMonotonicTimestamp { last_ms: u64, t_ms: u64 },
    #[error("fixations overlap: one ends at {end_ms} ms, next starts at {next_start_ms} ms")]
    OverlappingFixations { end_ms: u64, next_start_ms: u64 },
    #[error("calibration scale must be positive, got {0}")]
    InvalidScale(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub t_ms: u64,
    pub x: f64,
    pub y: f64,
    pub valid: bool,
}

impl GazeSample {
    pub const fn new(t_ms: u64, x: f64, y: f64) -> Self {
        Self {
            t_ms,
            x,
            y,
            valid: true,
        }
    }

    /// A tracking-loss sample. Coordinates are zeroed.
    pub const fn lost(t_ms: u64) -> Self {
        Self {
            t_ms,
            x: 0.0,
            y: 0.0,
            valid: false,
        }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// An append-only sample stream with strictly increasing timestamps.
#[derive(Debug, Clone, Default)]
pub struct GazeStream {
    samples: Vec<GazeSample>,
}

impl GazeStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `sample`, rejecting it if its timestamp does not advance.
    pub fn ingest(&mut self, sample: GazeSample) -> Result<(), GazeError> {
        if let Some(last) = self.samples.last() {
            if sample.t_ms <= last.t_ms {
                return Err(GazeError::NonMonotonicTimestamp {
                    last_ms: last.t_ms,
                    t_ms: sample.t_ms,
                });
            }
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&GazeSample> {
        self.samples.last()
    }

    pub fn samples(&self) -> &[GazeSample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<GazeSample> {
        self.samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fixation {
    pub cx: f64,
    pub cy: f64,
    pub start_ms: u64,
    pub end_ms: u64,
    pub sample_count: usize,
}

impl Fixation {
    pub fn centroid(&self) -> Point {
        Point::new(self.cx, self.cy)
    }

    pub fn duration_ms(&self) -> u64 {
        self.end_ms - self.start_ms
    }
}

#[derive(Debug, Clone, Copy)]
struct BoundingBox {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl BoundingBox {
    fn of(s: &GazeSample) -> Self {
        Self {
            min_x: s.x,
            max_x: s.x,
            min_y: s.y,
            max_y: s.y,
        }
    }

    fn extended(&self, s: &GazeSample) -> Self {
        Self {
            min_x: self.min_x.min(s.x),
            max_x: self.max_x.max(s.x),
            min_y: self.min_y.min(s.y),
            max_y: self.max_y.max(s.y),
        }
    }

    fn dispersion(&self) -> f64 {
        (self.max_x - self.min_x) + (self.max_y - self.min_y)
    }
}

/// Dispersion-threshold fixation identification over `samples`.
///
/// `samples` must be time-ordered. Returns fixations in time order.
pub fn detect_fixations(
    samples: &[GazeSample],
    dispersion_px: f64,
    min_duration_ms: u64,
) -> Vec<Fixation> {
    let mut fixations = Vec::new();
    let n = samples.len();
    let mut start = 0;
    while start < n {
        if !samples[start].valid {
            start += 1;
            continue;
        }
        let mut bbox = BoundingBox::of(&samples[start]);
        let mut end = start;
        while end + 1 < n && samples[end + 1].valid {
            let grown = bbox.extended(&samples[end + 1]);
            if grown.dispersion() > dispersion_px {
                break;
            }
            bbox = grown;
            end += 1;
        }
        let duration = samples[end].t_ms - samples[start].t_ms;
        if duration >= min_duration_ms {
            fixations.push(centroid_of(&samples[start..=end]));
            start = end + 1;
        } else {
            start += 1;
        }
    }
    fixations
}

fn centroid_of(window: &[GazeSample]) -> Fixation {
    let (sx, sy) = window
        .iter()
        .fold((0.0, 0.0), |(sx, sy), s| (sx + s.x, sy + s.y));
    let count = window.len();
    Fixation {
        cx: sx / count as f64,
        cy: sy / count as f64,
        start_ms: window[0].t_ms,
        end_ms: window[count - 1].t_ms,
        sample_count: count,
    }
}

/// Ordered fixations joined by saccades.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScanPath {
    pub fixations: Vec<Fixation>,
    pub total_saccade_length: f64,
}

impl ScanPath {
    pub fn centroids(&self) -> Vec<Point> {
        self.fixations.iter().map(Fixation::centroid).collect()
    }
}

pub fn build_scanpath(fixations: Vec<Fixation>) -> Result<ScanPath, GazeError> {
    for pair in fixations.windows(2) {
        if pair[0].end_ms > pair[1].start_ms {
            return Err(GazeError::OverlappingFixations {
                end_ms: pair[0].end_ms,
                next_start_ms: pair[1].start_ms,
            });
        }
    }
    let total_saccade_length = fixations
        .windows(2)
        .map(|pair| pair[0].centroid().distance(&pair[1].centroid()))
        .sum();
    Ok(ScanPath {
        fixations,
        total_saccade_length,
    })
}

/// Systematic calibration error: a constant offset plus a uniform scale
/// about the screen center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationDisturbance {
    dx: f64,
    dy: f64,
    scale: f64,
}

impl CalibrationDisturbance {
    pub const IDENTITY: Self = Self {
        dx: 0.0,
        dy: 0.0,
        scale: 1.0,
    };

    pub fn new(dx: f64, dy: f64, scale: f64) -> Result<Self, GazeError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(GazeError::InvalidScale(scale));
        }
        Ok(Self { dx, dy, scale })
    }

    pub const fn offset(dx: f64, dy: f64) -> Self {
        Self { dx, dy, scale: 1.0 }
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn map(&self, p: Point, center: Point) -> Point {
        if self.scale == 1.0 {
            // (x - c) + c is not exact in floating point
            Point::new(p.x + self.dx, p.y + self.dy)
        } else {
            Point::new(
                (p.x - center.x) * self.scale + center.x + self.dx,
                (p.y - center.y) * self.scale + center.y + self.dy,
            )
        }
    }
}

impl Default for CalibrationDisturbance {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Maps every valid sample through `d`; timestamps and validity are kept.
pub fn apply_disturbance(
    samples: &[GazeSample],
    d: &CalibrationDisturbance,
    screen: Screen,
) -> Vec<GazeSample> {
    let center = screen.center();
    samples
        .iter()
        .map(|s| {
            if !s.valid {
                return *s;
            }
            let p = d.map(s.point(), center);
            GazeSample { x: p.x, y: p.y, ..*s }
        })
        .collect()
}
