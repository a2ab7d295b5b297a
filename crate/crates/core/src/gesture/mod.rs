//! Gaze gesture templates: normalization, training, recognition and
//! evaluation.
//!
//! Paths are resampled to `n` points joined by equal straight chords, moved
//! so their centroid sits at the origin and scaled uniformly so the longer
//! side of the bounding box is 1. Rotation is left alone: a gaze gesture's
//! direction carries its meaning. Recognition picks the template with the
//! smallest mean pointwise distance.

mod bundled;
mod capture;
mod eval;
mod store;

pub use bundled::{bundled_shapes, bundled_store, BundledShape};
pub use capture::GestureCapture;
pub use eval::{evaluate, Evaluation};
pub use store::{parse_store, write_store, StoreParseError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point;
use crate::gaze::{detect_fixations, GazeSample, ScanPath};

pub const DEFAULT_RESAMPLE_POINTS: usize = 64;
pub const DEFAULT_REJECT_THRESHOLD: f64 = 0.75;
/// Half the diagonal of the unit canonical frame.
pub const HALF_DIAGONAL: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GestureError {
    #[error("path is degenerate (fewer than two distinct points)")]
    DegeneratePath,
    #[error("resample count must be at least 2, got {0}")]
    InvalidPointCount(usize),
    #[error("a template named {0:?} already exists")]
    DuplicateName(String),
    #[error("training needs at least one sample path")]
    NoSamples,
    #[error("invalid identifier {0:?}: must be non-empty without whitespace")]
    InvalidIdentifier(String),
    #[error("template {name:?} has {got} points, store expects {expected}")]
    PointCountMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("labeled set is empty")]
    EmptyLabeledSet,
    #[error("trigger protocol violation: {0}")]
    TriggerProtocol(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathSource {
    FixationCentroids,
    RawSamples,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GesturePath {
    pub points: Vec<Point>,
    pub source: PathSource,
}

impl GesturePath {
    pub fn new(points: Vec<Point>, source: PathSource) -> Self {
        Self { points, source }
    }

    pub fn from_points(points: Vec<Point>) -> Self {
        Self::new(points, PathSource::RawSamples)
    }

    pub fn from_scanpath(scanpath: &ScanPath) -> Self {
        Self::new(scanpath.centroids(), PathSource::FixationCentroids)
    }

    /// Builds a path from raw gaze, either directly or through fixations.
    pub fn from_samples(
        samples: &[GazeSample],
        source: PathSource,
        dispersion_px: f64,
        min_fixation_ms: u64,
    ) -> Self {
        let points = match source {
            PathSource::RawSamples => samples.iter().filter(|s| s.valid).map(GazeSample::point).collect(),
            PathSource::FixationCentroids => detect_fixations(samples, dispersion_px, min_fixation_ms)
                .iter()
                .map(|f| f.centroid())
                .collect(),
        };
        Self::new(points, source)
    }
}

fn path_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

/// Position reached by walking along a polyline in equal chords.
#[derive(Clone, Copy)]
struct Cursor {
    seg: usize,
    t: f64,
    at: Point,
}

const VERTEX_SNAP: f64 = 1e-12;

/// The first point after `from` along the polyline whose straight-line
/// distance from `from.at` is exactly `chord`, if the path gets that far.
fn next_chord_point(points: &[Point], from: Cursor, chord: f64) -> Option<Cursor> {
    let q = from.at;
    for seg in from.seg..points.len() - 1 {
        let a = points[seg];
        let b = points[seg + 1];
        let (vx, vy) = (b.x - a.x, b.y - a.y);
        let vv = vx * vx + vy * vy;
        if vv == 0.0 {
            continue;
        }
        // |a + t v - q| = chord; the walk is inside the circle, so the exit
        // is the larger root
        let (wx, wy) = (a.x - q.x, a.y - q.y);
        let wv = wx * vx + wy * vy;
        let c = wx * wx + wy * wy - chord * chord;
        let disc = (wv * wv - vv * c).max(0.0);
        let t = (-wv + disc.sqrt()) / vv;
        let t_min = if seg == from.seg { from.t } else { 0.0 };
        if t >= t_min && t <= 1.0 + VERTEX_SNAP {
            if t >= 1.0 - VERTEX_SNAP {
                // landing on a vertex; rounding must not carry the walk past an
                // acute corner
                return Some(Cursor { seg, t: 1.0, at: b });
            }
            return Some(Cursor {
                seg,
                t,
                at: Point::new(a.x + vx * t, a.y + vy * t),
            });
        }
    }
    None
}

/// Walks `steps` equal chords from the start; `None` if the path runs out.
fn chord_walk(points: &[Point], chord: f64, steps: usize, out: Option<&mut Vec<Point>>) -> bool {
    let mut cursor = Cursor {
        seg: 0,
        t: 0.0,
        at: points[0],
    };
    let mut out = out;
    for _ in 0..steps {
        match next_chord_point(points, cursor, chord) {
            Some(next) => {
                cursor = next;
                if let Some(o) = out.as_deref_mut() {
                    o.push(next.at);
                }
            }
            None => return false,
        }
    }
    true
}

/// Resamples `points` to `n` points spaced by equal straight-line steps
/// along the polyline, from its first to its last point.
///
/// On straight runs this is plain arc-length resampling. Unlike arc-length
/// spacing it is a fixed point: resampling an already resampled path to the
/// same `n` returns it unchanged, corners included.
///
/// Chord length is found by bisection. The walk can jump forward where the
/// path doubles back at an acute angle, so the closing chord may differ
/// from the others.
fn resample(points: &[Point], n: usize) -> Vec<Point> {
    if is_resampled(points, n) {
        return points.to_vec();
    }
    let steps = n - 1;
    // each chord covers at least its own length of arc, so the arc-length
    // step always overshoots the end
    let mut lo = 0.0;
    let mut hi = path_length(points) / steps as f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chord_walk(points, mid, steps, None) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut out = Vec::with_capacity(n);
    out.push(points[0]);
    chord_walk(points, lo, steps - 1, Some(&mut out));
    out.push(*points.last().expect("non-empty"));
    out
}

/// Whether `points` already has the shape [`resample`] produces: `n`
/// points whose chords are all equal except possibly the closing one. Near
/// acute reversals no exactly equal spacing may exist and the closing chord
/// takes up the remainder.
fn is_resampled(points: &[Point], n: usize) -> bool {
    if points.len() != n || n < 3 {
        return false;
    }
    let first = points[0].distance(&points[1]);
    first > 0.0
        && points[1..n - 1]
            .windows(2)
            .all(|w| (w[0].distance(&w[1]) - first).abs() <= 1e-9 * first)
}

fn centroid(points: &[Point]) -> Point {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point::new(sx / n, sy / n)
}

/// Longer side of the bounding box.
fn bounding_side(points: &[Point]) -> f64 {
    let (mut min_x, mut max_x, mut min_y, mut max_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in points {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    (max_x - min_x).max(max_y - min_y)
}

/// Translates the centroid to the origin and scales the longer bounding
/// box side to 1.
fn canonical_frame(points: &[Point]) -> Vec<Point> {
    let c = centroid(points);
    let side = bounding_side(points);
    points
        .iter()
        .map(|p| Point::new((p.x - c.x) / side, (p.y - c.y) / side))
        .collect()
}

/// Arc-length resampling to `n` points followed by translation and scale
/// normalization.
pub fn normalize(points: &[Point], n: usize) -> Result<Vec<Point>, GestureError> {
    if n < 2 {
        return Err(GestureError::InvalidPointCount(n));
    }
    let Some(first) = points.first() else {
        return Err(GestureError::DegeneratePath);
    };
    if points.iter().all(|p| p == first) {
        return Err(GestureError::DegeneratePath);
    }
    Ok(canonical_frame(&resample(points, n)))
}

/// Mean pointwise Euclidean distance between two equally long point lists.
pub fn path_distance(a: &[Point], b: &[Point]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let sum: f64 = a.iter().zip(b).map(|(p, q)| p.distance(q)).sum();
    sum / a.len() as f64
}

pub fn score_for_distance(distance: f64) -> f64 {
    (1.0 - distance / HALF_DIAGONAL).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureTemplate {
    pub name: String,
    pub action_id: String,
    pub normalized_points: Vec<Point>,
}

pub(crate) fn check_identifier(s: &str) -> Result<(), GestureError> {
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        return Err(GestureError::InvalidIdentifier(s.to_string()));
    }
    Ok(())
}

/// Builds a template from one or more example paths: each example is
/// normalized, the results averaged point by point and the mean moved back
/// into the canonical frame. The mean is not resampled again; resampling a
/// cornered polyline a second time shifts its points.
pub fn train_template(
    name: &str,
    sample_paths: &[GesturePath],
    action_id: &str,
    n: usize,
) -> Result<GestureTemplate, GestureError> {
    check_identifier(name)?;
    check_identifier(action_id)?;
    if sample_paths.is_empty() {
        return Err(GestureError::NoSamples);
    }
    let normalized = sample_paths
        .iter()
        .map(|p| normalize(&p.points, n))
        .collect::<Result<Vec<_>, _>>()?;
    let count = normalized.len() as f64;
    let mean: Vec<Point> = (0..n)
        .map(|i| {
            let (sx, sy) = normalized
                .iter()
                .fold((0.0, 0.0), |(sx, sy), pts| (sx + pts[i].x, sy + pts[i].y));
            Point::new(sx / count, sy / count)
        })
        .collect();
    // opposing samples can average out to (numerically) a single point
    if bounding_side(&mean) < 1e-9 {
        return Err(GestureError::DegeneratePath);
    }
    Ok(GestureTemplate {
        name: name.to_string(),
        action_id: action_id.to_string(),
        normalized_points: canonical_frame(&mean),
    })
}

/// Templates in training order, with the settings recognition uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateStore {
    n: usize,
    reject_threshold: f64,
    templates: Vec<GestureTemplate>,
}

impl TemplateStore {
    pub fn new(n: usize, reject_threshold: f64) -> Result<Self, GestureError> {
        if n < 2 {
            return Err(GestureError::InvalidPointCount(n));
        }
        Ok(Self {
            n,
            reject_threshold,
            templates: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn reject_threshold(&self) -> f64 {
        self.reject_threshold
    }

    pub fn set_reject_threshold(&mut self, threshold: f64) {
        self.reject_threshold = threshold;
    }

    pub fn templates(&self) -> &[GestureTemplate] {
        &self.templates
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn get(&self, name: &str) -> Option<&GestureTemplate> {
        self.templates.iter().find(|t| t.name == name)
    }

    pub fn insert(&mut self, template: GestureTemplate) -> Result<(), GestureError> {
        if self.get(&template.name).is_some() {
            return Err(GestureError::DuplicateName(template.name));
        }
        if template.normalized_points.len() != self.n {
            return Err(GestureError::PointCountMismatch {
                name: template.name,
                expected: self.n,
                got: template.normalized_points.len(),
            });
        }
        self.templates.push(template);
        Ok(())
    }

    /// Trains a template with this store's resample count and adds it.
    pub fn train(&mut self, name: &str, sample_paths: &[GesturePath], action_id: &str) -> Result<&GestureTemplate, GestureError> {
        if self.get(name).is_some() {
            return Err(GestureError::DuplicateName(name.to_string()));
        }
        let template = train_template(name, sample_paths, action_id, self.n)?;
        self.templates.push(template);
        Ok(self.templates.last().expect("just pushed"))
    }

    pub fn recognize(&self, path: &GesturePath) -> Result<Recognition, GestureError> {
        recognize(path, &self.templates, self.n, self.reject_threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionResult {
    pub template_name: String,
    pub action_id: String,
    pub score: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Recognition {
    Match(RecognitionResult),
    /// Empty store, or the best candidate scored below the threshold.
    NoMatch { best: Option<RecognitionResult> },
}

impl Recognition {
    pub fn matched(&self) -> Option<&RecognitionResult> {
        match self {
            Recognition::Match(r) => Some(r),
            Recognition::NoMatch { .. } => None,
        }
    }
}

/// Template matching against `templates`; ties go to the earliest template.
pub fn recognize(
    path: &GesturePath,
    templates: &[GestureTemplate],
    n: usize,
    reject_threshold: f64,
) -> Result<Recognition, GestureError> {
    let input = normalize(&path.points, n)?;
    let mut best: Option<(&GestureTemplate, f64)> = None;
    for t in templates {
        if t.normalized_points.len() != input.len() {
            return Err(GestureError::PointCountMismatch {
                name: t.name.clone(),
                expected: input.len(),
                got: t.normalized_points.len(),
            });
        }
        let d = path_distance(&input, &t.normalized_points);
        if best.map_or(true, |(_, bd)| d < bd) {
            best = Some((t, d));
        }
    }
    let Some((t, distance)) = best else {
        return Ok(Recognition::NoMatch { best: None });
    };
    let result = RecognitionResult {
        template_name: t.name.clone(),
        action_id: t.action_id.clone(),
        score: score_for_distance(distance),
        distance,
    };
    if result.score < reject_threshold {
        Ok(Recognition::NoMatch { best: Some(result) })
    } else {
        Ok(Recognition::Match(result))
    }
}
