use crate::event::{InputEvent, TriggerKind};
use crate::gaze::{GazeSample, DEFAULT_DISPERSION_PX, DEFAULT_MIN_FIXATION_MS};

use super::{GestureError, GesturePath, PathSource};

/// Trigger-delimited gesture capture: gaze recorded between a press and its
/// release forms one gesture.
#[derive(Debug, Clone)]
pub struct GestureCapture {
    source: PathSource,
    dispersion_px: f64,
    min_fixation_ms: u64,
    buffer: Vec<GazeSample>,
    capturing: bool,
}

impl GestureCapture {
    pub fn new(source: PathSource) -> Self {
        Self::with_fixation_params(source, DEFAULT_DISPERSION_PX, DEFAULT_MIN_FIXATION_MS)
    }

    pub fn with_fixation_params(source: PathSource, dispersion_px: f64, min_fixation_ms: u64) -> Self {
        Self {
            source,
            dispersion_px,
            min_fixation_ms,
            buffer: Vec::new(),
            capturing: false,
        }
    }

    pub fn is_capturing(&self) -> bool {
        self.capturing
    }

    /// Returns the finished path when `event` is the closing release.
    pub fn step(&mut self, event: InputEvent) -> Result<Option<GesturePath>, GestureError> {
        match event {
            InputEvent::Gaze(s) => {
                if self.capturing {
                    self.buffer.push(s);
                }
                Ok(None)
            }
            InputEvent::Trigger(t) => match (t.kind, self.capturing) {
                (TriggerKind::Press, false) => {
                    self.capturing = true;
                    self.buffer.clear();
                    Ok(None)
                }
                (TriggerKind::Release, true) => {
                    self.capturing = false;
                    let samples = std::mem::take(&mut self.buffer);
                    Ok(Some(GesturePath::from_samples(
                        &samples,
                        self.source,
                        self.dispersion_px,
                        self.min_fixation_ms,
                    )))
                }
                (TriggerKind::Press, true) => Err(GestureError::TriggerProtocol("press while capturing")),
                (TriggerKind::Release, false) => Err(GestureError::TriggerProtocol("release without press")),
            },
        }
    }
}
