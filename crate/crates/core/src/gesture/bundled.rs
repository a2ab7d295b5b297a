use crate::geom::Point;

use super::{GesturePath, TemplateStore, DEFAULT_REJECT_THRESHOLD, DEFAULT_RESAMPLE_POINTS};

/// A built-in gesture: polyline vertices in a unit box (y grows downward)
/// and the action it triggers.
#[derive(Debug, Clone, Copy)]
pub struct BundledShape {
    pub name: &'static str,
    pub action_id: &'static str,
    pub vertices: &'static [(f64, f64)],
}

impl BundledShape {
    pub fn path(&self) -> GesturePath {
        GesturePath::from_points(self.vertices.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }
}

const SHAPES: [BundledShape; 8] = [
    BundledShape {
        name: "swipe-right",
        action_id: "browser.new_tab",
        vertices: &[(0.0, 0.0), (1.0, 0.0)],
    },
    BundledShape {
        name: "swipe-left",
        action_id: "browser.refresh",
        vertices: &[(1.0, 0.0), (0.0, 0.0)],
    },
    BundledShape {
        name: "swipe-up",
        action_id: "window.maximize",
        vertices: &[(0.0, 1.0), (0.0, 0.0)],
    },
    BundledShape {
        name: "swipe-down",
        action_id: "window.minimize",
        vertices: &[(0.0, 0.0), (0.0, 1.0)],
    },
    BundledShape {
        name: "ell",
        action_id: "window.restore",
        vertices: &[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)],
    },
    BundledShape {
        name: "vee",
        action_id: "browser.scroll_down",
        vertices: &[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)],
    },
    BundledShape {
        name: "zed",
        action_id: "window.close",
        vertices: &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)],
    },
    BundledShape {
        name: "square",
        action_id: "browser.scroll_up",
        vertices: &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0)],
    },
];

pub fn bundled_shapes() -> &'static [BundledShape] {
    &SHAPES
}

/// The eight built-in templates at the default resample count and
/// rejection threshold.
pub fn bundled_store() -> TemplateStore {
    let mut store = TemplateStore::new(DEFAULT_RESAMPLE_POINTS, DEFAULT_REJECT_THRESHOLD).expect("valid defaults");
    for shape in &SHAPES {
        store
            .train(shape.name, &[shape.path()], shape.action_id)
            .expect("bundled shapes are valid and uniquely named");
    }
    store
}
