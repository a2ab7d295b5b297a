pub mod arbiter;
pub mod event;
pub mod gaze;
pub mod geom;
pub mod gesture;
pub mod rng;
pub mod auth;
pub mod typing;
pub mod replay;
pub mod synth;
