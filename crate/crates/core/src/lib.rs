//! Non-neural building blocks for joint foreground, background and alpha
//! matting: compositing, training losses, prediction fusion, closed-form
//! foreground/background extension, trimap tooling, augmentation,
//! test-time-augmentation merging and matte metrics.

pub mod augment;
pub mod error;
pub mod fgbg_solver;
pub mod filter;
pub mod fusion;
pub mod io;
pub mod losses;
pub mod maps;
pub mod metrics;
pub mod pyramid;
pub mod trimap;

pub use error::{Error, Result};
pub use losses::EvalMask;
pub use maps::{clamp_unit, composite, premultiply, ClampUnit, ColorMap, PixelMap, PredictionSet};
pub use trimap::{Label, Trimap};
