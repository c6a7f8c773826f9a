//! The model family `T^h_alpha`, quasimode defects and localization checks.

mod defect;
mod localization;
mod talpha;

pub use defect::{defect, joint_defect, DefectReport};
pub use localization::{localization_check, LocalizationReport};
pub use talpha::{
    build_t_alpha, smoothstep, t_alpha_spectrum, Normalization, TAlphaSpec, MIN_SUPPORT_POINTS, T_ALPHA_HALF_WIDTH,
};
