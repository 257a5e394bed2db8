//! Monte-Carlo experiment runners.

mod crossover;
mod ebh;
mod fig2;
mod sharpness;

pub use crossover::{crossover_half_widths, crossover_threshold};
pub use ebh::{run_ebh_reduction, EbhReductionConfig, EbhReductionResult};
pub use fig2::{
    fig2_sample_means, gen_fig2_data, run_fig2, Fig2Config, Fig2Row, PValueMode, Setting,
};
pub use sharpness::{
    hitting_prob, run_sharpness, selection_probability, SharpnessConfig, SharpnessMode,
};
