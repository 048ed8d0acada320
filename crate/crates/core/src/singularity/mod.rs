//! Analysis of one map near an isolated singularity at the origin.

mod julia;
mod principle;
mod winding;
mod witness;

pub use julia::{
    circle_sup, halfdisk_lipschitz_trace, ANGLE_SAMPLES, julia_indicator, GrowthConfig, HalfdiskEntry, HalfdiskTrace, JuliaEntry,
    JuliaProfile, JuliaVerdict,
};
pub use principle::{
    converse_spread, log_derivative_variation, punctured_rescaling, rescaling_principle, AnnulusConfig, Branch,
    Principle, PrincipleConfig,
};
pub use winding::{annulus_separation_check, annulus_separation_check_samples, winding_number};
pub use witness::{lv_witness, LVWitness, LvConfig, LvOutcome, WitnessPath};
