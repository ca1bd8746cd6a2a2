pub mod attitude_math;
pub mod baseline_smc;
pub mod cli;
pub mod dynamics;
pub mod simharness;
pub mod ufsmc;
