//! Row-wise partition analysis and the α–β cost model of a distributed
//! SpMV.

mod model;
mod partition;

pub use model::{
    calibrate_c, hierarchy_profile, hierarchy_profile_with, modeled_spmv_time, modeled_time, sends_per_iteration,
    write_profile_csv, LevelProfile, ModelParams, SizeUnit, PROFILE_CSV_HEADER,
};
pub use partition::{comm_stats, partition_rows, Message, PartitionStats, ProcessStats};
