//! Graph moves: splittings, delays and the constructions derived from them.

pub mod delay;
pub mod derived;
pub mod partition;
pub mod split;

pub use delay::{
    delay_identities, in_delay, in_delay_detailed, out_delay, out_delay_detailed, validate_range_vector,
    validate_source_vector, BundleDelays, Delay, DelayClass, DelayReport, DelayVector, Delayed, DrinenRangeVector,
    DrinenSourceVector, Enumeration, TruncationSpec,
};
pub use derived::{
    desingularize, desingularizing_vector, drinen_from_in_split, dual_graph, locally_finite_vector,
    make_locally_finite, maximal_out_split, singleton_out_partition,
};
pub use partition::{
    validate_in_partition, validate_out_partition, Cell, InPartition, InSide, OutPartition, OutSide, Partition,
    PartitionReport, PartitionSide, Share, Side,
};
pub use split::{in_split, in_split_identities, out_split, out_split_identities, IdentityCheck};
