//! Hierarchical clustering entropy: selects informative cuts of a
//! dendrogram and renormalizes it into a multiscale sequence of partitions.
//!
//! The crate also provides the pieces needed around that core: distance
//! construction for graphs, time series and point clouds, average-linkage
//! clustering, partition comparison, planted-hierarchy benchmark
//! generators, conversion of consensus-clustering trees and time-series
//! null models.

pub mod benchgen;
pub mod distance;
pub mod error;
pub mod hce;
pub mod linkage;
pub mod mcc;
pub mod metrics;
pub mod partition;
pub mod seed;
pub mod signal;
pub mod upgma;

pub use benchgen::{
    hb_sample, hnrg_critical_degree, hnrg_expected_degree, hnrg_probabilities, hnrg_sample,
    instance_seed, HbConfig, HnrgConfig, HnrgLevels, PlantedNetwork,
};
pub use distance::{
    correlation_distances, euclidean_distances, graph_cosine_distances, graph_cosine_distances_with,
    graph_dot, pearson, CondensedDistances, WeightedGraph, ZeroNorm,
};
pub use error::{
    BenchError, DistanceError, Error, HceError, LinkageError, MccError, MetricsError,
    PartitionError, Result, SignalError, UpgmaError,
};
pub use hce::{
    effective_fractions, extract_hierarchy, extract_hierarchy_with, hce_profile, hce_value,
    select_level, HceProfile, HceRecord, HierarchyLevel, HierarchyResult, Selection,
    StoppingReason,
};
pub use linkage::{cut_at_k, trim_to_supernodes, validate_linkage, Linkage, MergeRecord, RawMerge, Trimmed};
pub use mcc::{complete_tree, consensus_to_linkage, tree_to_linkage, CompletedTree, ConsensusTree, TreeEdge};
pub use metrics::{
    ami, ami_report, entropy, expected_mi, jaccard_assign, mutual_information, AmiReport,
    ContingencyTable, RegionAssignment,
};
pub use partition::{community_sizes, Partition};
pub use signal::{
    circular_shift_null, filter_communities_by_nct, filter_rois, nct_estimate, skewness,
    NctEstimate, RoiFilter, SizeEnsemble, TimeSeriesMatrix,
};
pub use upgma::{upgma_linkage, upgma_linkage_in_place, upgma_naive_oracle, UpgmaStats};
