use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("label {label} at node {node} is not canonical")]
    NotCanonical { node: usize, label: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// Dendrogram validation and manipulation failures. Row indices are 0-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkageError {
    #[error("expected {expected} merge rows for {n_leaves} leaves, found {found}")]
    WrongRowCount {
        n_leaves: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: node id {id} out of range (must be < {limit})")]
    IdOutOfRange { row: usize, id: usize, limit: usize },
    #[error("row {row}: node id {id} already merged")]
    ChildReused { row: usize, id: usize },
    #[error("row {row}: distance {distance} is smaller than the previous merge distance {previous}")]
    NonMonotoneDistances {
        row: usize,
        distance: f64,
        previous: f64,
    },
    #[error("row {row}: distance {distance} is negative or not finite")]
    InvalidDistance { row: usize, distance: f64 },
    #[error("row {row}: recorded size {found} but children sum to {expected}")]
    SizeMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("a linkage needs at least one leaf")]
    NoLeaves,
    #[error("k = {k} outside the valid range {min}..={max}")]
    KOutOfRange { k: usize, min: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HceError {
    #[error("community sizes sum to {sum}, expected N = {n}")]
    SizesDoNotSumToN { sum: usize, n: usize },
    #[error("HCE needs N >= 2, got {0}")]
    NTooSmall(usize),
    #[error(transparent)]
    Linkage(#[from] LinkageError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistanceError {
    #[error("node id {id} out of range for a graph of {n} nodes")]
    IdOutOfRange { id: usize, n: usize },
    #[error("node {0} has zero norm (no incident weight)")]
    ZeroNormNode(usize),
    #[error("row {0} has zero variance")]
    ConstantRow(usize),
    #[error("weight {weight} on ({i}, {j}) is negative or not finite")]
    InvalidWeight { i: usize, j: usize, weight: f64 },
    #[error("asymmetric weights on ({i}, {j}): {forward} vs {backward}")]
    Asymmetric {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("ragged input: row {row} has {found} columns, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("condensed array of length {len} does not match any n")]
    BadCondensedLength { len: usize },
    #[error("distance {value} at condensed index {index} is negative or not finite")]
    InvalidDistance { index: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UpgmaError {
    #[error("clustering needs at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("non-finite distance at condensed index {0}")]
    NonFiniteDistance(usize),
    #[error("naive oracle limited to n <= {limit}, got {n}")]
    TooLargeForOracle { n: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("p_{level} = {probability} exceeds 1; mean degree must be <= {max_mean_degree}")]
    ProbabilityExceedsOne {
        level: usize,
        probability: f64,
        max_mean_degree: f64,
    },
    #[error("level {level} outside 1..{depth}")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("edge fractions sum to {0}, expected 1")]
    ProbabilitiesDontSumToOne(f64),
    #[error("level {level} needs {needed} edges but only {available} eligible pairs exist")]
    InfeasibleBudget {
        level: usize,
        needed: usize,
        available: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("partitions have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("community is empty")]
    EmptyCommunity,
    #[error("no regions given")]
    NoRegions,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MccError {
    #[error("node {node} belongs to community {community}, which is not in the tree")]
    OrphanNode { node: usize, community: u64 },
    #[error("community {0} is part of a cycle or has several parents")]
    CyclicTree(u64),
    #[error("tree has {0} roots, expected exactly one")]
    RootCount(usize),
    #[error("community {0} has no member nodes")]
    EmptyCommunity(u64),
    #[error("similarity {similarity} on edge {parent} -> {child} is outside (0, 1]")]
    InvalidSimilarity {
        parent: u64,
        child: u64,
        similarity: f64,
    },
    #[error("similarity increases toward the root at edge {parent} -> {child}")]
    NonMonotoneSimilarity { parent: u64, child: u64 },
    #[error("empty membership vector")]
    NoNodes,
    #[error(transparent)]
    Linkage(#[from] LinkageError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    #[error("trace has zero variance")]
    ZeroVariance,
    #[error("need at least {needed} time points, got {found}")]
    TooShort { needed: usize, found: usize },
    #[error("every row is degenerate (zero variance)")]
    AllRowsDegenerate,
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("null ensemble is empty")]
    EmptyEnsemble,
    #[error("ragged input: row {row} has {found} columns, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
}

/// Union of every module error, for callers that drive whole pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Linkage(#[from] LinkageError),
    #[error(transparent)]
    Hce(#[from] HceError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Upgma(#[from] UpgmaError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Mcc(#[from] MccError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
