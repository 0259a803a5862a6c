//! Biclustering of web-usage matrices.
//!
//! A session x pageview matrix is searched for maximal-volume submatrices
//! whose rows or columns are strongly correlated (average absolute Pearson
//! correlation above a threshold). Simulated annealing and a steepest-ascent
//! hill climber are provided as interchangeable [`search::SearchStrategy`]
//! implementations; optimal biclusters are turned into weighted aggregate
//! usage profiles by [`profile`].

pub mod bicluster;
pub mod error;
pub mod matrix;
pub mod metrics;
pub mod output;
pub mod parallel;
pub mod profile;
pub mod report;
pub mod rng;
pub mod search;
pub mod synth;

pub use bicluster::{random_population, Bicluster, BiclusterRecord, BiclusterScore};
pub use error::{BiclusterError, Result};
pub use matrix::{filter_by_session_length, load_sessions, normalize, InputFormat, PageCatalog, SessionPageMatrix};
pub use metrics::{acv, fitness, overlapping_degree, pearson, AcvThreshold};
pub use parallel::Parallelism;
pub use profile::{build_profile, build_profiles, page_weight, UsageProfile};
pub use report::{Comparison, RunReport};
pub use search::annealing::{accept, cool, neighbor, run_chain, run_sa, ChainState};
pub use search::greedy::run_greedy;
pub use search::{AnnealingConfig, GreedyConfig, SearchOutcome, SearchParams, SearchStrategy, StrategyRegistry};
