//! Outlier detection through neighborhood representatives.
//!
//! Points are moved to the medoid of their k-neighborhood, duplicates of the
//! result become representatives, and any detector scores the representatives
//! instead of the raw data. Each point then takes its representative's score.

pub mod dataset;
pub mod error;
pub mod neighbors;
pub mod nr;
pub mod detectors;
pub mod eval;
pub mod cli;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
    #[doc = include_str!("../../../book/src/neighbors.md")]
    mod neighbors {}
    #[doc = include_str!("../../../book/src/representatives.md")]
    mod representatives {}
    #[doc = include_str!("../../../book/src/detectors.md")]
    mod detectors {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
