//! Throughput and effective capacity of a cognitive-radio link that senses
//! the channel every frame and retransmits with chase combining under a
//! deadline.
//!
//! The analytical path runs [`channel`] → [`harq`] → [`effcap`]; the
//! [`sim`] module measures the same quantities by Monte Carlo.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod config;
pub mod effcap;
pub mod error;
pub mod harq;
pub mod numerics;
pub mod report;
pub mod sim;
pub mod sweep;

pub use config::Config;
pub use channel::{scenario_profile, Scenario, SensingProfile, SystemParams};
pub use effcap::{effective_capacity, EffCapResult, Variant};
pub use error::{Error, Result};
pub use harq::{build_chain, throughput_metrics, ChainOptions, HarqChain, HistoryWeighting, Throughput};
pub use sim::{simulate, SimConfig, SimReport, SensingMode};
