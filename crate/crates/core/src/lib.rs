//! Genetic interaction scoring from double-mutant fitness data.
//!
//! The crate is organised bottom-up:
//!
//! * [`probmodel`] holds the two-factor effect model, observable survival
//!   tables, the neutrality function, the `J` ratio and the log-linear
//!   decomposition of a survival table.
//! * [`measures`] scores fitness triples with the multiplicative measure `M`
//!   and the additive-rate measure `log J`, and classifies pairs into
//!   quadrants.
//! * [`ingest`] streams SGA-style TSV files into [`ingest::StrainPairRecord`]s.
//! * [`network`] builds gene-level tallies, hub lists and profile similarity.
//! * [`annotate`] handles functional categories and enrichment testing.
//! * [`simgen`] samples synthetic populations and checks the theory
//!   empirically.
//! * [`tables`] reads and writes the TSV interchange formats.

pub mod annotate;
pub mod ingest;
pub mod measures;
pub mod network;
pub mod numfmt;
pub mod probmodel;
pub mod simgen;
pub mod tables;

pub use measures::{InteractionScores, Measure, QuadrantClass, Thresholds};
pub use network::ScoredPair;
pub use probmodel::{ObservableTable, TwoFactorEffectModel};
