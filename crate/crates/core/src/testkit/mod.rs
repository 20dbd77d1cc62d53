//! Test support: synthetic fixtures, brute-force oracles and published
//! decision data. Compiled for unit tests and behind the `testkit` feature.

pub mod fixtures;
pub mod oracle;
pub mod published;
