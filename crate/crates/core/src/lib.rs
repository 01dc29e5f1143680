// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod config;
pub mod degennes;
pub mod diamagnetism;
pub mod error;
pub mod fd;
pub mod intersections;
pub mod kummer;
pub mod quadrature;
pub mod roots;
pub mod scaled;
pub mod spectrum;
pub mod special;
pub mod report;
