#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod convex;
pub mod error;
pub mod families;
pub mod harness;
pub mod integrability;
pub mod mcshane;
pub mod measure;
pub mod report;
pub mod setvalued;
