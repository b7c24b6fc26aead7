//! Host-side pieces of the webnav browsing environment: corpus loading, the
//! live web backend, record and dataset files, scripted policies, and the
//! HTTP session service.

pub mod comparison_file;
pub mod corpus;
pub mod live;
pub mod records;
pub mod policy;
pub mod scores;
pub mod service;
