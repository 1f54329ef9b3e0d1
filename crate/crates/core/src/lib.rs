pub mod classifier;
pub mod domain;
pub mod enumerate;
pub mod error;
pub mod pairs;
pub mod ranking;
pub mod rules;
pub mod spdom;
pub mod twostep;
