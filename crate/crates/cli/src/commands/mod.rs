pub mod audit;
pub mod bubble;
pub mod project;
pub mod solve;
pub mod spectrum;
