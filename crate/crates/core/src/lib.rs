pub mod agent;
pub mod canonical;
pub mod cli;
pub mod datagen;
pub mod eval;
pub mod geometry;
pub mod planner;
pub mod policy;
pub mod sim;
pub mod world;
