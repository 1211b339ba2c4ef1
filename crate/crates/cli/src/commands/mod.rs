pub mod evaluate;
pub mod mining;
pub mod models;
