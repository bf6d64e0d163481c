pub mod algebra;
pub mod error;
pub mod series;
pub mod diagram;
pub mod invariant;
pub mod rt;
pub mod measure;
