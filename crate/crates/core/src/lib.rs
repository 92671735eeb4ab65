pub mod basis;
pub mod bench;
pub mod codec;
pub mod linalg;
pub mod metrics;
pub mod payload;
pub mod quant;
