pub mod plot;
pub mod simulate;
pub mod solve;
pub mod sweep;
pub mod validate;
