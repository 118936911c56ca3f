pub mod bench;
pub mod eval;
pub mod plot;
pub mod synth;
pub mod unmix;
