pub mod afc;
pub mod fit;
pub mod selftest;
