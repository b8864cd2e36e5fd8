//! Universal D-semifaithful coding of memoryless sources on countably infinite
//! integer alphabets.

pub mod distortion;
pub mod error;
pub mod kv;
pub mod oracles;
pub mod rational;
pub mod source_models;
pub mod special;
pub mod two_stage_codec;
pub mod universal_codes;

pub use error::{Error, Result};
