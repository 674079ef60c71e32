//! Desk-scale neural machine translation with a hybrid character/word
//! encoder, attentional LSTM decoder, and the surrounding training,
//! decoding, segmentation, and evaluation machinery.

pub mod decoding;
pub mod error;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod pipeline;
pub mod segmentation;
pub mod tensor;

pub use error::{Error, Result};
