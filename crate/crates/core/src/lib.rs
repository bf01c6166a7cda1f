//! Speaker recognition on short trivial speech events (cough, laugh, "wei")
//! with deep speaker features.
//!
//! The pipeline runs Fbank extraction ([`frontend`]), a convolutional +
//! time-delay network whose last hidden layer yields frame-level speaker
//! features ([`ctdnn`]), utterance d-vectors scored by cosine, LDA or PLDA
//! ([`backend`]), and EER evaluation over verification trials ([`eval`]).
//! [`corpus`] provides audio I/O and a synthetic corpus generator.

pub mod corpus;
pub mod rng;
pub mod frontend;
pub mod hexfloat;
pub mod ctdnn;
pub mod backend;
pub mod eval;
pub mod cli;
