//! Pixel-driven GUI exploration testing.
//!
//! The engine abstracts app state purely from screenshots: widgets are
//! extracted with classical edge detection, the page layout is characterized
//! as a Group/Line/Column hierarchy, and both are embedded into a fixed-size
//! state vector. A curiosity-rewarded Q-learning agent drives exploration,
//! evaluated against deterministic simulated apps with ground-truth coverage
//! and injected crashes.
//!
//! Module map:
//! - [`vision`]: screenshot -> widget bounding boxes (Canny + components)
//! - [`layout`]: boxes -> Group/Line/Column tree, brace strings, tree edit
//!   distance and layout similarity
//! - [`embedding`]: widget/layout/page vectors and page similarity
//! - [`actions`]: the 17-action taxonomy, applicability, action embedding
//! - [`agent`]: reward, Q-network, exploration memory, the session loop
//! - [`simenv`]: seeded simulated apps, renderer, execution semantics
//! - [`harness`]: run orchestration, baselines, reports, benchmark suite

pub mod actions;
pub mod agent;
pub mod embedding;
pub mod harness;
pub mod layout;
pub mod par;
pub mod simenv;
pub mod vision;
pub mod weights;
