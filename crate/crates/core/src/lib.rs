//! Visual prompts that embed a labeled 3D coordinate axis into point-cloud
//! scenes, the chat client that sends them to multimodal models, and the
//! metrics that score the returned 3D answers.

pub mod geometry;
pub mod render;
pub mod marks;
pub mod prompt;
pub mod eval;
pub mod client;
pub mod cli;
