//! Placeholder.
pub mod oracle;
