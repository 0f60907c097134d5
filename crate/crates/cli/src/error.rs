use std::fmt::Display;

/// An error caused by the caller's input (missing file, bad config, parse
/// failure). The binary maps it to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct BadInput(pub String);

pub fn bad_input(msg: impl Into<String>) -> anyhow::Error {
    BadInput(msg.into()).into()
}

/// Marks an error as the caller's fault.
pub trait InputContext<T> {
    fn bad_input(self, what: impl Display) -> anyhow::Result<T>;
}

impl<T, E: Display> InputContext<T> for Result<T, E> {
    fn bad_input(self, what: impl Display) -> anyhow::Result<T> {
        self.map_err(|e| bad_input(format!("{what}: {e}")))
    }
}

/// Whether any error in the chain is a [`BadInput`].
pub fn is_bad_input(err: &anyhow::Error) -> bool {
    err.chain().any(|e| e.is::<BadInput>())
}
