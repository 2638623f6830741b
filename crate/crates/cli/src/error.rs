use std::fmt;

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// A failure tagged with the module that raised it.
///
/// Displays as a single line, `error[<module>]: <message>`.
#[derive(Debug)]
pub struct CliError {
    pub module: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn runtime(module: &'static str, err: impl fmt::Display) -> Self {
        CliError { module, message: one_line(&err.to_string()), exit_code: EXIT_RUNTIME }
    }

    pub fn usage(module: &'static str, err: impl fmt::Display) -> Self {
        CliError { module, message: one_line(&err.to_string()), exit_code: EXIT_USAGE }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.module, self.message)
    }
}

impl std::error::Error for CliError {}

pub type Result<T> = std::result::Result<T, CliError>;
