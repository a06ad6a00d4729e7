use std::io;
use std::path::PathBuf;

use doublekey::ErrorKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    /// Bad content in an input file.
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: doublekey::Error,
    },
    #[error(transparent)]
    Core(#[from] doublekey::Error),
}

impl CliError {
    /// 0 success, 1 usage or configuration, 2 protocol fault, 3 parse error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::File { source, .. } => match source.kind() {
                ErrorKind::Protocol => 2,
                ErrorKind::Usage | ErrorKind::Parse => 3,
            },
            CliError::Core(e) => match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Protocol => 2,
                ErrorKind::Parse => 3,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;
    use doublekey::Error;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 1);
        assert_eq!(CliError::Core(Error::NotPrime(9)).exit_code(), 1);
        assert_eq!(CliError::Core(Error::RetriesExhausted(8)).exit_code(), 2);
        let parse = Error::Parse {
            line: 3,
            message: "bad".into(),
        };
        assert_eq!(CliError::Core(parse.clone()).exit_code(), 3);
        let file = CliError::File {
            path: "t.txt".into(),
            source: Error::NotPrime(9),
        };
        assert_eq!(file.exit_code(), 3);
        assert_eq!(
            CliError::File {
                path: "t.txt".into(),
                source: parse
            }
            .to_string(),
            "t.txt: line 3: bad"
        );
    }
}
