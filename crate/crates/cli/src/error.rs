use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Model(#[from] lindblad_jc::Error),
}

impl CliError {
    /// 0 ok, 2 configuration or input, 3 truncation, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        use lindblad_jc::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Model(e) => match e {
                E::Param(_) | E::Shape(_) => 2,
                E::Truncation(_) => 3,
                E::Domain(_) | E::Numerical(_) | E::Step(_) => 4,
            },
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

pub type CliResult<T> = Result<T, CliError>;
