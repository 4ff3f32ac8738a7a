use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("precoding error: {0}")]
    Precoding(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("exhaustive search refused: {count} candidate sets exceed the cap of {cap}; use C-ESG instead")]
    SearchTooLarge { count: u128, cap: u128 },
    #[error("trial {trial}{}", snr_suffix(.snr_db))]
    Trial {
        trial: usize,
        snr_db: Option<f64>,
        #[source]
        source: Box<Error>,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn snr_suffix(snr_db: &Option<f64>) -> String {
    match snr_db {
        Some(s) => format!(" at {s} dB"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn in_trial(self, trial: usize, snr_db: Option<f64>) -> Self {
        Error::Trial {
            trial,
            snr_db,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
