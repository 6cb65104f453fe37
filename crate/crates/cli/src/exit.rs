//! Process exit codes: 0 success, 2 input, 3 rank deficiency, 4 identity
//! violation, 5 failed check.

use std::fmt;

pub const INPUT: u8 = 2;
pub const RANK: u8 = 3;
pub const IDENTITY: u8 = 4;
pub const CHECK: u8 = 5;

#[derive(Debug)]
pub struct Exit {
    pub code: u8,
    pub message: String,
}

impl Exit {
    pub fn error(code: u8, message: impl Into<String>) -> anyhow::Error {
        anyhow::Error::new(Exit {
            code,
            message: message.into(),
        })
    }
}

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

pub fn input_error(message: impl Into<String>) -> anyhow::Error {
    Exit::error(INPUT, message)
}

pub fn code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(exit) = cause.downcast_ref::<Exit>() {
            return exit.code;
        }
        if let Some(lib) = cause.downcast_ref::<orthores::Error>() {
            return match lib {
                orthores::Error::RankDeficient { .. } | orthores::Error::Singular(_) => RANK,
                orthores::Error::CheckFailed(_) => CHECK,
                _ => INPUT,
            };
        }
    }
    INPUT
}
