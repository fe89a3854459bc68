use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_DIM: usize = 4096;
pub const DEFAULT_MAX_SUBSETS: u128 = 10_000_000;

/// Size guards applied before any construction or enumeration starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest matrix / graph dimension `l^n` accepted.
    pub max_dim: usize,
    /// Largest number of subsets an exhaustive check may enumerate.
    pub max_subsets: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_dim: DEFAULT_MAX_DIM,
            max_subsets: DEFAULT_MAX_SUBSETS,
        }
    }
}

impl Limits {
    /// Returns `l^n` if it fits under `max_dim`.
    pub fn check_dim(&self, l: usize, n: usize) -> Result<usize> {
        let required = checked_pow(l, n);
        match required {
            Some(d) if d <= self.max_dim => Ok(d),
            _ => Err(Error::ResourceLimit {
                what: format!("dimension {l}^{n}"),
                required: checked_pow_u128(l, n).unwrap_or(u128::MAX),
                limit: self.max_dim as u128,
            }),
        }
    }
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

fn checked_pow_u128(base: usize, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base as u128)?;
    }
    Some(acc)
}
