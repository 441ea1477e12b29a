use serde::Serialize;

use crate::combinatorics::PermutationPair;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CodimensionInput {
    pub g: u64,
    pub s: u64,
    /// Dimension of the stable space, `0 <= mu <= g`.
    pub mu: u64,
    pub r: u64,
}

impl CodimensionInput {
    pub fn new(g: u64, s: u64, mu: u64, r: u64) -> Result<Self> {
        let c = CodimensionInput { g, s, mu, r };
        c.validate()?;
        Ok(c)
    }

    /// Genus and number of singularities read off the permutation.
    pub fn from_pi(pi: &PermutationPair, mu: u64, r: u64) -> Result<Self> {
        pi.check_irreducible()?;
        Self::new(pi.genus() as u64, pi.singularities().cycles().len() as u64, mu, r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.g < 1 || self.s < 1 {
            return Err(Error::InvalidArgument(format!("need g >= 1 and s >= 1, got g={} s={}", self.g, self.s)));
        }
        if self.mu > self.g {
            return Err(Error::InvalidArgument(format!("mu = {} exceeds g = {}", self.mu, self.g)));
        }
        if self.r < 3 {
            return Err(Error::InvalidArgument(format!("r = {} must be at least 3", self.r)));
        }
        Ok(())
    }

    /// Number of intervals `2g + s - 1`.
    pub fn d(&self) -> u64 {
        2 * self.g + self.s - 1
    }
}

/// `(g-1)(2r+1) + s + g - mu`.
pub fn codimension(c: &CodimensionInput) -> Result<u64> {
    c.validate()?;
    Ok((c.g - 1) * (2 * c.r + 1) + c.s + c.g - c.mu)
}

/// Checks `(d-1) + (g-1)(2r-4) + 1 - mu + 2(2g-1) = codimension + 2` with `d = 2g + s - 1`.
pub fn equation_count_check(c: &CodimensionInput) -> Result<bool> {
    let dstar = codimension(c)? as i64;
    let (g, mu, r, d) = (c.g as i64, c.mu as i64, c.r as i64, c.d() as i64);
    let lhs = (d - 1) + (g - 1) * (2 * r - 4) + 1 - mu + 2 * (2 * g - 1);
    Ok(lhs == dstar + 2)
}
