//! Interval exchange transformations.

use serde::{Deserialize, Serialize};

use crate::combinatorics::PermutationPair;
use crate::error::{Error, Result};
use crate::numeric::{Backend, Real};

#[derive(Clone, Debug)]
pub struct Iet {
    pi: PermutationPair,
    lengths: Vec<Real>,
    left: Real,
    backend: Backend,
}

/// JSON form: lengths are strings so that no precision is lost.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IetJson {
    pub pi: PermutationPair,
    pub lengths: Vec<String>,
    #[serde(default = "zero_string")]
    pub left: String,
    #[serde(default = "default_backend")]
    pub backend: String,
}

fn zero_string() -> String {
    "0".into()
}

fn default_backend() -> String {
    "float256".into()
}

/// A saddle connection `T^m(v_l) = u_k` between interior discontinuities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Connection {
    pub m: usize,
    pub l: usize,
    pub k: usize,
    pub residual: f64,
}

impl Iet {
    pub fn new(pi: PermutationPair, lengths: Vec<Real>, left: Real, backend: Backend) -> Result<Self> {
        pi.check_irreducible()?;
        if lengths.len() != pi.d() {
            return Err(Error::InvalidLengths(format!("expected {} lengths, got {}", pi.d(), lengths.len())));
        }
        let zero = backend.zero();
        for (a, l) in lengths.iter().enumerate() {
            if *l <= zero {
                return Err(Error::InvalidLengths(format!("length of {} is not positive", pi.letter(a))));
            }
        }
        Ok(Iet { pi, lengths, left, backend })
    }

    /// Lengths given as expressions, in the order of the sorted alphabet.
    pub fn from_strs(pi: PermutationPair, lengths: &[&str], backend: Backend) -> Result<Self> {
        let ls = lengths.iter().map(|s| backend.parse_value(s)).collect::<Result<Vec<_>>>()?;
        Self::new(pi, ls, backend.zero(), backend)
    }

    pub fn from_f64(pi: PermutationPair, lengths: &[f64], backend: Backend) -> Result<Self> {
        let ls = lengths.iter().map(|&x| backend.from_f64(x)).collect();
        Self::new(pi, ls, backend.zero(), backend)
    }

    /// Rotation by the golden mean `(sqrt5 - 1)/2` on the unit interval.
    pub fn golden_rotation(bits: usize) -> Self {
        let b = Backend::float(bits);
        let pi = PermutationPair::parse("A B / B A").unwrap();
        Self::from_strs(pi, &["(3 - sqrt(5))/2", "(sqrt(5) - 1)/2"], b).unwrap()
    }

    pub fn from_json(j: &IetJson) -> Result<Self> {
        let backend = Backend::parse(&j.backend)?;
        let ls = j.lengths.iter().map(|s| backend.parse_value(s)).collect::<Result<Vec<_>>>()?;
        let left = backend.parse_value(&j.left)?;
        Self::new(j.pi.clone(), ls, left, backend)
    }

    pub fn to_json(&self) -> IetJson {
        IetJson {
            pi: self.pi.clone(),
            lengths: self.lengths.iter().map(|l| l.to_decimal_string()).collect(),
            left: self.left.to_decimal_string(),
            backend: self.backend.name(),
        }
    }

    pub fn pi(&self) -> &PermutationPair {
        &self.pi
    }

    pub fn lengths(&self) -> &[Real] {
        &self.lengths
    }

    pub fn left(&self) -> &Real {
        &self.left
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn d(&self) -> usize {
        self.pi.d()
    }

    pub fn total_length(&self) -> Real {
        let mut t = self.backend.zero();
        for l in &self.lengths {
            t = t + l;
        }
        t
    }

    pub fn lengths_f64(&self) -> Vec<f64> {
        self.lengths.iter().map(Real::to_f64).collect()
    }

    /// `u_0 < u_1 < ... < u_d`: endpoints of the top intervals.
    pub fn top_breaks(&self) -> Vec<Real> {
        let mut out = vec![self.left.clone()];
        for &a in self.pi.top() {
            let next = out.last().unwrap().clone() + &self.lengths[a];
            out.push(next);
        }
        out
    }

    /// `v_0 < v_1 < ... < v_d`: endpoints of the bottom intervals.
    pub fn bottom_breaks(&self) -> Vec<Real> {
        let mut out = vec![self.left.clone()];
        for &a in self.pi.bottom() {
            let next = out.last().unwrap().clone() + &self.lengths[a];
            out.push(next);
        }
        out
    }

    /// Translation applied on the top interval of each letter.
    pub fn translations(&self) -> Vec<Real> {
        let u = self.top_breaks();
        let v = self.bottom_breaks();
        (0..self.d()).map(|a| v[self.pi.pos_bottom(a)].clone() - &u[self.pi.pos_top(a)]).collect()
    }

    /// Letter whose top interval contains `x`, given the top breaks.
    fn locate(&self, u: &[Real], x: &Real) -> Result<usize> {
        if *x < u[0] || *x >= u[self.d()] {
            return Err(Error::InvalidArgument(format!("point {} outside the interval", x.to_f64())));
        }
        let k = u.partition_point(|b| b <= x) - 1;
        if k > 0 && u[k] == *x {
            return Err(Error::Singularity(x.to_decimal_string()));
        }
        Ok(self.pi.top()[k])
    }

    pub fn evaluate(&self, x: &Real) -> Result<Real> {
        let u = self.top_breaks();
        let tr = self.translations();
        let a = self.locate(&u, x)?;
        Ok(x.clone() + &tr[a])
    }

    /// Fast double precision view used for long orbits.
    pub fn to_f64(&self) -> IetF64 {
        IetF64::new(self)
    }

    /// Smallest `(m, l, k)` in lexicographic order with `|T^m(v_l) - u_k| <= tol`,
    /// `1 <= l, k <= d-1`, `m <= max_m`.
    pub fn detect_connection(&self, max_m: usize, tol: f64) -> Result<Option<Connection>> {
        let d = self.d();
        let u = self.top_breaks();
        let v = self.bottom_breaks();
        let tr = self.translations();
        let tol_r = self.backend.from_f64(tol);
        let mut pts: Vec<Real> = v[1..d].to_vec();
        for m in 0..=max_m {
            for (li, p) in pts.iter().enumerate() {
                for (k, uk) in u.iter().enumerate().take(d).skip(1) {
                    let diff = (p.clone() - uk).abs();
                    if diff <= tol_r {
                        return Ok(Some(Connection { m, l: li + 1, k, residual: diff.to_f64() }));
                    }
                }
            }
            if m == max_m {
                break;
            }
            for p in pts.iter_mut() {
                let k = u.partition_point(|b| b <= p) - 1;
                *p = p.clone() + &tr[self.pi.top()[k]];
            }
        }
        Ok(None)
    }
}

/// Double precision interval exchange on the same combinatorics.
#[derive(Clone, Debug)]
pub struct IetF64 {
    pub breaks: Vec<f64>,
    pub letters: Vec<usize>,
    pub translations: Vec<f64>,
    pub lengths: Vec<f64>,
}

impl IetF64 {
    pub fn new(t: &Iet) -> Self {
        let breaks: Vec<f64> = t.top_breaks().iter().map(Real::to_f64).collect();
        let translations: Vec<f64> = t.translations().iter().map(Real::to_f64).collect();
        IetF64 { breaks, letters: t.pi().top().to_vec(), translations, lengths: t.lengths_f64() }
    }

    pub fn left(&self) -> f64 {
        self.breaks[0]
    }

    pub fn right(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    /// Position in the top row of the interval containing `x`.
    pub fn position(&self, x: f64) -> usize {
        let k = self.breaks.partition_point(|b| *b <= x);
        k.clamp(1, self.letters.len()) - 1
    }

    pub fn letter_at(&self, x: f64) -> usize {
        self.letters[self.position(x)]
    }

    pub fn apply(&self, x: f64) -> f64 {
        x + self.translations[self.letter_at(x)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot() -> Iet {
        let pi = PermutationPair::parse("A B / B A").unwrap();
        Iet::from_strs(pi, &["0.6", "0.4"], Backend::Rational).unwrap()
    }

    #[test]
    fn rotation_translates_by_the_other_length() {
        let t = rot();
        let b = Backend::Rational;
        assert_eq!(t.evaluate(&b.parse_value("0.1").unwrap()).unwrap(), b.parse_value("0.5").unwrap());
        assert_eq!(t.evaluate(&b.parse_value("0.7").unwrap()).unwrap(), b.parse_value("0.1").unwrap());
        assert!(matches!(t.evaluate(&b.parse_value("0.6").unwrap()), Err(Error::Singularity(_))));
    }

    #[test]
    fn rational_rotation_has_connection() {
        let c = rot().detect_connection(10, 0.0).unwrap().unwrap();
        assert_eq!((c.l, c.k), (1, 1));
        assert_eq!(c.residual, 0.0);
    }

    #[test]
    fn json_round_trip() {
        let t = Iet::golden_rotation(256);
        let j = serde_json::to_string(&t.to_json()).unwrap();
        let back = Iet::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back.pi(), t.pi());
        for (a, b) in back.lengths().iter().zip(t.lengths()) {
            assert!((a.clone() - b).abs().to_f64() < 1e-70);
        }
    }
}
