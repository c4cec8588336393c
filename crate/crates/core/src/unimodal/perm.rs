use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Combinatorial type: `perm[i]` is the spatial position of J^{w+1} when
/// J^w sits at position i (positions counted from the left).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnimodalPermutation {
    p: usize,
    perm: Vec<usize>,
}

impl UnimodalPermutation {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let p = perm.len();
        if p < 2 {
            return Err(Error::InvalidPermutation("length must be at least 2".into()));
        }
        let mut seen = vec![false; p];
        for &i in &perm {
            if i >= p || seen[i] {
                return Err(Error::InvalidPermutation(format!("{perm:?} is not a bijection")));
            }
            seen[i] = true;
        }
        // a single p-cycle
        let mut i = 0;
        for step in 1..=p {
            i = perm[i];
            if i == 0 && step < p {
                return Err(Error::InvalidPermutation(format!("{perm:?} is not cyclic")));
            }
        }
        // the image sequence rises strictly and then falls strictly
        let top = (0..p).max_by_key(|&i| perm[i]).unwrap();
        let rising = perm[..=top].windows(2).all(|w| w[0] < w[1]);
        let falling = perm[top..].windows(2).all(|w| w[0] > w[1]);
        if !(rising && falling) {
            return Err(Error::InvalidPermutation(format!("{perm:?} is not unimodal")));
        }
        Ok(UnimodalPermutation { p, perm })
    }

    pub fn doubling() -> Self {
        UnimodalPermutation { p: 2, perm: vec![1, 0] }
    }

    /// The length-3 type realised by the period-3 window.
    pub fn period_three() -> Self {
        UnimodalPermutation { p: 3, perm: vec![1, 2, 0] }
    }

    /// Parses "p=3; 0->1,1->2,2->0".
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidPermutation(format!("{m}: {s:?}"));
        let (head, body) = s.split_once(';').ok_or_else(|| bad("missing ';'"))?;
        let p: usize = head
            .trim()
            .strip_prefix("p=")
            .ok_or_else(|| bad("expected p=<n>"))?
            .trim()
            .parse()
            .map_err(|_| bad("bad length"))?;
        let mut perm = vec![usize::MAX; p];
        for item in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (a, b) = item.split_once("->").ok_or_else(|| bad("expected i->j"))?;
            let a: usize = a.trim().parse().map_err(|_| bad("bad index"))?;
            let b: usize = b.trim().parse().map_err(|_| bad("bad index"))?;
            if a >= p || perm[a] != usize::MAX {
                return Err(bad("index repeated or out of range"));
            }
            perm[a] = b;
        }
        if perm.contains(&usize::MAX) {
            return Err(bad("missing images"));
        }
        UnimodalPermutation::new(perm)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn apply(&self, i: usize) -> usize {
        self.perm[i]
    }

    /// Spatial position of J^0.
    pub fn central_position(&self) -> usize {
        (0..self.p).max_by_key(|&i| self.perm[i]).unwrap()
    }

    /// Position of J^w for w = 0..p.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![self.central_position()];
        for w in 1..self.p {
            pos.push(self.perm[pos[w - 1]]);
        }
        pos
    }
}

impl fmt::Display for UnimodalPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={}; ", self.p)?;
        let items: Vec<String> = self.perm.iter().enumerate().map(|(i, j)| format!("{i}->{j}")).collect();
        write!(f, "{}", items.join(","))
    }
}

/// Finite word w_0 … w_{n-1} over {0, …, p-1}; w_0 is the coarsest digit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    p: usize,
    digits: Vec<usize>,
}

impl Word {
    pub fn new(p: usize, digits: Vec<usize>) -> Result<Self> {
        if p < 2 || digits.iter().any(|&d| d >= p) {
            return Err(Error::BadInput(format!("digits {digits:?} not in base {p}")));
        }
        Ok(Word { p, digits })
    }

    pub fn zeros(p: usize, n: usize) -> Self {
        Word { p, digits: vec![0; n] }
    }

    /// Parses a digit string such as "120".
    pub fn parse(p: usize, s: &str) -> Result<Self> {
        let digits = s
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::BadInput(format!("bad word {s:?}")))?;
        Word::new(p, digits)
    }

    /// All words of length n, in the order of r(w).
    pub fn all(p: usize, n: usize) -> Vec<Word> {
        let count = p.pow(n as u32);
        (0..count).map(|r| Word::from_r(p, n, r as u128)).collect()
    }

    /// Inverse of `r`.
    pub fn from_r(p: usize, n: usize, mut r: u128) -> Word {
        let mut digits = Vec::with_capacity(n);
        for _ in 0..n {
            digits.push((r % p as u128) as usize);
            r /= p as u128;
        }
        Word { p, digits }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Adding machine 1 + w: add one to w_0 and carry to the right. The
    /// all-(p-1) word wraps to all zeros.
    pub fn successor(&self) -> Word {
        let mut d = self.digits.clone();
        for digit in d.iter_mut() {
            if *digit + 1 < self.p {
                *digit += 1;
                return Word { p: self.p, digits: d };
            }
            *digit = 0;
        }
        Word { p: self.p, digits: d }
    }

    /// r(w) = Σ p^i w_i.
    pub fn r(&self) -> u128 {
        self.digits.iter().rev().fold(0u128, |acc, &d| acc * self.p as u128 + d as u128)
    }

    /// Transfer time q(w) = p^n − r(w) mod p^n.
    pub fn transfer_time(&self) -> u128 {
        let m = (self.p as u128).pow(self.digits.len() as u32);
        (m - self.r()) % m
    }

    pub fn push(&self, d: usize) -> Word {
        let mut digits = self.digits.clone();
        digits.push(d);
        Word { p: self.p, digits }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.digits {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}
