//! Seeded k-wise independent hashing over the Mersenne prime 2^61 − 1, and the
//! hierarchical seed derivation that gives every sketch instance its own stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// The Mersenne prime 2^61 − 1.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// Independence degree used for every hash and sign family in the crate.
pub const DEFAULT_INDEPENDENCE: usize = 4;

/// `x mod (2^61 − 1)` for any u64 (the high part is at most 7).
#[inline]
fn reduce(x: u64) -> u64 {
    let s = (x & MERSENNE_61) + (x >> 61);
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

#[inline]
fn mul_mod(a: u64, b: u64) -> u64 {
    let z = a as u128 * b as u128;
    reduce(((z as u64) & MERSENNE_61) + (z >> 61) as u64)
}

#[inline]
fn add_mod(a: u64, b: u64) -> u64 {
    reduce(a + b)
}

/// SplitMix64 finalizer; a bijection on u64.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the tag bytes.
fn tag_hash(tag: &str) -> u64 {
    tag.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// One derivation step below a master seed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeedStep {
    pub role: &'static str,
    pub level: u64,
    pub index: u64,
}

/// A master seed plus the path of derivation steps leading to one instance.
///
/// The derived 64-bit value is a pure function of the path, so any instance
/// in a sketch tree can be regenerated from the master seed alone.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeedPath {
    master: u64,
    path: Vec<SeedStep>,
    value: u64,
}

impl SeedPath {
    pub fn new(master: u64) -> Self {
        Self {
            master,
            path: Vec::new(),
            value: mix64(master ^ 0x5EED_5EED_5EED_5EED),
        }
    }

    /// Child path for `(role, level, index)`. Each step is a bijection in each
    /// of its arguments, so siblings differing in one coordinate never collide.
    pub fn derive(&self, role: &'static str, level: u64, index: u64) -> SeedPath {
        let mut v = mix64(self.value ^ tag_hash(role));
        v = mix64(v.wrapping_add(level.wrapping_mul(0xD6E8_FEB8_6659_FD93)));
        v = mix64(v.wrapping_add(index.wrapping_mul(0xA076_1D64_78BD_642F)));
        let mut path = self.path.clone();
        path.push(SeedStep { role, level, index });
        SeedPath {
            master: self.master,
            path,
            value: v,
        }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn steps(&self) -> &[SeedStep] {
        &self.path
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    /// Portable random stream for this path.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.value)
    }
}

/// Free-function form of [`SeedPath::derive`].
pub fn derive_seed(parent: &SeedPath, role: &'static str, level: u64, index: u64) -> SeedPath {
    parent.derive(role, level, index)
}

/// Degree-(k−1) polynomial hash modulo 2^61 − 1, reduced to `[0, range)` by
/// multiply-shift on the 61-bit value. For `range ≤ 2^16` the reduction bias
/// per bucket is below 2^−45.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KWiseHash {
    coefficients: Vec<u64>,
    range: u64,
}

impl KWiseHash {
    pub fn new(seed: &SeedPath, k: usize, range: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!("independence k = {k} < 2")));
        }
        if range == 0 {
            return Err(Error::InvalidParameter("hash range must be positive".into()));
        }
        let mut rng = seed.rng();
        let mut coefficients: Vec<u64> = (0..k).map(|_| rng.gen_range(0..MERSENNE_61)).collect();
        // nonzero leading coefficient keeps the polynomial at full degree
        coefficients[k - 1] = rng.gen_range(1..MERSENNE_61);
        Ok(Self {
            coefficients,
            range: range as u64,
        })
    }

    pub fn independence(&self) -> usize {
        self.coefficients.len()
    }

    pub fn range(&self) -> usize {
        self.range as usize
    }

    /// Raw polynomial value in `[0, 2^61 − 1)`.
    #[inline]
    pub fn eval_raw(&self, x: u64) -> u64 {
        let x = reduce(x);
        let mut acc = *self.coefficients.last().expect("k >= 2");
        for &c in self.coefficients.iter().rev().skip(1) {
            acc = add_mod(mul_mod(acc, x), c);
        }
        acc
    }

    #[inline]
    pub fn eval(&self, x: u64) -> usize {
        ((self.eval_raw(x) as u128 * self.range as u128) >> 61) as usize
    }
}

/// Convenience constructor mirroring [`KWiseHash::new`].
pub fn hash_new(seed: &SeedPath, k: usize, range: usize) -> Result<KWiseHash> {
    KWiseHash::new(seed, k, range)
}

/// 4-wise independent ±1 function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignHash {
    inner: KWiseHash,
}

impl SignHash {
    pub fn new(seed: &SeedPath) -> Self {
        Self {
            inner: KWiseHash::new(seed, DEFAULT_INDEPENDENCE, 2).expect("valid parameters"),
        }
    }

    #[inline]
    pub fn eval(&self, i: u64) -> f64 {
        if self.inner.eval(i) == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

pub fn sign_eval(s: &SignHash, i: u64) -> f64 {
    s.eval(i)
}
