use crate::error::{Error, Result};

/// In-place Walsh–Hadamard transform (Sylvester ordering).
///
/// Without normalization this is multiplication by the ±1 Hadamard matrix `H`
/// with `H² = L·I`; with normalization the transform is orthonormal.
pub fn fwht_inplace(v: &mut [f64], normalize: bool) -> Result<()> {
    let n = v.len();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut h = 1;
    while h < n {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    if normalize {
        let s = 1.0 / (n as f64).sqrt();
        v.iter_mut().for_each(|x| *x *= s);
    }
    Ok(())
}

pub fn fwht(v: &[f64], normalize: bool) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    fwht_inplace(&mut out, normalize)?;
    Ok(out)
}

/// Entry `(i, j)` of the unnormalized Sylvester Hadamard matrix.
#[inline]
pub fn hadamard_entry(i: usize, j: usize) -> f64 {
    if (i & j).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
