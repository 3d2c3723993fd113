use crate::error::{Error, Result};

/// Largest truncation degree [`gaussian_degree`] will return.
pub const MAX_TAYLOR_DEGREE: usize = 64;

/// Per-term base of the tail: `‖x_i‖² ≤ r` bounds `|x_iᵀx_j|^l` by `r^l`,
/// which is at most `r^{2l}` once `r ≥ 1`.
fn tail_base(r: f64) -> f64 {
    r.max(r * r)
}

/// `Σ_{l>q} n·ρ^l/l!` with `ρ = max(r, r²)`, an upper bound on
/// `‖K − P_q‖_op` for `K_{ij} = exp(x_iᵀx_j)` and its degree-`q` truncation.
///
/// Terms are accumulated in the log domain and summed smallest first, so
/// large `r` neither overflows nor loses the tail.
pub fn taylor_tail(q: usize, r: f64, n: usize) -> f64 {
    let rho = tail_base(r.max(0.0));
    if rho == 0.0 || n == 0 {
        return 0.0;
    }
    let ln_rho = rho.ln();
    let ln_n = (n as f64).ln();
    let mut ln_fact: f64 = (1..=q + 1).map(|k| (k as f64).ln()).sum();
    let mut logs = Vec::new();
    let mut peak = f64::NEG_INFINITY;
    let mut l = q + 1;
    loop {
        let ln_term = ln_n + l as f64 * ln_rho - ln_fact;
        logs.push(ln_term);
        peak = peak.max(ln_term);
        // past the mode, stop once terms are negligible against the largest
        if l as f64 > rho && (ln_term < peak - 50.0 || ln_term < -800.0) {
            break;
        }
        l += 1;
        ln_fact += (l as f64).ln();
    }
    let mut scaled: Vec<f64> = logs.iter().map(|v| (v - peak).exp()).collect();
    scaled.sort_by(|a, b| a.total_cmp(b));
    let sum: f64 = scaled.iter().sum();
    let ln_total = peak + sum.ln();
    if ln_total < -745.0 {
        0.0
    } else {
        ln_total.exp()
    }
}

/// Smallest `q ≤ 64` with `taylor_tail(q, r, n) ≤ ε·λ/2`.
pub fn gaussian_degree(r: f64, n: usize, eps: f64, lambda: f64) -> Result<usize> {
    if !(r >= 0.0 && eps > 0.0 && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need r >= 0, eps > 0, lambda > 0 (got r = {r}, eps = {eps}, lambda = {lambda})"
        )));
    }
    let target = eps * lambda / 2.0;
    (0..=MAX_TAYLOR_DEGREE)
        .find(|&q| taylor_tail(q, r, n) <= target)
        .ok_or(Error::DegreeCap {
            cap: MAX_TAYLOR_DEGREE,
            target,
        })
}
