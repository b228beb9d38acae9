//! Scalar special-function kernels.

/// Chebyshev polynomial of the second kind, `U_n(x)`, by forward recurrence.
///
/// Seeds are `U_{-1} = 0` and `U_0 = 1`, so the result is exact in the sense
/// of the recurrence for every real `x`, including `|x| > 1` where the
/// trigonometric form does not apply.
///
/// # Panics
///
/// If `n < -1`.
pub fn chebyshev_u(n: i64, x: f64) -> f64 {
    assert!(n >= -1, "chebyshev_u: order must be >= -1, got {n}");
    let mut prev = 0.0; // U_{-1}
    let mut curr = 1.0; // U_0
    if n == -1 {
        return prev;
    }
    let two_x = 2.0 * x;
    for _ in 0..n {
        let next = two_x * curr - prev;
        prev = curr;
        curr = next;
    }
    curr
}

/// Finite q-Pochhammer symbol `(mu; nu)_p = prod_{j=0}^{p-1} (1 - mu * nu^j)`.
///
/// The empty product (`p = 0`) is 1.
pub fn q_pochhammer(mu: f64, nu: f64, p: u32) -> f64 {
    let mut acc = 1.0;
    let mut nu_j = 1.0;
    for _ in 0..p {
        acc *= 1.0 - mu * nu_j;
        nu_j *= nu;
    }
    acc
}

/// `1 - rho^(-exponent)` without cancellation for small exponents.
pub(crate) fn one_minus_inv_pow(rho: f64, exponent: f64) -> f64 {
    -(-exponent * rho.ln()).exp_m1()
}

/// `ln(1 + e^y)` without overflow.
pub(crate) fn softplus(y: f64) -> f64 {
    if y > 0.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}
