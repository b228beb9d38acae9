//! Independent reference: direct matching of `psi` and `psi'` at every
//! interface of a piecewise-constant potential.

#![allow(dead_code)]

use num_complex::Complex64;
use ucp_core::UcpSpec;

/// `(start, end, height)` slabs inside free space; must be sorted and disjoint.
pub type Slab = (f64, f64, f64);

type Mat = [[Complex64; 2]; 2];

fn mul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Columns are `e^{ikx}` and `e^{-ikx}` with their derivatives at `x`.
fn plane_waves(k: f64, x: f64) -> Mat {
    let i = Complex64::i();
    let plus = Complex64::from_polar(1.0, k * x);
    let minus = plus.conj();
    [[plus, minus], [i * k * plus, -i * k * minus]]
}

fn inverse(m: &Mat) -> Mat {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

/// Carries `(psi, psi')` across a slab of width `w` where `psi'' = -q^2 psi`.
fn slab_propagator(q_sq: f64, w: f64) -> Mat {
    let q = Complex64::new(q_sq, 0.0).sqrt();
    let (c, s) = ((q * w).cos(), (q * w).sin());
    let sinc = if q.norm() == 0.0 { Complex64::new(w, 0.0) } else { s / q };
    [[c, sinc], [-q * s, c]]
}

/// Transmission probability for a wave incident from the left with `E = k^2`.
pub fn transmission(slabs: &[Slab], k: f64) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut m: Mat = [[one, zero], [zero, one]];
    for &(a, b, v) in slabs {
        let state = mul(&slab_propagator(k * k - v, b - a), &plane_waves(k, a));
        m = mul(&mul(&inverse(&plane_waves(k, b)), &state), &m);
    }
    // Left (1, r) maps to right (t, 0), so t = det(m) / m22, and det(m) = 1
    // because both outer regions share the wavenumber k.
    1.0 / m[1][1].norm_sqr()
}

/// Slabs of `spec` taken from its explicit barrier list.
pub fn slabs_of(spec: &UcpSpec) -> Vec<Slab> {
    spec.build_segments()
        .barriers
        .iter()
        .map(|b| (b.offset, b.end(), spec.height()))
        .collect()
}

/// Relative difference guarded against tiny denominators.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
