//! Independent oracles shared by the integration tests.
//!
//! Both solvers assemble the full transmission system for a single
//! Fourier mode and solve it densely with nalgebra, without touching the
//! cascade code in the library.
#![allow(dead_code)]

use gpt_cloak::Structure;
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Region conductivities σ_0 (background), σ_1 … σ_{N+1}.
fn region_sigmas(s: &Structure) -> Vec<f64> {
    std::iter::once(s.background())
        .chain(s.conductivities().iter().copied())
        .collect()
}

/// Interface rows for radii `radii` (already shrunk if needed).
///
/// Region j carries `a_j r^k + b_j r^{-k}`; the unknown for `b_j` is
/// `β_j = b_j / r_{j+1}^{2k}` (inner radius of region j), and every
/// equation at radius r_i is divided by r_i^k, so all coefficients are
/// bounded by 1 in magnitude times a conductivity. The core carries no
/// `b`. Columns: `a_0 … a_{N+1}` then `β_0 … β_N`.
fn interface_system(radii: &[f64], sigmas: &[f64], k: u32) -> DMatrix<f64> {
    let n1 = radii.len();
    let a = |j: usize| j;
    let b = |j: usize| n1 + 1 + j;
    let mut m = DMatrix::zeros(2 * n1, 2 * n1 + 1);
    for i in 1..=n1 {
        let r = radii[i - 1];
        // inner region i has its β scaled by r_{i+1}; ratio to r_i
        let inner_b = if i < n1 {
            (radii[i] / r).powi(2 * k as i32)
        } else {
            0.0
        };
        let (so, si) = (sigmas[i - 1], sigmas[i]);
        let cont = 2 * (i - 1);
        let flux = cont + 1;
        m[(cont, a(i - 1))] = 1.0;
        m[(cont, b(i - 1))] = 1.0;
        m[(cont, a(i))] = -1.0;
        m[(flux, a(i - 1))] = so;
        m[(flux, b(i - 1))] = -so;
        m[(flux, a(i))] = -si;
        if i < n1 {
            m[(cont, b(i))] = -inner_b;
            m[(flux, b(i))] = si * inner_b;
        }
    }
    m
}

/// `M_k / (2πk r_1^{2k})` from the dense transmission solve with `a_0 = 1`.
pub fn dense_scaled_gpt(s: &Structure, k: u32) -> f64 {
    let full = interface_system(s.radii(), &region_sigmas(s), k);
    let n = full.nrows();
    // drop the a_0 column into the right-hand side
    let rhs = DVector::from_iterator(n, (0..n).map(|row| -full[(row, 0)]));
    let sys = full.columns(1, n).into_owned();
    let x = sys
        .full_piv_lu()
        .solve(&rhs)
        .expect("transmission system is singular");
    let beta0 = x[s.layer_count()];
    // b_0 = β_0 r_1^{2k} = −M_k / (2πk)
    -beta0
}

pub fn dense_gpt(s: &Structure, k: u32) -> f64 {
    let kf = k as f64;
    dense_scaled_gpt(s, k) * std::f64::consts::TAU * kf * s.outer_radius().powi(2 * k as i32)
}

/// δ_k for the structure shrunk by `rho` inside `B_s` with data `cos kθ`
/// on `|x| = s`, from a dense solve including the boundary row.
pub fn dense_dtn_delta(s: &Structure, rho: f64, outer: f64, k: u32) -> f64 {
    let radii: Vec<f64> = s.radii().iter().map(|r| r * rho).collect();
    let iface = interface_system(&radii, &region_sigmas(s), k);
    let n = iface.ncols();
    let mut sys = DMatrix::zeros(n, n);
    sys.rows_mut(0, n - 1).copy_from(&iface);
    // boundary row, scaled by s^k: a_0 + β_0 (R_1/s)^{2k} = s^{-k}; solve
    // with right-hand side 1 and rescale
    let w = (radii[0] / outer).powi(2 * k as i32);
    let beta0_col = radii.len() + 1;
    sys[(n - 1, 0)] = 1.0;
    sys[(n - 1, beta0_col)] = w;
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let x = sys
        .full_piv_lu()
        .solve(&rhs)
        .expect("DtN system is singular");
    // δ_k = −2k b_0 s^{-k-1} with b_0 = β_0 R_1^{2k} s^{-k}
    -2.0 * k as f64 / outer * x[beta0_col] * w
}

/// Random structure: background 1, `N+1` descending radii in `[lo, hi]`,
/// conductivities log-uniform in `[0.1, 10]`, core insulated with
/// probability `p_insulated`.
pub fn random_structure(
    rng: &mut StdRng,
    max_order: usize,
    lo: f64,
    hi: f64,
    p_insulated: f64,
) -> Structure {
    let n1 = rng.random_range(1..=max_order) + 1;
    let mut radii: Vec<f64> = (0..n1).map(|_| rng.random_range(lo..hi)).collect();
    radii.sort_by(|a, b| b.partial_cmp(a).unwrap());
    radii.dedup();
    while radii.len() < n1 {
        let last = *radii.last().unwrap();
        radii.push(last * 0.9);
    }
    let mut sigma: Vec<f64> = (0..n1)
        .map(|_| 10f64.powf(rng.random_range(-1.0..1.0)))
        .collect();
    if rng.random_bool(p_insulated) {
        *sigma.last_mut().unwrap() = 0.0;
    }
    Structure::new(radii, sigma, 1.0).unwrap()
}

/// Relative difference with respect to the oracle value.
pub fn rel(value: f64, oracle: f64) -> f64 {
    if oracle == 0.0 {
        value.abs()
    } else {
        ((value - oracle) / oracle).abs()
    }
}

/// Contrast `(inner − outer) / (inner + outer)` written out directly.
pub fn contrast(inner: f64, outer: f64) -> f64 {
    (inner - outer) / (inner + outer)
}

/// Independent piecewise inverse of the radial blow-up profile.
pub fn blowup_inverse_radius(rho: f64, r: f64) -> f64 {
    if r >= 1.5 {
        r
    } else if r >= 1.0 {
        // r = (3−3ρ)/(3−2ρ) + t/(3−2ρ) on ρ ≤ t ≤ 3/2
        (3.0 - 2.0 * rho) * r - (3.0 - 3.0 * rho)
    } else {
        rho * r
    }
}
