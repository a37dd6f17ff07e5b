//! Contracted GPTs of radially layered disks via 2×2 transfer-matrix cascades.
//!
//! For a harmonic mode `k`, the potential in region `j` is
//! `(a_j r^k + b_j r^-k) cos kθ`. Each interface relates `(a_j, b_j)` to
//! `(a_{j-1}, b_{j-1})` through a 2×2 factor; the ordered product of all
//! factors is the cascade `P`, and the contracted GPT is
//! `M_k = 2πk · p21 / p22`.
//!
//! Factors are kept unnormalized (the `1/(2σ_j)` prefactor is dropped). Only
//! the ratio `p21/p22` matters, and dropping the prefactor lets an insulating
//! core (`σ = 0`) enter the product directly: its factor's second row is the
//! zero-flux closure `b_N = a_N r_{N+1}^{2k}`.

use std::ops::Mul;

use crate::error::{Error, Result};
use crate::scalar::{pow2k, Real};
use crate::structure::RadialLayeredStructure;

/// A 2×2 transfer matrix for harmonic mode `mode`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeMatrix<T> {
    pub p11: T,
    pub p12: T,
    pub p21: T,
    pub p22: T,
    pub mode: u32,
}

impl<T: Real> CascadeMatrix<T> {
    pub fn identity(mode: u32) -> Self {
        Self::scaled_identity(T::one(), mode)
    }

    pub fn scaled_identity(c: T, mode: u32) -> Self {
        Self {
            p11: c,
            p12: T::zero(),
            p21: T::zero(),
            p22: c,
            mode,
        }
    }

    pub fn determinant(&self) -> T {
        self.p11 * self.p22 - self.p12 * self.p21
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.p21 == T::zero()
    }

    pub fn max_abs(&self) -> T {
        self.p11
            .abs()
            .max(self.p12.abs())
            .max(self.p21.abs())
            .max(self.p22.abs())
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            p11: self.p11 * c,
            p12: self.p12 * c,
            p21: self.p21 * c,
            p22: self.p22 * c,
            mode: self.mode,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            p11: self.p11 + other.p11,
            p12: self.p12 + other.p12,
            p21: self.p21 + other.p21,
            p22: self.p22 + other.p22,
            mode: self.mode,
        }
    }

    /// Applies the matrix to a column vector `(x, y)`.
    pub fn apply(&self, x: T, y: T) -> (T, T) {
        (self.p11 * x + self.p12 * y, self.p21 * x + self.p22 * y)
    }

    /// `p21 / p22`, failing when `p22` is negligible relative to the row.
    pub(crate) fn lower_ratio(&self) -> Result<T> {
        let floor = T::epsilon() * T::lit(64.0) * self.p21.abs().max(self.p22.abs());
        if !(self.p22.abs() > floor) || !self.p22.is_finite() {
            return Err(Error::SingularCascade {
                mode: self.mode,
                p22: self.p22.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(self.p21 / self.p22)
    }
}

impl<T: Real> Mul for CascadeMatrix<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self {
            p11: self.p11 * rhs.p11 + self.p12 * rhs.p21,
            p12: self.p11 * rhs.p12 + self.p12 * rhs.p22,
            p21: self.p21 * rhs.p11 + self.p22 * rhs.p21,
            p22: self.p21 * rhs.p12 + self.p22 * rhs.p22,
            mode: self.mode,
        }
    }
}

fn check_mode(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::Domain("mode k must be at least 1".into()));
    }
    Ok(())
}

/// Unnormalized interface factor
/// `[[σi+σo, (σi−σo) r^-2k], [(σi−σo) r^2k, σi+σo]]`.
pub fn interface_factor<T: Real>(
    sigma_inner: T,
    sigma_outer: T,
    radius: T,
    k: u32,
) -> Result<CascadeMatrix<T>> {
    check_mode(k)?;
    if !(radius > T::zero()) {
        return Err(Error::Domain(format!(
            "interface radius must be positive, got {radius}"
        )));
    }
    if !(sigma_outer > T::zero()) {
        return Err(Error::Domain(format!(
            "outer conductivity must be positive, got {sigma_outer}"
        )));
    }
    if !(sigma_inner >= T::zero()) {
        return Err(Error::Domain(format!(
            "inner conductivity must be non-negative, got {sigma_inner}"
        )));
    }
    let sum = sigma_inner + sigma_outer;
    let diff = sigma_inner - sigma_outer;
    let r2k = pow2k(radius, k);
    Ok(CascadeMatrix {
        p11: sum,
        p12: diff / r2k,
        p21: diff * r2k,
        p22: sum,
        mode: k,
    })
}

/// Interface factor conjugated by `diag(1, r_ref^2k)`, so that radius powers
/// appear only as ratios `(r/r_ref)^±2k`. The product of balanced factors is
/// `diag(1, r_ref^2k)^-1 · P · diag(1, r_ref^2k)`.
pub(crate) fn balanced_factor<T: Real>(
    sigma_inner: T,
    sigma_outer: T,
    radius: T,
    reference: T,
    k: u32,
) -> CascadeMatrix<T> {
    let sum = sigma_inner + sigma_outer;
    let diff = sigma_inner - sigma_outer;
    let ratio = pow2k(radius / reference, k);
    CascadeMatrix {
        p11: sum,
        p12: diff / ratio,
        p21: diff * ratio,
        p22: sum,
        mode: k,
    }
}

/// Ordered product `Q_{N+1} ··· Q_1` of unnormalized interface factors.
pub fn cascade<T: Real>(structure: &RadialLayeredStructure<T>, k: u32) -> Result<CascadeMatrix<T>> {
    check_mode(k)?;
    let mut product = CascadeMatrix::identity(k);
    for (j, (&r, &sigma)) in structure
        .radii()
        .iter()
        .zip(structure.conductivities())
        .enumerate()
    {
        let q = interface_factor(sigma, structure.outer_conductivity(j), r, k)?;
        product = q * product;
    }
    Ok(product)
}

/// `M_k / (2πk r_1^2k)`: the GPT in units of its natural magnitude.
///
/// Bounded by 1 in absolute value for admissible structures; this is the
/// quantity the solver and the DtN routines work with.
///
/// Only the second row of the cascade matters, so it is propagated as a row
/// vector through the factors written as `D_j [[s, d], [d, s]] D_j⁻¹` with
/// `D_j = diag(1, r_j^2k)`. Between interfaces the row picks up
/// `(r_{j-1}/r_j)^2k >= 1` in its second slot; renormalizing after every
/// step keeps everything in range for arbitrarily high modes.
pub fn scaled_gpt<T: Real>(structure: &RadialLayeredStructure<T>, k: u32) -> Result<T> {
    check_mode(k)?;
    let radii = structure.radii();
    let (mut x, mut y) = (T::zero(), T::one());
    for j in (0..structure.layer_count()).rev() {
        let inner = structure.conductivities()[j];
        let outer = structure.outer_conductivity(j);
        let (sum, diff) = (inner + outer, inner - outer);
        (x, y) = (x * sum + y * diff, x * diff + y * sum);
        if j > 0 {
            let growth = pow2k(radii[j - 1] / radii[j], k);
            if growth.is_finite() {
                y = y * growth;
            } else {
                x = T::zero();
            }
        }
        let m = x.abs().max(y.abs());
        if m > T::zero() && m.is_finite() {
            x = x / m;
            y = y / m;
        }
    }
    let floor = T::epsilon() * T::lit(64.0) * x.abs().max(y.abs());
    if !(y.abs() > floor) {
        return Err(Error::SingularCascade {
            mode: k,
            p22: y.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(x / y)
}

/// Contracted GPT `M_k = 2πk · p21 / p22`.
pub fn gpt<T: Real>(structure: &RadialLayeredStructure<T>, k: u32) -> Result<T> {
    let q = scaled_gpt(structure, k)?;
    Ok(T::two_pi() * T::from_u32(k).unwrap() * pow2k(structure.outer_radius(), k) * q)
}

/// Contracted GPTs `M_1 … M_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct GptSpectrum<T> {
    pub values: Vec<T>,
}

impl<T: Real> GptSpectrum<T> {
    pub fn k_max(&self) -> u32 {
        self.values.len() as u32
    }

    /// `M_k` for `1 <= k <= k_max`.
    pub fn get(&self, k: u32) -> Option<T> {
        (k as usize)
            .checked_sub(1)
            .and_then(|i| self.values.get(i).copied())
    }
}

pub fn gpt_spectrum<T: Real>(
    structure: &RadialLayeredStructure<T>,
    k_max: u32,
) -> Result<GptSpectrum<T>> {
    if k_max == 0 {
        return Err(Error::Domain("k_max must be at least 1".into()));
    }
    let values = (1..=k_max)
        .map(|k| {
            gpt(structure, k).map_err(|e| Error::AtMode {
                mode: k,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GptSpectrum { values })
}

/// Per-region coefficients `(a_j, b_j)`, `j = 0 … N+1`, of the mode-`k`
/// solution with `a_0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerCoefficients<T> {
    pub mode: u32,
    pub a: Vec<T>,
    pub b: Vec<T>,
    /// When set, the core coefficients are zero placeholders and the
    /// potential is undefined inside the core.
    pub insulated_core: bool,
}

impl<T: Real> LayerCoefficients<T> {
    /// Radial profile `a_j r^k + b_j r^-k` of region `j` (no angular factor).
    pub fn radial_profile(&self, region: usize, r: T) -> T {
        let k = self.mode as i32;
        let (a, b) = (self.a[region], self.b[region]);
        if b == T::zero() {
            a * r.powi(k)
        } else {
            a * r.powi(k) + b * r.powi(-k)
        }
    }

    /// `d/dr` of [`Self::radial_profile`].
    pub fn radial_derivative(&self, region: usize, r: T) -> T {
        let k = self.mode as i32;
        let kf = T::from_i32(k).unwrap();
        let (a, b) = (self.a[region], self.b[region]);
        kf * (a * r.powi(k - 1) - b * r.powi(-k - 1))
    }

    /// Potential at polar point `(r, θ)`; `None` inside an insulating core.
    pub fn evaluate(
        &self,
        structure: &RadialLayeredStructure<T>,
        r: T,
        theta: T,
    ) -> Result<Option<T>> {
        if !(r >= T::zero()) || !r.is_finite() || !theta.is_finite() {
            return Err(Error::Domain(format!("invalid polar point ({r}, {theta})")));
        }
        let region = structure.region_of(r);
        if region == structure.layer_count() && self.insulated_core {
            return Ok(None);
        }
        if r == T::zero() && self.b[region] != T::zero() {
            return Err(Error::Domain("potential is singular at the origin".into()));
        }
        let angular = (T::from_u32(self.mode).unwrap() * theta).cos();
        Ok(Some(self.radial_profile(region, r) * angular))
    }
}

pub fn layer_coefficients<T: Real>(
    structure: &RadialLayeredStructure<T>,
    k: u32,
) -> Result<LayerCoefficients<T>> {
    let m = gpt(structure, k)?;
    let kf = T::from_u32(k).unwrap();
    let n_regions = structure.layer_count() + 1;
    let mut a = Vec::with_capacity(n_regions);
    let mut b = Vec::with_capacity(n_regions);
    a.push(T::one());
    b.push(-m / (T::two_pi() * kf));

    let insulated = structure.has_insulated_core();
    let forward = if insulated {
        structure.layer_count() - 1
    } else {
        structure.layer_count()
    };
    for j in 0..forward {
        let inner = structure.conductivities()[j];
        let q = interface_factor(
            inner,
            structure.outer_conductivity(j),
            structure.radii()[j],
            k,
        )?;
        let norm = (inner + inner).recip();
        let (aj, bj) = q.apply(a[j], b[j]);
        a.push(aj * norm);
        b.push(bj * norm);
    }
    if insulated {
        a.push(T::zero());
        b.push(T::zero());
    } else {
        // closure b_{N+1} = 0 holds up to rounding; pin it
        *b.last_mut().unwrap() = T::zero();
    }
    Ok(LayerCoefficients {
        mode: k,
        a,
        b,
        insulated_core: insulated,
    })
}

/// Mode-`k` potential `u_k(r, θ)`, or `None` inside an insulating core.
pub fn field_value<T: Real>(
    structure: &RadialLayeredStructure<T>,
    k: u32,
    r: T,
    theta: T,
) -> Result<Option<T>> {
    layer_coefficients(structure, k)?.evaluate(structure, r, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn disk(r: f64, sigma: f64) -> RadialLayeredStructure<f64> {
        RadialLayeredStructure::<f64>::new(vec![r], vec![sigma], 1.0).unwrap()
    }

    fn hashin() -> RadialLayeredStructure<f64> {
        let s3 = 3f64.sqrt();
        RadialLayeredStructure::<f64>::new(vec![2.0, 2f64.sqrt()], vec![2.0 * s3 - 3.0, 3.0], 1.0)
            .unwrap()
    }

    #[test]
    fn equal_conductivities_give_scaled_identity() {
        let q = interface_factor(1.7, 1.7, 1.3, 3).unwrap();
        assert_eq!(q, CascadeMatrix::scaled_identity(3.4, 3));
    }

    #[test]
    fn factor_by_hand() {
        let q = interface_factor(2.0, 1.0, 2.0, 1).unwrap();
        assert_eq!((q.p11, q.p12, q.p21, q.p22), (3.0, 0.25, 4.0, 3.0));
    }

    #[test]
    fn insulating_factor_encodes_zero_flux() {
        let (r, sigma, k) = (1.5f64, 0.7, 2);
        let q = interface_factor(0.0, sigma, r, k).unwrap();
        assert_relative_eq!(q.p11, sigma);
        assert_relative_eq!(q.p12, -sigma * r.powi(-4));
        assert_relative_eq!(q.p21, -sigma * r.powi(4));
        // row 2 annihilates (a, a r^2k)
        let a = 0.37;
        let (_, second) = q.apply(a, a * r.powi(4));
        assert!(second.abs() < 1e-15);
    }

    #[test]
    fn factor_domain_errors() {
        assert!(interface_factor(1.0, 1.0, 0.0, 1).is_err());
        assert!(interface_factor(1.0, 0.0, 1.0, 1).is_err());
        assert!(interface_factor(-1.0, 1.0, 1.0, 1).is_err());
        assert!(interface_factor(1.0, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn factor_determinant() {
        let q = interface_factor(2.5, 0.4, 1.7, 3).unwrap();
        assert_relative_eq!(q.determinant(), 4.0 * 2.5 * 0.4, max_relative = 1e-12);
    }

    #[test]
    fn cascade_cases() {
        let h = RadialLayeredStructure::<f64>::new(vec![2.0, 1.5, 1.0], vec![1.0; 3], 1.0).unwrap();
        let p = cascade(&h, 2).unwrap();
        assert_eq!(p, CascadeMatrix::scaled_identity(8.0, 2));

        let d = disk(2.0, 3.0);
        assert_eq!(
            cascade(&d, 1).unwrap(),
            interface_factor(3.0, 1.0, 2.0, 1).unwrap()
        );

        // two layers r=(2,1), σ=(2,4), k=1:
        // Q1 = [[3, 1/4],[4, 3]], Q2 = [[6, 2],[2, 6]], Q2·Q1 = [[26, 7.5],[30, 18.5]]
        let two = RadialLayeredStructure::<f64>::new(vec![2.0, 1.0], vec![2.0, 4.0], 1.0).unwrap();
        let p = cascade(&two, 1).unwrap();
        assert_eq!((p.p11, p.p12, p.p21, p.p22), (26.0, 7.5, 30.0, 18.5));
        assert_relative_eq!(
            gpt(&two, 1).unwrap(),
            2.0 * PI * 30.0 / 18.5,
            max_relative = 1e-14
        );
    }

    #[test]
    fn gpt_closed_forms() {
        let h = RadialLayeredStructure::<f64>::new(vec![2.0, 1.0], vec![1.0, 1.0], 1.0).unwrap();
        for k in 1..6 {
            assert_eq!(gpt(&h, k).unwrap(), 0.0);
        }
        let d = disk(2.0, 3.0);
        assert_relative_eq!(gpt(&d, 1).unwrap(), 4.0 * PI, max_relative = 1e-14);
        assert!(gpt(&hashin(), 1).unwrap().abs() < 1e-13);
        assert!(gpt(&hashin(), 2).unwrap().abs() > 1.0);
    }

    #[test]
    fn spectrum_of_single_disk() {
        let s = gpt_spectrum(&disk(2.0, 3.0), 2).unwrap();
        assert_eq!(s.k_max(), 2);
        assert_relative_eq!(s.get(1).unwrap(), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(s.get(2).unwrap(), 32.0 * PI, max_relative = 1e-14);
        assert_eq!(s.get(0), None);
        assert!(gpt_spectrum(&disk(2.0, 3.0), 0).is_err());
    }

    #[test]
    fn high_modes_stay_finite() {
        let s = RadialLayeredStructure::<f64>::new(vec![2.0, 1.0, 0.5], vec![0.2, 7.0, 0.0], 1.0)
            .unwrap();
        for k in [32, 64, 100] {
            let q = scaled_gpt(&s, k).unwrap();
            assert!(q.is_finite() && q.abs() <= 1.0);
            assert!(gpt(&s, k).unwrap().is_finite());
        }
    }

    #[test]
    fn single_disk_coefficients() {
        let c = layer_coefficients(&disk(2.0, 3.0), 1).unwrap();
        assert_relative_eq!(c.b[0], -2.0, max_relative = 1e-14);
        assert_relative_eq!(c.a[1], 0.5, max_relative = 1e-14);
        assert_eq!(c.b[1], 0.0);
        let d = disk(2.0, 3.0);
        let outside = c.radial_profile(0, 2.0);
        let inside = c.radial_profile(1, 2.0);
        assert_relative_eq!(outside, 1.0, max_relative = 1e-14);
        assert_relative_eq!(inside, 1.0, max_relative = 1e-14);
        assert_relative_eq!(
            field_value(&d, 1, 2.0, 0.0).unwrap().unwrap(),
            1.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn homogeneous_coefficients_and_field() {
        let h = RadialLayeredStructure::<f64>::new(vec![2.0, 1.0], vec![1.0, 1.0], 1.0).unwrap();
        let c = layer_coefficients(&h, 2).unwrap();
        assert!(c.a.iter().all(|&a| (a - 1.0).abs() < 1e-15));
        assert!(c.b.iter().all(|&b| b.abs() < 1e-15));
        assert_relative_eq!(
            field_value(&h, 1, 1.7, 0.0).unwrap().unwrap(),
            1.7,
            max_relative = 1e-14
        );
        assert_eq!(field_value(&h, 1, 0.0, 0.0).unwrap(), Some(0.0));
    }

    #[test]
    fn field_vanishes_on_nodal_lines() {
        let s = hashin();
        for k in 1..5 {
            let theta = PI / (2.0 * k as f64);
            let u = field_value(&s, k, 1.3, theta).unwrap().unwrap();
            assert!(u.abs() < 1e-12);
        }
    }

    #[test]
    fn insulated_core_closure_and_marker() {
        let s = RadialLayeredStructure::<f64>::new(vec![2.0, 1.5, 1.0], vec![0.5, 2.0, 0.0], 1.0)
            .unwrap();
        for k in 1..5 {
            let c = layer_coefficients(&s, k).unwrap();
            assert!(c.insulated_core);
            let n = s.layer_count() - 1;
            let r = s.core_radius();
            assert_relative_eq!(c.b[n], c.a[n] * r.powi(2 * k as i32), max_relative = 1e-12);
            assert_eq!(c.evaluate(&s, 0.5, 0.0).unwrap(), None);
            assert!(c.evaluate(&s, 1.2, 0.0).unwrap().is_some());
        }
        assert!(field_value(&s, 1, -1.0, 0.0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let d = RadialLayeredStructure::<f32>::new(vec![2.0], vec![3.0], 1.0).unwrap();
        assert!((gpt(&d, 1).unwrap() - 4.0 * std::f32::consts::PI).abs() < 1e-5);
    }
}
