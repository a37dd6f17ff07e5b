//! Near-cloaking estimates for shrunken layered structures.
//!
//! Shrinking a structure by `ρ` and measuring on the disk `B_s` perturbs the
//! DtN map only through a Fourier multiplier: mode `k` picks up
//!
//! ```text
//! δ_k = 2k s⁻¹ ρ^2k M_k / (2πk s^2k − M_k ρ^2k)
//! ```
//!
//! so a structure whose first `N` GPTs vanish is silent on modes `k <= N`
//! and the perturbation decays like `ρ^(2N+2)`.
//!
//! The blow-up map `F_ρ` and the push-forward tensor turn the shrunken
//! insulated-core design into an anisotropic cloak occupying `1 < |x| < 2`.

use crate::error::{Error, Result};
use crate::gpt::scaled_gpt;
use crate::scalar::{pow2k, Real};
use crate::structure::RadialLayeredStructure;

fn require_unit_background<T: Real>(structure: &RadialLayeredStructure<T>) -> Result<()> {
    if structure.background() != T::one() {
        return Err(Error::Constraint(format!(
            "DtN perturbations are relative to unit background; got {}",
            structure.background()
        )));
    }
    Ok(())
}

fn check_geometry<T: Real>(structure: &RadialLayeredStructure<T>, rho: T, s: T) -> Result<()> {
    if !(rho > T::zero()) || !rho.is_finite() {
        return Err(Error::Domain(format!(
            "shrink factor must be positive, got {rho}"
        )));
    }
    if !(s > T::zero()) || !s.is_finite() {
        return Err(Error::Domain(format!(
            "measurement radius must be positive, got {s}"
        )));
    }
    let scaled = rho * structure.outer_radius();
    if !(scaled < s) {
        return Err(Error::Geometry {
            scaled_radius: scaled.to_f64().unwrap_or(f64::NAN),
            s: s.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// `w q / (1 − w q)` with a pole check on the denominator.
fn resolvent<T: Real>(w: T, q: T, k: u32) -> Result<T> {
    let denom = T::one() - w * q;
    if !(denom.abs() >= T::lit(1e-12)) {
        return Err(Error::Pole { mode: k });
    }
    Ok(w * q / denom)
}

/// DtN eigenvalue difference `δ_k` for the structure shrunk by `rho` inside
/// `B_s` (unit background). `δ_0 = 0`.
pub fn dtn_eigenvalue_perturbation<T: Real>(
    structure: &RadialLayeredStructure<T>,
    rho: T,
    s: T,
    k: u32,
) -> Result<T> {
    require_unit_background(structure)?;
    check_geometry(structure, rho, s)?;
    if k == 0 {
        return Ok(T::zero());
    }
    // M_k ρ^2k / (2πk s^2k) = (ρ r_1 / s)^2k · M_k / (2πk r_1^2k)
    let q = scaled_gpt(structure, k)?;
    let w = pow2k(rho * structure.outer_radius() / s, k);
    let kf = T::from_u32(k).unwrap();
    Ok(T::lit(2.0) * kf / s * resolvent(w, q, k)?)
}

/// Mode-`k` coefficient of `Λ_{B_2,B_ρ}[σ∘Ψ_{1/ρ}] − Λ_{B_2,∅}[1]` for an
/// insulated-core structure with outer radius 2.
pub fn insulated_dtn_perturbation<T: Real>(
    structure: &RadialLayeredStructure<T>,
    rho: T,
    k: u32,
) -> Result<T> {
    require_unit_background(structure)?;
    if !structure.has_insulated_core() {
        return Err(Error::Constraint("structure core is not insulating".into()));
    }
    let two = T::lit(2.0);
    if (structure.outer_radius() - two).abs() > T::epsilon() * T::lit(8.0) {
        return Err(Error::Constraint(format!(
            "outer radius must be 2, got {}",
            structure.outer_radius()
        )));
    }
    if !(rho > T::zero() && rho < T::one()) {
        return Err(Error::Domain(format!(
            "shrink factor must lie in (0, 1), got {rho}"
        )));
    }
    if k == 0 {
        return Ok(T::zero());
    }
    // (ρ/2)^2k M_k / (2πk) = ρ^2k · M_k / (2πk 2^2k)
    let q = scaled_gpt(structure, k)?;
    let w = pow2k(rho, k);
    Ok(T::from_u32(k).unwrap() * resolvent(w, q, k)?)
}

/// Mode-by-mode DtN perturbation summary.
#[derive(Debug, Clone, PartialEq)]
pub struct DtnPerturbationReport<T> {
    pub rho: T,
    pub s: T,
    /// `δ_0 … δ_{k_max}`.
    pub deltas: Vec<T>,
    /// `max_{1<=k<=k_max} |δ_k|`.
    pub sup_norm: T,
    /// Mode attaining `sup_norm` (0 when every δ vanishes).
    pub sup_mode: u32,
    /// Bound on `sup_{k>k_max} |δ_k|`; `None` when the structure extends
    /// beyond radius 2 and the GPT magnitude bound does not apply.
    pub tail_bound: Option<T>,
}

fn mode_deltas<T: Real>(
    structure: &RadialLayeredStructure<T>,
    rho: T,
    s: T,
    k_max: u32,
) -> Result<Vec<T>> {
    (0..=k_max)
        .map(|k| dtn_eigenvalue_perturbation(structure, rho, s, k))
        .collect()
}

fn sup_with_mode<T: Real>(deltas: &[T]) -> (T, u32) {
    deltas
        .iter()
        .enumerate()
        .skip(1)
        .fold((T::zero(), 0), |(best, mode), (k, d)| {
            if d.abs() > best {
                (d.abs(), k as u32)
            } else {
                (best, mode)
            }
        })
}

/// Bound on `sup_{k > k_max} |δ_k|` from `|M_k| <= 2πk 2^2k`:
///
/// `|δ_k| <= (2k/s) w^k / (1 − w^k)` with `w = (2ρ/s)^2`, maximized over
/// integers `k > k_max`.
pub fn tail_bound<T: Real>(rho: T, s: T, k_max: u32) -> Result<T> {
    let ratio = T::lit(2.0) * rho / s;
    if !(ratio < T::one()) {
        return Err(Error::TailUnavailable(format!(
            "2ρ/s = {ratio} must be below 1 for geometric decay"
        )));
    }
    let w = ratio * ratio;
    let first = k_max + 1;
    // k w^k peaks at k* = −1/ln w
    let k_star = -T::one() / w.ln();
    let term = |k: u32| T::from_u32(k).unwrap() * w.powi(k as i32);
    let peak = if k_star <= T::from_u32(first).unwrap() {
        term(first)
    } else {
        let lo = k_star.floor().to_u32().unwrap_or(first).max(first);
        term(lo).max(term(lo + 1))
    };
    Ok(T::lit(2.0) / s * peak / (T::one() - w.powi(first as i32)))
}

/// DtN perturbations for modes `0 … k_max` with their sup and tail bound.
pub fn operator_norm_estimate<T: Real>(
    structure: &RadialLayeredStructure<T>,
    rho: T,
    s: T,
    k_max: u32,
) -> Result<DtnPerturbationReport<T>> {
    if k_max == 0 {
        return Err(Error::Domain("k_max must be at least 1".into()));
    }
    let deltas = mode_deltas(structure, rho, s, k_max)?;
    let (sup_norm, sup_mode) = sup_with_mode(&deltas);
    let r1 = structure.outer_radius();
    let tail = if r1 > T::lit(2.0) {
        None
    } else {
        let reach = T::lit(2.0) * rho * r1;
        if reach > s {
            return Err(Error::TailUnavailable(format!(
                "2ρr_1 = {reach} exceeds s = {s}"
            )));
        }
        Some(tail_bound(rho, s, k_max)?)
    };
    Ok(DtnPerturbationReport {
        rho,
        s,
        deltas,
        sup_norm,
        sup_mode,
        tail_bound: tail,
    })
}

/// Least-squares fit of `log sup_k |δ_k|` against `log ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit<T> {
    pub slope: T,
    /// Fitted `log C` in `sup |δ| ≈ C ρ^slope`; observational only.
    pub log_constant: T,
    pub rhos: Vec<T>,
    pub sup_norms: Vec<T>,
}

/// Slope of the least-squares line through `(xs, ys)`.
pub fn least_squares_line<T: Real>(xs: &[T], ys: &[T]) -> Result<(T, T)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points".into()));
    }
    let n = T::from_usize_lossy(xs.len());
    let mx = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let my = ys.iter().fold(T::zero(), |a, &y| a + y) / n;
    let (sxx, sxy) = xs
        .iter()
        .zip(ys)
        .fold((T::zero(), T::zero()), |(sxx, sxy), (&x, &y)| {
            (sxx + (x - mx) * (x - mx), sxy + (x - mx) * (y - my))
        });
    if !(sxx > T::zero()) {
        return Err(Error::DegenerateFit("abscissae are not distinct".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Fitted decay exponent of the sup-mode DtN perturbation in `ρ`.
pub fn decay_rate<T: Real>(
    structure: &RadialLayeredStructure<T>,
    s: T,
    rho_list: &[T],
    k_max: u32,
) -> Result<DecayFit<T>> {
    if k_max == 0 {
        return Err(Error::Domain("k_max must be at least 1".into()));
    }
    let mut sup_norms = Vec::with_capacity(rho_list.len());
    for &rho in rho_list {
        let (sup, _) = sup_with_mode(&mode_deltas(structure, rho, s, k_max)?);
        if sup == T::zero() {
            return Err(Error::DegenerateFit(format!(
                "DtN perturbation vanishes on all sampled modes at ρ = {rho}"
            )));
        }
        sup_norms.push(sup);
    }
    let xs: Vec<T> = rho_list.iter().map(|r| r.ln()).collect();
    let ys: Vec<T> = sup_norms.iter().map(|v| v.ln()).collect();
    let (slope, log_constant) = least_squares_line(&xs, &ys)?;
    Ok(DecayFit {
        slope,
        log_constant,
        rhos: rho_list.to_vec(),
        sup_norms,
    })
}

fn check_blowup_rho<T: Real>(rho: T) -> Result<()> {
    if !(rho > T::zero() && rho < T::lit(1.5)) {
        return Err(Error::Domain(format!(
            "blow-up parameter must lie in (0, 3/2), got {rho}"
        )));
    }
    Ok(())
}

/// Radial profile of `F_ρ`: `|F_ρ(x)| = f(|x|)`.
pub fn radial_blowup<T: Real>(rho: T, t: T) -> T {
    let three = T::lit(3.0);
    if t >= T::lit(1.5) {
        t
    } else if t >= rho {
        (three - three * rho) / (three - T::lit(2.0) * rho) + t / (three - T::lit(2.0) * rho)
    } else {
        t / rho
    }
}

/// Inverse of [`radial_blowup`].
pub fn radial_blowup_inverse<T: Real>(rho: T, r: T) -> T {
    let three = T::lit(3.0);
    if r >= T::lit(1.5) {
        r
    } else if r >= T::one() {
        (three - T::lit(2.0) * rho) * r - (three - three * rho)
    } else {
        rho * r
    }
}

fn norm2<T: Real>(p: [T; 2]) -> T {
    p[0].hypot(p[1])
}

fn check_in_disk<T: Real>(point: [T; 2]) -> Result<T> {
    let r = norm2(point);
    if !(r <= T::lit(2.0) * (T::one() + T::epsilon() * T::lit(4.0))) {
        return Err(Error::Domain(format!(
            "point ({}, {}) lies outside the disk of radius 2",
            point[0], point[1]
        )));
    }
    Ok(r)
}

/// Blow-up map `F_ρ : B_2 → B_2`.
pub fn blowup_map<T: Real>(rho: T, point: [T; 2]) -> Result<[T; 2]> {
    check_blowup_rho(rho)?;
    let t = check_in_disk(point)?;
    if t == T::zero() {
        return Ok(point);
    }
    let scale = radial_blowup(rho, t) / t;
    Ok([point[0] * scale, point[1] * scale])
}

/// `F_ρ⁻¹`.
pub fn inverse_blowup_map<T: Real>(rho: T, point: [T; 2]) -> Result<[T; 2]> {
    check_blowup_rho(rho)?;
    let r = check_in_disk(point)?;
    if r == T::zero() {
        return Ok(point);
    }
    let scale = radial_blowup_inverse(rho, r) / r;
    Ok([point[0] * scale, point[1] * scale])
}

/// Anisotropic conductivity `(F_ρ)_*(σ∘Ψ_{1/ρ})` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushforwardTensor<T> {
    pub point: [T; 2],
    /// Symmetric 2×2 matrix.
    pub matrix: [[T; 2]; 2],
}

impl<T: Real> PushforwardTensor<T> {
    pub fn determinant(&self) -> T {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn is_symmetric(&self) -> bool {
        self.matrix[0][1] == self.matrix[1][0]
    }
}

/// Evaluates the push-forward tensor at `point`.
///
/// At the pulled-back point `y = F_ρ⁻¹(x)` with `t = |y|`, `DF_ρ` has radial
/// eigenvalue `f'(t)` and tangential eigenvalue `f(t)/t`, so the tensor has
/// radial eigenvalue `σ f' t / f` and tangential eigenvalue `σ f / (t f')`,
/// where `σ` is the shrunken conductivity at `y`.
pub fn pushforward_tensor<T: Real>(
    structure: &RadialLayeredStructure<T>,
    rho: T,
    point: [T; 2],
) -> Result<PushforwardTensor<T>> {
    check_blowup_rho(rho)?;
    let r = check_in_disk(point)?;
    let t = radial_blowup_inverse(rho, r);
    let sigma = structure.conductivity_at(t / rho);
    if sigma == T::zero() {
        return Err(Error::CloakedHole);
    }
    let (radial, tangential) = if r >= T::lit(1.5) || r < T::one() {
        (sigma, sigma)
    } else {
        let slope = (T::lit(3.0) - T::lit(2.0) * rho).recip();
        let stretch = r / t;
        (sigma * slope / stretch, sigma * stretch / slope)
    };
    let matrix = if r == T::zero() {
        [[radial, T::zero()], [T::zero(), radial]]
    } else {
        let (c, s) = (point[0] / r, point[1] / r);
        let diff = radial - tangential;
        let off = diff * c * s;
        [
            [tangential + diff * c * c, off],
            [off, tangential + diff * s * s],
        ]
    };
    Ok(PushforwardTensor { point, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn disk() -> RadialLayeredStructure<f64> {
        RadialLayeredStructure::<f64>::new(vec![2.0], vec![3.0], 1.0).unwrap()
    }

    #[test]
    fn single_disk_delta_by_hand() {
        let d = dtn_eigenvalue_perturbation(&disk(), 0.1, 2.0, 1).unwrap();
        assert_relative_eq!(d, 0.04 / 7.96, max_relative = 1e-13);
        assert_eq!(
            dtn_eigenvalue_perturbation(&disk(), 0.1, 2.0, 0).unwrap(),
            0.0
        );
    }

    #[test]
    fn homogeneous_deltas_vanish() {
        let h = RadialLayeredStructure::<f64>::new(vec![2.0, 1.0], vec![1.0, 1.0], 1.0).unwrap();
        for k in 0..10 {
            assert_eq!(dtn_eigenvalue_perturbation(&h, 0.3, 2.0, k).unwrap(), 0.0);
        }
        let rep = operator_norm_estimate(&h, 0.1, 2.0, 10).unwrap();
        assert_eq!(rep.sup_norm, 0.0);
        assert!(rep.tail_bound.unwrap() > 0.0);
    }

    #[test]
    fn geometry_and_constraint_errors() {
        assert!(matches!(
            dtn_eigenvalue_perturbation(&disk(), 1.0, 2.0, 1),
            Err(Error::Geometry { .. })
        ));
        let bg = RadialLayeredStructure::<f64>::new(vec![2.0], vec![3.0], 2.0).unwrap();
        assert!(dtn_eigenvalue_perturbation(&bg, 0.1, 2.0, 1).is_err());
        assert!(matches!(
            insulated_dtn_perturbation(&disk(), 0.1, 1),
            Err(Error::Constraint(_))
        ));
        let small =
            RadialLayeredStructure::<f64>::new(vec![1.5, 1.0], vec![2.0, 0.0], 1.0).unwrap();
        assert!(matches!(
            insulated_dtn_perturbation(&small, 0.1, 1),
            Err(Error::Constraint(_))
        ));
        // reach 2ρr_1 = 2.4 > s
        assert!(matches!(
            operator_norm_estimate(&disk(), 0.6, 2.0, 5),
            Err(Error::TailUnavailable(_))
        ));
    }

    #[test]
    fn wide_structures_have_no_analytic_tail() {
        let wide = RadialLayeredStructure::<f64>::new(vec![3.0], vec![3.0], 1.0).unwrap();
        let rep = operator_norm_estimate(&wide, 0.1, 2.0, 5).unwrap();
        assert!(rep.tail_bound.is_none());
    }

    #[test]
    fn insulated_matches_general_formula() {
        let s = RadialLayeredStructure::<f64>::new(vec![2.0, 1.5, 1.0], vec![0.7, 3.0, 0.0], 1.0)
            .unwrap();
        for k in 0..12 {
            let a = insulated_dtn_perturbation(&s, 0.2, k).unwrap();
            let b = dtn_eigenvalue_perturbation(&s, 0.2, 2.0, k).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn single_disk_sup_is_first_mode() {
        let rep = operator_norm_estimate(&disk(), 0.1, 2.0, 50).unwrap();
        assert_eq!(rep.sup_mode, 1);
        assert_relative_eq!(rep.sup_norm, 0.04 / 7.96, max_relative = 1e-13);
        assert_eq!(rep.deltas.len(), 51);
        assert_eq!(rep.deltas[0], 0.0);
    }

    #[test]
    fn tail_bound_dominates_extension() {
        let s = RadialLayeredStructure::<f64>::new(vec![2.0, 1.2], vec![0.4, 6.0], 1.0).unwrap();
        let (rho, sr, kmax) = (0.3, 2.0, 10);
        let tail = operator_norm_estimate(&s, rho, sr, kmax)
            .unwrap()
            .tail_bound
            .unwrap();
        for k in kmax + 1..=2 * kmax {
            assert!(dtn_eigenvalue_perturbation(&s, rho, sr, k).unwrap().abs() <= tail);
        }
    }

    #[test]
    fn decay_of_single_disk() {
        let fit = decay_rate(&disk(), 2.0, &[0.1, 0.05, 0.025], 50).unwrap();
        assert!((fit.slope - 2.0).abs() < 0.1, "{}", fit.slope);
        let h = RadialLayeredStructure::<f64>::new(vec![2.0], vec![1.0], 1.0).unwrap();
        assert!(matches!(
            decay_rate(&h, 2.0, &[0.1, 0.05], 10),
            Err(Error::DegenerateFit(_))
        ));
        assert!(decay_rate(&disk(), 2.0, &[0.1, 0.1], 10).is_err());
    }

    #[test]
    fn blowup_map_cases() {
        let x = blowup_map(0.1, [0.0, 2.0]).unwrap();
        assert_eq!(x, [0.0, 2.0]);
        let y = blowup_map(0.1, [0.1 / 2f64.sqrt(), 0.1 / 2f64.sqrt()]).unwrap();
        assert_relative_eq!(norm2(y), 1.0, max_relative = 1e-14);
        let z = blowup_map(0.1, [1.0, 0.0]).unwrap();
        assert_relative_eq!(z[0], 3.7 / 2.8, max_relative = 1e-14);
        assert!(blowup_map(0.1, [2.0, 1.0]).is_err());
        assert!(blowup_map(1.5, [1.0, 0.0]).is_err());
        assert_eq!(blowup_map(0.3, [0.0, 0.0]).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn pushforward_by_hand() {
        let t = pushforward_tensor(&disk(), 0.1, [3.7 / 2.8, 0.0]).unwrap();
        assert_relative_eq!(t.matrix[0][0], 1.0 / 3.7, max_relative = 1e-12);
        assert_relative_eq!(t.matrix[1][1], 3.7, max_relative = 1e-12);
        assert_eq!(t.matrix[0][1], 0.0);
        let id = pushforward_tensor(&disk(), 0.1, [1.0, 1.2]).unwrap();
        assert_eq!(id.matrix, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn pushforward_hole() {
        let s = RadialLayeredStructure::<f64>::new(vec![2.0, 1.0], vec![3.0, 0.0], 1.0).unwrap();
        assert!(matches!(
            pushforward_tensor(&s, 0.1, [0.5, 0.0]),
            Err(Error::CloakedHole)
        ));
        // device region sits at 1 < |x| < 3/2 after the blow-up
        let t = pushforward_tensor(&s, 0.1, [1.02, 0.0]).unwrap();
        assert_relative_eq!(t.determinant(), 9.0, max_relative = 1e-12);
    }
}
