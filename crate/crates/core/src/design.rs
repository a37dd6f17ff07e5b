//! Gauss–Newton design of GPT-vanishing structures at fixed radii.
//!
//! Unknowns are the layer conductivities (optionally including the core);
//! equations are `M_k[σ] = 0` for `k = 1 … N`. Each iterate takes the
//! minimal-norm pseudoinverse step, halved until the conductivities stay
//! above a positivity floor and the scaled residual does not grow.

use crate::error::{Error, Result};
use crate::gpt::{balanced_factor, scaled_gpt, CascadeMatrix};
use crate::linalg::{default_rcond, pseudo_solve, Matrix};
use crate::scalar::{pow2k, Real};
use crate::structure::RadialLayeredStructure;

/// How the core conductivity enters the design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoreConstraint<T> {
    /// Core conductivity is an unknown like the annuli.
    Free,
    /// Core conductivity pinned to a value `>= 0`.
    Fixed(T),
    /// Insulating core, the same as `Fixed(0)`.
    Insulated,
}

impl<T: Real> CoreConstraint<T> {
    /// Pinned core value, if any.
    pub fn pinned(&self) -> Option<T> {
        match *self {
            CoreConstraint::Free => None,
            CoreConstraint::Fixed(v) => Some(v),
            CoreConstraint::Insulated => Some(T::zero()),
        }
    }
}

/// Radii `r_j = 2 − (j−1)/N`, `j = 1 … N+1`.
pub fn default_radii<T: Real>(order: usize) -> Vec<T> {
    let n = T::from_usize_lossy(order.max(1));
    (0..=order)
        .map(|i| T::lit(2.0) - T::from_usize_lossy(i) / n)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem<T> {
    pub order: usize,
    pub radii: Vec<T>,
    pub core: CoreConstraint<T>,
    pub background: T,
}

impl<T: Real> DesignProblem<T> {
    /// Problem of order `order` on the default radii with unit background.
    pub fn new(order: usize, core: CoreConstraint<T>) -> Self {
        Self {
            order,
            radii: default_radii(order),
            core,
            background: T::one(),
        }
    }

    pub fn with_radii(mut self, radii: Vec<T>) -> Self {
        self.radii = radii;
        self
    }

    pub fn with_background(mut self, background: T) -> Self {
        self.background = background;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidProblem("order must be at least 1".into()));
        }
        if self.radii.len() != self.order + 1 {
            return Err(Error::InvalidProblem(format!(
                "order {} needs {} radii, got {}",
                self.order,
                self.order + 1,
                self.radii.len()
            )));
        }
        if let CoreConstraint::Fixed(v) = self.core {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::InvalidProblem(format!(
                    "fixed core conductivity must be finite and non-negative, got {v}"
                )));
            }
        }
        // radii and background checks
        let probe = vec![self.background; self.radii.len()];
        RadialLayeredStructure::new(self.radii.clone(), probe, self.background)?;
        Ok(())
    }

    /// Number of unknown conductivities.
    pub fn free_unknowns(&self) -> usize {
        match self.core {
            CoreConstraint::Free => self.order + 1,
            _ => self.order,
        }
    }

    /// Structure with the free conductivities `sigma` and the pinned core.
    pub fn assemble(&self, sigma: &[T]) -> Result<RadialLayeredStructure<T>> {
        if sigma.len() != self.free_unknowns() {
            return Err(Error::InvalidProblem(format!(
                "expected {} free conductivities, got {}",
                self.free_unknowns(),
                sigma.len()
            )));
        }
        let mut all = sigma.to_vec();
        if let Some(core) = self.core.pinned() {
            all.push(core);
        }
        RadialLayeredStructure::new(self.radii.clone(), all, self.background)
    }

    /// `2πk r_1^2k`, the natural magnitude of `M_k`.
    pub fn mode_scale(&self, k: u32) -> T {
        T::two_pi() * T::from_u32(k).unwrap() * pow2k(self.radii[0], k)
    }
}

/// Alternating start `σ_j = 2^((−1)^j)` (times the background) over the free
/// unknowns.
pub fn initial_guess<T: Real>(problem: &DesignProblem<T>) -> Vec<T> {
    (1..=problem.free_unknowns())
        .map(|j| {
            let v = if j % 2 == 0 { T::lit(2.0) } else { T::lit(0.5) };
            v * problem.background
        })
        .collect()
}

/// `(M_1[σ], …, M_N[σ])`.
pub fn residual<T: Real>(problem: &DesignProblem<T>, sigma: &[T]) -> Result<Vec<T>> {
    let structure = problem.assemble(sigma)?;
    (1..=problem.order as u32)
        .map(|k| Ok(scaled_gpt(&structure, k)? * problem.mode_scale(k)))
        .collect()
}

/// `M_k / (2πk r_1^2k)` for `k = 1 … N`.
pub fn scaled_residual<T: Real>(problem: &DesignProblem<T>, sigma: &[T]) -> Result<Vec<T>> {
    let structure = problem.assemble(sigma)?;
    (1..=problem.order as u32)
        .map(|k| scaled_gpt(&structure, k))
        .collect()
}

fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Product of `factors` (applied first to last) and its derivative with
/// respect to each free conductivity. Unknown `j` appears in factor `j` via
/// `d_inner[j]` and in factor `j + 1` via `d_outer[j + 1]`.
fn product_with_derivatives<T: Real>(
    factors: &[CascadeMatrix<T>],
    d_inner: &[CascadeMatrix<T>],
    d_outer: &[CascadeMatrix<T>],
    unknowns: usize,
) -> (CascadeMatrix<T>, Vec<CascadeMatrix<T>>) {
    let n = factors.len();
    let mode = factors[0].mode;
    // prefix[j] = F_j ··· F_1 (prefix[0] = I); suffix[j] = F_n ··· F_{j+1}
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(CascadeMatrix::identity(mode));
    for f in factors {
        let next = *f * *prefix.last().unwrap();
        prefix.push(next);
    }
    let mut suffix = vec![CascadeMatrix::identity(mode); n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1] * factors[j];
    }
    let derivs = (0..unknowns)
        .map(|j| {
            // factor index j (0-based) is interface j+1
            let mut d = suffix[j + 1] * d_inner[j] * prefix[j];
            if j + 1 < n {
                d = d.add(&(suffix[j + 2] * d_outer[j + 1] * prefix[j + 1]));
            }
            d
        })
        .collect();
    (prefix[n], derivs)
}

/// Analytic Jacobian `∂M_k/∂σ_j` (rows `k = 1 … N`, columns free unknowns),
/// by product-rule differentiation of the cascade.
pub fn jacobian<T: Real>(problem: &DesignProblem<T>, sigma: &[T]) -> Result<Matrix<T>> {
    let structure = problem.assemble(sigma)?;
    let n = structure.layer_count();
    let p = problem.free_unknowns();
    let reference = structure.outer_radius();
    let mut jac = Matrix::zeros(problem.order, p);
    for k in 1..=problem.order as u32 {
        let mut factors = Vec::with_capacity(n);
        let mut d_inner = Vec::with_capacity(n);
        let mut d_outer = Vec::with_capacity(n);
        for j in 0..n {
            let r = structure.radii()[j];
            let inner = structure.conductivities()[j];
            let outer = structure.outer_conductivity(j);
            factors.push(balanced_factor(inner, outer, r, reference, k));
            // ∂/∂σ_in of the factor is itself with σ_in = 1, σ_out = 0
            d_inner.push(balanced_factor(T::one(), T::zero(), r, reference, k));
            d_outer.push(balanced_factor(T::zero(), T::one(), r, reference, k));
        }
        let (prod, derivs) = product_with_derivatives(&factors, &d_inner, &d_outer, p);
        let ratio = prod.lower_ratio()?;
        let scale = problem.mode_scale(k);
        for (j, d) in derivs.iter().enumerate() {
            let dratio = (d.p21 - ratio * d.p22) / prod.p22;
            jac.set(k as usize - 1, j, scale * dratio);
        }
    }
    Ok(jac)
}

/// Contrast-normalized transfer factor
/// `[[1, λ (r_ref/r)^2k], [λ (r/r_ref)^2k, 1]]`.
fn contrast_factor<T: Real>(lambda: T, radius: T, reference: T, k: u32) -> CascadeMatrix<T> {
    let ratio = pow2k(radius / reference, k);
    CascadeMatrix {
        p11: T::one(),
        p12: lambda / ratio,
        p21: lambda * ratio,
        p22: T::one(),
        mode: k,
    }
}

/// Lower-left entry of `∏_j [[1, λ_j (r_1/r_j)^2k], [λ_j (r_j/r_1)^2k, 1]]`
/// for `k = 1 … N`. It vanishes exactly where `M_k` does (the product is the
/// cascade divided by the positive factor `∏ (σ_j + σ_{j−1})`).
pub fn triangular_defect<T: Real>(problem: &DesignProblem<T>, sigma: &[T]) -> Result<Vec<T>> {
    let structure = problem.assemble(sigma)?;
    let lambdas = structure.contrasts();
    let reference = structure.outer_radius();
    Ok((1..=problem.order as u32)
        .map(|k| {
            structure
                .radii()
                .iter()
                .zip(&lambdas)
                .fold(CascadeMatrix::identity(k), |acc, (&r, &l)| {
                    contrast_factor(l, r, reference, k) * acc
                })
                .p21
        })
        .collect())
}

/// Analytic Jacobian of [`triangular_defect`].
#[allow(clippy::needless_range_loop)]
pub fn defect_jacobian<T: Real>(problem: &DesignProblem<T>, sigma: &[T]) -> Result<Matrix<T>> {
    let structure = problem.assemble(sigma)?;
    let n = structure.layer_count();
    let p = problem.free_unknowns();
    let lambdas = structure.contrasts();
    let reference = structure.outer_radius();
    let two = T::lit(2.0);
    let mut jac = Matrix::zeros(problem.order, p);
    for k in 1..=problem.order as u32 {
        let mut factors = Vec::with_capacity(n);
        let mut d_inner = Vec::with_capacity(n);
        let mut d_outer = Vec::with_capacity(n);
        for j in 0..n {
            let r = structure.radii()[j];
            let inner = structure.conductivities()[j];
            let outer = structure.outer_conductivity(j);
            let sum = inner + outer;
            let dlambda = contrast_factor(T::one(), r, reference, k);
            let dlambda = CascadeMatrix {
                p11: T::zero(),
                p22: T::zero(),
                ..dlambda
            };
            factors.push(contrast_factor(lambdas[j], r, reference, k));
            // ∂λ/∂σ_in = 2σ_out/(σ_in+σ_out)², ∂λ/∂σ_out = −2σ_in/(σ_in+σ_out)²
            d_inner.push(dlambda.scale(two * outer / (sum * sum)));
            d_outer.push(dlambda.scale(-two * inner / (sum * sum)));
        }
        let (_, derivs) = product_with_derivatives(&factors, &d_inner, &d_outer, p);
        for (j, d) in derivs.iter().enumerate() {
            jac.set(k as usize - 1, j, d.p21);
        }
    }
    Ok(jac)
}

/// Outcome of one pseudoinverse step.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussNewtonStep<T> {
    /// `σ − Δ` with `Δ = J⁺ b`.
    pub sigma: Vec<T>,
    pub increment: Vec<T>,
    /// Numerical rank of the Jacobian; below `min(N, p)` means the
    /// pseudoinverse discarded directions.
    pub rank: usize,
}

pub fn gauss_newton_step<T: Real>(
    sigma: &[T],
    residuals: &[T],
    jac: &Matrix<T>,
) -> Result<GaussNewtonStep<T>> {
    if jac.rows() != residuals.len() || jac.cols() != sigma.len() {
        return Err(Error::InvalidProblem(format!(
            "jacobian is {}x{} but there are {} residuals and {} unknowns",
            jac.rows(),
            jac.cols(),
            residuals.len(),
            sigma.len()
        )));
    }
    let ls = pseudo_solve(jac, residuals, default_rcond());
    let next = sigma
        .iter()
        .zip(&ls.solution)
        .map(|(&s, &d)| s - d)
        .collect();
    Ok(GaussNewtonStep {
        sigma: next,
        increment: ls.solution,
        rank: ls.rank,
    })
}

/// Which residual the Gauss–Newton iteration linearizes. Both share the
/// same roots; they differ in the path taken (and hence, for the
/// underdetermined free-core case, in which root is reached).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualForm {
    /// Lower-left entries of the contrast-normalized transfer product.
    #[default]
    TriangularDefect,
    /// The contracted GPTs `M_k` themselves.
    Gpt,
}

impl ResidualForm {
    pub fn other(self) -> Self {
        match self {
            ResidualForm::TriangularDefect => ResidualForm::Gpt,
            ResidualForm::Gpt => ResidualForm::TriangularDefect,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions<T> {
    pub max_iterations: usize,
    /// Bound on `max_k |M_k| / (2πk r_1^2k)`.
    pub residual_tolerance: T,
    pub damping: bool,
    pub max_halvings: usize,
    pub positivity_floor: T,
    pub residual_form: ResidualForm,
    /// Extra full steps taken after convergence while they strictly reduce
    /// the residual; drives `M_k` from the tolerance to rounding level.
    pub polish_steps: usize,
    /// On a stall, continue once from the current iterate with the other
    /// residual form.
    pub switch_on_stall: bool,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            residual_tolerance: T::lit(1e-10),
            damping: true,
            max_halvings: 30,
            positivity_floor: T::lit(1e-6),
            residual_form: ResidualForm::default(),
            polish_steps: 4,
            switch_on_stall: true,
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tolerance > T::zero()) {
            return Err(Error::InvalidProblem(
                "residual tolerance must be positive".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidProblem(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.positivity_floor > T::zero()) {
            return Err(Error::InvalidProblem(
                "positivity floor must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// No halving produced an admissible decreasing step.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport<T> {
    pub structure: RadialLayeredStructure<T>,
    pub converged: bool,
    pub termination: Termination,
    /// Accepted steps.
    pub iterations: usize,
    /// Max scaled residual at the start and after every accepted step.
    pub residual_history: Vec<T>,
    /// `M_1 … M_N` of the returned structure.
    pub final_residuals: Vec<T>,
    /// Steps whose Jacobian was numerically rank deficient.
    pub rank_deficient_steps: usize,
}

impl<T: Real> DesignReport<T> {
    pub fn max_conductivity(&self) -> T {
        self.structure
            .conductivities()
            .iter()
            .fold(T::neg_infinity(), |a, &b| a.max(b))
    }

    /// Smallest conductivity, ignoring an insulating core.
    pub fn min_conductivity(&self) -> T {
        self.structure
            .conductivities()
            .iter()
            .filter(|&&s| s > T::zero())
            .fold(T::infinity(), |a, &b| a.min(b))
    }
}

fn working_system<T: Real>(
    problem: &DesignProblem<T>,
    sigma: &[T],
    form: ResidualForm,
) -> Result<(Vec<T>, Matrix<T>)> {
    match form {
        ResidualForm::Gpt => Ok((residual(problem, sigma)?, jacobian(problem, sigma)?)),
        ResidualForm::TriangularDefect => Ok((
            triangular_defect(problem, sigma)?,
            defect_jacobian(problem, sigma)?,
        )),
    }
}

/// Runs the damped Gauss–Newton iteration from [`initial_guess`].
///
/// Non-convergence is reported through `converged = false`, not as an error.
pub fn solve_design<T: Real>(
    problem: &DesignProblem<T>,
    options: &SolverOptions<T>,
) -> Result<DesignReport<T>> {
    solve_design_from(problem, options, initial_guess(problem))
}

/// As [`solve_design`], starting from `start`.
pub fn solve_design_from<T: Real>(
    problem: &DesignProblem<T>,
    options: &SolverOptions<T>,
    start: Vec<T>,
) -> Result<DesignReport<T>> {
    problem.validate()?;
    options.validate()?;
    let p = problem.free_unknowns();
    let full_rank = p.min(problem.order);
    let mut sigma = start;
    let mut current = max_abs(&scaled_residual(problem, &sigma)?);
    let mut history = vec![current];
    let mut iterations = 0;
    let mut rank_deficient_steps = 0;
    let mut termination = Termination::MaxIterations;
    let mut form = options.residual_form;
    let mut switched = false;

    loop {
        if current <= options.residual_tolerance {
            termination = Termination::Converged;
            for _ in 0..options.polish_steps {
                if current == T::zero() {
                    break;
                }
                let (b, jac) = working_system(problem, &sigma, form)?;
                let step = gauss_newton_step(&sigma, &b, &jac)?;
                if !step
                    .sigma
                    .iter()
                    .all(|&s| s.is_finite() && s >= options.positivity_floor)
                {
                    break;
                }
                match scaled_residual(problem, &step.sigma) {
                    Ok(r) if max_abs(&r) < current => {
                        current = max_abs(&r);
                        sigma = step.sigma;
                        iterations += 1;
                        history.push(current);
                    }
                    _ => break,
                }
            }
            break;
        }
        if iterations >= options.max_iterations {
            break;
        }
        let (b, jac) = working_system(problem, &sigma, form)?;
        let step = gauss_newton_step(&sigma, &b, &jac)?;
        if step.rank < full_rank {
            rank_deficient_steps += 1;
        }

        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..=options.max_halvings {
            let candidate: Vec<T> = sigma
                .iter()
                .zip(&step.increment)
                .map(|(&s, &d)| s - t * d)
                .collect();
            let admissible = candidate
                .iter()
                .all(|&s| s.is_finite() && s >= options.positivity_floor);
            if admissible {
                if let Ok(r) = scaled_residual(problem, &candidate) {
                    let value = max_abs(&r);
                    if value.is_finite() && (!options.damping || value < current) {
                        accepted = Some((candidate, value));
                        break;
                    }
                }
            }
            t = t / T::lit(2.0);
        }
        match accepted {
            Some((next, value)) => {
                sigma = next;
                current = value;
                iterations += 1;
                history.push(current);
            }
            None if options.switch_on_stall && !switched => {
                switched = true;
                form = form.other();
            }
            None => {
                termination = Termination::Stalled;
                break;
            }
        }
    }

    let structure = problem.assemble(&sigma)?;
    let final_residuals = residual(problem, &sigma)?;
    Ok(DesignReport {
        structure,
        converged: termination == Termination::Converged,
        termination,
        iterations,
        residual_history: history,
        final_residuals,
        rank_deficient_steps,
    })
}
