//! Concentric-disk conductivity profiles.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Piecewise-constant radial conductivity made of concentric disks.
///
/// Region `A_0` is the exterior `r > radii[0]` with conductivity
/// `background`. Annulus `j` (1-based) is `radii[j] < r <= radii[j-1]` with
/// conductivity `conductivities[j-1]`; the last entry of `conductivities`
/// belongs to the core disk `r <= radii[last]`, which may be insulating (0).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialLayeredStructure<T> {
    radii: Vec<T>,
    conductivities: Vec<T>,
    background: T,
}

impl<T: Real> RadialLayeredStructure<T> {
    pub fn new(radii: Vec<T>, conductivities: Vec<T>, background: T) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidStructure(
                "at least one radius is required".into(),
            ));
        }
        if radii.len() != conductivities.len() {
            return Err(Error::InvalidStructure(format!(
                "{} radii but {} conductivities",
                radii.len(),
                conductivities.len()
            )));
        }
        if !(background.is_finite() && background > T::zero()) {
            return Err(Error::InvalidStructure(format!(
                "background conductivity must be positive, got {background}"
            )));
        }
        for (i, r) in radii.iter().enumerate() {
            if !(r.is_finite() && *r > T::zero()) {
                return Err(Error::InvalidStructure(format!(
                    "radius {} must be positive, got {r}",
                    i + 1
                )));
            }
        }
        for (i, w) in radii.windows(2).enumerate() {
            if w[1] >= w[0] {
                return Err(Error::InvalidStructure(format!(
                    "radii must be strictly decreasing (r_{} = {} <= r_{} = {})",
                    i + 1,
                    w[0],
                    i + 2,
                    w[1]
                )));
            }
        }
        let last = conductivities.len() - 1;
        for (i, s) in conductivities.iter().enumerate() {
            if !s.is_finite() || *s < T::zero() {
                return Err(Error::InvalidStructure(format!(
                    "conductivity {} must be finite and non-negative, got {s}",
                    i + 1
                )));
            }
            if *s == T::zero() && i != last {
                return Err(Error::InvalidStructure(format!(
                    "only the core may be insulating; conductivity {} is zero",
                    i + 1
                )));
            }
        }
        Ok(Self {
            radii,
            conductivities,
            background,
        })
    }

    /// Single homogeneous disk of radius `radius` matching the background.
    pub fn homogeneous(radius: T, background: T) -> Result<Self> {
        Self::new(vec![radius], vec![background], background)
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn conductivities(&self) -> &[T] {
        &self.conductivities
    }

    pub fn background(&self) -> T {
        self.background
    }

    /// Number of interfaces, `N + 1`.
    pub fn layer_count(&self) -> usize {
        self.radii.len()
    }

    pub fn outer_radius(&self) -> T {
        self.radii[0]
    }

    pub fn core_radius(&self) -> T {
        *self.radii.last().unwrap()
    }

    pub fn core_conductivity(&self) -> T {
        *self.conductivities.last().unwrap()
    }

    pub fn has_insulated_core(&self) -> bool {
        self.core_conductivity() == T::zero()
    }

    /// Conductivity just outside interface `j` (0-based): the background
    /// for `j = 0`, otherwise the previous annulus.
    pub(crate) fn outer_conductivity(&self, j: usize) -> T {
        if j == 0 {
            self.background
        } else {
            self.conductivities[j - 1]
        }
    }

    /// Contrasts `(σ_j − σ_{j−1}) / (σ_j + σ_{j−1})` for every interface.
    pub fn contrasts(&self) -> Vec<T> {
        (0..self.layer_count())
            .map(|j| {
                let inner = self.conductivities[j];
                let outer = self.outer_conductivity(j);
                (inner - outer) / (inner + outer)
            })
            .collect()
    }

    /// Region index containing radius `r`: 0 for the exterior, `j` for
    /// annulus `j`, `N + 1` for the core. Interfaces belong to the inner side.
    pub fn region_of(&self, r: T) -> usize {
        self.radii.iter().take_while(|&&rj| r <= rj).count()
    }

    /// Conductivity at radius `r`.
    pub fn conductivity_at(&self, r: T) -> T {
        match self.region_of(r) {
            0 => self.background,
            j => self.conductivities[j - 1],
        }
    }

    /// Same structure shrunk by `rho` (radii multiplied by `rho`).
    pub fn scaled(&self, rho: T) -> Result<Self> {
        Self::new(
            self.radii.iter().map(|&r| r * rho).collect(),
            self.conductivities.clone(),
            self.background,
        )
    }

    /// Same geometry with every conductivity multiplied by `c`.
    pub fn with_conductivity_scale(&self, c: T) -> Result<Self> {
        Self::new(
            self.radii.clone(),
            self.conductivities.iter().map(|&s| s * c).collect(),
            self.background * c,
        )
    }
}
