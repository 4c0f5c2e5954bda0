//! Conserved-state algebra, admissibility checks and directional 1D reduction.
//!
//! The solver works on the conserved variables u = (rho, m, E) where `m` is
//! the momentum vector of dimension `D` and `E` the total mechanical energy
//! density. A state is admissible for a covolume `b` when rho > 0,
//! 1 - b*rho > 0 and the specific internal energy e(u) is positive.

use std::ops::{Add, Mul, Neg, Sub};

/// Conserved variables at one grid node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservedState<const D: usize> {
    pub rho: f64,
    pub momentum: [f64; D],
    pub energy: f64,
}

/// One-dimensional reduction of a state along a unit direction `n`:
/// density, normal momentum, reduced total energy
/// (tangential kinetic energy removed) and Gamma = rho * gamma.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectedState {
    pub rho: f64,
    pub mn: f64,
    pub en: f64,
    pub gamma_rho: f64,
}

pub fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let mut s = 0.0;
    for k in 0..D {
        s += a[k] * b[k];
    }
    s
}

pub fn norm<const D: usize>(a: &[f64; D]) -> f64 {
    dot(a, a).sqrt()
}

impl<const D: usize> ConservedState<D> {
    pub const ZERO: Self = ConservedState {
        rho: 0.0,
        momentum: [0.0; D],
        energy: 0.0,
    };

    pub fn new(rho: f64, momentum: [f64; D], energy: f64) -> Self {
        ConservedState {
            rho,
            momentum,
            energy,
        }
    }

    pub fn velocity(&self) -> [f64; D] {
        let mut v = self.momentum;
        for vk in v.iter_mut() {
            *vk /= self.rho;
        }
        v
    }

    /// rho * e(u) = E - |m|^2 / (2 rho), evaluated in one expression.
    #[inline]
    pub fn internal_energy_density(&self) -> f64 {
        self.energy - dot(&self.momentum, &self.momentum) / (2.0 * self.rho)
    }

    /// Specific internal energy e(u) = (E - |m|^2/(2 rho)) / rho.
    #[inline]
    pub fn specific_internal_energy(&self) -> f64 {
        self.internal_energy_density() / self.rho
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.energy.is_finite() && self.momentum.iter().all(|m| m.is_finite())
    }

    /// Membership in the admissible set: rho > 0, 1 - b rho > 0, e(u) > 0.
    /// Strict inequalities, no epsilon slack.
    pub fn is_admissible(&self, b: f64) -> bool {
        self.is_finite()
            && self.rho > 0.0
            && 1.0 - b * self.rho > 0.0
            && self.internal_energy_density() > 0.0
    }

    /// Surrogate exponent gamma = 1 + p (1 - b rho) / (rho e). Requires an
    /// admissible state and p >= 0, in which case gamma >= 1.
    pub fn gamma_of(&self, p: f64, b: f64) -> f64 {
        1.0 + p * (1.0 - b * self.rho) / self.internal_energy_density()
    }

    /// Reduce to the 1D data of the directional Riemann problem: the
    /// tangential kinetic energy is removed from E and gamma is folded
    /// into Gamma = rho * gamma.
    pub fn project(&self, p: f64, b: f64, n: &[f64; D]) -> ProjectedState {
        let mn = dot(&self.momentum, n);
        let mut tang_sq = 0.0;
        for k in 0..D {
            let t = self.momentum[k] - mn * n[k];
            tang_sq += t * t;
        }
        ProjectedState {
            rho: self.rho,
            mn,
            en: self.energy - tang_sq / (2.0 * self.rho),
            gamma_rho: self.rho * self.gamma_of(p, b),
        }
    }

    /// Full flux matrix f(u) = (m; v (x) m + p I; v (E + p)), one row block
    /// per conserved field, each row a d-vector.
    pub fn flux(&self, p: f64) -> Flux<D> {
        let v = self.velocity();
        let mut momentum = [[0.0; D]; D];
        for k in 0..D {
            for l in 0..D {
                momentum[k][l] = v[k] * self.momentum[l];
            }
            momentum[k][k] += p;
        }
        let mut energy = [0.0; D];
        for l in 0..D {
            energy[l] = v[l] * (self.energy + p);
        }
        Flux {
            mass: self.momentum,
            momentum,
            energy,
        }
    }

    /// Directional flux f(u) . c, the form used in the graph scheme.
    #[inline]
    pub fn flux_dot(&self, p: f64, c: &[f64; D]) -> ConservedState<D> {
        let mc = dot(&self.momentum, c);
        let vc = mc / self.rho;
        let mut mom = [0.0; D];
        for k in 0..D {
            mom[k] = vc * self.momentum[k] + p * c[k];
        }
        ConservedState {
            rho: mc,
            momentum: mom,
            energy: vc * (self.energy + p),
        }
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = self.rho.abs().max(self.energy.abs());
        for k in 0..D {
            m = m.max(self.momentum[k].abs());
        }
        m
    }
}

impl ProjectedState {
    pub fn gamma(&self) -> f64 {
        self.gamma_rho / self.rho
    }

    /// Specific internal energy of the reduced state; identical to the full
    /// state's e(u) because only tangential kinetic energy was removed.
    pub fn specific_internal_energy(&self) -> f64 {
        (self.en - self.mn * self.mn / (2.0 * self.rho)) / self.rho
    }

    pub fn velocity(&self) -> f64 {
        self.mn / self.rho
    }

    pub fn is_admissible(&self, b: f64) -> bool {
        self.rho > 0.0
            && 1.0 - b * self.rho > 0.0
            && self.en - self.mn * self.mn / (2.0 * self.rho) > 0.0
    }
}

/// Flux matrix of the Euler system, stored by field rows.
#[derive(Clone, Copy, Debug)]
pub struct Flux<const D: usize> {
    pub mass: [f64; D],
    pub momentum: [[f64; D]; D],
    pub energy: [f64; D],
}

impl<const D: usize> Flux<D> {
    pub fn dot(&self, c: &[f64; D]) -> ConservedState<D> {
        let mut mom = [0.0; D];
        for k in 0..D {
            mom[k] = dot(&self.momentum[k], c);
        }
        ConservedState {
            rho: dot(&self.mass, c),
            momentum: mom,
            energy: dot(&self.energy, c),
        }
    }
}

impl<const D: usize> Add for ConservedState<D> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut m = self.momentum;
        for k in 0..D {
            m[k] += rhs.momentum[k];
        }
        ConservedState {
            rho: self.rho + rhs.rho,
            momentum: m,
            energy: self.energy + rhs.energy,
        }
    }
}

impl<const D: usize> Sub for ConservedState<D> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut m = self.momentum;
        for k in 0..D {
            m[k] -= rhs.momentum[k];
        }
        ConservedState {
            rho: self.rho - rhs.rho,
            momentum: m,
            energy: self.energy - rhs.energy,
        }
    }
}

impl<const D: usize> Mul<f64> for ConservedState<D> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        let mut m = self.momentum;
        for k in 0..D {
            m[k] *= s;
        }
        ConservedState {
            rho: self.rho * s,
            momentum: m,
            energy: self.energy * s,
        }
    }
}

impl<const D: usize> Neg for ConservedState<D> {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility_examples() {
        let u = ConservedState::<1>::new(1.0, [0.0], 1.0);
        assert!(u.is_admissible(0.0));

        // kinetic energy equal to total energy: e = 0, not admissible
        let u = ConservedState::<1>::new(1.0, [2.0], 2.0);
        assert!(!u.is_admissible(0.0));

        // beyond maximum compressibility
        let u = ConservedState::<1>::new(3.0, [0.0], 1.0);
        assert!(!u.is_admissible(0.5));
    }

    #[test]
    fn gamma_of_examples() {
        // ideal gas state rho=1, e=2.5, p=1 inverts to gamma = 1.4
        let u = ConservedState::<1>::new(1.0, [0.0], 2.5);
        assert!((u.gamma_of(1.0, 0.0) - 1.4).abs() < 1e-15);

        // zero pressure floors gamma at exactly 1
        assert_eq!(u.gamma_of(0.0, 0.0), 1.0);

        // round trip through the covolume EOS with b = 0.1
        let rho = 1.0;
        let e = 1.0;
        let b = 0.1;
        let p = 0.4 * rho * e / (1.0 - b * rho);
        let u = ConservedState::<1>::new(rho, [0.0], rho * e);
        assert!((u.gamma_of(p, b) - 1.4).abs() < 1e-14);
    }

    #[test]
    fn flux_examples() {
        // zero velocity: only the pressure block survives
        let u = ConservedState::<1>::new(1.0, [0.0], 1.0);
        let f = u.flux(0.4);
        assert_eq!(f.mass, [0.0]);
        assert_eq!(f.momentum, [[0.4]]);
        assert_eq!(f.energy, [0.0]);

        let u = ConservedState::<1>::new(1.0, [1.0], 2.0);
        let f = u.flux(1.0);
        assert_eq!(f.mass, [1.0]);
        assert_eq!(f.momentum, [[2.0]]);
        assert_eq!(f.energy, [3.0]);

        // momentum flux block is symmetric since m = rho v
        let u = ConservedState::<2>::new(2.0, [1.0, 3.0], 10.0);
        let f = u.flux(0.7);
        assert!((f.momentum[0][1] - f.momentum[1][0]).abs() < 1e-15);
    }

    #[test]
    fn flux_dot_matches_matrix_form() {
        let u = ConservedState::<2>::new(1.3, [0.4, -0.7], 3.1);
        let c = [0.3, -0.2];
        let a = u.flux(0.9).dot(&c);
        let b = u.flux_dot(0.9, &c);
        assert!((a - b).max_abs() < 1e-15);
    }

    #[test]
    fn flux_normal_mass_component_is_normal_momentum() {
        let u = ConservedState::<2>::new(1.2, [0.5, -0.3], 2.0);
        let n = [3.0 / 5.0, 4.0 / 5.0];
        let f = u.flux(0.8);
        assert!((f.dot(&n).rho - dot(&u.momentum, &n)).abs() < 1e-15);
    }

    #[test]
    fn project_examples() {
        // 1D: no tangential momentum, reduced energy equals E
        let u = ConservedState::<1>::new(1.0, [0.7], 2.0);
        let p = u.project(0.4, 0.0, &[-1.0]);
        assert_eq!(p.en, u.energy);
        assert_eq!(p.mn, -0.7);

        // 2D hand evaluation
        let u = ConservedState::<2>::new(1.0, [1.0, 1.0], 3.0);
        let pr = u.project(0.5, 0.0, &[1.0, 0.0]);
        assert!((pr.en - 2.5).abs() < 1e-15);
        assert_eq!(pr.mn, 1.0);
        assert_eq!(pr.rho, u.rho);

        // rotating n by 90 degrees with m aligned to the old n
        let u = ConservedState::<2>::new(1.0, [2.0, 0.0], 5.0);
        let along = u.project(0.5, 0.0, &[1.0, 0.0]);
        let across = u.project(0.5, 0.0, &[0.0, 1.0]);
        assert_eq!(along.mn, 2.0);
        assert_eq!(across.mn, 0.0);
        assert_eq!(along.en, 5.0);
        assert!((across.en - (5.0 - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn project_reduces_energy() {
        let u = ConservedState::<2>::new(1.5, [0.3, -1.1], 4.0);
        let n = [1.0, 0.0];
        let pr = u.project(0.2, 0.0, &n);
        assert!(pr.en <= u.energy);
        assert!(pr.is_admissible(0.0));
        assert!((pr.specific_internal_energy() - u.specific_internal_energy()).abs() < 1e-14);
    }
}
