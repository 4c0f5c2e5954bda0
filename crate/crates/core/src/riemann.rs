//! Directional Riemann machinery: certified maximum-wavespeed bounds for the
//! extended covolume Riemann problem, auxiliary bar states and the surrogate
//! entropy used by the convex limiter.
//!
//! The pressure in the Riemann fan is modeled by one covolume law per side of
//! the contact (gamma jumps across it), which is what makes a guaranteed
//! upper bound on the maximum wave speed computable from oracle data alone.

pub mod exact;

use crate::error::{Error, Result};
use crate::state::{ConservedState, ProjectedState};

/// Certified wave-speed bound together with the star-pressure estimate that
/// produced it.
#[derive(Clone, Copy, Debug)]
pub struct WaveSpeedEstimate {
    pub lambda_hat: f64,
    pub pstar: f64,
    pub iterations: u32,
}

/// Parameters of the surrogate entropy functional.
#[derive(Clone, Copy, Debug)]
pub struct SurrogateParams {
    pub gamma_min: f64,
    pub s_min: f64,
    pub b: f64,
}

/// One side of the two-wave function: covolume gas data.
#[derive(Clone, Copy, Debug)]
pub(crate) struct WaveSide {
    pub rho: f64,
    pub v: f64,
    pub p: f64,
    pub gamma: f64,
    /// specific covolume slack tau - b = (1 - b rho)/rho
    pub cov: f64,
    /// sound speed
    pub c: f64,
    /// shock-branch constants f(p) = (p - p_Z) sqrt(a / (p + bb))
    pub a: f64,
    pub bb: f64,
}

const GAMMA_ONE_EPS: f64 = 1e-12;

impl WaveSide {
    pub fn new(s: &ProjectedState, p: f64, b: f64) -> Result<Self> {
        if !s.is_admissible(b) {
            return Err(Error::invalid(format!(
                "non-admissible Riemann data (rho = {}, en = {})",
                s.rho, s.en
            )));
        }
        let gamma = s.gamma();
        if !(gamma >= 1.0 - GAMMA_ONE_EPS) || !p.is_finite() || p < 0.0 {
            return Err(Error::invalid(format!(
                "Riemann data needs gamma >= 1 and p >= 0 (gamma = {gamma}, p = {p})"
            )));
        }
        let gamma = gamma.max(1.0);
        let one_minus_brho = 1.0 - b * s.rho;
        Ok(WaveSide {
            rho: s.rho,
            v: s.mn / s.rho,
            p,
            gamma,
            cov: one_minus_brho / s.rho,
            c: (gamma * p / (s.rho * one_minus_brho)).sqrt(),
            a: 2.0 * one_minus_brho / ((gamma + 1.0) * s.rho),
            bb: p * (gamma - 1.0) / (gamma + 1.0),
        })
    }

    /// Two-wave function value and derivative at trial pressure `p`.
    /// Shock branch for p >= p_Z, rarefaction branch otherwise, with the
    /// gamma -> 1 rarefaction limit f = c (1 - b rho) ln(p / p_Z).
    pub fn eval(&self, p: f64) -> (f64, f64) {
        if p >= self.p {
            let q = (self.a / (p + self.bb)).sqrt();
            let f = (p - self.p) * q;
            let df = q * (1.0 - 0.5 * (p - self.p) / (p + self.bb));
            (f, df)
        } else if self.gamma > 1.0 + GAMMA_ONE_EPS {
            let alpha = (self.gamma - 1.0) / (2.0 * self.gamma);
            let k = 2.0 * self.c * self.cov * self.rho / (self.gamma - 1.0);
            if p == 0.0 {
                return (-k, f64::INFINITY);
            }
            let ratio = (p / self.p).powf(alpha);
            (k * (ratio - 1.0), k * alpha * ratio / p)
        } else {
            // zero-pressure side reduces to the shock branch above
            // (p >= p_Z = 0 always); this limit only serves gamma == 1
            // data handed in with positive pressure.
            let k = self.c * self.cov * self.rho;
            if p == 0.0 {
                return (f64::NEG_INFINITY, f64::INFINITY);
            }
            (k * (p / self.p).ln(), k / p)
        }
    }

    /// Extreme wave-speed coefficient: the signed offset from v is
    /// -+ coeff where coeff = Q/rho for a shock estimate and c for a
    /// rarefaction (head speed).
    pub fn speed_offset(&self, pstar: f64) -> f64 {
        if pstar > self.p {
            ((pstar + self.bb) / self.a).sqrt() / self.rho
        } else {
            self.c
        }
    }
}

/// Guaranteed upper bound on the maximum wave speed of the extended Riemann
/// problem with the given left/right data. The star pressure is bracketed
/// and the bound is evaluated at the right bracket endpoint, so it is
/// certified even if the iteration stops early.
pub fn lambda_max_bound(
    left: &ProjectedState,
    right: &ProjectedState,
    pl: f64,
    pr: f64,
    b: f64,
) -> Result<WaveSpeedEstimate> {
    let l = WaveSide::new(left, pl, b)?;
    let r = WaveSide::new(right, pr, b)?;
    let (pstar_hi, iterations) = star_pressure_upper_bound(&l, &r, 1e-10);
    Ok(finish_bound(&l, &r, pstar_hi, iterations))
}

fn finish_bound(l: &WaveSide, r: &WaveSide, pstar: f64, iterations: u32) -> WaveSpeedEstimate {
    let lambda_minus = l.v - l.speed_offset(pstar);
    let lambda_plus = r.v + r.speed_offset(pstar);
    let mut lambda_hat = lambda_minus.abs().max(lambda_plus.abs());
    if lambda_hat == 0.0 {
        // wave-ordering tie on non-constant data: floor at the sound speeds
        lambda_hat = l.c.max(r.c);
    }
    WaveSpeedEstimate {
        lambda_hat,
        pstar,
        iterations,
    }
}

/// Solve phi(p) = f_L(p) + f_R(p) + (vR - vL) = 0 for an upper bound of the
/// root. phi is increasing and concave, so a Newton step from the right
/// endpoint tightens the left end and a secant step tightens the right end.
/// Returns (right bracket endpoint, iterations).
pub(crate) fn star_pressure_upper_bound(l: &WaveSide, r: &WaveSide, rel_tol: f64) -> (f64, u32) {
    let dv = r.v - l.v;
    let phi = |p: f64| -> (f64, f64) {
        let (fl, dfl) = l.eval(p);
        let (fr, dfr) = r.eval(p);
        (fl + fr + dv, dfl + dfr)
    };

    let (phi0, _) = phi(0.0);
    if phi0 >= 0.0 {
        // no root with positive pressure: vacuum-adjacent data, the
        // rarefaction-only bound applies
        return (0.0, 0);
    }

    let tol = rel_tol * l.p.max(r.p).max(1.0);

    // primitive-variable guess, clamped into the positive range
    let guess = (0.5 * (l.p + r.p) - 0.125 * dv * (l.rho + r.rho) * (l.c + r.c))
        .max(1e-8 * l.p.max(r.p))
        .max(f64::MIN_POSITIVE);

    let mut lo = 0.0;
    let mut flo = phi0;
    let mut hi = guess;
    let mut iterations = 0u32;
    let (mut fhi, mut dfhi) = phi(hi);
    while fhi < 0.0 {
        lo = hi;
        flo = fhi;
        hi *= 4.0;
        let e = phi(hi);
        fhi = e.0;
        dfhi = e.1;
        iterations += 1;
        if iterations > 600 {
            // unreachable for finite data: the shock branches grow like sqrt(p)
            return (f64::INFINITY, iterations);
        }
    }

    while hi - lo > tol && fhi != 0.0 && iterations < 200 {
        iterations += 1;
        let mut progressed = false;
        // Newton from the right endpoint: lower bound of the root
        let n = hi - fhi / dfhi;
        // secant through the bracket: upper bound of the root
        let s = if flo.is_finite() {
            lo - flo * (hi - lo) / (fhi - flo)
        } else {
            0.5 * (lo + hi)
        };
        for cand in [n, s] {
            if cand > lo && cand < hi {
                let (f, df) = phi(cand);
                if f >= 0.0 {
                    hi = cand;
                    fhi = f;
                    dfhi = df;
                } else {
                    lo = cand;
                    flo = f;
                }
                progressed = true;
            }
        }
        if !progressed {
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                break;
            }
            let (f, df) = phi(mid);
            if f >= 0.0 {
                hi = mid;
                fhi = f;
                dfhi = df;
            } else {
                lo = mid;
                flo = f;
            }
        }
    }
    (hi, iterations)
}

/// Auxiliary bar state of the pair (i, j):
/// 0.5 (u_i + u_j) - (f(u_j) - f(u_i)) . c_ij / (2 d_ij).
pub fn bar_state<const D: usize>(
    ui: &ConservedState<D>,
    uj: &ConservedState<D>,
    pi: f64,
    pj: f64,
    cij: &[f64; D],
    dij: f64,
) -> Result<ConservedState<D>> {
    if !(dij > 0.0) {
        if *ui == *uj {
            return Ok(*ui);
        }
        return Err(Error::invalid(
            "bar state needs a positive viscosity on non-constant data",
        ));
    }
    let flux_diff = uj.flux_dot(pj, cij) - ui.flux_dot(pi, cij);
    Ok((*ui + *uj) * 0.5 - flux_diff * (0.5 / dij))
}

/// Covolume weight rho^gamma (1 - b rho)^(1 - gamma).
#[inline]
pub fn entropy_weight(rho: f64, gamma: f64, b: f64) -> f64 {
    if b == 0.0 {
        rho.powf(gamma)
    } else {
        rho.powf(gamma) * (1.0 - b * rho).powf(1.0 - gamma)
    }
}

/// Surrogate entropy S(u, gamma) = rho e(u) rho^-gamma (1 - b rho)^(gamma-1).
pub fn surrogate_entropy<const D: usize>(u: &ConservedState<D>, gamma: f64, b: f64) -> f64 {
    u.internal_energy_density() / entropy_weight(u.rho, gamma, b)
}

/// Limiter objective Psi(u) = rho e(u) - s_min rho^gamma (1 - b rho)^(1-gamma).
/// Defined whenever 0 < rho < 1/b; the internal energy may be negative.
pub fn psi_surrogate<const D: usize>(u: &ConservedState<D>, params: &SurrogateParams) -> f64 {
    u.internal_energy_density()
        - params.s_min * entropy_weight(u.rho, params.gamma_min, params.b)
}
