//! Convex limiting: local density bounds (relaxed, with the covolume cap),
//! the surrogate-entropy floor, per-pair limiter coefficients via
//! Newton-secant or quadratic-Newton line searches, and the symmetric
//! application U_i^{n+1} = U_i^L + sum_j l_ij P_ij.
//!
//! Feasibility argument: each one-sided search runs on the scaled
//! correction Q_ij = n_i P_ij (n_i = stencil cardinality minus one), so the
//! node update is a convex combination of per-pair test states and any
//! pointwise reduction of the coefficients keeps it feasible.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::riemann::{entropy_weight, psi_surrogate, surrogate_entropy, SurrogateParams};
use crate::state::ConservedState;
use crate::update::{par_map, HighOrderUpdate, StageContext};

/// Per-node limiter bounds.
#[derive(Clone, Copy, Debug)]
pub struct NodeBounds {
    pub rho_min: f64,
    pub rho_max: f64,
    pub gamma_min: f64,
    /// enforced surrogate-entropy floor (relaxed like the density bounds;
    /// the strict stencil minimum clips smooth extrema and drops the
    /// scheme to first order there)
    pub s_min: f64,
    /// strict stencil-and-bar-state minimum, kept for the low-order
    /// entropy assertion
    pub s_min_strict: f64,
    /// covolume density cap that entered rho_max
    pub covolume_cap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimiterMethod {
    QuadraticNewton,
    NewtonSecant,
}

/// Outcome of one limited update.
pub struct LimiterResult<const D: usize> {
    pub states: Vec<ConservedState<D>>,
    /// symmetric coefficient per unordered pair
    pub ell: Vec<f64>,
    /// pairs whose coefficient ended below one
    pub activations: u64,
    pub line_search_iterations: u64,
    /// second-sweep row rescales (expected zero; counted to expose them)
    pub feasibility_rescues: u64,
}

/// First bounds pass: raw density extrema over the bar states, the strict
/// entropy minimum, and the local curvature estimates of the density and
/// the nodal entropy (beta-weighted second-difference ratios).
struct RawBounds {
    rho_min: f64,
    rho_max: f64,
    s_min: f64,
    d2_rho: f64,
    d2_s: f64,
}

fn raw_bounds<const D: usize>(ctx: &StageContext<'_, D>) -> Vec<RawBounds> {
    let g = ctx.graph;
    let s = ctx.snapshot;
    let b = ctx.b;
    par_map(g.n_nodes, |i| {
        let gamma = ctx.gamma_min[i];
        let ui = &s.states[i];
        let s_i = surrogate_entropy(ui, gamma, b);
        let mut out = RawBounds {
            rho_min: ui.rho,
            rho_max: ui.rho,
            s_min: s_i,
            d2_rho: 0.0,
            d2_s: 0.0,
        };
        let mut beta_sum = 0.0;
        for k in g.row(i) {
            let j = g.col[k] as usize;
            let bar = ctx.bar_of_entry(i, k);
            out.rho_min = out.rho_min.min(bar.rho);
            out.rho_max = out.rho_max.max(bar.rho);
            let s_j = surrogate_entropy(&s.states[j], gamma, b);
            out.s_min = out.s_min.min(s_j).min(surrogate_entropy(bar, gamma, b));
            out.d2_rho += g.betaij[k] * (ui.rho - s.states[j].rho);
            out.d2_s += g.betaij[k] * (s_i - s_j);
            beta_sum += g.betaij[k];
        }
        if beta_sum != 0.0 {
            out.d2_rho /= beta_sum;
            out.d2_s /= beta_sum;
        } else {
            out.d2_rho = 0.0;
            out.d2_s = 0.0;
        }
        out
    })
}

/// Bounds of every node: raw min/max over the bar states of the stencil,
/// relaxed by the averaged curvature and the mesh radius, capped by the
/// covolume compression limit. The surrogate-entropy floor is relaxed with
/// the same curvature/radius structure so smooth extrema stay second-order
/// accurate; the strict floor is retained alongside.
pub fn compute_bounds<const D: usize>(ctx: &StageContext<'_, D>) -> Vec<NodeBounds> {
    let raw = raw_bounds(ctx);
    let g = ctx.graph;
    let b = ctx.b;
    par_map(g.n_nodes, |i| {
        let gamma = ctx.gamma_min[i];
        let n_i = g.neighbor_count(i) as f64;
        let mut avg_rho = 0.0;
        let mut avg_s = 0.0;
        for k in g.row(i) {
            let j = g.col[k] as usize;
            avg_rho += 0.5 * (raw[i].d2_rho + raw[j].d2_rho);
            avg_s += 0.5 * (raw[i].d2_s + raw[j].d2_s);
        }
        let avg_rho = (avg_rho / (2.0 * n_i)).abs();
        let avg_s = (avg_s / (2.0 * n_i)).abs();
        let r_h = g.relaxation_radius(i);
        let rho_min = raw[i].rho_min;
        let rho_max = raw[i].rho_max;
        let cap_den = (gamma - 1.0) + 2.0 * b * rho_max;
        let covolume_cap = if cap_den > 0.0 {
            (1.0 + gamma) * rho_max / cap_den
        } else {
            f64::INFINITY
        };
        let s_min_strict = raw[i].s_min.max(0.0);
        // the relief is the larger of the curvature excursion and the
        // mesh-radius fraction; taking the smaller one leaves flat regions
        // with no slack at all and clips smooth features to first order
        NodeBounds {
            rho_min: (rho_min - avg_rho).min((1.0 - r_h) * rho_min),
            rho_max: (rho_max + avg_rho)
                .max((1.0 + r_h) * rho_max)
                .min(covolume_cap),
            gamma_min: gamma,
            s_min: (s_min_strict - avg_s)
                .min((1.0 - r_h) * s_min_strict)
                .max(0.0),
            s_min_strict,
            covolume_cap,
        }
    })
}

/// Bounds of one node (test-facing convenience; the bulk path is
/// `compute_bounds`).
pub fn node_bounds<const D: usize>(ctx: &StageContext<'_, D>, i: usize) -> Result<NodeBounds> {
    if ctx.graph.neighbor_count(i) == 0 {
        return Err(Error::invalid(format!("node {i} has an empty stencil")));
    }
    Ok(compute_bounds(ctx)[i])
}

/// Largest l in [0, 1] keeping the density of u + l q inside the bounds.
/// Closed form: the density is affine in l.
pub fn limit_density<const D: usize>(
    u: &ConservedState<D>,
    q: &ConservedState<D>,
    bounds: &NodeBounds,
) -> f64 {
    let dr = q.rho;
    if dr > 0.0 {
        ((bounds.rho_max - u.rho).max(0.0) / dr).min(1.0)
    } else if dr < 0.0 {
        ((bounds.rho_min - u.rho).min(0.0) / dr).min(1.0)
    } else {
        1.0
    }
}

fn psi_scale<const D: usize>(
    u: &ConservedState<D>,
    q: &ConservedState<D>,
    params: &SurrogateParams,
    l0: f64,
) -> f64 {
    let end = *u + *q * l0;
    psi_surrogate(u, params)
        .abs()
        .max(psi_surrogate(&end, params).abs())
        .max(1e-300)
}

/// Derivative of Psi along the ray u + l q.
fn psi_derivative<const D: usize>(
    u: &ConservedState<D>,
    q: &ConservedState<D>,
    params: &SurrogateParams,
) -> f64 {
    let rho = u.rho;
    let m2 = crate::state::dot(&u.momentum, &u.momentum);
    // d(rho e)/du . q
    let mut val = (m2 / (2.0 * rho * rho)) * q.rho + q.energy;
    for d in 0..D {
        val -= u.momentum[d] / rho * q.momentum[d];
    }
    // -(s_min W(rho))' rho_q with W' = rho^(g-1) (1-b rho)^(-g) (g - b rho)
    let g = params.gamma_min;
    let b = params.b;
    let wprime = if b == 0.0 {
        g * rho.powf(g - 1.0)
    } else {
        rho.powf(g - 1.0) * (1.0 - b * rho).powf(-g) * (g - b * rho)
    };
    val - params.s_min * wprime * q.rho
}

const ELL_TOL: f64 = 1e-12;
const PSI_REL_TOL: f64 = 1e-14;

/// Newton-secant line search for the largest l <= l0 with
/// Psi(u + l q) >= 0. Returns (l, iterations); the result is always a lower
/// bound of the exact root.
pub fn limit_entropy_newton_secant<const D: usize>(
    u: &ConservedState<D>,
    q: &ConservedState<D>,
    params: &SurrogateParams,
    l0: f64,
) -> Result<(f64, u32)> {
    check_search_preconditions(u, q, params, l0)?;
    let psi = |l: f64| psi_surrogate(&(*u + *q * l), params);
    let mut f_r = psi(l0);
    if f_r >= 0.0 {
        return Ok((l0, 0));
    }
    let scale = psi_scale(u, q, params, l0);
    let mut lo = 0.0;
    let mut f_l = psi(0.0);
    if f_l < 0.0 {
        // roundoff at the theorem boundary: nothing of the correction is safe
        return Ok((0.0, 0));
    }
    let mut hi = l0;
    let mut iters = 0u32;
    while hi - lo > ELL_TOL && f_l.abs() > PSI_REL_TOL * scale && iters < 100 {
        iters += 1;
        // secant through the bracket tightens the feasible (left) side,
        // Newton at the infeasible end tightens the right side
        let secant = lo - f_l * (hi - lo) / (f_r - f_l);
        let slope = psi_derivative(&(*u + *q * hi), q, params);
        let newton = if slope < 0.0 { hi - f_r / slope } else { f64::NAN };
        let mut progressed = false;
        for cand in [secant, newton] {
            if cand.is_finite() && cand > lo && cand < hi {
                let f = psi(cand);
                if f >= 0.0 {
                    lo = cand;
                    f_l = f;
                } else {
                    hi = cand;
                    f_r = f;
                }
                progressed = true;
            }
        }
        if !progressed {
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                break;
            }
            let f = psi(mid);
            if f >= 0.0 {
                lo = mid;
                f_l = f;
            } else {
                hi = mid;
                f_r = f;
            }
        }
    }
    Ok((lo, iters))
}

/// Quadratic-Newton line search on Phi = rho Psi, the variant with cubic
/// convergence. Returns (l, iterations); the result is a lower bound of the
/// root.
pub fn limit_entropy_quadratic_newton<const D: usize>(
    u: &ConservedState<D>,
    q: &ConservedState<D>,
    params: &SurrogateParams,
    l0: f64,
) -> Result<(f64, u32)> {
    check_search_preconditions(u, q, params, l0)?;
    // Phi(v) = rho E - |m|^2/2 - s_min rho^(g+1) (1-b rho)^(1-g)
    let g = params.gamma_min;
    let b = params.b;
    let phi = |v: &ConservedState<D>| -> f64 {
        v.rho * v.energy - 0.5 * crate::state::dot(&v.momentum, &v.momentum)
            - params.s_min * v.rho * entropy_weight(v.rho, g, b)
    };
    let dphi = |v: &ConservedState<D>| -> f64 {
        let vprime = if b == 0.0 {
            (g + 1.0) * v.rho.powf(g)
        } else {
            (g + 1.0) * v.rho.powf(g) * (1.0 - b * v.rho).powf(1.0 - g)
                + b * (g - 1.0) * v.rho.powf(g + 1.0) * (1.0 - b * v.rho).powf(-g)
        };
        let mut val = (v.energy - params.s_min * vprime) * q.rho + v.rho * q.energy;
        for d in 0..D {
            val -= v.momentum[d] * q.momentum[d];
        }
        val
    };
    let at = |l: f64| *u + *q * l;

    let mut f_r = phi(&at(l0));
    if f_r >= 0.0 {
        return Ok((l0, 0));
    }
    let mut lo = 0.0;
    let mut f_l = phi(&at(0.0));
    if f_l < 0.0 {
        return Ok((0.0, 0));
    }
    let scale = f_l.abs().max(f_r.abs()).max(1e-300);
    let mut hi = l0;
    let mut iters = 0u32;

    while hi - lo > ELL_TOL && f_l.abs() > PSI_REL_TOL * scale && iters < 60 {
        iters += 1;
        let width = hi - lo;
        let df_l = dphi(&at(lo));
        let df_r = dphi(&at(hi));
        let dd = (f_r - f_l) / width; // f[lo, hi]
        let a_l = (dd - df_l) / width; // f[lo, lo, hi]
        let a_r = (df_r - dd) / width; // f[lo, hi, hi]

        // unique zero of the left/right interpolating quadratics inside the
        // bracket; negative discriminants (impossible under exact
        // bracketing) fall back to a bisection step
        let root_near_left = quadratic_root_in(f_l, df_l, a_l, width);
        let root_near_right = quadratic_root_in(f_r, df_r, a_r, -width).map(|x| width + x);

        let (cand_a, cand_b) = match (root_near_left, root_near_right) {
            (Some(x), Some(y)) => (lo + x.min(y), lo + x.max(y)),
            (Some(x), None) | (None, Some(x)) => {
                let m = lo + 0.5 * width;
                (lo + x.min(0.5 * width), m.max(lo + x))
            }
            (None, None) => {
                let m = lo + 0.5 * width;
                (m, m)
            }
        };

        let mut progressed = false;
        for cand in [cand_a, cand_b] {
            if cand > lo && cand < hi {
                let f = phi(&at(cand));
                if f >= 0.0 {
                    if cand > lo {
                        lo = cand;
                        f_l = f;
                        progressed = true;
                    }
                } else if cand < hi {
                    hi = cand;
                    f_r = f;
                    progressed = true;
                }
            }
        }
        if !progressed {
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                break;
            }
            let f = phi(&at(mid));
            if f >= 0.0 {
                lo = mid;
                f_l = f;
            } else {
                hi = mid;
                f_r = f;
            }
        }
    }
    Ok((lo, iters))
}

/// Root of c + b x + a x^2 lying strictly between 0 and `span` (signed).
/// Uses the numerically stable quadratic formula; handles the degenerate
/// linear case exactly.
fn quadratic_root_in(c: f64, b: f64, a: f64, span: f64) -> Option<f64> {
    let inside = |x: f64| -> bool {
        if span > 0.0 {
            x > 0.0 && x < span
        } else {
            x < 0.0 && x > span
        }
    };
    if a == 0.0 {
        if b == 0.0 {
            return None;
        }
        let x = -c / b;
        return inside(x).then_some(x);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // citardauq and standard forms cover both cancellation patterns
    let candidates = [
        -2.0 * c / (b + sq),
        -2.0 * c / (b - sq),
        (-b + sq) / (2.0 * a),
        (-b - sq) / (2.0 * a),
    ];
    candidates
        .into_iter()
        .filter(|x| x.is_finite() && inside(*x))
        .min_by(|x, y| {
            let key = |v: f64| (c + b * v + a * v * v).abs();
            key(*x).partial_cmp(&key(*y)).unwrap()
        })
}

fn check_search_preconditions<const D: usize>(
    u: &ConservedState<D>,
    q: &ConservedState<D>,
    params: &SurrogateParams,
    l0: f64,
) -> Result<()> {
    if !(0.0..=1.0).contains(&l0) {
        return Err(Error::invalid(format!("l0 = {l0} outside [0, 1]")));
    }
    let end_rho = u.rho + l0 * q.rho;
    let ok = |rho: f64| rho > 0.0 && (params.b == 0.0 || 1.0 - params.b * rho > 0.0);
    if !ok(u.rho) || !ok(end_rho) {
        return Err(Error::invalid(format!(
            "density leaves (0, 1/b) on the search segment: {} .. {end_rho}",
            u.rho
        )));
    }
    Ok(())
}

/// Symmetric limited update. For each pair, the coefficient is the minimum
/// of the density and entropy constraints evaluated at both end nodes; a
/// second sweep re-checks the assembled nodes and rescales an offending row
/// by its largest feasible factor (counted; expected never to trigger).
pub fn apply_limiter<const D: usize>(
    ctx: &StageContext<'_, D>,
    low: &[ConservedState<D>],
    high: &HighOrderUpdate<D>,
    bounds: &[NodeBounds],
    method: LimiterMethod,
) -> Result<LimiterResult<D>> {
    let g = ctx.graph;
    let b = ctx.b;

    // Theorem guarantee on the low-order update with the strict floor,
    // asserted every step
    for (i, u) in low.iter().enumerate() {
        let params = SurrogateParams {
            gamma_min: bounds[i].gamma_min,
            s_min: bounds[i].s_min_strict,
            b,
        };
        let psi = psi_surrogate(u, &params);
        let scale = u
            .internal_energy_density()
            .abs()
            .max(bounds[i].s_min_strict * entropy_weight(u.rho, bounds[i].gamma_min, b))
            .max(1e-300);
        if psi < -1e-13 * scale {
            return Err(Error::Invariant(format!(
                "surrogate entropy of the low-order update negative at node {i}: {psi:e}"
            )));
        }
    }

    let search = |u: &ConservedState<D>,
                  q: &ConservedState<D>,
                  params: &SurrogateParams,
                  l0: f64|
     -> Result<(f64, u32)> {
        match method {
            LimiterMethod::QuadraticNewton => limit_entropy_quadratic_newton(u, q, params, l0),
            LimiterMethod::NewtonSecant => limit_entropy_newton_secant(u, q, params, l0),
        }
    };

    let one_pair = |p: usize| -> Result<(f64, u32)> {
        let pt = &g.pairs[p];
        let (i, j) = (pt.i as usize, pt.j as usize);
        let qi = high.corrections[pt.k_ij as usize] * (g.neighbor_count(i) as f64);
        let qj = high.corrections[pt.k_ji as usize] * (g.neighbor_count(j) as f64);
        let mut l = limit_density(&low[i], &qi, &bounds[i]);
        l = l.min(limit_density(&low[j], &qj, &bounds[j]));
        let params_i = SurrogateParams {
            gamma_min: bounds[i].gamma_min,
            s_min: bounds[i].s_min,
            b,
        };
        let params_j = SurrogateParams {
            gamma_min: bounds[j].gamma_min,
            s_min: bounds[j].s_min,
            b,
        };
        let (li, it_i) = search(&low[i], &qi, &params_i, l)?;
        let (lj, it_j) = search(&low[j], &qj, &params_j, li.min(l))?;
        Ok((li.min(lj), it_i + it_j))
    };

    let np = g.pairs.len();
    let pair_results: Vec<(f64, u32)> = if np >= 8192 {
        (0..np)
            .into_par_iter()
            .map(one_pair)
            .collect::<Result<Vec<_>>>()?
    } else {
        (0..np).map(one_pair).collect::<Result<Vec<_>>>()?
    };
    let ell: Vec<f64> = pair_results.iter().map(|r| r.0).collect();
    let line_search_iterations = pair_results.iter().map(|r| r.1 as u64).sum();
    let activations = ell.iter().filter(|l| **l < 1.0).count() as u64;

    let mut states = par_map(g.n_nodes, |i| {
        let mut acc = low[i];
        for k in g.row(i) {
            acc = acc + high.corrections[k] * ell[g.entry_pair[k] as usize];
        }
        acc
    });

    // second sweep: re-check the assembled nodes
    let mut feasibility_rescues = 0u64;
    for i in 0..g.n_nodes {
        let u = states[i];
        let params = SurrogateParams {
            gamma_min: bounds[i].gamma_min,
            s_min: bounds[i].s_min,
            b,
        };
        let rho_slack = 1e-12 * bounds[i].rho_max.max(1.0);
        let psi = psi_surrogate(&u, &params);
        let psi_floor = -1e-13
            * u.internal_energy_density()
                .abs()
                .max(bounds[i].s_min * entropy_weight(u.rho, bounds[i].gamma_min, b))
                .max(1e-300);
        let feasible = u.rho >= bounds[i].rho_min - rho_slack
            && u.rho <= bounds[i].rho_max + rho_slack
            && psi >= psi_floor;
        if feasible {
            continue;
        }
        feasibility_rescues += 1;
        let delta = u - low[i];
        let mut theta = limit_density(&low[i], &delta, &bounds[i]);
        let (t, _) = search(&low[i], &delta, &params, theta)?;
        theta = t;
        states[i] = low[i] + delta * theta;
    }

    Ok(LimiterResult {
        states,
        ell,
        activations,
        line_search_iterations,
        feasibility_rescues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_1d, SideBc};
    use crate::eos::EosSpec;
    use crate::update::FieldSnapshot;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn bisection_root<const D: usize>(
        u: &ConservedState<D>,
        q: &ConservedState<D>,
        params: &SurrogateParams,
        l0: f64,
    ) -> f64 {
        let psi = |l: f64| psi_surrogate(&(*u + *q * l), params);
        if psi(l0) >= 0.0 {
            return l0;
        }
        let (mut lo, mut hi) = (0.0, l0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if psi(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn random_instance(
        rng: &mut StdRng,
    ) -> (ConservedState<1>, ConservedState<1>, SurrogateParams, f64) {
        let b: f64 = if rng.gen_bool(0.5) { 0.0 } else { 0.15 };
        let rho_cap = if b > 0.0 { 1.0 / b } else { f64::INFINITY };
        let rho = rng.gen_range(0.2..2.0_f64).min(0.8 * rho_cap);
        let v = rng.gen_range(-1.0..1.0);
        let e = rng.gen_range(0.5..3.0);
        let u = ConservedState::new(rho, [rho * v], rho * e + 0.5 * rho * v * v);
        let gamma = rng.gen_range(1.05..2.5);
        // floor below the state's entropy so Psi(u) >= 0
        let s_u = surrogate_entropy(&u, gamma, b);
        let params = SurrogateParams {
            gamma_min: gamma,
            s_min: s_u * rng.gen_range(0.2..0.999),
            b,
        };
        // correction that keeps rho positive on the segment
        let dr_max = 0.9 * (rho_cap - rho).min(rho);
        let q = ConservedState::new(
            rng.gen_range(-0.9 * rho.min(dr_max)..dr_max),
            [rng.gen_range(-2.0..2.0)],
            rng.gen_range(-2.0..0.5),
        );
        (u, q, params, 1.0)
    }

    #[test]
    fn density_limit_examples() {
        let bounds = NodeBounds {
            rho_min: 0.7,
            rho_max: 1.5,
            gamma_min: 1.4,
            s_min: 0.0,
            s_min_strict: 0.0,
            covolume_cap: f64::INFINITY,
        };
        let u = ConservedState::<1>::new(1.0, [0.0], 1.0);
        let q0 = ConservedState::<1>::new(0.0, [1.0], 0.3);
        assert_eq!(limit_density(&u, &q0, &bounds), 1.0);
        let up = ConservedState::<1>::new(1.0, [0.0], 0.0);
        assert!((limit_density(&u, &up, &bounds) - 0.5).abs() < 1e-15);
        let dn = ConservedState::<1>::new(-0.6, [0.0], 0.0);
        assert!((limit_density(&u, &dn, &bounds) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn searches_return_l0_when_feasible() {
        let u = ConservedState::<1>::new(1.0, [0.0], 2.0);
        let params = SurrogateParams {
            gamma_min: 1.4,
            s_min: 0.1,
            b: 0.0,
        };
        let q = ConservedState::<1>::new(0.0, [0.0], 0.5);
        let (l, _) = limit_entropy_newton_secant(&u, &q, &params, 1.0).unwrap();
        assert_eq!(l, 1.0);
        let (l, _) = limit_entropy_quadratic_newton(&u, &q, &params, 1.0).unwrap();
        assert_eq!(l, 1.0);
        let zero = ConservedState::<1>::ZERO;
        let (l, _) = limit_entropy_quadratic_newton(&u, &zero, &params, 1.0).unwrap();
        assert_eq!(l, 1.0);
    }

    #[test]
    fn searches_agree_with_bisection_oracle() {
        let mut rng = StdRng::seed_from_u64(77);
        let mut rooted = 0;
        for trial in 0..300 {
            let (u, q, params, l0) = random_instance(&mut rng);
            let reference = bisection_root(&u, &q, &params, l0);
            let (ns, _) = limit_entropy_newton_secant(&u, &q, &params, l0).unwrap();
            let (qn, _) = limit_entropy_quadratic_newton(&u, &q, &params, l0).unwrap();
            if reference < l0 {
                rooted += 1;
            }
            for (name, l) in [("newton-secant", ns), ("quadratic", qn)] {
                assert!(
                    l <= reference + 1e-10,
                    "trial {trial} {name}: {l} above root {reference}"
                );
                assert!(
                    (l - reference).abs() < 1e-10,
                    "trial {trial} {name}: {l} vs {reference}"
                );
                let psi = psi_surrogate(&(u + q * l), &params);
                let scale = psi_scale(&u, &q, &params, l0);
                assert!(psi >= -1e-13 * scale, "trial {trial} {name}: psi {psi}");
            }
        }
        assert!(rooted > 50, "too few active instances ({rooted})");
    }

    #[test]
    fn quadratic_newton_is_exact_for_linear_objectives() {
        // q with zero density and momentum components makes Phi affine in l
        let u = ConservedState::<1>::new(1.0, [0.0], 1.0);
        let params = SurrogateParams {
            gamma_min: 1.5,
            s_min: 0.5,
            b: 0.0,
        };
        let q = ConservedState::<1>::new(0.0, [0.0], -1.0);
        // Phi(l) = rho (E - l) - s_min rho^2.5; root at E - s_min rho^1.5
        let root = 1.0 - 0.5;
        let (l, iters) = limit_entropy_quadratic_newton(&u, &q, &params, 1.0).unwrap();
        assert!((l - root).abs() < 1e-12);
        assert!(iters <= 2, "degenerate case should resolve immediately");
    }

    #[test]
    fn quadratic_newton_converges_cubically() {
        // log the bracket error of successive iterations on one instance by
        // shrinking the allowed iteration count is not possible here, so
        // measure via the interpolation residual directly: run the method
        // on an instance and record |l_k - root| by re-running with forced
        // iteration caps
        let u = ConservedState::<1>::new(1.2, [0.3], 2.0);
        let params = SurrogateParams {
            gamma_min: 1.6,
            s_min: 0.8 * surrogate_entropy(&u, 1.6, 0.0),
            b: 0.0,
        };
        let q = ConservedState::<1>::new(-0.4, [0.8], -1.9);
        let root = bisection_root(&u, &q, &params, 1.0);
        assert!(root < 1.0);

        // manual iteration of the same scheme recording the left end
        let g = params.gamma_min;
        let phi = |l: f64| {
            let v = u + q * l;
            v.rho * v.energy - 0.5 * v.momentum[0] * v.momentum[0]
                - params.s_min * v.rho * entropy_weight(v.rho, g, 0.0)
        };
        let dphi = |l: f64| {
            let v = u + q * l;
            (v.energy - params.s_min * (g + 1.0) * v.rho.powf(g)) * q.rho + v.rho * q.energy
                - v.momentum[0] * q.momentum[0]
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let (mut f_l, mut f_r) = (phi(lo), phi(hi));
        assert!(f_l > 0.0 && f_r < 0.0);
        let mut errors = Vec::new();
        for _ in 0..4 {
            let width = hi - lo;
            let dd = (f_r - f_l) / width;
            let a_l = (dd - dphi(lo)) / width;
            let a_r = (dphi(hi) - dd) / width;
            let xl = quadratic_root_in(f_l, dphi(lo), a_l, width).unwrap();
            let xr = quadratic_root_in(f_r, dphi(hi), a_r, -width).unwrap() + width;
            let (nl, nr) = (lo + xl.min(xr), lo + xl.max(xr));
            lo = nl;
            hi = nr;
            f_l = phi(lo);
            f_r = phi(hi);
            if f_l < 0.0 || f_r > 0.0 {
                break;
            }
            errors.push(root - lo);
            if root - lo < 1e-14 {
                break;
            }
        }
        // the error of one step must follow the cubic model e1 <= C e0^3;
        // further iterates sit at roundoff and cannot be used for the fit
        assert!(errors.len() >= 2, "need at least two iterates: {errors:?}");
        assert!(errors[0] < 1e-2 && errors[0] > 1e-12, "bad instance: {errors:?}");
        assert!(
            errors[1] <= 10.0 * errors[0].powi(3),
            "one quadratic-Newton step must cube the error: {errors:?}"
        );
    }

    fn stage_fixture(
        seed: u64,
    ) -> (
        FieldSnapshot<1>,
        crate::discretization::GraphCoefficients<1>,
    ) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = build_1d(40, 0.0, 1.0, SideBc::Dirichlet, SideBc::Dirichlet).unwrap();
        let states: Vec<ConservedState<1>> = (0..g.n_nodes)
            .map(|_| {
                let rho = rng.gen_range(0.3..2.0);
                let v = rng.gen_range(-0.5..0.5);
                let e = rng.gen_range(0.5..3.0);
                ConservedState::new(rho, [rho * v], rho * e + 0.5 * rho * v * v)
            })
            .collect();
        let s = FieldSnapshot::from_states(states, 0.0, &EosSpec::ideal(1.4), 0.0).unwrap();
        (s, g)
    }

    #[test]
    fn bounds_examples() {
        // constant snapshot: bounds collapse around rho within the relaxed band
        let g = build_1d(8, 0.0, 1.0, SideBc::Dirichlet, SideBc::Dirichlet).unwrap();
        let s = FieldSnapshot::from_states(
            vec![ConservedState::<1>::new(1.0, [0.2], 2.0); 9],
            0.0,
            &EosSpec::ideal(1.4),
            0.0,
        )
        .unwrap();
        let ctx = StageContext::new(&s, &g, 0.0).unwrap();
        let bounds = compute_bounds(&ctx);
        for (i, nb) in bounds.iter().enumerate() {
            assert!(nb.rho_min <= 1.0 && 1.0 <= nb.rho_max, "node {i}");
            let r_h = g.relaxation_radius(i);
            assert!(nb.rho_min >= (1.0 - r_h) - 1e-13);
            // b = 0, gamma = 1.4: covolume cap is 6 rho_max-raw = 6
            assert!((nb.covolume_cap - 6.0).abs() < 1e-12);
        }

        // linear density profile: curvature vanishes
        let eos = EosSpec::ideal(1.4);
        let states: Vec<ConservedState<1>> = g
            .coords
            .iter()
            .map(|x| {
                let rho = 1.0 + 0.5 * x[0];
                let e = eos.energy_from_pressure(rho, 1.0).unwrap();
                ConservedState::new(rho, [0.0], rho * e)
            })
            .collect();
        let s = FieldSnapshot::from_states(states, 0.0, &eos, 0.0).unwrap();
        let ctx = StageContext::new(&s, &g, 0.0).unwrap();
        let d2 = density_curvature(&ctx);
        for (i, v) in d2.iter().enumerate() {
            if matches!(
                g.boundary[i],
                crate::discretization::NodeBoundary::Interior
            ) {
                assert!(v.abs() < 1e-14, "node {i}: curvature {v}");
            }
        }
    }

    #[test]
    fn apply_limiter_inactive_returns_high_order() {
        // smooth data, generous bounds: nothing should activate
        let g = build_1d(32, 0.0, 1.0, SideBc::Dirichlet, SideBc::Dirichlet).unwrap();
        let eos = EosSpec::ideal(1.4);
        let states: Vec<ConservedState<1>> = g
            .coords
            .iter()
            .map(|x| {
                let rho = 1.0 + 0.05 * (2.0 * std::f64::consts::PI * x[0]).sin();
                let e = eos.energy_from_pressure(rho, 1.0).unwrap();
                ConservedState::new(rho, [0.1 * rho], rho * e + 0.005 * rho)
            })
            .collect();
        let s = FieldSnapshot::from_states(states, 0.0, &eos, 0.0).unwrap();
        let ctx = StageContext::new(&s, &g, 0.0).unwrap();
        let dt = ctx.max_dt(0.2);
        let low = ctx.low_order(dt).unwrap();
        let high = ctx.high_order(dt, 0.4).unwrap();
        let bounds = compute_bounds(&ctx);
        let res = apply_limiter(&ctx, &low, &high, &bounds, LimiterMethod::QuadraticNewton)
            .unwrap();
        if res.activations == 0 {
            for i in 0..g.n_nodes {
                assert!((res.states[i] - high.states[i]).max_abs() < 1e-14);
            }
        }
        assert_eq!(res.feasibility_rescues, 0);
    }

    #[test]
    fn limited_update_is_conservative_and_feasible() {
        for seed in [1u64, 2, 3, 4] {
            let (s, g) = stage_fixture(seed);
            let ctx = StageContext::new(&s, &g, 0.0).unwrap();
            let dt = ctx.max_dt(0.9);
            let low = ctx.low_order(dt).unwrap();
            let high = ctx.high_order(dt, 0.4).unwrap();
            let bounds = compute_bounds(&ctx);
            for method in [LimiterMethod::QuadraticNewton, LimiterMethod::NewtonSecant] {
                let res = apply_limiter(&ctx, &low, &high, &bounds, method).unwrap();
                // conservation against the low-order update
                let total = |st: &[ConservedState<1>]| {
                    st.iter()
                        .zip(&g.lumped_mass)
                        .fold([0.0f64; 3], |acc, (u, m)| {
                            [
                                acc[0] + m * u.rho,
                                acc[1] + m * u.momentum[0],
                                acc[2] + m * u.energy,
                            ]
                        })
                };
                let a = total(&low);
                let b = total(&res.states);
                for c in 0..3 {
                    assert!(
                        (a[c] - b[c]).abs() <= 1e-12 * a[c].abs().max(1.0),
                        "seed {seed}: component {c} drifted"
                    );
                }
                // post-limit internal energy floor
                for (i, u) in res.states.iter().enumerate() {
                    assert!(u.is_admissible(0.0), "seed {seed} node {i} inadmissible");
                    let floor = bounds[i].s_min
                        * entropy_weight(u.rho, bounds[i].gamma_min, 0.0);
                    assert!(
                        u.internal_energy_density()
                            >= floor - 1e-13 * floor.max(u.internal_energy_density().abs()),
                        "seed {seed} node {i}: energy floor violated"
                    );
                }
                assert_eq!(res.feasibility_rescues, 0, "seed {seed}");
            }
        }
    }
}
