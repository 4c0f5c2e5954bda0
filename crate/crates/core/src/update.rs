//! One spatial-update evaluation: low-order invariant-domain-preserving
//! update, entropy-commutator indicator, high-order graph viscosity and the
//! provisional high-order update with its pairwise decomposition for
//! limiting.

use rayon::prelude::*;

use crate::discretization::GraphCoefficients;
use crate::eos::EosSpec;
use crate::error::{Error, Result};
use crate::riemann::{bar_state, lambda_max_bound};
use crate::state::{dot, norm, ConservedState};

/// Below this node count the per-step loops run serially; rayon overhead
/// dominates on small meshes.
const PAR_THRESHOLD: usize = 8192;

pub(crate) fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Nodal field with its oracle data at one time.
#[derive(Clone, Debug)]
pub struct FieldSnapshot<const D: usize> {
    pub states: Vec<ConservedState<D>>,
    pub pressure: Vec<f64>,
    pub gamma: Vec<f64>,
    pub time: f64,
    /// number of oracle evaluations clamped to zero while building this field
    pub clamp_count: usize,
}

impl<const D: usize> FieldSnapshot<D> {
    /// Validate admissibility and evaluate the pressure oracle at each node.
    pub fn from_states(
        states: Vec<ConservedState<D>>,
        time: f64,
        eos: &EosSpec,
        b: f64,
    ) -> Result<Self> {
        let n = states.len();
        let mut pressure = vec![0.0; n];
        let mut gamma = vec![0.0; n];
        let mut clamp_count = 0usize;
        for (i, u) in states.iter().enumerate() {
            if !u.is_admissible(b) {
                return Err(Error::Inadmissible {
                    node: i,
                    details: format!(
                        "rho = {:e}, 1 - b rho = {:e}, rho e = {:e}",
                        u.rho,
                        1.0 - b * u.rho,
                        u.internal_energy_density()
                    ),
                });
            }
            let (p, clamped) = eos
                .pressure_with_flag(u.rho, u.specific_internal_energy())
                .map_err(|e| Error::Inadmissible {
                    node: i,
                    details: format!("oracle failure: {e}"),
                })?;
            if clamped {
                clamp_count += 1;
            }
            pressure[i] = p;
            gamma[i] = u.gamma_of(p, b);
        }
        Ok(FieldSnapshot {
            states,
            pressure,
            gamma,
            time,
            clamp_count,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.states.len()
    }

    pub fn min_density(&self) -> f64 {
        self.states.iter().map(|u| u.rho).fold(f64::INFINITY, f64::min)
    }

    pub fn min_internal_energy(&self) -> f64 {
        self.states
            .iter()
            .map(|u| u.specific_internal_energy())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Pair data computed once per stage: the low-order graph viscosity and the
/// bar states of both orientations.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PairData<const D: usize> {
    pub d_low: f64,
    /// bar state built with c_ij (orientation i -> j)
    pub bar_fwd: ConservedState<D>,
    /// bar state built with c_ji
    pub bar_rev: ConservedState<D>,
}

/// Everything a full spatial update needs from one snapshot. Immutable once
/// built; the low/high/limited updates are derived from it.
pub struct StageContext<'a, const D: usize> {
    pub snapshot: &'a FieldSnapshot<D>,
    pub graph: &'a GraphCoefficients<D>,
    pub b: f64,
    /// per-node specific internal energy
    pub e: Vec<f64>,
    /// per-node stencil minimum of gamma
    pub gamma_min: Vec<f64>,
    pub(crate) pair: Vec<PairData<D>>,
    /// total star-pressure iterations (diagnostic)
    pub lambda_iterations: u64,
}

impl<'a, const D: usize> StageContext<'a, D> {
    pub fn new(
        snapshot: &'a FieldSnapshot<D>,
        graph: &'a GraphCoefficients<D>,
        b: f64,
    ) -> Result<Self> {
        let n = graph.n_nodes;
        if snapshot.n_nodes() != n {
            return Err(Error::invalid("snapshot and graph sizes differ"));
        }
        let states = &snapshot.states;
        let e: Vec<f64> = states.iter().map(|u| u.specific_internal_energy()).collect();

        let gamma_min = par_map(n, |i| {
            let mut g = snapshot.gamma[i];
            for k in graph.row(i) {
                g = g.min(snapshot.gamma[graph.col[k] as usize]);
            }
            g
        });

        // graph viscosities and bar states, one task per unordered pair
        let pair_results: Vec<(PairData<D>, u32)> = {
            let work = |p: usize| -> Result<(PairData<D>, u32)> {
                let pt = &graph.pairs[p];
                let (i, j) = (pt.i as usize, pt.j as usize);
                let cij = &graph.cij[pt.k_ij as usize];
                let cji = &graph.cij[pt.k_ji as usize];
                let (pi, pj) = (snapshot.pressure[i], snapshot.pressure[j]);

                let cij_norm = norm(cij);
                let mut nij = *cij;
                for v in nij.iter_mut() {
                    *v /= cij_norm;
                }
                let est = lambda_max_bound(
                    &states[i].project(pi, b, &nij),
                    &states[j].project(pj, b, &nij),
                    pi,
                    pj,
                    b,
                )?;
                let mut d_low = est.lambda_hat * cij_norm;
                let mut iters = est.iterations;

                let antisymmetric = (0..D).all(|d| cji[d] == -cij[d]);
                if !antisymmetric {
                    // boundary pair: the reverse orientation is a different
                    // Riemann problem, take the larger bound
                    let cji_norm = norm(cji);
                    let mut nji = *cji;
                    for v in nji.iter_mut() {
                        *v /= cji_norm;
                    }
                    let est2 = lambda_max_bound(
                        &states[j].project(pj, b, &nji),
                        &states[i].project(pi, b, &nji),
                        pj,
                        pi,
                        b,
                    )?;
                    d_low = d_low.max(est2.lambda_hat * cji_norm);
                    iters += est2.iterations;
                }

                let bar_fwd = bar_state(&states[i], &states[j], pi, pj, cij, d_low)?;
                let bar_rev = if antisymmetric {
                    bar_fwd
                } else {
                    bar_state(&states[j], &states[i], pj, pi, cji, d_low)?
                };
                Ok((
                    PairData {
                        d_low,
                        bar_fwd,
                        bar_rev,
                    },
                    iters,
                ))
            };
            let np = graph.pairs.len();
            if np >= PAR_THRESHOLD {
                (0..np)
                    .into_par_iter()
                    .map(work)
                    .collect::<Result<Vec<_>>>()?
            } else {
                (0..np).map(work).collect::<Result<Vec<_>>>()?
            }
        };

        let lambda_iterations = pair_results.iter().map(|r| r.1 as u64).sum();
        let pair = pair_results.into_iter().map(|r| r.0).collect();

        Ok(StageContext {
            snapshot,
            graph,
            b,
            e,
            gamma_min,
            pair,
            lambda_iterations,
        })
    }

    #[inline]
    pub fn d_low_of_entry(&self, k: usize) -> f64 {
        self.pair[self.graph.entry_pair[k] as usize].d_low
    }

    /// Bar state seen from row `i` through CSR entry `k`.
    #[inline]
    pub(crate) fn bar_of_entry(&self, i: usize, k: usize) -> &ConservedState<D> {
        let p = &self.pair[self.graph.entry_pair[k] as usize];
        if self.graph.pairs[self.graph.entry_pair[k] as usize].i as usize == i {
            &p.bar_fwd
        } else {
            &p.bar_rev
        }
    }

    /// Largest dt satisfying the invariant-domain CFL condition scaled by
    /// `cfl`: dt = cfl/2 * min_i m_i / sum_j d_ij. Infinite when all
    /// viscosities vanish (globally constant zero-pressure data).
    pub fn max_dt(&self, cfl: f64) -> f64 {
        let mut dt = f64::INFINITY;
        for i in 0..self.graph.n_nodes {
            let sum: f64 = self.graph.row(i).map(|k| self.d_low_of_entry(k)).sum();
            if sum > 0.0 {
                dt = dt.min(0.5 * cfl * self.graph.lumped_mass[i] / sum);
            }
        }
        dt
    }

    fn check_cfl(&self, dt: f64) -> Result<()> {
        for i in 0..self.graph.n_nodes {
            let sum: f64 = self.graph.row(i).map(|k| self.d_low_of_entry(k)).sum();
            let ratio = dt * 2.0 * sum / self.graph.lumped_mass[i];
            if ratio > 1.0 + 1e-12 {
                return Err(Error::CflViolation { node: i, ratio });
            }
        }
        Ok(())
    }

    /// Galerkin divergence term sum_j f(U_j) . c_ij over the full stencil,
    /// diagonal included, negated (so it adds as a right-hand side).
    fn divergence(&self) -> Vec<ConservedState<D>> {
        let g = self.graph;
        let s = self.snapshot;
        par_map(g.n_nodes, |i| {
            let mut acc = -s.states[i].flux_dot(s.pressure[i], &g.cii[i]);
            for k in g.row(i) {
                let j = g.col[k] as usize;
                acc = acc - s.states[j].flux_dot(s.pressure[j], &g.cij[k]);
            }
            acc
        })
    }

    /// First-order invariant-domain-preserving update.
    pub fn low_order(&self, dt: f64) -> Result<Vec<ConservedState<D>>> {
        self.check_cfl(dt)?;
        let div = self.divergence();
        let g = self.graph;
        let s = self.snapshot;
        Ok(par_map(g.n_nodes, |i| {
            let mut acc = div[i];
            for k in g.row(i) {
                let j = g.col[k] as usize;
                acc = acc + (s.states[j] - s.states[i]) * self.d_low_of_entry(k);
            }
            s.states[i] + acc * (dt / g.lumped_mass[i])
        }))
    }

    /// Entropy-commutator residual (N_i, D_i) for every node.
    pub fn entropy_residuals(&self) -> Vec<(f64, f64)> {
        let g = self.graph;
        let s = self.snapshot;
        // per-node caches for the Harten entropy evaluations
        let ln_r2e: Vec<f64> = par_map(g.n_nodes, |j| {
            (s.states[j].rho * s.states[j].internal_energy_density()).ln()
        });
        let ln_cov: Vec<f64> = if self.b == 0.0 {
            Vec::new()
        } else {
            par_map(g.n_nodes, |j| (1.0 - self.b * s.states[j].rho).ln())
        };

        par_map(g.n_nodes, |i| {
            let gamma = self.gamma_min[i];
            let inv_gp1 = 1.0 / (gamma + 1.0);
            let sigma_at = |j: usize| -> f64 {
                let ln_k = if self.b == 0.0 {
                    ln_r2e[j]
                } else {
                    ln_r2e[j] + (gamma - 1.0) * ln_cov[j]
                };
                (ln_k * inv_gp1).exp()
            };
            let eta_ref = sigma_at(i);
            let grad = harten_entropy_gradient(&s.states[i], gamma, self.b, eta_ref, s.states[i].rho);

            let ui = &s.states[i];
            let rho_i = ui.rho;
            let mut f_sum = 0.0;
            let mut gf_sum = 0.0;
            // The normalization accumulates term-wise absolute values. The
            // net sums both collapse to discretization noise on isentropic
            // fields (the shifted entropy vanishes identically there),
            // which would drive R to 1 on perfectly smooth flows.
            let mut d_sum = 0.0;
            let mut visit = |j: usize, c: &[f64; D]| {
                let uj = &s.states[j];
                let p_cov = (gamma - 1.0) * uj.rho * self.e[j] / (1.0 - self.b * uj.rho);
                let eta_j = sigma_at(j) - uj.rho / rho_i * eta_ref;
                let mc = dot(&uj.momentum, c);
                let vc = mc / uj.rho;
                // F^i(U_j) . c = v_j . c * eta
                let f_term = vc * eta_j;
                f_sum += f_term;
                // grad(eta)^T f^i(U_j) . c
                let gf_term = grad.rho * mc
                    + vc * dot(&grad.momentum, &uj.momentum)
                    + p_cov * dot(&grad.momentum, c)
                    + grad.energy * vc * (uj.energy + p_cov);
                gf_sum += gf_term;
                d_sum += f_term.abs() + gf_term.abs();
            };
            visit(i, &g.cii[i]);
            for k in g.row(i) {
                visit(g.col[k] as usize, &g.cij[k]);
            }
            (f_sum - gf_sum, d_sum)
        })
    }

    /// Normalized residuals R_i and their activation values psi(R_i).
    pub fn indicators(&self, x0: f64) -> (Vec<f64>, Vec<f64>) {
        let nd = self.entropy_residuals();
        let d_max = nd.iter().map(|v| v.1).fold(0.0f64, f64::max);
        let r: Vec<f64> = nd
            .iter()
            .map(|&(n, d)| normalized_residual(n, d, d_max))
            .collect();
        let psi: Vec<f64> = r.iter().map(|&x| activation(x, x0)).collect();
        (r, psi)
    }

    /// Provisional high-order update with its limiting decomposition.
    pub fn high_order(&self, dt: f64, x0: f64) -> Result<HighOrderUpdate<D>> {
        self.check_cfl(dt)?;
        let g = self.graph;
        let s = self.snapshot;
        let (r_normalized, psi) = self.indicators(x0);

        // high-order viscosity per pair
        let d_high: Vec<f64> = {
            let work = |p: usize| {
                let pt = &g.pairs[p];
                self.pair[p].d_low * psi[pt.i as usize].max(psi[pt.j as usize])
            };
            (0..g.pairs.len()).map(work).collect()
        };

        let div = self.divergence();
        // high-order right-hand side R_i
        let r_vec: Vec<ConservedState<D>> = par_map(g.n_nodes, |i| {
            let mut acc = div[i];
            for k in g.row(i) {
                let j = g.col[k] as usize;
                acc = acc + (s.states[j] - s.states[i]) * d_high[g.entry_pair[k] as usize];
            }
            acc
        });

        // mass-matrix corrected update and the pairwise corrections
        let states: Vec<ConservedState<D>> = par_map(g.n_nodes, |i| {
            let mut acc = r_vec[i];
            for k in g.row(i) {
                let j = g.col[k] as usize;
                let b_ij = g.bij[k];
                let b_ji = -g.mij[k] / g.lumped_mass[i];
                acc = acc + r_vec[j] * b_ij - r_vec[i] * b_ji;
            }
            s.states[i] + acc * (dt / g.lumped_mass[i])
        });

        let corrections: Vec<ConservedState<D>> = {
            let work = |k: usize| {
                // row index of entry k via the pair topology
                let p = g.entry_pair[k] as usize;
                let pt = &g.pairs[p];
                let (i, j) = if pt.k_ij as usize == k {
                    (pt.i as usize, pt.j as usize)
                } else {
                    (pt.j as usize, pt.i as usize)
                };
                let dd = d_high[p] - self.pair[p].d_low;
                let b_ij = g.bij[k];
                let b_ji = -g.mij[k] / g.lumped_mass[i];
                ((s.states[j] - s.states[i]) * dd + r_vec[j] * b_ij - r_vec[i] * b_ji)
                    * (dt / g.lumped_mass[i])
            };
            if g.col.len() >= PAR_THRESHOLD {
                (0..g.col.len()).into_par_iter().map(work).collect()
            } else {
                (0..g.col.len()).map(work).collect()
            }
        };

        Ok(HighOrderUpdate {
            states,
            r_normalized,
            corrections,
            d_high,
        })
    }
}

/// Provisional high-order update: states, the normalized entropy residuals
/// that produced its viscosity, and the per-entry corrections P_ij with
/// U_i^H = U_i^L + sum_j P_ij and m_i P_ij = -m_j P_ji.
pub struct HighOrderUpdate<const D: usize> {
    pub states: Vec<ConservedState<D>>,
    pub r_normalized: Vec<f64>,
    /// P_ij per CSR entry (orientation of the entry's row)
    pub corrections: Vec<ConservedState<D>>,
    /// per-pair high-order viscosity
    pub d_high: Vec<f64>,
}

/// Gradient of the shifted Harten entropy, packed as a (d+2)-vector.
#[derive(Clone, Copy, Debug)]
pub struct EntropyGradient<const D: usize> {
    pub rho: f64,
    pub momentum: [f64; D],
    pub energy: f64,
}

/// Shifted Harten entropy
/// eta(u) = (rho^2 e (1-b rho)^(gamma-1))^(1/(gamma+1)) - rho/rho_ref * eta_ref.
pub fn harten_entropy<const D: usize>(
    u: &ConservedState<D>,
    gamma: f64,
    b: f64,
    eta_ref: f64,
    rho_ref: f64,
) -> f64 {
    let k = u.rho * u.internal_energy_density() * (1.0 - b * u.rho).powf(gamma - 1.0);
    k.powf(1.0 / (gamma + 1.0)) - u.rho / rho_ref * eta_ref
}

/// Closed-form gradient of the shifted Harten entropy at `u`.
pub fn harten_entropy_gradient<const D: usize>(
    u: &ConservedState<D>,
    gamma: f64,
    b: f64,
    eta_ref: f64,
    rho_ref: f64,
) -> EntropyGradient<D> {
    let cov = 1.0 - b * u.rho;
    let cov_pow = cov.powf(gamma - 1.0);
    let rho_re = u.rho * u.internal_energy_density();
    let k = rho_re * cov_pow;
    let sigma = k.powf(1.0 / (gamma + 1.0));
    // d sigma = sigma / ((gamma+1) K) dK
    let scale = sigma / ((gamma + 1.0) * k);
    let dk_drho = u.energy * cov_pow - b * (gamma - 1.0) * rho_re * cov_pow / cov;
    let mut momentum = [0.0; D];
    for d in 0..D {
        momentum[d] = scale * (-u.momentum[d] * cov_pow);
    }
    EntropyGradient {
        rho: scale * dk_drho - eta_ref / rho_ref,
        momentum,
        energy: scale * (u.rho * cov_pow),
    }
}

/// Normalized entropy residual R = |N| / (D + eps D_max), eps = 1e-2,
/// with the convention R = 0 when the denominator vanishes.
pub fn normalized_residual(n: f64, d: f64, d_max: f64) -> f64 {
    let denom = d + 1e-2 * d_max;
    if denom == 0.0 {
        0.0
    } else {
        n.abs() / denom
    }
}

/// Activation function: zero at 0, 1/2 at x0, identically 1 on [2 x0, 1].
pub fn activation(x: f64, x0: f64) -> f64 {
    let y = x - 2.0 * x0;
    let cut = y - y.max(0.0);
    let val = (4.0 * x0.powi(3) - (x + x0) * y * cut) / (4.0 * x0.powi(3));
    val.clamp(0.0, 1.0)
}

/// Low-order graph viscosity of one pair, symmetrized over both
/// orientations.
pub fn dij_low<const D: usize>(
    snapshot: &FieldSnapshot<D>,
    graph: &GraphCoefficients<D>,
    b: f64,
    i: usize,
    j: usize,
) -> Result<f64> {
    let k_ij = graph
        .row(i)
        .find(|&k| graph.col[k] as usize == j)
        .ok_or_else(|| Error::invalid(format!("{j} is not in the stencil of {i}")))?;
    let k_ji = graph
        .row(j)
        .find(|&k| graph.col[k] as usize == i)
        .unwrap();
    let mut d = 0.0f64;
    for (a, bb, k) in [(i, j, k_ij), (j, i, k_ji)] {
        let c = &graph.cij[k];
        let c_norm = norm(c);
        let mut n = *c;
        for v in n.iter_mut() {
            *v /= c_norm;
        }
        let est = lambda_max_bound(
            &snapshot.states[a].project(snapshot.pressure[a], b, &n),
            &snapshot.states[bb].project(snapshot.pressure[bb], b, &n),
            snapshot.pressure[a],
            snapshot.pressure[bb],
            b,
        )?;
        d = d.max(est.lambda_hat * c_norm);
    }
    Ok(d)
}

/// First-order update as a standalone operation (rebuilds the oracle data
/// of the result).
pub fn low_order_update<const D: usize>(
    snapshot: &FieldSnapshot<D>,
    graph: &GraphCoefficients<D>,
    eos: &EosSpec,
    b: f64,
    dt: f64,
) -> Result<FieldSnapshot<D>> {
    let ctx = StageContext::new(snapshot, graph, b)?;
    let states = ctx.low_order(dt)?;
    FieldSnapshot::from_states(states, snapshot.time + dt, eos, b)
}

/// Entropy-commutator residual (N_i, D_i) of one node.
pub fn entropy_residual<const D: usize>(
    snapshot: &FieldSnapshot<D>,
    graph: &GraphCoefficients<D>,
    b: f64,
    i: usize,
) -> Result<(f64, f64)> {
    let ctx = StageContext::new(snapshot, graph, b)?;
    Ok(ctx.entropy_residuals()[i])
}

/// High-order viscosity from the low-order one and two normalized
/// residuals.
pub fn dij_high(d_low: f64, r_i: f64, r_j: f64, x0: f64) -> f64 {
    d_low * activation(r_i, x0).max(activation(r_j, x0))
}
