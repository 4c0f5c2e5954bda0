//! Exact solutions and verification drivers: the 1D smooth traveling wave,
//! the Van der Waals isentropic vortex, the consolidated error indicator
//! delta_q, mesh-refinement studies and the randomized wave-speed-bound
//! soundness suite.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::discretization::GraphCoefficients;
use crate::error::{Error, Result};
use crate::riemann::{exact::solve_wave_fan, lambda_max_bound};
use crate::state::{norm, ConservedState};
use crate::timeloop::{run, BuildMesh, Mesh, RunConfig};
use crate::update::FieldSnapshot;

/// Parameters of the compact-support smooth traveling wave.
#[derive(Clone, Copy, Debug)]
pub struct SmoothWaveParams {
    pub rho0: f64,
    pub v0: f64,
    pub p0: f64,
    pub x0: f64,
    pub x1: f64,
}

impl SmoothWaveParams {
    /// Primitive state (rho, v, p) at position x and time t. The density
    /// bump is a sextic spline advected with constant velocity; velocity
    /// and pressure stay uniform, so the solution is EOS independent.
    pub fn primitive(&self, x: f64, t: f64) -> (f64, f64, f64) {
        let xi = x - self.v0 * t;
        let rho = if xi >= self.x0 && xi <= self.x1 {
            let w = self.x1 - self.x0;
            self.rho0 + 64.0 * w.powi(-6) * (xi - self.x0).powi(3) * (self.x1 - xi).powi(3)
        } else {
            self.rho0
        };
        (rho, self.v0, self.p0)
    }
}

/// Parameters of the isentropic vortex with the Van der Waals law (b = 0,
/// gamma either 3/2 or 2), with the derived constants C and F.
#[derive(Clone, Copy, Debug)]
pub struct VortexParams {
    pub a: f64,
    pub gamma: f64,
    pub rho_inf: f64,
    pub p_inf: f64,
    pub v_inf: [f64; 2],
    pub center: [f64; 2],
    pub r0: f64,
    pub beta: f64,
    pub c_const: f64,
    pub f_const: f64,
}

impl VortexParams {
    pub fn new(
        a: f64,
        gamma: f64,
        rho_inf: f64,
        p_inf: f64,
        v_inf: [f64; 2],
        center: [f64; 2],
        r0: f64,
        beta: f64,
    ) -> Result<Self> {
        if !(a > 0.0 && rho_inf > 0.0 && p_inf > 0.0 && r0 > 0.0 && beta > 0.0) {
            return Err(Error::invalid("vortex parameters must be positive"));
        }
        let (c_const, f_const) = if gamma == 1.5 {
            if !(p_inf > a * rho_inf * rho_inf / 3.0) {
                return Err(Error::invalid(
                    "vortex validity: need p_inf > a rho_inf^2 / 3",
                ));
            }
            let swirl = beta * beta * 1.0f64.exp()
                / (8.0 * r0 * r0 * std::f64::consts::PI * std::f64::consts::PI);
            if !(a * rho_inf + 3.0 * p_inf / rho_inf > swirl) {
                return Err(Error::invalid(
                    "vortex validity: swirl too strong for a real density root",
                ));
            }
            (
                (p_inf + a * rho_inf * rho_inf) / rho_inf.powf(1.5),
                -a * rho_inf - 3.0 * p_inf / rho_inf,
            )
        } else if gamma == 2.0 {
            (p_inf / (rho_inf * rho_inf) + a, -2.0 * p_inf / rho_inf)
        } else {
            return Err(Error::invalid("vortex gamma must be 3/2 or 2"));
        };
        Ok(VortexParams {
            a,
            gamma,
            rho_inf,
            p_inf,
            v_inf,
            center,
            r0,
            beta,
        c_const,
            f_const,
        })
    }

    /// Stream factor psi(x - center - v_inf t).
    pub fn stream_factor(&self, x: &[f64; 2], t: f64) -> f64 {
        let bx = [
            x[0] - self.center[0] - self.v_inf[0] * t,
            x[1] - self.center[1] - self.v_inf[1] * t,
        ];
        let r2 = bx[0] * bx[0] + bx[1] * bx[1];
        self.beta / (2.0 * std::f64::consts::PI) * (0.5 * (1.0 - r2 / (self.r0 * self.r0))).exp()
    }

    /// Exact primitive state (rho, v, p) at (x, t).
    pub fn primitive(&self, x: &[f64; 2], t: f64) -> Result<(f64, [f64; 2], f64)> {
        let bx = [
            x[0] - self.center[0] - self.v_inf[0] * t,
            x[1] - self.center[1] - self.v_inf[1] * t,
        ];
        let psi = self.stream_factor(x, t);
        let swirl = psi * psi / (2.0 * self.r0 * self.r0);
        let rho = if self.gamma == 1.5 {
            let disc = 9.0 * self.c_const * self.c_const / (4.0 * self.a * self.a)
                + 2.0 / self.a * (self.f_const + swirl);
            if disc < 0.0 {
                return Err(Error::invalid(format!(
                    "vortex density root turns complex (discriminant {disc:e})"
                )));
            }
            let sqrt_rho = 3.0 * self.c_const / (4.0 * self.a) - 0.5 * disc.sqrt();
            sqrt_rho * sqrt_rho
        } else {
            // gamma = 2: the integrated momentum balance is linear in rho
            let rho = self.rho_inf
                - self.rho_inf * self.rho_inf / (4.0 * self.p_inf * self.r0 * self.r0)
                    * psi
                    * psi;
            if !(rho > 0.0) {
                return Err(Error::invalid("vortex swirl drives the density negative"));
            }
            rho
        };
        let v = [
            self.v_inf[0] - psi * bx[1],
            self.v_inf[1] + psi * bx[0],
        ];
        let p = self.c_const * rho.powf(self.gamma) - self.a * rho * rho;
        Ok((rho, v, p))
    }

    /// Residual of the scalar equation the gamma = 3/2 density solves:
    /// rho - (3C/2a) sqrt(rho) - (1/2a)(F + psi^2/(2 r0^2)).
    pub fn density_equation_residual(&self, x: &[f64; 2], t: f64) -> Result<f64> {
        let (rho, _, _) = self.primitive(x, t)?;
        let psi = self.stream_factor(x, t);
        Ok(rho - 1.5 * self.c_const / self.a * rho.sqrt()
            - 0.5 / self.a * (self.f_const + psi * psi / (2.0 * self.r0 * self.r0)))
    }
}

/// Discrete norm order of the error indicator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormOrder {
    One,
    Two,
    Inf,
}

impl NormOrder {
    pub fn label(&self) -> &'static str {
        match self {
            NormOrder::One => "L1",
            NormOrder::Two => "L2",
            NormOrder::Inf => "Linf",
        }
    }
}

fn lumped_norm<const D: usize>(
    values: impl Iterator<Item = f64>,
    graph: &GraphCoefficients<D>,
    q: NormOrder,
) -> f64 {
    match q {
        NormOrder::Inf => values.fold(0.0, f64::max),
        NormOrder::One => values
            .zip(&graph.lumped_mass)
            .map(|(v, m)| v * m)
            .sum::<f64>(),
        NormOrder::Two => values
            .zip(&graph.lumped_mass)
            .map(|(v, m)| v * v * m)
            .sum::<f64>()
            .sqrt(),
    }
}

/// Consolidated error indicator: the sum over the conserved fields of the
/// relative lumped-mass L^q distance between the computed and exact nodal
/// values.
pub fn delta_q<const D: usize>(
    computed: &FieldSnapshot<D>,
    exact: &[ConservedState<D>],
    q: NormOrder,
    graph: &GraphCoefficients<D>,
) -> Result<f64> {
    if computed.n_nodes() != exact.len() || exact.len() != graph.n_nodes {
        return Err(Error::invalid("node sets do not match"));
    }
    let mut total = 0.0;
    let fields: [(&str, Box<dyn Fn(usize) -> (f64, f64)>); 3] = [
        (
            "rho",
            Box::new(|i| {
                (
                    (computed.states[i].rho - exact[i].rho).abs(),
                    exact[i].rho.abs(),
                )
            }),
        ),
        (
            "momentum",
            Box::new(|i| {
                let mut diff = computed.states[i].momentum;
                for d in 0..D {
                    diff[d] -= exact[i].momentum[d];
                }
                (norm(&diff), norm(&exact[i].momentum))
            }),
        ),
        (
            "energy",
            Box::new(|i| {
                (
                    (computed.states[i].energy - exact[i].energy).abs(),
                    exact[i].energy.abs(),
                )
            }),
        ),
    ];
    for (name, field) in fields {
        let num = lumped_norm((0..exact.len()).map(|i| field(i).0), graph, q);
        let den = lumped_norm((0..exact.len()).map(|i| field(i).1), graph, q);
        if den == 0.0 {
            return Err(Error::invalid(format!(
                "exact {name} norm vanishes; the relative indicator is undefined"
            )));
        }
        total += num / den;
    }
    Ok(total)
}

/// One row of a refinement study.
#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub n_nodes: usize,
    pub h: f64,
    /// one error per requested norm
    pub delta: Vec<f64>,
    /// convergence rate against the previous row (None on the first)
    pub rates: Vec<Option<f64>>,
}

/// Run the configuration on a ladder of uniformly refined meshes and
/// report delta_q errors with their observed convergence rates.
pub fn convergence_driver<const D: usize>(
    template: &RunConfig<D>,
    cell_ladder: &[usize],
    norms: &[NormOrder],
) -> Result<Vec<ConvergenceRow>>
where
    Mesh<D>: BuildMesh<D>,
{
    if cell_ladder.len() < 2 {
        return Err(Error::invalid("need at least two meshes"));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &cells in cell_ladder {
        let mut config = template.clone();
        config.mesh.cells = [cells; D];
        let series = run(&config)?;
        let snapshot = series
            .snapshots
            .last()
            .ok_or_else(|| Error::Invariant("run produced no snapshots".into()))?;
        let exact: Vec<ConservedState<D>> = series
            .graph
            .coords
            .iter()
            .map(|x| config.profile.conserved(x, config.t_final, &config.eos))
            .collect::<Result<_>>()?;
        let delta: Vec<f64> = norms
            .iter()
            .map(|&q| delta_q(snapshot, &exact, q, &series.graph))
            .collect::<Result<_>>()?;
        let h = (config.mesh.hi[0] - config.mesh.lo[0]) / cells as f64;
        let rates = match rows.last() {
            Some(prev) if prev.h != h => delta
                .iter()
                .zip(&prev.delta)
                .map(|(d, dp)| Some((dp / d).ln() / (prev.h / h).ln()))
                .collect(),
            _ => vec![None; delta.len()],
        };
        rows.push(ConvergenceRow {
            cells,
            n_nodes: series.graph.n_nodes,
            h,
            delta,
            rates,
        });
    }
    Ok(rows)
}

/// Outcome of the randomized wave-speed soundness suite.
#[derive(Clone, Debug)]
pub struct RiemannCheckReport {
    pub samples: usize,
    pub violations: usize,
    /// smallest observed lambda_hat - exact margin (normalized)
    pub worst_margin: f64,
    /// largest observed overestimation factor lambda_hat / exact
    pub worst_overestimate: f64,
}

/// Randomized soundness suite: covolume Riemann data with EOS-derived
/// exponents in [1.05, 3], the certified bound compared against the exact
/// maximum wave speed.
pub fn riemann_check(samples: usize, seed: u64, covolumes: &[f64]) -> Result<RiemannCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut worst_margin = f64::INFINITY;
    let mut worst_overestimate: f64 = 1.0;
    for k in 0..samples {
        let b = covolumes[k % covolumes.len()];
        let mut side = |rng: &mut ChaCha8Rng| {
            let mut rho: f64 = rng.gen_range(0.05..5.0);
            if b > 0.0 {
                rho = rho.min(rng.gen_range(0.2..0.95) / b);
            }
            let v = rng.gen_range(-3.0..3.0);
            let e = rng.gen_range(0.02..5.0);
            let gamma: f64 = rng.gen_range(1.05..3.0);
            let p = (gamma - 1.0) * rho * e / (1.0 - b * rho);
            let u = ConservedState::<1>::new(rho, [rho * v], rho * e + 0.5 * rho * v * v);
            (u.project(p, b, &[1.0]), p)
        };
        let (l, pl) = side(&mut rng);
        let (r, pr) = side(&mut rng);
        let est = lambda_max_bound(&l, &r, pl, pr, b)?;
        let exact = solve_wave_fan(&l, &r, pl, pr, b)?.max_wave_speed();
        let scale = exact.max(1.0);
        let margin = (est.lambda_hat - exact) / scale;
        worst_margin = worst_margin.min(margin);
        if exact > 0.0 {
            worst_overestimate = worst_overestimate.max(est.lambda_hat / exact);
        }
        if margin < -1e-12 {
            violations += 1;
        }
    }
    Ok(RiemannCheckReport {
        samples,
        violations,
        worst_margin,
        worst_overestimate,
    })
}
