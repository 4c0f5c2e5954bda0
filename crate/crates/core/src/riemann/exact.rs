//! Exact self-similar solution of the extended covolume Riemann problem,
//! used as an independent oracle by the verification suites. One covolume
//! law per side of the contact; gamma jumps across it.

use crate::error::Result;
use crate::state::ProjectedState;

use super::{star_pressure_upper_bound, WaveSide, GAMMA_ONE_EPS};

/// Elementary wave attached to one side of the contact.
#[derive(Clone, Copy, Debug)]
pub enum Wave {
    Shock { speed: f64, rho_star: f64 },
    Rarefaction { head: f64, tail: f64, rho_star: f64 },
}

/// Sampled value of the extended system (rho, m, E_reduced, Gamma) plus the
/// primitive quantities it was built from.
#[derive(Clone, Copy, Debug)]
pub struct ExtendedSample {
    pub rho: f64,
    pub mn: f64,
    pub en: f64,
    pub gamma_rho: f64,
    pub v: f64,
    pub p: f64,
    pub gamma: f64,
}

/// Complete wave fan of one extended Riemann problem.
#[derive(Clone, Debug)]
pub struct WaveFan {
    b: f64,
    left: WaveSide,
    right: WaveSide,
    pub pstar: f64,
    pub vstar: f64,
    pub left_wave: Wave,
    pub right_wave: Wave,
}

fn sample_from_primitive(rho: f64, v: f64, p: f64, gamma: f64, b: f64, e_fallback: f64) -> ExtendedSample {
    let e = if gamma > 1.0 + GAMMA_ONE_EPS {
        p * ((1.0 - b * rho) / rho) / (gamma - 1.0)
    } else {
        // pressureless side: the internal energy is advected unchanged
        e_fallback
    };
    ExtendedSample {
        rho,
        mn: rho * v,
        en: rho * e + 0.5 * rho * v * v,
        gamma_rho: rho * gamma,
        v,
        p,
        gamma,
    }
}

impl WaveSide {
    /// Specific volume behind a shock of strength p (Hugoniot locus).
    fn hugoniot_tau(&self, p: f64) -> f64 {
        let tau = 1.0 / self.rho;
        let g = self.gamma;
        let b = tau - self.cov;
        (2.0 * b * (p - self.p) + tau * ((g - 1.0) * p + (g + 1.0) * self.p))
            / ((g + 1.0) * p + (g - 1.0) * self.p)
    }

    /// Specific volume on the isentrope through the side data.
    fn isentrope_tau(&self, p: f64) -> f64 {
        let tau = 1.0 / self.rho;
        let b = tau - self.cov;
        b + self.cov * (self.p / p).powf(1.0 / self.gamma)
    }

    /// Sound speed at pressure p on the isentrope.
    fn isentrope_c(&self, p: f64) -> f64 {
        let tau = self.isentrope_tau(p);
        (self.gamma * p * tau * tau / (tau - (1.0 / self.rho - self.cov))).sqrt()
    }
}

/// Solve the extended Riemann problem exactly (star pressure resolved to
/// near machine precision).
pub fn solve_wave_fan(
    left: &ProjectedState,
    right: &ProjectedState,
    pl: f64,
    pr: f64,
    b: f64,
) -> Result<WaveFan> {
    let l = WaveSide::new(left, pl, b)?;
    let r = WaveSide::new(right, pr, b)?;
    let (pstar, _) = star_pressure_upper_bound(&l, &r, 1e-15);
    let (fl, _) = l.eval(pstar);
    let (fr, _) = r.eval(pstar);
    let vstar = 0.5 * (l.v + r.v) + 0.5 * (fr - fl);

    let make_wave = |side: &WaveSide, sign: f64| -> Wave {
        if pstar > side.p {
            let q = ((pstar + side.bb) / side.a).sqrt();
            Wave::Shock {
                speed: side.v + sign * q / side.rho,
                rho_star: 1.0 / side.hugoniot_tau(pstar),
            }
        } else if pstar == 0.0 {
            // expansion to vacuum: the tail is the vacuum front
            let front = if side.gamma > 1.0 + GAMMA_ONE_EPS {
                side.v - sign * 2.0 * side.c * side.cov * side.rho / (side.gamma - 1.0)
            } else {
                side.v
            };
            Wave::Rarefaction {
                head: side.v + sign * side.c,
                tail: front,
                rho_star: 0.0,
            }
        } else {
            Wave::Rarefaction {
                head: side.v + sign * side.c,
                tail: vstar + sign * side.isentrope_c(pstar),
                rho_star: 1.0 / side.isentrope_tau(pstar),
            }
        }
    };

    Ok(WaveFan {
        b,
        left: l,
        right: r,
        pstar,
        vstar,
        left_wave: make_wave(&l, -1.0),
        right_wave: make_wave(&r, 1.0),
    })
}

impl WaveFan {
    /// Maximum absolute characteristic speed over the whole fan.
    pub fn max_wave_speed(&self) -> f64 {
        let leftmost = match self.left_wave {
            Wave::Shock { speed, .. } => speed,
            Wave::Rarefaction { head, tail, .. } => head.min(tail),
        };
        let rightmost = match self.right_wave {
            Wave::Shock { speed, .. } => speed,
            Wave::Rarefaction { head, tail, .. } => head.max(tail),
        };
        leftmost.abs().max(rightmost.abs())
    }

    pub fn left_data(&self) -> (f64, f64, f64, f64) {
        (self.left.rho, self.left.v, self.left.p, self.left.gamma)
    }

    pub fn right_data(&self) -> (f64, f64, f64, f64) {
        (self.right.rho, self.right.v, self.right.p, self.right.gamma)
    }

    fn side_energy(&self, side: &WaveSide) -> f64 {
        side.p * side.cov / (side.gamma - 1.0).max(GAMMA_ONE_EPS)
    }

    /// Self-similar solution value at xi = x / t.
    pub fn sample(&self, xi: f64) -> ExtendedSample {
        let (side, wave, sign) = if xi < self.vstar {
            (&self.left, self.left_wave, -1.0)
        } else {
            (&self.right, self.right_wave, 1.0)
        };
        let e_side = if side.gamma > 1.0 + GAMMA_ONE_EPS {
            self.side_energy(side)
        } else {
            // zero-pressure data: e is not recoverable from p, carry zero
            // (only reachable for degenerate oracle data)
            0.0
        };
        match wave {
            Wave::Shock { speed, rho_star } => {
                let before = if sign < 0.0 { xi < speed } else { xi > speed };
                if before {
                    sample_from_primitive(side.rho, side.v, side.p, side.gamma, self.b, e_side)
                } else {
                    sample_from_primitive(rho_star, self.vstar, self.pstar, side.gamma, self.b, e_side)
                }
            }
            Wave::Rarefaction { head, tail, rho_star } => {
                let before = if sign < 0.0 { xi < head } else { xi > head };
                let past = if sign < 0.0 { xi > tail } else { xi < tail };
                if before {
                    sample_from_primitive(side.rho, side.v, side.p, side.gamma, self.b, e_side)
                } else if past {
                    sample_from_primitive(rho_star, self.vstar, self.pstar, side.gamma, self.b, e_side)
                } else {
                    // inside the fan: find p with v(p) + sign * c(p) = xi
                    let mut lo = self.pstar.max(f64::MIN_POSITIVE);
                    let mut hi = side.p;
                    for _ in 0..200 {
                        if hi - lo <= 1e-15 * hi {
                            break;
                        }
                        let mid = 0.5 * (lo + hi);
                        let (f, _) = side.eval(mid);
                        let speed = side.v + sign * f + sign * side.isentrope_c(mid);
                        // toward the head as p -> side.p
                        if (speed - xi) * sign > 0.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    let p = 0.5 * (lo + hi);
                    let (f, _) = side.eval(p);
                    let v = side.v + sign * f;
                    let rho = 1.0 / side.isentrope_tau(p);
                    sample_from_primitive(rho, v, p, side.gamma, self.b, e_side)
                }
            }
        }
    }
}

/// Sample the exact solution of the extended Riemann problem at xi = x/t,
/// returning (rho, m_n, reduced E, Gamma).
pub fn exact_riemann_sample(
    left: &ProjectedState,
    right: &ProjectedState,
    pl: f64,
    pr: f64,
    b: f64,
    xi: f64,
) -> Result<(f64, f64, f64, f64)> {
    let fan = solve_wave_fan(left, right, pl, pr, b)?;
    let s = fan.sample(xi);
    Ok((s.rho, s.mn, s.en, s.gamma_rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann::{psi_surrogate, surrogate_entropy, SurrogateParams};
    use crate::state::ConservedState;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn covolume_side(rho: f64, v: f64, e: f64, gamma: f64, b: f64) -> (ProjectedState, f64) {
        let p = (gamma - 1.0) * rho * e / (1.0 - b * rho);
        let u = ConservedState::<1>::new(rho, [rho * v], rho * e + 0.5 * rho * v * v);
        (u.project(p, b, &[1.0]), p)
    }

    fn random_pair(rng: &mut StdRng, b: f64) -> (ProjectedState, f64, ProjectedState, f64) {
        let side = |rng: &mut StdRng| {
            let rho: f64 = rng.gen_range(0.1..4.0);
            let rho = if b > 0.0 { rho.min(0.9 / b) } else { rho };
            covolume_side(
                rho,
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.1..4.0),
                rng.gen_range(1.05..3.0),
                b,
            )
        };
        let (l, pl) = side(rng);
        let (r, pr) = side(rng);
        (l, pl, r, pr)
    }

    #[test]
    fn sampling_far_field_returns_data() {
        let (l, pl) = covolume_side(1.0, 0.0, 2.5, 1.4, 0.0);
        let (r, pr) = covolume_side(0.125, 0.0, 2.0, 1.4, 0.0);
        let fan = solve_wave_fan(&l, &r, pl, pr, 0.0).unwrap();
        let speed = fan.max_wave_speed();
        let s = fan.sample(-2.0 * speed);
        assert!((s.rho - 1.0).abs() < 1e-12);
        assert!((s.p - pl).abs() < 1e-12);
        let s = fan.sample(2.0 * speed);
        assert!((s.rho - 0.125).abs() < 1e-12);
        assert!((s.p - pr).abs() < 1e-12);
    }

    #[test]
    fn rankine_hugoniot_residual_across_sampled_shocks() {
        let mut rng = StdRng::seed_from_u64(41);
        let mut checked = 0;
        for trial in 0..300 {
            let b = if trial % 2 == 0 { 0.0 } else { 0.08 };
            let (l, pl, r, pr) = random_pair(&mut rng, b);
            let fan = solve_wave_fan(&l, &r, pl, pr, b).unwrap();
            for wave in [fan.left_wave, fan.right_wave] {
                if let Wave::Shock { speed, .. } = wave {
                    let delta = 1e-9 * speed.abs().max(1.0);
                    let pre = fan.sample(speed - delta);
                    let post = fan.sample(speed + delta);
                    // flux of the extended system: (m, m^2/rho + p, v (E + p), v Gamma)
                    let flux = |s: &ExtendedSample| {
                        [
                            s.mn,
                            s.mn * s.mn / s.rho + s.p,
                            s.v * (s.en + s.p),
                            s.v * s.gamma_rho,
                        ]
                    };
                    let state = |s: &ExtendedSample| [s.rho, s.mn, s.en, s.gamma_rho];
                    let (fp, fq) = (flux(&pre), flux(&post));
                    let (up, uq) = (state(&pre), state(&post));
                    let scale: f64 = up
                        .iter()
                        .chain(uq.iter())
                        .fold(1.0f64, |m, v| m.max(v.abs()));
                    for k in 0..4 {
                        let res = speed * (uq[k] - up[k]) - (fq[k] - fp[k]);
                        assert!(
                            res.abs() < 1e-10 * scale * speed.abs().max(1.0),
                            "trial {trial}: RH residual {res} in component {k}"
                        );
                    }
                    checked += 1;
                }
            }
        }
        assert!(checked > 50, "too few shocks sampled ({checked})");
    }

    #[test]
    fn sampled_density_respects_covolume_cap() {
        let mut rng = StdRng::seed_from_u64(43);
        for trial in 0..200 {
            let b = if trial % 2 == 0 { 0.0 } else { 0.1 };
            let (l, pl, r, pr) = random_pair(&mut rng, b);
            let fan = solve_wave_fan(&l, &r, pl, pr, b).unwrap();
            let cap = [fan.left_data(), fan.right_data()]
                .iter()
                .map(|(rho, _, _, g)| (g + 1.0) * rho / ((g - 1.0) + 2.0 * b * rho))
                .fold(0.0f64, f64::max);
            let speed = fan.max_wave_speed().max(1e-3);
            for k in 0..101 {
                let xi = -1.5 * speed + 3.0 * speed * (k as f64) / 100.0;
                let s = fan.sample(xi);
                assert!(
                    s.rho <= cap * (1.0 + 1e-12),
                    "trial {trial}: rho {} above cap {cap}",
                    s.rho
                );
            }
        }
    }

    #[test]
    fn contact_carries_gamma_jump() {
        let (l, pl) = covolume_side(1.0, 0.3, 2.0, 1.3, 0.0);
        let (r, pr) = covolume_side(0.5, -0.2, 1.0, 2.2, 0.0);
        let fan = solve_wave_fan(&l, &r, pl, pr, 0.0).unwrap();
        let eps = 1e-10;
        let sl = fan.sample(fan.vstar - eps);
        let sr = fan.sample(fan.vstar + eps);
        assert!((sl.gamma - 1.3).abs() < 1e-12);
        assert!((sr.gamma - 2.2).abs() < 1e-12);
        // pressure and velocity are continuous across the contact
        assert!((sl.p - sr.p).abs() < 1e-9 * sl.p.max(1.0));
        assert!((sl.v - sr.v).abs() < 1e-9 * sl.v.abs().max(1.0));
    }

    #[test]
    fn psi_increases_with_shock_strength() {
        // along a single shock curve from fixed left data, Psi evaluated on
        // the post-shock state is nondecreasing in shock strength
        let b = 0.05;
        let gamma = 1.6;
        let (l, pl) = covolume_side(1.0, 0.0, 2.0, gamma, b);
        let ul = ConservedState::<1>::new(l.rho, [l.mn], l.en);
        let params = SurrogateParams {
            gamma_min: gamma,
            s_min: surrogate_entropy(&ul, gamma, b),
            b,
        };
        let mut last = f64::NEG_INFINITY;
        for k in 1..40 {
            // increasingly strong right-moving piston states
            let v_push = 0.1 * k as f64;
            let (r, pr) = covolume_side(1.0, -v_push, 2.0, gamma, b);
            let fan = solve_wave_fan(&l, &r, pl, pr, b).unwrap();
            match fan.left_wave {
                Wave::Shock { speed, .. } => {
                    let post = fan.sample(0.5 * (speed + fan.vstar));
                    let u = ConservedState::<1>::new(post.rho, [post.mn], post.en);
                    let psi = psi_surrogate(&u, &params);
                    assert!(
                        psi >= last - 1e-11 * psi.abs().max(1.0),
                        "Psi decreased along the shock curve"
                    );
                    assert!(psi >= -1e-12);
                    last = psi;
                }
                _ => panic!("expected a left shock"),
            }
        }
    }

    #[test]
    fn fan_interior_is_continuous() {
        let (l, pl) = covolume_side(1.0, 0.0, 2.5, 1.4, 0.0);
        let (r, pr) = covolume_side(0.125, 0.0, 2.0, 1.4, 0.0);
        let fan = solve_wave_fan(&l, &r, pl, pr, 0.0).unwrap();
        if let Wave::Rarefaction { head, tail, .. } = fan.left_wave {
            let mut prev = fan.sample(head - 1e-6);
            let n = 200;
            for k in 0..=n {
                let xi = head + (tail - head) * k as f64 / n as f64;
                let s = fan.sample(xi);
                assert!((s.rho - prev.rho).abs() < 2e-2);
                prev = s;
            }
        } else {
            panic!("Sod data must open with a left rarefaction");
        }
    }
}
