//! Benchmark presets: the verification and benchmark configurations with
//! their published parameter values.

use std::fmt::Write as _;

use crate::discretization::SideBc;
use crate::eos::{make_synthetic_table, EosSpec};
use crate::error::{Error, Result};
use crate::limiter::LimiterMethod;
use crate::timeloop::{Mesh, Piece, Profile, RunConfig};
use crate::verification::{SmoothWaveParams, VortexParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetName {
    SmoothWaveIdeal,
    SmoothWaveVdw,
    SmoothWaveJwl,
    SmoothWaveMg,
    VortexVdw,
    SodCovolume,
    WoodwardColellaJwlCase1,
    WoodwardColellaJwlCase2,
    ImpactSyntheticTable,
}

impl PresetName {
    pub const ALL: [PresetName; 9] = [
        PresetName::SmoothWaveIdeal,
        PresetName::SmoothWaveVdw,
        PresetName::SmoothWaveJwl,
        PresetName::SmoothWaveMg,
        PresetName::VortexVdw,
        PresetName::SodCovolume,
        PresetName::WoodwardColellaJwlCase1,
        PresetName::WoodwardColellaJwlCase2,
        PresetName::ImpactSyntheticTable,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            PresetName::SmoothWaveIdeal => "smooth-wave-ideal",
            PresetName::SmoothWaveVdw => "smooth-wave-vdw",
            PresetName::SmoothWaveJwl => "smooth-wave-jwl",
            PresetName::SmoothWaveMg => "smooth-wave-mg",
            PresetName::VortexVdw => "vortex-vdw",
            PresetName::SodCovolume => "sod-covolume",
            PresetName::WoodwardColellaJwlCase1 => "woodward-colella-jwl-case1",
            PresetName::WoodwardColellaJwlCase2 => "woodward-colella-jwl-case2",
            PresetName::ImpactSyntheticTable => "impact-synthetic-table",
        }
    }

    pub fn parse(s: &str) -> Option<PresetName> {
        PresetName::ALL.into_iter().find(|p| p.id() == s)
    }
}

/// A preset is either a 1D or a 2D run configuration.
#[derive(Clone, Debug)]
pub enum PresetConfig {
    OneD(RunConfig<1>),
    TwoD(RunConfig<2>),
}

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: PresetName,
    pub description: &'static str,
    pub config: PresetConfig,
}

fn smooth_wave_1d(eos: EosSpec, covolume: f64, rho0: f64, v0: f64, p0: f64, t: f64) -> RunConfig<1> {
    RunConfig {
        mesh: Mesh {
            cells: [100],
            lo: [0.0],
            hi: [1.0],
            bc: [(SideBc::Dirichlet, SideBc::Dirichlet)],
        },
        eos,
        covolume,
        cfl: 0.1,
        t_final: t,
        x0_activation: 0.4,
        limiter: LimiterMethod::QuadraticNewton,
        profile: Profile::SmoothWave(SmoothWaveParams {
            rho0,
            v0,
            p0,
            x0: 0.1,
            x1: 0.3,
        }),
        snapshot_every: 0,
    }
}

fn woodward_colella(eos: EosSpec, t_final: f64) -> RunConfig<1> {
    let wall = |p: f64, x_upper: f64, upper_inclusive: bool| Piece {
        x_upper,
        upper_inclusive,
        rho: 1.0,
        v: [0.0],
        p,
    };
    RunConfig {
        mesh: Mesh {
            cells: [1600],
            lo: [0.0],
            hi: [1.0],
            bc: [(SideBc::Slip, SideBc::Slip)],
        },
        eos,
        covolume: 0.0,
        cfl: 0.9,
        t_final,
        x0_activation: 0.4,
        limiter: LimiterMethod::QuadraticNewton,
        profile: Profile::PiecewiseX(vec![
            wall(1e3, 0.1, true),
            wall(1e-2, 0.9, false),
            wall(1e2, f64::INFINITY, true),
        ]),
        snapshot_every: 0,
    }
}

/// Synthetic tabulated oracle standing in for a database-backed material:
/// an ideal-gas sample over a range wide enough for the impact problem.
pub fn impact_table_spec() -> (EosSpec, (f64, f64), (f64, f64), (usize, usize)) {
    (EosSpec::ideal(1.4), (500.0, 12000.0), (5e5, 5e8), (192, 192))
}

pub fn preset(name: PresetName) -> Result<Preset> {
    let config = match name {
        PresetName::SmoothWaveIdeal => PresetConfig::OneD(smooth_wave_1d(
            EosSpec::ideal(1.4),
            0.0,
            1.0,
            1.0,
            1.0,
            0.6,
        )),
        PresetName::SmoothWaveVdw => PresetConfig::OneD(smooth_wave_1d(
            EosSpec::VanDerWaals {
                gamma: 1.4,
                a: 1.0,
                b: 0.075,
            },
            0.075,
            1.0,
            1.0,
            1.0,
            0.6,
        )),
        PresetName::SmoothWaveJwl => PresetConfig::OneD(smooth_wave_1d(
            EosSpec::Jwl {
                a: 1.0,
                b: -1.0,
                r1: 2.0,
                r2: 1.0,
                omega: 1.0,
                rho0: 1.0,
            },
            0.0,
            1.0,
            1.0,
            1.0,
            0.6,
        )),
        PresetName::SmoothWaveMg => PresetConfig::OneD(smooth_wave_1d(
            EosSpec::MieGruneisen {
                rho_ref: 2790.0,
                c0: 5330.0,
                s: 1.34,
                gamma0: 2.00,
                p0: 0.0,
                e0: 0.0,
            },
            0.0,
            3500.0,
            1e4,
            1e11,
            6e-5,
        )),
        PresetName::VortexVdw => {
            let params = VortexParams::new(
                1.0,
                1.5,
                0.1,
                1.0,
                [1.0, 1.0],
                [-1.0, -1.0],
                1.0,
                20.0,
            )?;
            PresetConfig::TwoD(RunConfig {
                mesh: Mesh {
                    cells: [32, 32],
                    lo: [-5.0, -5.0],
                    hi: [5.0, 5.0],
                    bc: [
                        (SideBc::Dirichlet, SideBc::Dirichlet),
                        (SideBc::Dirichlet, SideBc::Dirichlet),
                    ],
                },
                eos: EosSpec::VanDerWaals {
                    gamma: 1.5,
                    a: 1.0,
                    b: 0.0,
                },
                covolume: 0.0,
                cfl: 0.1,
                t_final: 2.0,
                x0_activation: 0.4,
                limiter: LimiterMethod::QuadraticNewton,
                profile: Profile::Vortex(params),
                snapshot_every: 0,
            })
        }
        PresetName::SodCovolume => PresetConfig::OneD(RunConfig {
            mesh: Mesh {
                cells: [200],
                lo: [0.0],
                hi: [1.0],
                bc: [(SideBc::Dirichlet, SideBc::Dirichlet)],
            },
            eos: EosSpec::NobleAbel { gamma: 1.4, b: 0.1 },
            covolume: 0.1,
            cfl: 0.5,
            t_final: 0.2,
            x0_activation: 0.4,
            limiter: LimiterMethod::QuadraticNewton,
            profile: Profile::PiecewiseX(vec![
                Piece {
                    x_upper: 0.5,
                    upper_inclusive: false,
                    rho: 1.0,
                    v: [0.0],
                    p: 1.0,
                },
                Piece {
                    x_upper: f64::INFINITY,
                    upper_inclusive: true,
                    rho: 0.125,
                    v: [0.0],
                    p: 0.1,
                },
            ]),
            snapshot_every: 0,
        }),
        PresetName::WoodwardColellaJwlCase1 => PresetConfig::OneD(woodward_colella(
            EosSpec::Jwl {
                a: 6.321e3,
                b: -4.472,
                r1: 11.3,
                r2: 1.13,
                omega: 0.8938,
                rho0: 1.0,
            },
            0.038,
        )),
        PresetName::WoodwardColellaJwlCase2 => PresetConfig::OneD(woodward_colella(
            EosSpec::Jwl {
                a: 7.7828e11,
                b: 7.071428e9,
                r1: 4.2,
                r2: 1.00,
                omega: 0.3000,
                rho0: 1891.0,
            },
            8.2e-4,
        )),
        PresetName::ImpactSyntheticTable => {
            let (spec, rho_range, e_range, resolution) = impact_table_spec();
            let (table, _) = make_synthetic_table(&spec, rho_range, e_range, resolution)?;
            PresetConfig::OneD(RunConfig {
                mesh: Mesh {
                    cells: [250],
                    lo: [0.0],
                    hi: [0.05],
                    bc: [(SideBc::Dirichlet, SideBc::Slip)],
                },
                eos: EosSpec::Tabulated(std::sync::Arc::new(table)),
                covolume: 0.0,
                cfl: 0.5,
                t_final: 2e-6,
                x0_activation: 0.4,
                limiter: LimiterMethod::QuadraticNewton,
                profile: Profile::PiecewiseX(vec![
                    Piece {
                        x_upper: 0.025,
                        upper_inclusive: false,
                        rho: 3000.0,
                        v: [800.0],
                        p: 1.004489e10,
                    },
                    Piece {
                        x_upper: f64::INFINITY,
                        upper_inclusive: true,
                        rho: 3000.0,
                        v: [0.0],
                        p: 1.004489e10,
                    },
                ]),
                snapshot_every: 0,
            })
        }
    };
    Ok(Preset {
        name,
        description: match name {
            PresetName::SmoothWaveIdeal => "1D smooth traveling wave, ideal gas",
            PresetName::SmoothWaveVdw => "1D smooth traveling wave, Van der Waals",
            PresetName::SmoothWaveJwl => "1D smooth traveling wave, JWL",
            PresetName::SmoothWaveMg => "1D smooth traveling wave, Mie-Gruneisen (SI units)",
            PresetName::VortexVdw => "2D isentropic vortex, Van der Waals gamma = 3/2",
            PresetName::SodCovolume => "Sod shock tube with the Noble-Abel law, b = 0.1",
            PresetName::WoodwardColellaJwlCase1 => "Woodward-Colella blast wave, JWL case 1",
            PresetName::WoodwardColellaJwlCase2 => "Woodward-Colella blast wave, JWL case 2",
            PresetName::ImpactSyntheticTable => {
                "slab impact with a synthetic tabulated oracle (Dirichlet left, slip right)"
            }
        },
        config,
    })
}

pub fn preset_by_id(id: &str) -> Result<Preset> {
    let name = PresetName::parse(id)
        .ok_or_else(|| Error::invalid(format!("unknown preset `{id}`")))?;
    preset(name)
}

fn dump_eos(out: &mut String, eos: &EosSpec) {
    match eos {
        EosSpec::NobleAbel { gamma, b } => {
            let _ = writeln!(out, "  eos           = noble-abel (gamma = {gamma}, b = {b})");
        }
        EosSpec::VanDerWaals { gamma, a, b } => {
            let _ = writeln!(
                out,
                "  eos           = van-der-waals (gamma = {gamma}, a = {a}, b = {b})"
            );
        }
        EosSpec::MieGruneisen {
            rho_ref,
            c0,
            s,
            gamma0,
            p0,
            e0,
        } => {
            let _ = writeln!(
                out,
                "  eos           = mie-gruneisen (rho_ref = {rho_ref}, c0 = {c0}, s = {s}, Gamma0 = {gamma0}, P0 = {p0}, e0 = {e0})"
            );
        }
        EosSpec::Jwl {
            a,
            b,
            r1,
            r2,
            omega,
            rho0,
        } => {
            let _ = writeln!(
                out,
                "  eos           = jwl (A = {a}, B = {b}, R1 = {r1}, R2 = {r2}, omega = {omega}, rho0 = {rho0})"
            );
        }
        EosSpec::Tabulated(t) => {
            let _ = writeln!(
                out,
                "  eos           = tabulated ({} x {} knots, rho in [{:e}, {:e}], e in [{:e}, {:e}])",
                t.rho_knots().len(),
                t.e_knots().len(),
                t.rho_knots()[0],
                t.rho_knots().last().unwrap(),
                t.e_knots()[0],
                t.e_knots().last().unwrap()
            );
        }
    }
}

fn dump_common<const D: usize>(out: &mut String, c: &RunConfig<D>) {
    dump_eos(out, &c.eos);
    let _ = writeln!(out, "  covolume      = {}", c.covolume);
    let _ = writeln!(out, "  cfl           = {}", c.cfl);
    let _ = writeln!(out, "  t_final       = {}", c.t_final);
    let _ = writeln!(out, "  x0            = {}", c.x0_activation);
    let _ = writeln!(
        out,
        "  limiter       = {}",
        match c.limiter {
            LimiterMethod::QuadraticNewton => "quadratic-newton",
            LimiterMethod::NewtonSecant => "newton-secant",
        }
    );
    let side = |s: SideBc| match s {
        SideBc::Dirichlet => "dirichlet",
        SideBc::Slip => "slip",
    };
    for d in 0..D {
        let _ = writeln!(
            out,
            "  axis {d}        = {} cells on [{}, {}], bc = ({}, {})",
            c.mesh.cells[d],
            c.mesh.lo[d],
            c.mesh.hi[d],
            side(c.mesh.bc[d].0),
            side(c.mesh.bc[d].1)
        );
    }
    match &c.profile {
        Profile::Uniform { rho, v, p } => {
            let _ = writeln!(out, "  profile       = uniform (rho = {rho}, v = {v:?}, p = {p})");
        }
        Profile::SmoothWave(w) => {
            let _ = writeln!(
                out,
                "  profile       = smooth-wave (rho0 = {}, v0 = {}, p0 = {}, support [{}, {}])",
                w.rho0, w.v0, w.p0, w.x0, w.x1
            );
        }
        Profile::PiecewiseX(pieces) => {
            let _ = writeln!(out, "  profile       = piecewise in x:");
            for piece in pieces {
                let _ = writeln!(
                    out,
                    "    up to x {} {:9.4e}: rho = {}, v = {:?}, p = {}",
                    if piece.upper_inclusive { "<=" } else { "< " },
                    piece.x_upper,
                    piece.rho,
                    piece.v,
                    piece.p
                );
            }
        }
        Profile::Vortex(v) => {
            let _ = writeln!(
                out,
                "  profile       = vdw vortex (a = {}, gamma = {}, rho_inf = {}, p_inf = {}, v_inf = {:?}, center = {:?}, r0 = {}, beta = {}; C = {:.12}, F = {:.12})",
                v.a, v.gamma, v.rho_inf, v.p_inf, v.v_inf, v.center, v.r0, v.beta, v.c_const, v.f_const
            );
        }
    }
}

impl Preset {
    /// Audit listing of every bound parameter value.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}: {}", self.name.id(), self.description);
        match &self.config {
            PresetConfig::OneD(c) => dump_common(&mut out, c),
            PresetConfig::TwoD(c) => dump_common(&mut out, c),
        }
        out
    }
}
