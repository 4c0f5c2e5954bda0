//! Pressure oracles: analytic equation-of-state families and tabulated data.
//!
//! The solver treats the pressure as a black box p(rho, e) defined on the
//! admissible set and returning a nonnegative value. Analytic families can
//! produce negative pressures at extreme states (Van der Waals, JWL); the
//! oracle clamps those to zero and the caller can count clamping events.

use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Equation-of-state selection with its parameters.
#[derive(Clone, Debug)]
pub enum EosSpec {
    /// Caloric Noble-Abel (covolume) law p = (gamma-1) rho e / (1 - b rho).
    /// The ideal gas is the special case b = 0.
    NobleAbel { gamma: f64, b: f64 },
    /// Caloric Van der Waals law
    /// p = (gamma-1)(rho e + a rho^2)/(1 - b rho) - a rho^2.
    VanDerWaals { gamma: f64, a: f64, b: f64 },
    /// Mie-Gruneisen with a linear Hugoniot locus as reference curve and
    /// constant Gruneisen coefficient.
    MieGruneisen {
        rho_ref: f64,
        c0: f64,
        s: f64,
        gamma0: f64,
        p0: f64,
        e0: f64,
    },
    /// Jones-Wilkins-Lee.
    Jwl {
        a: f64,
        b: f64,
        r1: f64,
        r2: f64,
        omega: f64,
        rho0: f64,
    },
    /// Bilinear interpolation on a rectangular (rho, e) pressure grid.
    Tabulated(Arc<EosTable>),
}

impl EosSpec {
    pub fn ideal(gamma: f64) -> Self {
        EosSpec::NobleAbel { gamma, b: 0.0 }
    }

    /// Covolume constant of the family, zero when the model has none.
    pub fn covolume(&self) -> f64 {
        match self {
            EosSpec::NobleAbel { b, .. } | EosSpec::VanDerWaals { b, .. } => *b,
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::invalid(format!("EOS spec: {msg}")));
        match self {
            EosSpec::NobleAbel { gamma, b } => {
                if !(*gamma > 1.0) {
                    return bad("gamma must exceed 1");
                }
                if !(*b >= 0.0) {
                    return bad("covolume b must be nonnegative");
                }
            }
            EosSpec::VanDerWaals { gamma, b, a } => {
                if !(*gamma > 1.0) {
                    return bad("gamma must exceed 1");
                }
                if !(*b >= 0.0) {
                    return bad("covolume b must be nonnegative");
                }
                if !a.is_finite() {
                    return bad("coefficient a must be finite");
                }
            }
            EosSpec::MieGruneisen { rho_ref, .. } => {
                if !(*rho_ref > 0.0) {
                    return bad("reference density must be positive");
                }
            }
            EosSpec::Jwl { r1, r2, rho0, .. } => {
                if !(*r1 > 0.0 && *r2 > 0.0) {
                    return bad("R1 and R2 must be positive");
                }
                if !(*rho0 > 0.0) {
                    return bad("reference density must be positive");
                }
            }
            EosSpec::Tabulated(_) => {}
        }
        Ok(())
    }

    /// Oracle pressure, clamped at zero. The second value reports whether
    /// clamping occurred, so callers can count model misuse.
    pub fn pressure_with_flag(&self, rho: f64, e: f64) -> Result<(f64, bool)> {
        if !rho.is_finite() || !e.is_finite() {
            return Err(Error::invalid(format!(
                "non-finite oracle input (rho = {rho}, e = {e})"
            )));
        }
        let p = match self {
            EosSpec::NobleAbel { gamma, b } => (gamma - 1.0) * rho * e / (1.0 - b * rho),
            EosSpec::VanDerWaals { gamma, a, b } => {
                (gamma - 1.0) * (rho * e + a * rho * rho) / (1.0 - b * rho) - a * rho * rho
            }
            EosSpec::MieGruneisen {
                rho_ref,
                c0,
                s,
                gamma0,
                p0,
                e0,
            } => {
                let x = 1.0 - rho_ref / rho;
                let den = 1.0 - s * x;
                let p_ref = p0 + rho_ref * c0 * c0 * x / (den * den);
                let e_ref = e0 + (p0 + p_ref) * x / (2.0 * rho_ref);
                p_ref + rho * gamma0 * (e - e_ref)
            }
            EosSpec::Jwl {
                a,
                b,
                r1,
                r2,
                omega,
                rho0,
            } => {
                let y = rho / rho0;
                a * (1.0 - omega / r1 * y) * (-r1 / y).exp()
                    + b * (1.0 - omega / r2 * y) * (-r2 / y).exp()
                    + omega * rho * e
            }
            EosSpec::Tabulated(table) => table.lookup(rho, e)?,
        };
        if !p.is_finite() {
            return Err(Error::invalid(format!(
                "oracle produced a non-finite pressure at rho = {rho}, e = {e}"
            )));
        }
        if p < 0.0 {
            Ok((0.0, true))
        } else {
            Ok((p, false))
        }
    }

    /// Oracle pressure, clamped at zero.
    pub fn pressure(&self, rho: f64, e: f64) -> Result<f64> {
        Ok(self.pressure_with_flag(rho, e)?.0)
    }

    /// Invert the oracle for the specific internal energy realizing a given
    /// pressure at fixed density. Used to initialize runs from primitive
    /// variables.
    pub fn energy_from_pressure(&self, rho: f64, p: f64) -> Result<f64> {
        if !(rho > 0.0) || !p.is_finite() {
            return Err(Error::invalid(format!(
                "energy_from_pressure needs rho > 0 and finite p (rho = {rho}, p = {p})"
            )));
        }
        match self {
            EosSpec::NobleAbel { gamma, b } => Ok(p * (1.0 - b * rho) / ((gamma - 1.0) * rho)),
            EosSpec::VanDerWaals { gamma, a, b } => {
                Ok((p + a * rho * rho) * (1.0 - b * rho) / ((gamma - 1.0) * rho) - a * rho)
            }
            EosSpec::MieGruneisen {
                rho_ref,
                c0,
                s,
                gamma0,
                p0,
                e0,
            } => {
                let x = 1.0 - rho_ref / rho;
                let den = 1.0 - s * x;
                let p_ref = p0 + rho_ref * c0 * c0 * x / (den * den);
                let e_ref = e0 + (p0 + p_ref) * x / (2.0 * rho_ref);
                Ok(e_ref + (p - p_ref) / (rho * gamma0))
            }
            EosSpec::Jwl {
                a,
                b,
                r1,
                r2,
                omega,
                rho0,
            } => {
                let y = rho / rho0;
                let reference = a * (1.0 - omega / r1 * y) * (-r1 / y).exp()
                    + b * (1.0 - omega / r2 * y) * (-r2 / y).exp();
                Ok((p - reference) / (omega * rho))
            }
            EosSpec::Tabulated(table) => table.energy_from_pressure(rho, p),
        }
    }
}

/// Rectangular pressure table over strictly increasing (rho, e) knots.
/// Values are stored row-major: `p[k * e_knots.len() + l]` is the pressure
/// at `(rho_knots[k], e_knots[l])`.
#[derive(Clone, Debug)]
pub struct EosTable {
    rho_knots: Vec<f64>,
    e_knots: Vec<f64>,
    p: Vec<f64>,
}

fn check_knots(name: &'static str, knots: &[f64]) -> Result<()> {
    if knots.len() < 2 {
        return Err(Error::invalid(format!("{name} needs at least 2 knots")));
    }
    for w in knots.windows(2) {
        if !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(Error::invalid(format!(
                "{name} knots must be finite and strictly increasing"
            )));
        }
    }
    Ok(())
}

impl EosTable {
    pub fn new(rho_knots: Vec<f64>, e_knots: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        check_knots("density", &rho_knots)?;
        check_knots("energy", &e_knots)?;
        if p.len() != rho_knots.len() * e_knots.len() {
            return Err(Error::invalid(format!(
                "pressure grid has {} entries, expected {} x {}",
                p.len(),
                rho_knots.len(),
                e_knots.len()
            )));
        }
        if let Some(bad) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(format!(
                "pressure grid entries must be finite and nonnegative (found {bad})"
            )));
        }
        Ok(EosTable {
            rho_knots,
            e_knots,
            p,
        })
    }

    pub fn rho_knots(&self) -> &[f64] {
        &self.rho_knots
    }

    pub fn e_knots(&self) -> &[f64] {
        &self.e_knots
    }

    pub fn value_at(&self, k: usize, l: usize) -> f64 {
        self.p[k * self.e_knots.len() + l]
    }

    fn cell_index(knots: &[f64], x: f64, axis: &'static str) -> Result<usize> {
        let lo = knots[0];
        let hi = *knots.last().unwrap();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfTable {
                axis,
                value: x,
                lo,
                hi,
            });
        }
        // index of the cell [knots[i], knots[i+1]] containing x
        let i = knots.partition_point(|k| *k <= x);
        Ok(i.clamp(1, knots.len() - 1) - 1)
    }

    /// Bilinear interpolation; exact at knots, continuous across cells.
    pub fn lookup(&self, rho: f64, e: f64) -> Result<f64> {
        if !rho.is_finite() || !e.is_finite() {
            return Err(Error::invalid(format!(
                "non-finite table query (rho = {rho}, e = {e})"
            )));
        }
        let k = Self::cell_index(&self.rho_knots, rho, "rho")?;
        let l = Self::cell_index(&self.e_knots, e, "e")?;
        let (r0, r1) = (self.rho_knots[k], self.rho_knots[k + 1]);
        let (e0, e1) = (self.e_knots[l], self.e_knots[l + 1]);
        let t = (rho - r0) / (r1 - r0);
        let s = (e - e0) / (e1 - e0);
        let p00 = self.value_at(k, l);
        let p01 = self.value_at(k, l + 1);
        let p10 = self.value_at(k + 1, l);
        let p11 = self.value_at(k + 1, l + 1);
        Ok((1.0 - t) * ((1.0 - s) * p00 + s * p01) + t * ((1.0 - s) * p10 + s * p11))
    }

    /// Scan the e-axis at fixed density for the energy matching a pressure.
    /// The interpolant is piecewise linear in e, so the first bracketing
    /// cell yields the answer exactly.
    pub fn energy_from_pressure(&self, rho: f64, p: f64) -> Result<f64> {
        let n = self.e_knots.len();
        let mut prev = self.lookup(rho, self.e_knots[0])?;
        if prev == p {
            return Ok(self.e_knots[0]);
        }
        for l in 1..n {
            let cur = self.lookup(rho, self.e_knots[l])?;
            if (prev - p) * (cur - p) <= 0.0 {
                let t = if cur == prev { 0.0 } else { (p - prev) / (cur - prev) };
                return Ok(self.e_knots[l - 1] + t * (self.e_knots[l] - self.e_knots[l - 1]));
            }
            prev = cur;
        }
        Err(Error::invalid(format!(
            "no tabulated energy realizes p = {p:e} at rho = {rho:e}"
        )))
    }

    /// Parse the table CSV format:
    /// line 1: `rho_knots,<v1>,<v2>,...`
    /// line 2: `e_knots,<w1>,...`
    /// then one `p,<row>` line per density knot, each row over the e knots.
    pub fn from_csv(reader: impl BufRead) -> Result<Self> {
        let mut rho_knots: Option<Vec<f64>> = None;
        let mut e_knots: Option<Vec<f64>> = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();

        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let tag = fields.next().unwrap().trim();
            let values: std::result::Result<Vec<f64>, _> =
                fields.map(|f| f.trim().parse::<f64>()).collect();
            let values = values.map_err(|e| Error::TableParse {
                line: lineno,
                message: format!("bad number: {e}"),
            })?;
            let parse_err = |message: String| Error::TableParse {
                line: lineno,
                message,
            };
            match tag {
                "rho_knots" => {
                    check_knots("density", &values)
                        .map_err(|e| parse_err(e.to_string()))?;
                    rho_knots = Some(values);
                }
                "e_knots" => {
                    check_knots("energy", &values).map_err(|e| parse_err(e.to_string()))?;
                    e_knots = Some(values);
                }
                "p" => {
                    let ncols = e_knots
                        .as_ref()
                        .ok_or_else(|| parse_err("pressure row before e_knots".into()))?
                        .len();
                    if values.len() != ncols {
                        return Err(parse_err(format!(
                            "ragged row: {} entries, expected {}",
                            values.len(),
                            ncols
                        )));
                    }
                    if let Some(bad) = values.iter().find(|v| **v < 0.0 || !v.is_finite()) {
                        return Err(parse_err(format!("negative pressure entry {bad}")));
                    }
                    rows.push(values);
                }
                other => {
                    return Err(parse_err(format!("unknown row tag `{other}`")));
                }
            }
        }

        let rho_knots = rho_knots.ok_or_else(|| Error::TableParse {
            line: 0,
            message: "missing rho_knots row".into(),
        })?;
        let e_knots = e_knots.ok_or_else(|| Error::TableParse {
            line: 0,
            message: "missing e_knots row".into(),
        })?;
        if rows.len() != rho_knots.len() {
            return Err(Error::TableParse {
                line: 0,
                message: format!(
                    "expected {} pressure rows, found {}",
                    rho_knots.len(),
                    rows.len()
                ),
            });
        }
        EosTable::new(rho_knots, e_knots, rows.concat())
    }

    pub fn to_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let fmt_row = |tag: &str, vals: &[f64]| {
            let mut s = String::from(tag);
            for v in vals {
                s.push(',');
                s.push_str(&format!("{v:.16e}"));
            }
            s
        };
        writeln!(w, "{}", fmt_row("rho_knots", &self.rho_knots))?;
        writeln!(w, "{}", fmt_row("e_knots", &self.e_knots))?;
        for k in 0..self.rho_knots.len() {
            let row = &self.p[k * self.e_knots.len()..(k + 1) * self.e_knots.len()];
            writeln!(w, "{}", fmt_row("p", row))?;
        }
        Ok(())
    }
}

/// Sample an analytic oracle onto a rectangular table. Pressures are clamped
/// at zero; returns the table together with the number of clamped entries.
pub fn make_synthetic_table(
    spec: &EosSpec,
    rho_range: (f64, f64),
    e_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<(EosTable, usize)> {
    if matches!(spec, EosSpec::Tabulated(_)) {
        return Err(Error::invalid(
            "synthetic tables are sampled from analytic specs",
        ));
    }
    spec.validate()?;
    let (n_rho, n_e) = resolution;
    if n_rho < 2 || n_e < 2 {
        return Err(Error::invalid("need at least 2 knots per axis"));
    }
    let (rho_lo, rho_hi) = rho_range;
    let (e_lo, e_hi) = e_range;
    if !(rho_lo > 0.0 && rho_hi > rho_lo && e_lo > 0.0 && e_hi > e_lo) {
        return Err(Error::invalid(
            "ranges must be positive and increasing (rho_lo < rho_hi, e_lo < e_hi)",
        ));
    }
    let b = spec.covolume();
    if b > 0.0 && !(1.0 - b * rho_hi > 0.0) {
        return Err(Error::invalid(format!(
            "density range exceeds maximum compressibility 1/b = {:e}",
            1.0 / b
        )));
    }
    let linspace = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    };
    let rho_knots = linspace(rho_lo, rho_hi, n_rho);
    let e_knots = linspace(e_lo, e_hi, n_e);
    let mut p = Vec::with_capacity(n_rho * n_e);
    let mut clamped = 0usize;
    for rho in &rho_knots {
        for e in &e_knots {
            let (value, was_clamped) = spec.pressure_with_flag(*rho, *e)?;
            if was_clamped {
                clamped += 1;
            }
            p.push(value);
        }
    }
    Ok((EosTable::new(rho_knots, e_knots, p)?, clamped))
}
