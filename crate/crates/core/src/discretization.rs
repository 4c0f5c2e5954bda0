//! Graph coefficients of the continuous finite-element discretization:
//! lumped and consistent masses, the divergence vectors c_ij, the stiffness
//! coefficients beta_ij, stencils and boundary classification. Piecewise
//! linear elements on uniform 1D intervals and bilinear elements on uniform
//! 2D Cartesian grids.
//!
//! Conventions: c_ij = integral of phi_i grad(phi_j). Row sums vanish at
//! every node (partition of unity), including boundary rows once the
//! nonzero self-entry is kept. Antisymmetry c_ij = -c_ji holds for every
//! interior pair; for pairs of adjacent boundary nodes the defect is the
//! boundary normal integral, which the scheme's boundary fix consumes.

use crate::error::{Error, Result};

/// Boundary condition kind attached to a mesh side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideBc {
    Dirichlet,
    Slip,
}

/// Per-node boundary classification.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeBoundary<const D: usize> {
    Interior,
    Dirichlet,
    /// Wall node with its outward normals (two at corners).
    Slip { normals: Vec<[f64; D]> },
}

/// Unordered stencil pair with the CSR entry of each direction.
#[derive(Clone, Copy, Debug)]
pub struct PairTopo {
    pub i: u32,
    pub j: u32,
    pub k_ij: u32,
    pub k_ji: u32,
}

/// Assembled discretization data shared read-only by the solver.
#[derive(Clone, Debug)]
pub struct GraphCoefficients<const D: usize> {
    pub n_nodes: usize,
    pub coords: Vec<[f64; D]>,
    pub lumped_mass: Vec<f64>,
    pub domain_measure: f64,

    // off-diagonal stencil entries in CSR layout, columns sorted per row
    pub row_start: Vec<usize>,
    pub col: Vec<u32>,
    pub cij: Vec<[f64; D]>,
    pub mij: Vec<f64>,
    /// mass-matrix correction b_ij = -m_ij / m_j (off-diagonal part)
    pub bij: Vec<f64>,
    pub betaij: Vec<f64>,

    // diagonal entries
    pub cii: Vec<[f64; D]>,
    pub mii: Vec<f64>,
    pub betaii: Vec<f64>,

    pub boundary: Vec<NodeBoundary<D>>,
    pub pairs: Vec<PairTopo>,
    /// CSR entry -> index into `pairs`
    pub entry_pair: Vec<u32>,
}

impl<const D: usize> GraphCoefficients<D> {
    pub fn row(&self, i: usize) -> std::ops::Range<usize> {
        self.row_start[i]..self.row_start[i + 1]
    }

    pub fn neighbor_count(&self, i: usize) -> usize {
        self.row_start[i + 1] - self.row_start[i]
    }

    /// Mesh-dependent relaxation radius (m_i / |D|)^(1.5 / d).
    pub fn relaxation_radius(&self, i: usize) -> f64 {
        (self.lumped_mass[i] / self.domain_measure).powf(1.5 / D as f64)
    }

    fn finish(mut self) -> Self {
        // pair list and entry -> pair map
        let nnz = self.col.len();
        self.entry_pair = vec![u32::MAX; nnz];
        self.pairs.clear();
        for i in 0..self.n_nodes {
            for k in self.row(i) {
                let j = self.col[k] as usize;
                if j <= i {
                    continue;
                }
                let k_ji = self.row(j)
                    .find(|&kk| self.col[kk] as usize == i)
                    .expect("stencil adjacency must be symmetric");
                let pair = PairTopo {
                    i: i as u32,
                    j: j as u32,
                    k_ij: k as u32,
                    k_ji: k_ji as u32,
                };
                self.entry_pair[k] = self.pairs.len() as u32;
                self.entry_pair[k_ji] = self.pairs.len() as u32;
                self.pairs.push(pair);
            }
        }
        self
    }

    /// Structural invariants, used by tests and debug assertions.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n_nodes {
            let mut mass = self.mii[i];
            let mut csum = [0.0; D];
            let mut beta_off = 0.0;
            for k in self.row(i) {
                mass += self.mij[k];
                for d in 0..D {
                    csum[d] += self.cij[k][d];
                }
                beta_off += self.betaij[k];
            }
            for d in 0..D {
                csum[d] += self.cii[i][d];
            }
            if (mass - self.lumped_mass[i]).abs() > 1e-12 * self.lumped_mass[i] {
                return Err(Error::Invariant(format!(
                    "row {i}: consistent masses sum to {mass}, lumped is {}",
                    self.lumped_mass[i]
                )));
            }
            let scale = 1.0 / self.lumped_mass[i].max(1e-300);
            if csum.iter().any(|c| c.abs() * scale > 1e-10) {
                return Err(Error::Invariant(format!("row {i}: c row sum {csum:?}")));
            }
            if (beta_off + self.betaii[i]).abs() > 1e-10 * self.betaii[i].abs().max(1.0) {
                return Err(Error::Invariant(format!(
                    "row {i}: beta row sum nonzero"
                )));
            }
        }
        for p in &self.pairs {
            let (i, j) = (p.i as usize, p.j as usize);
            let interior_pair = matches!(self.boundary[i], NodeBoundary::Interior)
                || matches!(self.boundary[j], NodeBoundary::Interior);
            if interior_pair {
                for d in 0..D {
                    let defect = self.cij[p.k_ij as usize][d] + self.cij[p.k_ji as usize][d];
                    if defect.abs() > 1e-13 {
                        return Err(Error::Invariant(format!(
                            "pair ({i},{j}): c antisymmetry defect {defect}"
                        )));
                    }
                }
            }
            let bsym = self.betaij[p.k_ij as usize] - self.betaij[p.k_ji as usize];
            if bsym.abs() > 1e-12 {
                return Err(Error::Invariant(format!(
                    "pair ({i},{j}): beta asymmetry {bsym}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-axis P1 coefficient tables on a uniform 1D grid with n_cells cells.
struct Axis {
    n_nodes: usize,
    h: f64,
}

impl Axis {
    fn lumped(&self, i: usize) -> f64 {
        if i == 0 || i == self.n_nodes - 1 {
            0.5 * self.h
        } else {
            self.h
        }
    }

    /// consistent mass entry, |i - j| <= 1
    fn mass(&self, i: usize, j: usize) -> f64 {
        if i == j {
            if i == 0 || i == self.n_nodes - 1 {
                self.h / 3.0
            } else {
                2.0 * self.h / 3.0
            }
        } else {
            self.h / 6.0
        }
    }

    /// c entry: integral phi_i d(phi_j)/dx
    fn c(&self, i: usize, j: usize) -> f64 {
        let last = self.n_nodes - 1;
        if i == j {
            if i == 0 {
                -0.5
            } else if i == last {
                0.5
            } else {
                0.0
            }
        } else if j == i + 1 {
            0.5
        } else {
            -0.5
        }
    }

    /// stiffness entry: integral d(phi_i) d(phi_j)
    fn beta(&self, i: usize, j: usize) -> f64 {
        if i == j {
            if i == 0 || i == self.n_nodes - 1 {
                1.0 / self.h
            } else {
                2.0 / self.h
            }
        } else {
            -1.0 / self.h
        }
    }
}

/// Uniform piecewise-linear discretization of the interval (x_lo, x_hi).
pub fn build_1d(
    n_cells: usize,
    x_lo: f64,
    x_hi: f64,
    left: SideBc,
    right: SideBc,
) -> Result<GraphCoefficients<1>> {
    if n_cells < 2 {
        return Err(Error::invalid("need at least 2 cells"));
    }
    if !(x_hi > x_lo) {
        return Err(Error::invalid("degenerate interval"));
    }
    let n = n_cells + 1;
    let h = (x_hi - x_lo) / n_cells as f64;
    let axis = Axis { n_nodes: n, h };

    let mut g = GraphCoefficients::<1> {
        n_nodes: n,
        coords: (0..n).map(|i| [x_lo + i as f64 * h]).collect(),
        lumped_mass: (0..n).map(|i| axis.lumped(i)).collect(),
        domain_measure: x_hi - x_lo,
        row_start: Vec::with_capacity(n + 1),
        col: Vec::new(),
        cij: Vec::new(),
        mij: Vec::new(),
        bij: Vec::new(),
        betaij: Vec::new(),
        cii: (0..n).map(|i| [axis.c(i, i)]).collect(),
        mii: (0..n).map(|i| axis.mass(i, i)).collect(),
        betaii: (0..n).map(|i| axis.beta(i, i)).collect(),
        boundary: Vec::with_capacity(n),
        pairs: Vec::new(),
        entry_pair: Vec::new(),
    };

    g.row_start.push(0);
    for i in 0..n {
        for j in [i.wrapping_sub(1), i + 1] {
            if j >= n {
                continue;
            }
            g.col.push(j as u32);
            g.cij.push([axis.c(i, j)]);
            g.mij.push(axis.mass(i, j));
            g.betaij.push(axis.beta(i, j));
        }
        g.row_start.push(g.col.len());

        g.boundary.push(if i == 0 {
            side_tag(left, [-1.0])
        } else if i == n - 1 {
            side_tag(right, [1.0])
        } else {
            NodeBoundary::Interior
        });
    }
    fill_bij(&mut g);
    Ok(g.finish())
}

fn side_tag<const D: usize>(bc: SideBc, normal: [f64; D]) -> NodeBoundary<D> {
    match bc {
        SideBc::Dirichlet => NodeBoundary::Dirichlet,
        SideBc::Slip => NodeBoundary::Slip {
            normals: vec![normal],
        },
    }
}

fn fill_bij<const D: usize>(g: &mut GraphCoefficients<D>) {
    g.bij = g
        .col
        .iter()
        .zip(&g.mij)
        .map(|(j, mij)| -mij / g.lumped_mass[*j as usize])
        .collect();
}

/// Per-side boundary kinds of the 2D box, in (west, east, south, north) order.
#[derive(Clone, Copy, Debug)]
pub struct BoxBc {
    pub west: SideBc,
    pub east: SideBc,
    pub south: SideBc,
    pub north: SideBc,
}

impl BoxBc {
    pub fn all(bc: SideBc) -> Self {
        BoxBc {
            west: bc,
            east: bc,
            south: bc,
            north: bc,
        }
    }
}

/// Uniform bilinear discretization of the box (x_lo, x_hi) x (y_lo, y_hi)
/// with nx x ny cells. Coefficients are tensor products of the 1D tables.
pub fn build_2d(
    nx: usize,
    ny: usize,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
    bc: BoxBc,
) -> Result<GraphCoefficients<2>> {
    if nx < 2 || ny < 2 {
        return Err(Error::invalid("need at least 2 cells per direction"));
    }
    if !(x_hi > x_lo) || !(y_hi > y_lo) {
        return Err(Error::invalid("degenerate box"));
    }
    let (nxn, nyn) = (nx + 1, ny + 1);
    let n = nxn * nyn;
    let ax = Axis {
        n_nodes: nxn,
        h: (x_hi - x_lo) / nx as f64,
    };
    let ay = Axis {
        n_nodes: nyn,
        h: (y_hi - y_lo) / ny as f64,
    };

    let mut g = GraphCoefficients::<2> {
        n_nodes: n,
        coords: Vec::with_capacity(n),
        lumped_mass: Vec::with_capacity(n),
        domain_measure: (x_hi - x_lo) * (y_hi - y_lo),
        row_start: Vec::with_capacity(n + 1),
        col: Vec::new(),
        cij: Vec::new(),
        mij: Vec::new(),
        bij: Vec::new(),
        betaij: Vec::new(),
        cii: Vec::with_capacity(n),
        mii: Vec::with_capacity(n),
        betaii: Vec::with_capacity(n),
        boundary: Vec::with_capacity(n),
        pairs: Vec::new(),
        entry_pair: Vec::new(),
    };

    let entry = |i1: usize, j1: usize, i2: usize, j2: usize| -> ([f64; 2], f64, f64) {
        let mx = ax.mass(i1, j1);
        let my = ay.mass(i2, j2);
        let c = [ax.c(i1, j1) * my, mx * ay.c(i2, j2)];
        let m = mx * my;
        let beta = ax.beta(i1, j1) * my + mx * ay.beta(i2, j2);
        (c, m, beta)
    };

    g.row_start.push(0);
    for i2 in 0..nyn {
        for i1 in 0..nxn {
            g.coords.push([x_lo + i1 as f64 * ax.h, y_lo + i2 as f64 * ay.h]);
            g.lumped_mass.push(ax.lumped(i1) * ay.lumped(i2));
            let (c, m, beta) = entry(i1, i1, i2, i2);
            g.cii.push(c);
            g.mii.push(m);
            g.betaii.push(beta);

            for j2 in i2.saturating_sub(1)..=(i2 + 1).min(nyn - 1) {
                for j1 in i1.saturating_sub(1)..=(i1 + 1).min(nxn - 1) {
                    if j1 == i1 && j2 == i2 {
                        continue;
                    }
                    let (c, m, beta) = entry(i1, j1, i2, j2);
                    g.col.push((j2 * nxn + j1) as u32);
                    g.cij.push(c);
                    g.mij.push(m);
                    g.betaij.push(beta);
                }
            }
            g.row_start.push(g.col.len());

            // boundary classification: Dirichlet wins at corners
            let mut sides: Vec<(SideBc, [f64; 2])> = Vec::new();
            if i1 == 0 {
                sides.push((bc.west, [-1.0, 0.0]));
            }
            if i1 == nxn - 1 {
                sides.push((bc.east, [1.0, 0.0]));
            }
            if i2 == 0 {
                sides.push((bc.south, [0.0, -1.0]));
            }
            if i2 == nyn - 1 {
                sides.push((bc.north, [0.0, 1.0]));
            }
            let tag = if sides.is_empty() {
                NodeBoundary::Interior
            } else if sides.iter().any(|(k, _)| *k == SideBc::Dirichlet) {
                NodeBoundary::Dirichlet
            } else {
                NodeBoundary::Slip {
                    normals: sides.into_iter().map(|(_, n)| n).collect(),
                }
            };
            g.boundary.push(tag);
        }
    }
    fill_bij(&mut g);
    Ok(g.finish())
}
