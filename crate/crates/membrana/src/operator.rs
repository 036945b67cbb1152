//! Sparse finite-difference operators for `-d Δ + c` with Neumann, Robin,
//! Dirichlet and membrane boundary rows.
//!
//! All boundary conditions are imposed by second-order ghost-point
//! elimination, so boundary rows collocate the differential equation at the
//! endpoint and the whole operator is consistent at `O(h^2)`. Off-diagonal
//! entries are nonpositive and row sums reproduce the zeroth-order
//! coefficient, which keeps shifted matrices M-matrices; principal
//! eigenfunctions and monotone iterations rely on that sign structure.
//!
//! Membrane orientation: with `n_1`, `n_2` the outward normals of the inner
//! and outer region, the interface rows discretize
//! `∂_{n_1} u_1 = gamma_1 (u_2 - u_1)` and `∂_{n_2} u_2 = gamma_2 (u_1 - u_2)`
//! at each interface point. Both flux conditions are stated along each side's
//! own outward normal; equivalently, along the fixed normal `nu = n_1`, the
//! outer condition reads `∂_nu u_2 = gamma_2 (u_2 - u_1)`.

use crate::band::BandMatrix;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, RegionSel};

/// Endpoint condition of a segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BcKind {
    Neumann,
    /// `∂_n φ + g φ = 0` with `g` the (outward) Robin coefficient.
    Robin(f64),
    /// Identity row; the caller moves the boundary value to the right-hand side.
    Dirichlet(f64),
    /// Flux-jump coupling; only valid in the interface assembly.
    Membrane,
}

/// Conditions at the interface points (`sigma`) and at the outer boundary
/// (`gamma`) for scalar assemblies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundarySpec {
    pub sigma: BcKind,
    pub gamma: BcKind,
}

impl BoundarySpec {
    pub fn all_neumann() -> Self {
        BoundarySpec {
            sigma: BcKind::Neumann,
            gamma: BcKind::Neumann,
        }
    }

    pub fn robin_sigma(g: f64) -> Self {
        BoundarySpec {
            sigma: BcKind::Robin(g),
            gamma: BcKind::Neumann,
        }
    }

    pub fn dirichlet_sigma(value: f64) -> Self {
        BoundarySpec {
            sigma: BcKind::Dirichlet(value),
            gamma: BcKind::Neumann,
        }
    }
}

/// Row-compressed sparse operator.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
    /// Dirichlet identity rows, with the boundary value the caller owes the
    /// right-hand side.
    pub dirichlet: Vec<(usize, f64)>,
    /// Membrane rows are nonsymmetric whenever `gamma_1 != gamma_2`.
    pub symmetric: bool,
}

impl SparseOperator {
    pub fn new(dim: usize) -> Self {
        SparseOperator {
            dim,
            rows: vec![Vec::new(); dim],
            dirichlet: Vec::new(),
            symmetric: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.dim && j < self.dim);
        let row = &mut self.rows[i];
        match row.binary_search_by(|&(c, _)| c.cmp(&j)) {
            Ok(p) => row[p].1 += v,
            Err(p) => row.insert(p, (j, v)),
        }
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|&&(c, _)| c == i)
            .map(|&(_, v)| v)
            .unwrap_or(0.0)
    }

    /// Exact sparse mat-vec.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
                context: "operator apply",
            });
        }
        let mut y = vec![0.0; self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            let mut s = 0.0;
            for &(j, v) in row {
                s += v * x[j];
            }
            y[i] = s;
        }
        Ok(y)
    }

    /// Row sums; equals the zeroth-order coefficient for pure flux rows.
    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, v)| v).sum()
    }

    pub fn min_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row_sum(i))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn inf_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Band conversion of `A - shift I`.
    pub fn to_band_shifted(&self, shift: f64) -> BandMatrix {
        let mut kl = 0usize;
        let mut ku = 0usize;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, _) in row {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        let mut band = BandMatrix::zeros(self.dim, kl, ku);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                band.add(i, j, v);
            }
            band.add(i, i, -shift);
        }
        band
    }

    /// Clone of `A + diag(extra)`.
    pub fn plus_diag(&self, extra: &[f64]) -> SparseOperator {
        assert_eq!(extra.len(), self.dim);
        let mut op = self.clone();
        for (i, &v) in extra.iter().enumerate() {
            if v != 0.0 {
                op.add(i, i, v);
            }
        }
        op
    }

    /// Band form of `A + diag(extra)`.
    pub fn to_band_with_diag(&self, extra: &[f64]) -> BandMatrix {
        assert_eq!(extra.len(), self.dim);
        let mut kl = 0usize;
        let mut ku = 0usize;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, _) in row {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        let mut band = BandMatrix::zeros(self.dim, kl, ku);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                band.add(i, j, v);
            }
            band.add(i, i, extra[i]);
        }
        band
    }

    /// Restriction to the index set `keep` (rows and columns); Dirichlet
    /// bookkeeping is remapped into the restricted index space.
    pub fn restrict(&self, keep: &[usize]) -> SparseOperator {
        let mut back = vec![usize::MAX; self.dim];
        for (new, &old) in keep.iter().enumerate() {
            back[old] = new;
        }
        let mut op = SparseOperator::new(keep.len());
        for (new, &old) in keep.iter().enumerate() {
            for &(j, v) in &self.rows[old] {
                if back[j] != usize::MAX {
                    op.add(new, back[j], v);
                }
            }
        }
        op.dirichlet = self
            .dirichlet
            .iter()
            .filter(|&&(i, _)| back[i] != usize::MAX)
            .map(|&(i, v)| (back[i], v))
            .collect();
        op.symmetric = self.symmetric;
        op
    }

    #[cfg(any(test, feature = "oracle"))]
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.dim]; self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[i][j] = v;
            }
        }
        m
    }
}

/// Ghost-eliminated flux row at a segment endpoint.
///
/// `neighbor` is the node one step inward; `g` is the Robin coefficient
/// along the outward normal (`0` for Neumann).
fn flux_row(op: &mut SparseOperator, node: usize, neighbor: usize, d: f64, h: f64, g: f64, c: f64) {
    op.add(node, node, 2.0 * d / (h * h) + 2.0 * d * g / h + c);
    op.add(node, neighbor, -2.0 * d / (h * h));
}

fn interior_row(op: &mut SparseOperator, node: usize, d: f64, h: f64, c: f64) {
    op.add(node, node - 1, -d / (h * h));
    op.add(node, node, 2.0 * d / (h * h) + c);
    op.add(node, node + 1, -d / (h * h));
}

/// One uniformly spaced segment with its endpoint conditions; `off` is the
/// field offset of the segment's first node.
#[allow(clippy::too_many_arguments)]
fn assemble_segment(
    op: &mut SparseOperator,
    off: usize,
    n_cells: usize,
    h: f64,
    d: f64,
    c: &[f64],
    left: BcKind,
    right: BcKind,
) -> Result<()> {
    for k in 1..n_cells {
        interior_row(op, off + k, d, h, c[off + k]);
    }
    for (node, neighbor, bc) in [
        (off, off + 1, left),
        (off + n_cells, off + n_cells - 1, right),
    ] {
        match bc {
            BcKind::Neumann => flux_row(op, node, neighbor, d, h, 0.0, c[node]),
            BcKind::Robin(g) => flux_row(op, node, neighbor, d, h, g, c[node]),
            BcKind::Dirichlet(v) => {
                op.add(node, node, 1.0);
                op.dirichlet.push((node, v));
            }
            BcKind::Membrane => return Err(Error::MembraneInScalarAssembly),
        }
    }
    Ok(())
}

fn check_field(c: &[f64], expected: usize, context: &'static str) -> Result<()> {
    if c.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: c.len(),
            context,
        });
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig(format!("non-finite entry in {context}")));
    }
    Ok(())
}

/// Scalar operator `-d Δ + c` on one region.
///
/// For `Omega_1` both endpoints are interface points and take `bc.sigma`;
/// for `Omega_2` each component takes `bc.sigma` at the interface end and
/// `bc.gamma` at the outer end; for the whole habitat only `bc.gamma`
/// applies (the membrane is invisible to the third species) and interface
/// nodes are regular interior nodes, with the local spacings on either side.
pub fn assemble_scalar(
    mesh: &Mesh,
    region: RegionSel,
    d: f64,
    c: &[f64],
    bc: &BoundarySpec,
) -> Result<SparseOperator> {
    check_field(c, mesh.field_len(region), "scalar coefficient")?;
    match region {
        RegionSel::Omega1 => {
            let seg = &mesh.segments[1];
            let mut op = SparseOperator::new(mesh.n1());
            assemble_segment(&mut op, 0, seg.n_cells, seg.h, d, c, bc.sigma, bc.sigma)?;
            Ok(op)
        }
        RegionSel::Omega2 => {
            let (ls, rs) = (&mesh.segments[0], &mesh.segments[2]);
            let nl = ls.n_nodes();
            let mut op = SparseOperator::new(mesh.n2());
            // left component: outer end first, interface end last
            assemble_segment(&mut op, 0, ls.n_cells, ls.h, d, c, bc.gamma, bc.sigma)?;
            // right component: interface end first, outer end last
            assemble_segment(&mut op, nl, rs.n_cells, rs.h, d, c, bc.sigma, bc.gamma)?;
            Ok(op)
        }
        RegionSel::Omega => {
            if matches!(bc.gamma, BcKind::Membrane) || matches!(bc.sigma, BcKind::Membrane) {
                return Err(Error::MembraneInScalarAssembly);
            }
            let nv = mesh.nv();
            let mut op = SparseOperator::new(nv);
            // cell widths of the single-valued grid
            let mut hs = Vec::with_capacity(nv - 1);
            for seg in &mesh.segments {
                hs.extend(std::iter::repeat(seg.h).take(seg.n_cells));
            }
            for j in 1..nv - 1 {
                let hm = hs[j - 1];
                let hp = hs[j];
                op.add(j, j - 1, -2.0 * d / (hm * (hm + hp)));
                op.add(j, j, 2.0 * d / (hm * hp) + c[j]);
                op.add(j, j + 1, -2.0 * d / (hp * (hm + hp)));
            }
            for (node, neighbor, h) in [(0usize, 1usize, hs[0]), (nv - 1, nv - 2, hs[nv - 2])] {
                match bc.gamma {
                    BcKind::Neumann => flux_row(&mut op, node, neighbor, d, h, 0.0, c[node]),
                    BcKind::Robin(g) => flux_row(&mut op, node, neighbor, d, h, g, c[node]),
                    BcKind::Dirichlet(v) => {
                        op.add(node, node, 1.0);
                        op.dirichlet.push((node, v));
                    }
                    BcKind::Membrane => unreachable!(),
                }
            }
            Ok(op)
        }
    }
}

/// Membrane-coupled block operator over the duplicated grid.
///
/// Interface rows collocate the equation at the interface node with the
/// ghost value eliminated through the flux-jump condition, producing the
/// coupling entries `-2 d gamma_i / h` toward the opposite side. Outer
/// boundary rows are homogeneous Neumann.
pub fn assemble_interface(mesh: &Mesh, d: f64, c1: &[f64], c2: &[f64]) -> Result<SparseOperator> {
    check_field(c1, mesh.n1(), "inner coefficient")?;
    check_field(c2, mesh.n2(), "outer coefficient")?;
    let g1 = mesh.geom.gamma1;
    let g2 = mesh.geom.gamma2;
    let (ls, ms, rs) = (&mesh.segments[0], &mesh.segments[1], &mesh.segments[2]);
    let nl = ls.n_nodes();
    let mut op = SparseOperator::new(mesh.n_total());
    op.symmetric = false;

    let cval = |gi: usize| -> f64 {
        if gi >= ms.start && gi < ms.start + ms.n_nodes() {
            c1[gi - ms.start]
        } else if gi < nl {
            c2[gi]
        } else {
            c2[nl + (gi - rs.start)]
        }
    };

    for seg in [ls, ms, rs] {
        for k in 1..seg.n_cells {
            let gi = seg.start + k;
            interior_row(&mut op, gi, d, seg.h, cval(gi));
        }
    }

    // outer boundary: homogeneous Neumann
    flux_row(&mut op, ls.start, ls.start + 1, d, ls.h, 0.0, cval(ls.start));
    let rend = rs.start + rs.n_cells;
    flux_row(&mut op, rend, rend - 1, d, rs.h, 0.0, cval(rend));

    // membrane rows: (node, inward neighbor, opposite side, h, gamma)
    let pairs = [
        (mesh.u1_at_a, mesh.u1_at_a + 1, mesh.u2_at_a, ms.h, g1),
        (mesh.u1_at_b, mesh.u1_at_b - 1, mesh.u2_at_b, ms.h, g1),
        (mesh.u2_at_a, mesh.u2_at_a - 1, mesh.u1_at_a, ls.h, g2),
        (mesh.u2_at_b, mesh.u2_at_b + 1, mesh.u1_at_b, rs.h, g2),
    ];
    for (node, neighbor, opposite, h, gamma) in pairs {
        flux_row(&mut op, node, neighbor, d, h, gamma, cval(node));
        op.add(node, opposite, -2.0 * d * gamma / h);
    }
    Ok(op)
}

/// Whole-habitat potential built from per-region contributions.
///
/// `on1` and `on2` are nodal values on the inner and outer grids (already
/// scaled by their couplings); the two interface nodes of the single-valued
/// grid receive the average of the one-sided values, which is the consistent
/// collocation of a jumping coefficient.
pub fn whole_domain_potential(mesh: &Mesh, on1: &[f64], on2: &[f64]) -> Vec<f64> {
    assert_eq!(on1.len(), mesh.n1());
    assert_eq!(on2.len(), mesh.n2());
    let mut out = vec![0.0; mesh.nv()];
    for (local, &v) in on2.iter().enumerate() {
        out[mesh.v_index_of(RegionSel::Omega2, local)] = v;
    }
    for (local, &v) in on1.iter().enumerate() {
        out[mesh.v_index_of(RegionSel::Omega1, local)] = v;
    }
    let nl = mesh.segments[0].n_nodes();
    out[mesh.v_at_a] = 0.5 * (on1[0] + on2[nl - 1]);
    out[mesh.v_at_b] = 0.5 * (on1[mesh.n1() - 1] + on2[nl]);
    out
}
