//! 1D domain with an interior membrane interface, and uniform meshes over it.
//!
//! The habitat is a segment `(x_left, x_right)` split by the two interface
//! points `a < b` into an inner region `Omega_1 = (a, b)` and an outer region
//! `Omega_2 = (x_left, a) ∪ (b, x_right)` (two components). The interface is
//! `Sigma = {a, b}`, the outer boundary `Gamma = {x_left, x_right}`.
//!
//! One dimension is a modeling choice, not a necessity of the theory: it is
//! the smallest geometry in which the interface is the full boundary of the
//! inner region, at the price of a disconnected outer region (a connected
//! outer region requires two dimensions).
//!
//! The inner and outer densities are distinct fields coupled only through
//! flux-jump conditions at `Sigma`, so the mesh duplicates the interface
//! nodes: each of `a` and `b` carries one unknown per side. A second,
//! single-valued grid (`v_nodes`) covers the whole habitat for the species
//! living everywhere.

use crate::error::{Error, Result};

/// Which region a mesh node belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    Omega1,
    Omega2,
}

/// Where a nodal field lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegionSel {
    Omega1,
    Omega2,
    /// The whole habitat (single-valued grid, used by the third species).
    Omega,
}

/// Segment layout of the habitat with membrane permeabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geometry1D {
    pub x_left: f64,
    pub x_right: f64,
    /// Left interface point; `Omega_1 = (a, b)`.
    pub a: f64,
    pub b: f64,
    /// Permeability of the inner-side flux condition at the membrane.
    pub gamma1: f64,
    /// Permeability of the outer-side flux condition at the membrane.
    pub gamma2: f64,
}

impl Geometry1D {
    pub fn new(outer: (f64, f64), inner: (f64, f64), gamma1: f64, gamma2: f64) -> Result<Self> {
        let g = Geometry1D {
            x_left: outer.0,
            x_right: outer.1,
            a: inner.0,
            b: inner.1,
            gamma1,
            gamma2,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let ok_order = self.x_left < self.a && self.a < self.b && self.b < self.x_right;
        if !ok_order {
            return Err(Error::InvalidGeometry(format!(
                "need x_left < a < b < x_right, got {} < {} < {} < {}",
                self.x_left, self.a, self.b, self.x_right
            )));
        }
        if !(self.gamma1 > 0.0 && self.gamma2 > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "permeabilities must be positive, got gamma1={}, gamma2={}",
                self.gamma1, self.gamma2
            )));
        }
        for v in [self.x_left, self.x_right, self.a, self.b, self.gamma1, self.gamma2] {
            if !v.is_finite() {
                return Err(Error::InvalidGeometry("non-finite geometry value".into()));
            }
        }
        Ok(())
    }

    /// `(|Omega_1|, |Omega_2|)` by exact segment-length arithmetic.
    pub fn measures(&self) -> (f64, f64) {
        let m1 = self.b - self.a;
        let m2 = (self.a - self.x_left) + (self.x_right - self.b);
        (m1, m2)
    }

    pub fn measure_omega(&self) -> f64 {
        self.x_right - self.x_left
    }

    /// Canonical test geometry: unit habitat, inner third, gamma = (1, 2).
    pub fn canonical() -> Self {
        Geometry1D {
            x_left: 0.0,
            x_right: 1.0,
            a: 1.0 / 3.0,
            b: 2.0 / 3.0,
            gamma1: 1.0,
            gamma2: 2.0,
        }
    }
}

/// One uniformly meshed segment of the habitat.
#[derive(Clone, Copy, Debug)]
pub struct Segment {
    /// Offset of the segment's first node in the duplicated grid.
    pub start: usize,
    /// Number of cells; the segment has `n_cells + 1` nodes.
    pub n_cells: usize,
    pub h: f64,
    pub x0: f64,
    pub region: Region,
}

impl Segment {
    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn coord(&self, local: usize) -> f64 {
        self.x0 + local as f64 * self.h
    }
}

/// Uniform mesh with duplicated interface nodes and a single-valued grid
/// for whole-habitat fields.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub geom: Geometry1D,
    /// `[left(Omega_2), mid(Omega_1), right(Omega_2)]` in coordinate order.
    pub segments: [Segment; 3],
    /// Duplicated grid: left nodes, then mid nodes, then right nodes.
    pub nodes: Vec<f64>,
    pub region: Vec<Region>,
    /// Trapezoid quadrature weights on the duplicated grid.
    pub weights: Vec<f64>,
    /// Global indices of the four interface node slots.
    pub u1_at_a: usize,
    pub u1_at_b: usize,
    pub u2_at_a: usize,
    pub u2_at_b: usize,
    /// Single-valued grid over the whole habitat.
    pub v_nodes: Vec<f64>,
    pub v_weights: Vec<f64>,
    pub v_at_a: usize,
    pub v_at_b: usize,
    /// Map from duplicated-grid index to the single-valued grid.
    pub u_to_v: Vec<usize>,
}

/// Number of cells so that the spacing is at most `1/n_per_unit`.
///
/// Commensurate lengths (integral `len * n_per_unit`, as in the shipped
/// configs) honor exact halving of `h` when `n_per_unit` doubles.
fn cells_for(len: f64, n_per_unit: u32) -> usize {
    let x = len * n_per_unit as f64;
    let r = x.round();
    let n = if (x - r).abs() < 1e-9 { r as usize } else { x.ceil() as usize };
    n.max(2)
}

/// Builds the three-segment mesh. Rejects degenerate geometry and
/// `n_per_unit < 8`.
pub fn build_mesh(geom: &Geometry1D, n_per_unit: u32) -> Result<Mesh> {
    geom.validate()?;
    if n_per_unit < 8 {
        return Err(Error::InvalidConfig(format!(
            "n_per_unit must be at least 8, got {n_per_unit}"
        )));
    }

    let spans = [
        (geom.x_left, geom.a, Region::Omega2),
        (geom.a, geom.b, Region::Omega1),
        (geom.b, geom.x_right, Region::Omega2),
    ];

    let mut segments = Vec::with_capacity(3);
    let mut nodes = Vec::new();
    let mut region = Vec::new();
    let mut weights = Vec::new();
    for &(x0, x1, reg) in &spans {
        let len = x1 - x0;
        let n_cells = cells_for(len, n_per_unit);
        let h = len / n_cells as f64;
        let start = nodes.len();
        for k in 0..=n_cells {
            // pin the segment ends to the exact geometry coordinates
            let x = if k == n_cells { x1 } else { x0 + k as f64 * h };
            nodes.push(x);
            region.push(reg);
            let w = if k == 0 || k == n_cells { 0.5 * h } else { h };
            weights.push(w);
        }
        segments.push(Segment {
            start,
            n_cells,
            h,
            x0,
            region: reg,
        });
    }
    let segments: [Segment; 3] = [segments[0], segments[1], segments[2]];

    let u2_at_a = segments[0].start + segments[0].n_cells;
    let u1_at_a = segments[1].start;
    let u1_at_b = segments[1].start + segments[1].n_cells;
    let u2_at_b = segments[2].start;

    // single-valued grid: merge the duplicated interface nodes
    let mut v_nodes = Vec::new();
    let mut v_weights = Vec::new();
    let mut u_to_v = vec![0usize; nodes.len()];
    for (si, seg) in segments.iter().enumerate() {
        for k in 0..=seg.n_cells {
            let gi = seg.start + k;
            if si > 0 && k == 0 {
                // same coordinate as the previous segment's last node
                let vi = v_nodes.len() - 1;
                u_to_v[gi] = vi;
                v_weights[vi] += weights[gi];
            } else {
                u_to_v[gi] = v_nodes.len();
                v_nodes.push(nodes[gi]);
                v_weights.push(weights[gi]);
            }
        }
    }
    let v_at_a = u_to_v[u2_at_a];
    let v_at_b = u_to_v[u1_at_b];

    Ok(Mesh {
        geom: *geom,
        segments,
        nodes,
        region,
        weights,
        u1_at_a,
        u1_at_b,
        u2_at_a,
        u2_at_b,
        v_nodes,
        v_weights,
        v_at_a,
        v_at_b,
        u_to_v,
    })
}

impl Mesh {
    /// Node count of the inner-region field.
    pub fn n1(&self) -> usize {
        self.segments[1].n_nodes()
    }

    /// Node count of the outer-region field (both components).
    pub fn n2(&self) -> usize {
        self.segments[0].n_nodes() + self.segments[2].n_nodes()
    }

    /// Node count of the whole-habitat field.
    pub fn nv(&self) -> usize {
        self.v_nodes.len()
    }

    /// Total duplicated-grid size (`n1 + n2`).
    pub fn n_total(&self) -> usize {
        self.nodes.len()
    }

    pub fn field_len(&self, region: RegionSel) -> usize {
        match region {
            RegionSel::Omega1 => self.n1(),
            RegionSel::Omega2 => self.n2(),
            RegionSel::Omega => self.nv(),
        }
    }

    /// Global duplicated-grid index of a region-local node.
    ///
    /// `Omega_2` fields are ordered left component then right component.
    pub fn global_index(&self, region: RegionSel, local: usize) -> usize {
        match region {
            RegionSel::Omega1 => self.segments[1].start + local,
            RegionSel::Omega2 => {
                let nl = self.segments[0].n_nodes();
                if local < nl {
                    self.segments[0].start + local
                } else {
                    self.segments[2].start + (local - nl)
                }
            }
            RegionSel::Omega => panic!("Omega fields index the single-valued grid"),
        }
    }

    /// Coordinates of the nodes carrying a field on `region`.
    pub fn coords(&self, region: RegionSel) -> Vec<f64> {
        match region {
            RegionSel::Omega => self.v_nodes.clone(),
            _ => (0..self.field_len(region))
                .map(|i| self.nodes[self.global_index(region, i)])
                .collect(),
        }
    }

    /// Quadrature weights for a field on `region`.
    pub fn quad_weights(&self, region: RegionSel) -> Vec<f64> {
        match region {
            RegionSel::Omega => self.v_weights.clone(),
            _ => (0..self.field_len(region))
                .map(|i| self.weights[self.global_index(region, i)])
                .collect(),
        }
    }

    /// Trapezoid quadrature of a nodal field over its region.
    pub fn integrate(&self, region: RegionSel, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.field_len(region));
        self.quad_weights(region)
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum()
    }

    /// v-grid index under each node of a region-local field.
    pub fn v_index_of(&self, region: RegionSel, local: usize) -> usize {
        self.u_to_v[self.global_index(region, local)]
    }
}

/// Convenience: `measures` as a free function mirroring the geometry method.
pub fn measures(geom: &Geometry1D) -> (f64, f64) {
    geom.measures()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_mesh_layout() {
        let g = Geometry1D::canonical();
        let mesh = build_mesh(&g, 96).unwrap();
        assert_eq!(mesh.segments.len(), 3);
        for seg in &mesh.segments {
            assert!((seg.h - 1.0 / 96.0).abs() < 1e-15, "h = {}", seg.h);
        }
        // four interface node slots, coordinates exact
        assert_eq!(mesh.nodes[mesh.u1_at_a], g.a);
        assert_eq!(mesh.nodes[mesh.u2_at_a], g.a);
        assert_eq!(mesh.nodes[mesh.u1_at_b], g.b);
        assert_eq!(mesh.nodes[mesh.u2_at_b], g.b);
        let (m1, m2) = g.measures();
        assert!((m1 - 1.0 / 3.0).abs() < 1e-15);
        assert!((m2 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_geometry_rejected() {
        assert!(Geometry1D::new((0.0, 1.0), (0.0, 0.5), 1.0, 1.0).is_err());
        assert!(Geometry1D::new((0.0, 1.0), (0.6, 0.4), 1.0, 1.0).is_err());
        assert!(Geometry1D::new((0.0, 1.0), (0.2, 0.8), -1.0, 1.0).is_err());
        let g = Geometry1D {
            a: 0.0,
            ..Geometry1D::canonical()
        };
        assert!(build_mesh(&g, 96).is_err());
    }

    #[test]
    fn small_n_per_unit_rejected() {
        assert!(build_mesh(&Geometry1D::canonical(), 7).is_err());
    }

    #[test]
    fn measures_examples() {
        let g = Geometry1D::new((0.0, 2.0), (0.5, 1.0), 1.0, 1.0).unwrap();
        let (m1, m2) = g.measures();
        assert_eq!(m1, 0.5);
        assert_eq!(m2, 1.5);
        // symmetric inner interval: outer measure split equally
        let g = Geometry1D::new((0.0, 1.0), (0.3, 0.7), 1.0, 1.0).unwrap();
        assert!((g.a - g.x_left) - (g.x_right - g.b) < 1e-15);
    }

    #[test]
    fn quadrature_of_one_recovers_measures() {
        let g = Geometry1D::canonical();
        let mesh = build_mesh(&g, 96).unwrap();
        let (m1, m2) = g.measures();
        let one1 = vec![1.0; mesh.n1()];
        let one2 = vec![1.0; mesh.n2()];
        let onev = vec![1.0; mesh.nv()];
        assert!((mesh.integrate(RegionSel::Omega1, &one1) - m1).abs() < 1e-14);
        assert!((mesh.integrate(RegionSel::Omega2, &one2) - m2).abs() < 1e-14);
        assert!((mesh.integrate(RegionSel::Omega, &onev) - g.measure_omega()).abs() < 1e-14);
    }

    #[test]
    fn doubling_resolution_halves_h() {
        let g = Geometry1D::canonical();
        let coarse = build_mesh(&g, 96).unwrap();
        let fine = build_mesh(&g, 192).unwrap();
        for (c, f) in coarse.segments.iter().zip(fine.segments.iter()) {
            assert_eq!(c.h, 2.0 * f.h);
        }
    }

    #[test]
    fn interface_duplication_is_exact() {
        let g = Geometry1D::new((0.0, 2.0), (0.5, 1.25), 0.7, 1.3).unwrap();
        let mesh = build_mesh(&g, 16).unwrap();
        for x in [g.a, g.b] {
            let count = mesh.nodes.iter().filter(|&&y| y == x).count();
            assert_eq!(count, 2, "interface coordinate {x} duplicated");
            let vcount = mesh.v_nodes.iter().filter(|&&y| y == x).count();
            assert_eq!(vcount, 1);
        }
    }

    proptest! {
        #[test]
        fn mesh_invariants_hold(
            la in 1usize..6,
            lm in 1usize..6,
            lr in 1usize..6,
            npu in 8u32..64,
        ) {
            // segment lengths in eighths keep len * n_per_unit integral
            let a = la as f64 / 8.0;
            let b = a + lm as f64 / 8.0;
            let xr = b + lr as f64 / 8.0;
            let g = Geometry1D::new((0.0, xr), (a, b), 1.0, 1.0).unwrap();
            let mesh = build_mesh(&g, npu * 8).unwrap();
            // strictly increasing within each segment
            for seg in &mesh.segments {
                for k in 1..=seg.n_cells {
                    prop_assert!(mesh.nodes[seg.start + k] > mesh.nodes[seg.start + k - 1]);
                }
                prop_assert!(seg.h <= 1.0 / (npu * 8) as f64 + 1e-12);
            }
            let (m1, m2) = g.measures();
            let one1 = vec![1.0; mesh.n1()];
            let one2 = vec![1.0; mesh.n2()];
            prop_assert!((mesh.integrate(RegionSel::Omega1, &one1) - m1).abs() < 1e-12);
            prop_assert!((mesh.integrate(RegionSel::Omega2, &one2) - m2).abs() < 1e-12);
        }
    }
}
